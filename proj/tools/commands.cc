#include "commands.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "gbst/csv.h"
#include "gbst/dataio.h"
#include "gbst/error.h"
#include "gbst/file_util.h"
#include "gbst/model_io.h"

namespace gbst::cli {

namespace fs = std::filesystem;

namespace {

std::string Shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string Fixed6(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  os << v;
  return os.str();
}

std::string InDir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

bool HasColumn(const CsvTable& csv, const std::string& name) {
  return std::find(csv.header.begin(), csv.header.end(), name) != csv.header.end();
}

// schema for a training table: the id column, when present, never becomes a feature
TableSchema TrainingSchema(const CsvTable& csv, const ColumnOptions& c) {
  TableSchema s;
  s.time_column = c.time_column;
  s.event_column = c.event_column;
  for (const auto& name : c.ignore) s.declared[name] = ColumnKind::kIgnore;
  for (const auto& name : c.categorical) s.declared[name] = ColumnKind::kCategorical;
  for (const auto& name : c.numeric) s.declared[name] = ColumnKind::kNumeric;
  if (!c.id_column.empty() && HasColumn(csv, c.id_column) && !s.declared.count(c.id_column)) {
    s.declared[c.id_column] = ColumnKind::kIgnore;
  }
  return s;
}

// schema for scoring tables: planned columns keep the kinds they had at training time
TableSchema ScoringSchema(const PreprocessPlan& plan, bool require_labels) {
  TableSchema s;
  s.time_column = plan.time_column;
  s.event_column = plan.event_column;
  s.require_labels = require_labels;
  for (const auto& f : plan.numeric) s.declared[f.name] = ColumnKind::kNumeric;
  for (const auto& f : plan.categorical) s.declared[f.name] = ColumnKind::kCategorical;
  return s;
}

RawTable LoadScoringTable(const std::string& path, const PreprocessPlan& plan, bool require_labels) {
  return LoadTable(path, ScoringSchema(plan, require_labels));
}

void CheckCompatible(const BoosterModel& model, const PreprocessPlan& plan) {
  if (model.feature_names != plan.FeatureNames()) {
    throw DataError("model and preprocess plan disagree on the feature columns");
  }
}

std::string LossTraceCsv(const BoosterModel& model) {
  std::string out = "iteration,loss\n0," + Fixed6(model.initial_loss) + "\n";
  for (std::size_t m = 0; m < model.loss_trace.size(); ++m) {
    out += std::to_string(m + 1) + "," + Fixed6(model.loss_trace[m]) + "\n";
  }
  return out;
}

struct PreparedTraining {
  PreprocessPlan plan;
  SurvivalDataset data;
};

PreparedTraining PrepareTraining(const TrainOptions& o) {
  CsvTable csv = ReadCsv(o.data);
  RawTable table = TypeTable(csv, TrainingSchema(csv, o.columns));
  PreparedTraining out;
  out.plan = BuildPlan(table, PlanConfig{o.missing_threshold, o.time_unit});
  if (out.plan.width() == 0) throw DataError("no feature columns left after preprocessing");
  out.data = MakeDataset(out.plan, table, o.grid.Build());
  return out;
}

// Fit with an optional validation-loss patience stop. The returned model is
// cut back to the iteration with the lowest validation loss.
BoosterModel FitWithValidation(const TrainOptions& o, const PreparedTraining& train) {
  if (o.valid_data.empty() || o.patience <= 0) {
    return Fit(train.data, o.booster, [&](int iteration, const BoosterModel& m) {
      if (o.verbose) std::cerr << "iteration " << iteration << " loss " << m.loss_trace.back() << "\n";
      return true;
    });
  }
  RawTable valid_table = LoadScoringTable(o.valid_data, train.plan, true);
  SurvivalDataset valid = MakeDataset(train.plan, valid_table, train.data.grid);
  Matrix margins(valid.size(), valid.periods());
  bool initialized = false;
  double best = 0.0;
  std::size_t best_trees = 0;
  auto model = Fit(train.data, o.booster, [&](int iteration, const BoosterModel& m) {
    if (!initialized) {
      for (std::size_t i = 0; i < valid.size(); ++i)
        for (int j = 0; j < valid.periods(); ++j) margins(i, j) = m.base_margins[j];
      best = TotalLoss(valid, margins, 0.0, 0.0);
      initialized = true;
    }
    const auto& tree = m.trees.back();
    for (std::size_t i = 0; i < valid.size(); ++i) {
      auto w = tree.Predict(valid.features.Row(i));
      for (int j = 0; j < valid.periods(); ++j) margins(i, j) += m.params.learning_rate * w[j];
    }
    double loss = TotalLoss(valid, margins, 0.0, 0.0);
    if (o.verbose) {
      std::cerr << "iteration " << iteration << " loss " << m.loss_trace.back() << " valid " << loss << "\n";
    }
    if (loss < best) {
      best = loss;
      best_trees = m.trees.size();
    }
    return static_cast<int>(m.trees.size() - best_trees) < o.patience;
  });
  model.trees.resize(best_trees);
  model.loss_trace.resize(best_trees);
  return model;
}

}  // namespace

ObservationGrid GridOptions::Build() const {
  if (!boundaries.empty()) return ObservationGrid(boundaries);
  if (!(period_length > 0.0)) throw ParamError("period length must be positive");
  return ObservationGrid::Regular(periods, period_length);
}

void RunTrain(const TrainOptions& o) {
  o.booster.Validate();
  PreparedTraining prepared = PrepareTraining(o);
  BoosterModel model = FitWithValidation(o, prepared);

  const std::string model_path = o.model_path.empty() ? InDir(o.out_dir, "model.json") : o.model_path;
  const std::string plan_path = o.plan_path.empty() ? InDir(o.out_dir, "plan.json") : o.plan_path;
  EnsureDir(o.out_dir);
  WriteFilesAtomic({{model_path, SerializeModel(model)},
                    {plan_path, PlanToJson(prepared.plan)},
                    {InDir(o.out_dir, "loss_trace.csv"), LossTraceCsv(model)}});
  std::cerr << "trained " << model.trees.size() << " trees on " << prepared.data.size() << " records, "
            << prepared.plan.width() << " features; loss " << model.initial_loss << " -> "
            << (model.loss_trace.empty() ? model.initial_loss : model.loss_trace.back()) << "\n";
}

void RunPredict(const PredictOptions& o) {
  BoosterModel model = LoadModel(o.model_path);
  PreprocessPlan plan = PlanFromJson(ReadFile(o.plan_path));
  CheckCompatible(model, plan);
  RawTable table = LoadScoringTable(o.data, plan, false);
  Matrix features = ApplyPlan(plan, table);
  auto [hazards, survival] = PredictSurvival(model, features, o.threads);

  const RawColumn* id = o.id_column.empty() ? nullptr : table.Find(o.id_column);
  const int J = model.periods();
  std::string out = EscapeCsvField(id != nullptr ? o.id_column : "row");
  for (int j = 1; j <= J; ++j) out += ",h_" + std::to_string(j);
  for (int j = 1; j <= J; ++j) out += ",S_" + std::to_string(j);
  out += "\n";
  for (std::size_t i = 0; i < features.rows(); ++i) {
    out += id != nullptr ? EscapeCsvField(id->cells[i]) : std::to_string(i);
    for (int j = 0; j < J; ++j) out += "," + Shortest(hazards(i, j));
    for (int j = 0; j < J; ++j) out += "," + Shortest(survival(i, j));
    out += "\n";
  }
  WriteFileAtomic(o.out_path, out);
}

void RunEvaluate(const EvaluateOptions& o) {
  BoosterModel model = LoadModel(o.model_path);
  PreprocessPlan plan = PlanFromJson(ReadFile(o.plan_path));
  CheckCompatible(model, plan);
  RawTable table = LoadScoringTable(o.data, plan, true);
  SurvivalDataset data = MakeDataset(plan, table, model.grid);
  auto [hazards, survival] = PredictSurvival(model, data.features, o.threads);

  EvaluationOptions opts;
  if (o.risk_score == "expected") {
    opts.reduction = RiskReduction::kExpectedSurvival;
  } else if (o.risk_score == "horizon") {
    opts.reduction = RiskReduction::kHorizon;
    opts.horizon = o.horizon > 0 ? o.horizon : model.periods();
  } else {
    throw ParamError("unknown risk score '" + o.risk_score + "'");
  }
  if (o.period_score == "hazard") opts.period_score = PeriodScore::kHazard;
  else if (o.period_score == "cumulative") opts.period_score = PeriodScore::kCumulative;
  else throw ParamError("unknown period score '" + o.period_score + "'");
  opts.decile_periods = o.decile_periods.empty() ? std::vector<int>{model.periods()} : o.decile_periods;
  for (int p : opts.decile_periods) {
    if (p < 1 || p > model.periods()) throw ParamError("decile period " + std::to_string(p) + " is off the grid");
  }

  EvaluationReport report = Evaluate(hazards, survival, data.labels, opts);
  std::vector<std::pair<std::string, std::string>> files{
      {InDir(o.out_dir, "report.json"), ReportToJson(report)},
      {InDir(o.out_dir, "period_metrics.csv"), PeriodMetricsCsv(report)}};
  for (const auto& table_j : report.deciles) {
    files.emplace_back(InDir(o.out_dir, "deciles_period_" + std::to_string(table_j.period) + ".csv"),
                       DecileCsv(table_j));
  }
  EnsureDir(o.out_dir);
  WriteFilesAtomic(files);
  std::cout << "c_index " << Fixed6(report.c_index) << "\n";
}

void RunSynth(const SynthOptions& o) { WriteFileAtomic(o.out_path, SyntheticCsv(o.config, o.extras)); }

void RunConvergence(const ConvergenceOptions& o) {
  if (o.runs < 1) throw ParamError("runs must be positive");
  o.train.booster.Validate();
  PreparedTraining prepared = PrepareTraining(o.train);
  const int M = o.train.booster.num_trees;
  // losses[m][r]: loss after m trees in run r
  std::vector<std::vector<double>> losses(M + 1);
  for (int r = 0; r < o.runs; ++r) {
    BoosterParams p = o.train.booster;
    p.seed = o.train.booster.seed + static_cast<std::uint64_t>(r);
    BoosterModel model = Fit(prepared.data, p);
    losses[0].push_back(model.initial_loss);
    for (int m = 0; m < M; ++m) losses[m + 1].push_back(model.loss_trace[m]);
    if (o.train.verbose) std::cerr << "run " << r + 1 << "/" << o.runs << "\n";
  }
  auto quantile = [](const std::vector<double>& sorted, double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  std::string out = "iteration,runs,min,q1,median,q3,max,mean\n";
  for (int m = 0; m <= M; ++m) {
    auto v = losses[m];
    std::sort(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    out += std::to_string(m) + "," + std::to_string(v.size());
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) out += "," + Fixed6(quantile(v, q));
    out += "," + Fixed6(mean) + "\n";
  }
  WriteFileAtomic(o.out_path, out);
}

}  // namespace gbst::cli
