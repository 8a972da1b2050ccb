#include "gbst/booster.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gbst/error.h"
#include "gbst/parallel.h"

namespace gbst {

namespace {

void CheckWidth(const BoosterModel& model, std::size_t width) {
  if (width != static_cast<std::size_t>(model.num_features())) {
    std::ostringstream os;
    os << "feature width " << width << " does not match the model's " << model.num_features();
    throw DataError(os.str());
  }
}

void AccumulateMargins(const BoosterModel& model, std::span<const double> x, std::span<double> out) {
  std::copy(model.base_margins.begin(), model.base_margins.end(), out.begin());
  const double eta = model.params.learning_rate;
  for (const auto& tree : model.trees) {
    auto w = tree.Predict(x);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += eta * w[j];
  }
}

}  // namespace

void BoosterParams::Validate() const {
  if (num_trees < 0) throw ParamError("num_trees must be non-negative");
  if (max_depth < 0) throw ParamError("max_depth must be non-negative");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ParamError("learning_rate must lie in (0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParamError("lambda must be a non-negative number");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw ParamError("subsample must lie in (0, 1]");
  if (split_mode == SplitMode::kQuantile && !(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ParamError("epsilon must lie in (0, 1]");
  }
  if (std::isnan(min_gain)) throw ParamError("min_gain must be a number");
  if (min_child_count < 1) throw ParamError("min_child_count must be at least 1");
}

std::vector<std::size_t> Subsample(std::size_t n, double rate, std::mt19937_64& rng) {
  if (!(rate > 0.0 && rate <= 1.0)) throw ParamError("subsample rate must lie in (0, 1]");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (rate == 1.0) return all;
  // the small slack keeps e.g. 0.2 * 1000 at 200 despite rounding
  auto k = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, std::min<std::size_t>(1, n), n);
  std::vector<std::size_t> picked;
  picked.reserve(k);
  // selection sampling keeps the output in ascending order
  std::size_t needed = k;
  for (std::size_t i = 0; i < n && needed > 0; ++i) {
    std::uniform_int_distribution<std::size_t> dist(0, n - i - 1);
    if (dist(rng) < needed) {
      picked.push_back(i);
      --needed;
    }
  }
  return picked;
}

double RegularizationNorm(std::span<const SurvivalTree> trees, double scale) {
  double norm = 0.0;
  for (const auto& tree : trees) norm += scale * scale * tree.SquaredWeightNorm();
  return norm;
}

BoosterModel Fit(const SurvivalDataset& data, const BoosterParams& params, const IterationCallback& callback) {
  data.Validate();
  params.Validate();
  for (double v : data.features.data()) {
    if (!std::isfinite(v)) throw DataError("feature matrix contains non-finite values");
  }
  const std::size_t n = data.size();
  const int J = data.periods();

  BoosterModel model;
  model.grid = data.grid;
  model.feature_names = data.feature_names;
  if (model.feature_names.empty()) {
    for (std::size_t k = 0; k < data.features.cols(); ++k) model.feature_names.push_back("f" + std::to_string(k));
  }
  model.params = params;
  model.base_hazards = KaplanMeierInit(data);
  for (double h : model.base_hazards) model.base_margins.push_back(MarginFromHazard(h));

  ScoreMatrix margins(n, J);
  for (std::size_t i = 0; i < n; ++i) std::copy(model.base_margins.begin(), model.base_margins.end(), margins.Row(i).begin());

  GrowParams grow;
  grow.max_depth = params.max_depth;
  grow.split.lambda = params.lambda;
  grow.split.min_gain = params.min_gain;
  grow.split.min_child_count = params.min_child_count;
  grow.split.mode = params.split_mode;
  grow.split.epsilon = params.epsilon;
  grow.split.threads = params.threads;

  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  // feature order is computed once and reused by every tree
  const SortedSamples presorted = SortedSamples::Build(data.features, all_rows);

  GradientField gradients{Matrix(n, J), Matrix(n, J)};
  std::mt19937_64 rng(params.seed);
  const double eta = params.learning_rate;
  double weight_norm = 0.0;
  model.initial_loss = TotalLoss(data, margins, params.lambda, weight_norm);

  for (int m = 0; m < params.num_trees; ++m) {
    std::vector<std::size_t> rows = Subsample(n, params.subsample, rng);
    ComputeGradients(data, margins, rows, &gradients, params.threads);
    SurvivalTree tree;
    if (rows.size() == n) {
      tree = GrowTree(data, gradients, presorted, grow);
    } else {
      std::vector<unsigned char> keep(n, 0);
      for (std::size_t r : rows) keep[r] = 1;
      tree = GrowTree(data, gradients, presorted.Restrict(keep), grow);
    }
    ParallelFor(n, params.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        auto w = tree.Predict(data.features.Row(i));
        for (int j = 0; j < J; ++j) margins(i, j) += eta * w[j];
      }
    });
    weight_norm += eta * eta * tree.SquaredWeightNorm();
    model.trees.push_back(std::move(tree));
    model.loss_trace.push_back(TotalLoss(data, margins, params.lambda, weight_norm));
    if (callback && !callback(m + 1, model)) break;
  }
  return model;
}

ScoreMatrix PredictMargins(const BoosterModel& model, const Matrix& features, int threads) {
  CheckWidth(model, features.cols());
  ScoreMatrix out(features.rows(), static_cast<std::size_t>(model.periods()));
  ParallelFor(features.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) AccumulateMargins(model, features.Row(i), out.Row(i));
  });
  return out;
}

SurvivalPrediction PredictSurvival(const BoosterModel& model, std::span<const double> x) {
  CheckWidth(model, x.size());
  SurvivalPrediction p;
  if (model.trees.empty()) {
    p.hazards = model.base_hazards;
  } else {
    p.hazards.resize(model.periods());
    AccumulateMargins(model, x, p.hazards);
    for (double& h : p.hazards) h = HazardFromMargin(h);
  }
  p.survival = SurvivalCurve(p.hazards);
  return p;
}

std::pair<Matrix, Matrix> PredictSurvival(const BoosterModel& model, const Matrix& features, int threads) {
  CheckWidth(model, features.cols());
  const std::size_t J = static_cast<std::size_t>(model.periods());
  Matrix hazards(features.rows(), J), survival(features.rows(), J);
  ParallelFor(features.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SurvivalPrediction p = PredictSurvival(model, features.Row(i));
      std::copy(p.hazards.begin(), p.hazards.end(), hazards.Row(i).begin());
      std::copy(p.survival.begin(), p.survival.end(), survival.Row(i).begin());
    }
  });
  return {std::move(hazards), std::move(survival)};
}

}  // namespace gbst
