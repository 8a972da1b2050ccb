// gbst: train, apply and evaluate gradient-boosted survival trees.
//
// Exit codes: 0 success, 1 usage or parameter error, 2 data error, 3 internal error.

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.h"
#include "gbst/error.h"

namespace {

using namespace gbst;
using namespace gbst::cli;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

void AddThreads(CLI::App* cmd, int* threads) {
  cmd->add_option("--threads", *threads, "worker threads, 0 = all cores (results do not depend on it)")
      ->envname("GBST_THREADS")
      ->check(CLI::NonNegativeNumber);
}

void AddTrainingOptions(CLI::App* cmd, TrainOptions* o) {
  cmd->add_option("--data", o->data, "training CSV")->required();
  cmd->add_option("--periods", o->grid.periods, "number of grid periods J")->check(CLI::PositiveNumber);
  cmd->add_option("--period-length", o->grid.period_length, "length of one period in time units");
  cmd->add_option("--boundaries", o->grid.boundaries, "explicit period end points (overrides --periods)")
      ->delimiter(',');

  cmd->add_option("--time-column", o->columns.time_column);
  cmd->add_option("--event-column", o->columns.event_column);
  cmd->add_option("--id-column", o->columns.id_column, "excluded from features when present");
  cmd->add_option("--ignore", o->columns.ignore, "columns to leave out")->delimiter(',');
  cmd->add_option("--categorical", o->columns.categorical, "columns forced to one-hot")->delimiter(',');
  cmd->add_option("--numeric", o->columns.numeric, "columns forced to numeric")->delimiter(',');
  cmd->add_option("--missing-threshold", o->missing_threshold, "drop columns missing in more than this share")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--time-unit", o->time_unit, "raw times are divided by this")->check(CLI::PositiveNumber);

  auto& b = o->booster;
  cmd->add_option("--trees", b.num_trees)->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-depth", b.max_depth)->check(CLI::NonNegativeNumber);
  cmd->add_option("--learning-rate", b.learning_rate);
  cmd->add_option("--lambda", b.lambda);
  cmd->add_option("--subsample", b.subsample);
  cmd->add_option("--split-mode", b.split_mode, "exact or quantile")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, SplitMode>{{"exact", SplitMode::kExact}, {"quantile", SplitMode::kQuantile}}));
  cmd->add_option("--epsilon", b.epsilon, "quantile sketch accuracy");
  cmd->add_option("--min-gain", b.min_gain);
  cmd->add_option("--min-child", b.min_child_count)->check(CLI::PositiveNumber);
  cmd->add_option("--seed", b.seed);
  cmd->add_flag("-v,--verbose", o->verbose, "log every iteration to stderr");
  AddThreads(cmd, &b.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient-boosted survival trees"};
  app.set_config("-c,--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "fit a model; writes model.json, plan.json, loss_trace.csv");
  AddTrainingOptions(train_cmd, &train);
  train_cmd->add_option("--out", train.out_dir, "output directory")->required();
  train_cmd->add_option("--model", train.model_path, "model path (default <out>/model.json)");
  train_cmd->add_option("--plan", train.plan_path, "plan path (default <out>/plan.json)");
  train_cmd->add_option("--valid", train.valid_data, "validation CSV for early stopping");
  train_cmd->add_option("--patience", train.patience, "stop after this many trees without validation gain");

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "per-record hazards and survival curves");
  predict_cmd->add_option("--model", predict.model_path)->required();
  predict_cmd->add_option("--plan", predict.plan_path)->required();
  predict_cmd->add_option("--data", predict.data)->required();
  predict_cmd->add_option("--out", predict.out_path, "output CSV")->required();
  predict_cmd->add_option("--id-column", predict.id_column);
  AddThreads(predict_cmd, &predict.threads);

  EvaluateOptions evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "C-index, per-period AUC/KS and decile tables");
  evaluate_cmd->add_option("--model", evaluate.model_path)->required();
  evaluate_cmd->add_option("--plan", evaluate.plan_path)->required();
  evaluate_cmd->add_option("--data", evaluate.data)->required();
  evaluate_cmd->add_option("--out", evaluate.out_dir, "output directory")->required();
  evaluate_cmd->add_option("--risk-score", evaluate.risk_score, "C-index score: expected or horizon")
      ->check(CLI::IsMember({"expected", "horizon"}));
  evaluate_cmd->add_option("--horizon", evaluate.horizon, "period for --risk-score horizon (default J)");
  evaluate_cmd->add_option("--period-score", evaluate.period_score, "AUC/KS score: hazard or cumulative")
      ->check(CLI::IsMember({"hazard", "cumulative"}));
  evaluate_cmd->add_option("--deciles", evaluate.decile_periods, "periods for decile tables (default J)")
      ->delimiter(',');
  AddThreads(evaluate_cmd, &evaluate.threads);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic survival CSV with a known hazard");
  synth_cmd->add_option("--out", synth.out_path)->required();
  synth_cmd->add_option("--records", synth.config.records);
  synth_cmd->add_option("--features", synth.config.features);
  synth_cmd->add_option("--periods", synth.config.periods);
  synth_cmd->add_option("--base-logit", synth.config.base_logit);
  synth_cmd->add_option("--coefficients", synth.config.coefficients)->delimiter(',');
  synth_cmd->add_option("--censoring", synth.config.censoring_rate);
  synth_cmd->add_option("--seed", synth.config.seed);
  synth_cmd->add_flag("--extras", synth.extras, "add a categorical and a partly missing column");

  ConvergenceOptions convergence;
  auto* conv_cmd = app.add_subcommand("convergence", "loss distribution per iteration over repeated seeds");
  AddTrainingOptions(conv_cmd, &convergence.train);
  conv_cmd->add_option("--runs", convergence.runs, "independent runs (seeds seed..seed+runs-1)");
  conv_cmd->add_option("--out", convergence.out_path, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) RunTrain(train);
    else if (*predict_cmd) RunPredict(predict);
    else if (*evaluate_cmd) RunEvaluate(evaluate);
    else if (*synth_cmd) RunSynth(synth);
    else if (*conv_cmd) RunConvergence(convergence);
  } catch (const ParamError& e) {
    std::cerr << "gbst: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "gbst: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "gbst: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
