// Subcommands of the gbst executable. Each returns normally on success and
// reports failures through gbst::DataError / gbst::ParamError.
#ifndef GBST_TOOLS_COMMANDS_H_
#define GBST_TOOLS_COMMANDS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "gbst/booster.h"
#include "gbst/metrics.h"
#include "gbst/synthetic.h"

namespace gbst::cli {

struct GridOptions {
  int periods{12};
  double period_length{1.0};
  std::vector<double> boundaries;  // overrides periods / period_length when set

  ObservationGrid Build() const;
};

struct ColumnOptions {
  std::string time_column{"time"};
  std::string event_column{"event"};
  std::string id_column{"id"};
  std::vector<std::string> ignore;
  std::vector<std::string> categorical;
  std::vector<std::string> numeric;
};

struct TrainOptions {
  std::string data;
  std::string out_dir;
  std::string model_path;  // default <out>/model.json
  std::string plan_path;   // default <out>/plan.json
  std::string valid_data;
  int patience{0};         // 0 disables early stopping
  double missing_threshold{0.8};
  double time_unit{1.0};
  bool verbose{false};
  GridOptions grid;
  ColumnOptions columns;
  BoosterParams booster;
};

struct PredictOptions {
  std::string model_path;
  std::string plan_path;
  std::string data;
  std::string out_path;
  std::string id_column{"id"};
  int threads{0};
};

struct EvaluateOptions {
  std::string model_path;
  std::string plan_path;
  std::string data;
  std::string out_dir;
  std::string risk_score{"expected"};   // expected | horizon
  int horizon{0};
  std::string period_score{"hazard"};   // hazard | cumulative
  std::vector<int> decile_periods;      // empty: last period
  int threads{0};
};

struct SynthOptions {
  std::string out_path;
  bool extras{false};
  SyntheticConfig config;
};

struct ConvergenceOptions {
  TrainOptions train;
  int runs{20};
  std::string out_path;
};

void RunTrain(const TrainOptions& options);
void RunPredict(const PredictOptions& options);
void RunEvaluate(const EvaluateOptions& options);
void RunSynth(const SynthOptions& options);
void RunConvergence(const ConvergenceOptions& options);

}  // namespace gbst::cli

#endif  // GBST_TOOLS_COMMANDS_H_
