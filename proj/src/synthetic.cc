#include "gbst/synthetic.h"

#include <cmath>
#include <random>
#include <sstream>

#include "gbst/error.h"

namespace gbst {

SurvivalDataset MakeSyntheticDataset(const SyntheticConfig& config) {
  if (config.records == 0 || config.features < 1 || config.periods < 1) {
    throw ParamError("synthetic config needs records, features and periods");
  }
  if (static_cast<int>(config.coefficients.size()) > config.features) {
    throw ParamError("more coefficients than features");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> period(1, config.periods);

  SurvivalDataset data;
  data.grid = ObservationGrid::Regular(config.periods);
  data.features = Matrix(config.records, static_cast<std::size_t>(config.features));
  for (int k = 0; k < config.features; ++k) data.feature_names.push_back("x" + std::to_string(k));

  const int J = config.periods;
  for (std::size_t i = 0; i < config.records; ++i) {
    double logit = config.base_logit;
    for (int k = 0; k < config.features; ++k) {
      double x = normal(rng);
      data.features(i, k) = x;
      if (k < static_cast<int>(config.coefficients.size())) logit += config.coefficients[k] * x;
    }
    const double h = 1.0 / (1.0 + std::exp(-logit));
    int event_period = J + 1;
    for (int p = 1; p <= J; ++p) {
      if (unit(rng) < h) {
        event_period = p;
        break;
      }
    }
    int censor_period = J + 1;
    if (unit(rng) < config.censoring_rate) censor_period = period(rng);
    if (event_period <= J && event_period <= censor_period) {
      data.labels.push_back({event_period, true});
    } else {
      data.labels.push_back({std::min(event_period, censor_period), false});
    }
  }
  return data;
}

std::string SyntheticCsv(const SyntheticConfig& config, bool extras) {
  SurvivalDataset data = MakeSyntheticDataset(config);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  static const char* kSegments[] = {"retail", "prime", "subprime", "student"};

  std::ostringstream os;
  os.precision(17);
  os << "id";
  for (const auto& name : data.feature_names) os << ',' << name;
  if (extras) os << ",segment,income";
  os << ",time,event\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    os << i;
    for (double v : data.features.Row(i)) os << ',' << v;
    if (extras) {
      os << ',' << kSegments[static_cast<int>(unit(rng) * 4.0) % 4] << ',';
      double draw = unit(rng);
      if (draw >= 0.1) os << std::round(20000.0 + 80000.0 * unit(rng));
    }
    os << ',' << data.labels[i].event_period - 0.5 << ',' << (data.labels[i].event ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace gbst
