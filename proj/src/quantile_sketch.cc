#include "gbst/quantile_sketch.h"

#include <algorithm>
#include <cmath>

#include "gbst/error.h"

namespace gbst {

double RankFunction(double z, const WeightedFeatureView& view) {
  double below = 0.0, total = 0.0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    total += view.weights[i];
    if (view.values[i] < z) below += view.weights[i];
  }
  return total > 0.0 ? below / total : 0.0;
}

CandidateSet ProposeCandidates(std::span<const WeightedFeatureView> views, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ParamError("quantile epsilon must lie in (0, 1]");
  const int levels = static_cast<int>(std::ceil(1.0 / epsilon));
  CandidateSet out;
  bool any = false;
  double lo = 0.0, hi = 0.0;
  for (const auto& view : views) {
    if (view.empty()) continue;
    if (!any || view.values.front() < lo) lo = view.values.front();
    if (!any || view.values.back() > hi) hi = view.values.back();
    any = true;

    double total = 0.0;
    for (double w : view.weights) total += w;
    // same summation order as below, so the running sum ends exactly at total
    double cumulative = 0.0;
    int level = 1;
    for (std::size_t i = 0; i < view.size() && level <= levels; ++i) {
      cumulative += view.weights[i];
      if (i + 1 < view.size() && view.values[i + 1] == view.values[i]) continue;
      bool emitted = false;
      while (level <= levels && cumulative >= std::min(level * epsilon, 1.0) * total) {
        emitted = true;
        ++level;
      }
      if (emitted) out.push_back(view.values[i]);
    }
  }
  if (!any) return out;
  out.push_back(lo);
  out.push_back(hi);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<SplitDecision> FindBestSplitQuantile(const SurvivalDataset& data,
                                                   const GradientField& gradients,
                                                   std::span<const std::size_t> samples,
                                                   double lambda, double epsilon, double min_gain,
                                                   std::size_t min_child_count) {
  SplitOptions options;
  options.lambda = lambda;
  options.min_gain = min_gain;
  options.min_child_count = min_child_count;
  options.mode = SplitMode::kQuantile;
  options.epsilon = epsilon;
  return FindBestSplit(data, gradients, SortedSamples::Build(data.features, samples), options);
}

}  // namespace gbst
