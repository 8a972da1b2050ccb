/*!
 * \file quantile_sketch.h
 * \brief weighted-quantile split candidates.
 *
 * The second-order objective is a sum of squared losses weighted by the
 * hessians sigma_ij, so candidate thresholds are spread evenly in
 * sigma-weighted rank, separately for every period's at-risk rows.
 */
#ifndef GBST_QUANTILE_SKETCH_H_
#define GBST_QUANTILE_SKETCH_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gbst/tree.h"

namespace gbst {

/*! \brief (value, weight) pairs of one feature over one period's at-risk rows, sorted by value */
struct WeightedFeatureView {
  std::vector<double> values;
  std::vector<double> weights;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  void Push(double value, double weight) {
    values.push_back(value);
    weights.push_back(weight);
  }
};

/*! \brief sorted, de-duplicated split candidates of one feature */
using CandidateSet = std::vector<double>;

/*!
 * \brief g(z) = (weight of entries with value < z) / (total weight).
 *
 * Returns 0 when the view carries no weight.
 */
double RankFunction(double z, const WeightedFeatureView& view);

/*!
 * \brief candidate thresholds from the per-period views of one feature.
 *
 * With K = ceil(1 / epsilon), each non-empty period contributes, for
 * k = 1..K, the first value whose cumulative weight reaches
 * min(k * epsilon, 1) of the period total (k = K therefore yields the
 * period's maximum). The overall minimum and maximum are always included, so
 * the result holds at most J * K + 2 values.
 */
CandidateSet ProposeCandidates(std::span<const WeightedFeatureView> views, double epsilon);

/*! \brief split search restricted to weighted-quantile candidates */
std::optional<SplitDecision> FindBestSplitQuantile(const SurvivalDataset& data,
                                                   const GradientField& gradients,
                                                   std::span<const std::size_t> samples,
                                                   double lambda, double epsilon,
                                                   double min_gain = 0.0,
                                                   std::size_t min_child_count = 1);

}  // namespace gbst

#endif  // GBST_QUANTILE_SKETCH_H_
