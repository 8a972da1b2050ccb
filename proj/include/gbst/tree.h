/*!
 * \file tree.h
 * \brief survival trees: leaves carry one weight per period.
 */
#ifndef GBST_TREE_H_
#define GBST_TREE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gbst/survival.h"

namespace gbst {

/*! \brief per-period gradient statistics of a node's sample set I */
struct NodeStats {
  std::vector<double> grad_sum;     // W_j = sum_{i in N_j and I} r_ij
  std::vector<double> hess_sum;     // V_j = sum_{i in N_j and I} sigma_ij
  std::vector<std::size_t> count;   // |N_j and I|

  NodeStats() = default;
  explicit NodeStats(int periods) : grad_sum(periods, 0.0), hess_sum(periods, 0.0), count(periods, 0) {}
  int periods() const { return static_cast<int>(grad_sum.size()); }

  /*! \brief statistics of `rows`, summed in the given order with compensation */
  static NodeStats Collect(const SurvivalDataset& data, const GradientField& gradients,
                           std::span<const std::size_t> rows);
};

/*! \brief optimal leaf weights w_j = -W_j / (V_j + lambda); 0 for periods without samples */
std::vector<double> LeafWeight(const NodeStats& stats, double lambda);

/*! \brief -1/2 sum_{leaves, j} W^2 / (V + lambda) */
double StructureScore(std::span<const NodeStats> leaves, double lambda);

/*!
 * \brief loss reduction of splitting parent into left and right
 *
 *   1/2 sum_j [ W_L^2/(V_L+lambda) + W_R^2/(V_R+lambda) - W^2/(V+lambda) ]
 *
 * Periods with no samples on a side contribute 0 for that side.
 * \throws ParamError when left + right does not reproduce parent.
 */
double SplitGain(const NodeStats& parent, const NodeStats& left, const NodeStats& right,
                 double lambda);

enum class SplitMode { kExact, kQuantile };

/*! \brief rows with x[feature] <= threshold go left */
struct SplitDecision {
  int feature{-1};
  double threshold{0.0};
  double gain{0.0};
  std::size_t left_count{0};
  std::size_t right_count{0};
};

struct SplitOptions {
  double lambda{1e-3};
  double min_gain{0.0};
  std::size_t min_child_count{1};
  SplitMode mode{SplitMode::kExact};
  double epsilon{0.05};  // quantile mode only
  int threads{1};
};

/*!
 * \brief row indices of a node, kept sorted by every feature column.
 *
 * Ties in feature value are ordered by row index. The root order is computed
 * once per training run and children are derived by stable partitioning, so
 * the sort is never repeated.
 */
class SortedSamples {
 public:
  SortedSamples() = default;
  /*! \brief sort `rows` by every column of `features` */
  static SortedSamples Build(const Matrix& features, std::span<const std::size_t> rows);
  /*! \brief restrict a full-dataset order to the rows flagged in `keep` */
  SortedSamples Restrict(std::span<const unsigned char> keep) const;
  /*! \brief stable split into (x <= threshold, x > threshold) on `feature` */
  std::pair<SortedSamples, SortedSamples> Partition(const Matrix& features, int feature,
                                                    double threshold) const;

  std::size_t size() const { return rows_.size(); }
  int features() const { return static_cast<int>(columns_.size()); }
  /*! \brief rows in ascending index order */
  const std::vector<std::size_t>& rows() const { return rows_; }
  const std::vector<std::size_t>& Column(int feature) const { return columns_[feature]; }

 private:
  std::vector<std::size_t> rows_;
  std::vector<std::vector<std::size_t>> columns_;
};

/*!
 * \brief best split of a node over all features.
 *
 * Exact mode evaluates every boundary between distinct feature values; quantile
 * mode only boundaries right after a candidate from ProposeCandidates. Ties are
 * resolved towards the lowest feature index, then the smallest threshold.
 * Returns nullopt when no boundary yields gain > min_gain with both children
 * holding at least min_child_count rows.
 */
std::optional<SplitDecision> FindBestSplit(const SurvivalDataset& data, const GradientField& gradients,
                                           const SortedSamples& samples, const SplitOptions& options);

/*! \brief exact greedy split search over the rows in `samples` */
std::optional<SplitDecision> FindBestSplitExact(const SurvivalDataset& data,
                                                const GradientField& gradients,
                                                std::span<const std::size_t> samples,
                                                double lambda, double min_gain = 0.0,
                                                std::size_t min_child_count = 1);

struct TreeNode {
  int feature{-1};
  double threshold{0.0};
  int left{-1};
  int right{-1};
  double gain{0.0};
  std::vector<double> weights;  // leaves only, one per period

  bool IsLeaf() const { return left < 0; }
};

/*! \brief binary tree; node 0 is the root, leaves hold a weight vector over the periods */
class SurvivalTree {
 public:
  SurvivalTree() = default;
  /*! \throws DataError when the node array is not a well-formed tree */
  SurvivalTree(int periods, int num_features, std::vector<TreeNode> nodes);
  static SurvivalTree Leaf(int num_features, std::vector<double> weights);

  int periods() const { return periods_; }
  int num_features() const { return num_features_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  /*! \brief index of the leaf `x` routes to */
  int LeafIndex(std::span<const double> x) const;
  /*! \brief leaf weights for `x`; \throws DataError on a width mismatch */
  std::span<const double> Predict(std::span<const double> x) const;

  int Depth() const;
  std::size_t LeafCount() const;
  /*! \brief sum over leaves and periods of w^2 */
  double SquaredWeightNorm() const;

 private:
  int periods_{0};
  int num_features_{0};
  std::vector<TreeNode> nodes_;
};

struct GrowParams {
  int max_depth{6};
  SplitOptions split;
};

/*!
 * \brief grow one tree depth-first on `samples`.
 *
 * A node becomes a leaf at max_depth, when it holds fewer than
 * 2 * min_child_count rows, or when no split beats min_gain.
 */
SurvivalTree GrowTree(const SurvivalDataset& data, const GradientField& gradients,
                      const SortedSamples& samples, const GrowParams& params);

/*! \brief convenience overload that sorts `rows` first */
SurvivalTree GrowTree(const SurvivalDataset& data, const GradientField& gradients,
                      std::span<const std::size_t> rows, const GrowParams& params);

}  // namespace gbst

#endif  // GBST_TREE_H_
