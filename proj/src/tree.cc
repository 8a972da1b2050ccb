#include "gbst/tree.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gbst/error.h"
#include "gbst/parallel.h"
#include "gbst/quantile_sketch.h"

namespace gbst {

namespace {

inline double ScoreTerm(double grad, double hess, std::size_t count, double lambda) {
  return count == 0 ? 0.0 : grad * grad / (hess + lambda);
}

// threshold strictly between lo and hi so that lo goes left and hi goes right
double Midpoint(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  if (!(mid < hi)) mid = lo;
  return mid;
}

// best boundary of one feature; `candidates` restricts the evaluated
// boundaries to those right after a candidate value (quantile mode)
std::optional<SplitDecision> ScanFeature(const SurvivalDataset& data, const GradientField& gradients,
                                         const SortedSamples& samples, const NodeStats& parent,
                                         const std::vector<double>& parent_terms, int feature,
                                         const CandidateSet* candidates, const SplitOptions& options) {
  const int J = data.periods();
  const auto& column = samples.Column(feature);
  const std::size_t n = column.size();
  std::vector<double> left_grad(J, 0.0), left_hess(J, 0.0);
  std::vector<std::size_t> left_count(J, 0);
  std::size_t next_candidate = 0;

  std::optional<SplitDecision> best;
  for (std::size_t pos = 0; pos + 1 < n; ++pos) {
    const std::size_t row = column[pos];
    const int last = data.ContributingPeriods(row);
    for (int j = 0; j < last; ++j) {
      left_grad[j] += gradients.grad(row, j);
      left_hess[j] += gradients.hess(row, j);
      ++left_count[j];
    }
    const double x = data.features(row, feature);
    const double x_next = data.features(column[pos + 1], feature);
    if (!(x < x_next)) continue;
    const std::size_t n_left = pos + 1;
    if (n_left < options.min_child_count || n - n_left < options.min_child_count) continue;
    if (candidates != nullptr) {
      while (next_candidate < candidates->size() && (*candidates)[next_candidate] < x) ++next_candidate;
      if (next_candidate == candidates->size() || (*candidates)[next_candidate] != x) continue;
    }
    double gain = 0.0;
    for (int j = 0; j < J; ++j) {
      const std::size_t right_count = parent.count[j] - left_count[j];
      gain += ScoreTerm(left_grad[j], left_hess[j], left_count[j], options.lambda) +
              ScoreTerm(parent.grad_sum[j] - left_grad[j], parent.hess_sum[j] - left_hess[j],
                        right_count, options.lambda) -
              parent_terms[j];
    }
    gain *= 0.5;
    if (!best || gain > best->gain) {
      best = SplitDecision{feature, Midpoint(x, x_next), gain, n_left, n - n_left};
    }
  }
  return best;
}

CandidateSet FeatureCandidates(const SurvivalDataset& data, const GradientField& gradients,
                               const SortedSamples& samples, int feature, double epsilon) {
  std::vector<WeightedFeatureView> views(static_cast<std::size_t>(data.periods()));
  for (std::size_t row : samples.Column(feature)) {
    const double x = data.features(row, feature);
    const int last = data.ContributingPeriods(row);
    for (int j = 0; j < last; ++j) views[j].Push(x, gradients.hess(row, j));
  }
  return ProposeCandidates(views, epsilon);
}

}  // namespace

NodeStats NodeStats::Collect(const SurvivalDataset& data, const GradientField& gradients,
                             std::span<const std::size_t> rows) {
  const int J = data.periods();
  std::vector<CompensatedSum> grad(J), hess(J);
  NodeStats stats(J);
  for (std::size_t row : rows) {
    const int last = data.ContributingPeriods(row);
    for (int j = 0; j < last; ++j) {
      grad[j].Add(gradients.grad(row, j));
      hess[j].Add(gradients.hess(row, j));
      ++stats.count[j];
    }
  }
  for (int j = 0; j < J; ++j) {
    stats.grad_sum[j] = grad[j].Value();
    stats.hess_sum[j] = hess[j].Value();
  }
  return stats;
}

std::vector<double> LeafWeight(const NodeStats& stats, double lambda) {
  if (lambda < 0.0) throw ParamError("lambda must be non-negative");
  std::vector<double> w(stats.grad_sum.size(), 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (stats.count[j] == 0) continue;
    w[j] = -stats.grad_sum[j] / (stats.hess_sum[j] + lambda);
  }
  return w;
}

double StructureScore(std::span<const NodeStats> leaves, double lambda) {
  double score = 0.0;
  for (const auto& leaf : leaves) {
    for (int j = 0; j < leaf.periods(); ++j) {
      score += ScoreTerm(leaf.grad_sum[j], leaf.hess_sum[j], leaf.count[j], lambda);
    }
  }
  return -0.5 * score;
}

double SplitGain(const NodeStats& parent, const NodeStats& left, const NodeStats& right,
                 double lambda) {
  if (left.periods() != parent.periods() || right.periods() != parent.periods()) {
    throw ParamError("node statistics have different period counts");
  }
  double gain = 0.0;
  for (int j = 0; j < parent.periods(); ++j) {
    const double scale = 1.0 + std::abs(parent.grad_sum[j]) + std::abs(parent.hess_sum[j]);
    if (left.count[j] + right.count[j] != parent.count[j] ||
        std::abs(left.grad_sum[j] + right.grad_sum[j] - parent.grad_sum[j]) > 1e-9 * scale ||
        std::abs(left.hess_sum[j] + right.hess_sum[j] - parent.hess_sum[j]) > 1e-9 * scale) {
      throw ParamError("left + right statistics do not add up to the parent");
    }
    gain += ScoreTerm(left.grad_sum[j], left.hess_sum[j], left.count[j], lambda) +
            ScoreTerm(right.grad_sum[j], right.hess_sum[j], right.count[j], lambda) -
            ScoreTerm(parent.grad_sum[j], parent.hess_sum[j], parent.count[j], lambda);
  }
  return 0.5 * gain;
}

SortedSamples SortedSamples::Build(const Matrix& features, std::span<const std::size_t> rows) {
  SortedSamples s;
  s.rows_.assign(rows.begin(), rows.end());
  std::sort(s.rows_.begin(), s.rows_.end());
  s.columns_.resize(features.cols());
  for (std::size_t k = 0; k < features.cols(); ++k) {
    auto& col = s.columns_[k];
    col = s.rows_;
    std::stable_sort(col.begin(), col.end(),
                     [&](std::size_t a, std::size_t b) { return features(a, k) < features(b, k); });
  }
  return s;
}

SortedSamples SortedSamples::Restrict(std::span<const unsigned char> keep) const {
  SortedSamples s;
  auto filter = [&](const std::vector<std::size_t>& in) {
    std::vector<std::size_t> out;
    for (std::size_t r : in) {
      if (keep[r]) out.push_back(r);
    }
    return out;
  };
  s.rows_ = filter(rows_);
  s.columns_.reserve(columns_.size());
  for (const auto& col : columns_) s.columns_.push_back(filter(col));
  return s;
}

std::pair<SortedSamples, SortedSamples> SortedSamples::Partition(const Matrix& features, int feature,
                                                                 double threshold) const {
  std::vector<unsigned char> goes_left(features.rows(), 0);
  for (std::size_t r : rows_) goes_left[r] = features(r, feature) <= threshold;
  SortedSamples left, right;
  auto split = [&](const std::vector<std::size_t>& in, std::vector<std::size_t>& l,
                   std::vector<std::size_t>& r) {
    for (std::size_t row : in) (goes_left[row] ? l : r).push_back(row);
  };
  split(rows_, left.rows_, right.rows_);
  left.columns_.resize(columns_.size());
  right.columns_.resize(columns_.size());
  for (std::size_t k = 0; k < columns_.size(); ++k) split(columns_[k], left.columns_[k], right.columns_[k]);
  return {std::move(left), std::move(right)};
}

std::optional<SplitDecision> FindBestSplit(const SurvivalDataset& data, const GradientField& gradients,
                                           const SortedSamples& samples, const SplitOptions& options) {
  if (samples.size() < 2) return std::nullopt;
  if (options.mode == SplitMode::kQuantile && !(options.epsilon > 0.0 && options.epsilon <= 1.0)) {
    throw ParamError("quantile epsilon must lie in (0, 1]");
  }
  const NodeStats parent = NodeStats::Collect(data, gradients, samples.rows());
  std::vector<double> parent_terms(parent.periods());
  for (int j = 0; j < parent.periods(); ++j) {
    parent_terms[j] = ScoreTerm(parent.grad_sum[j], parent.hess_sum[j], parent.count[j], options.lambda);
  }

  const int n_features = samples.features();
  std::vector<std::optional<SplitDecision>> per_feature(n_features);
  ParallelFor(static_cast<std::size_t>(n_features), options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const int feature = static_cast<int>(k);
      if (options.mode == SplitMode::kQuantile) {
        CandidateSet candidates = FeatureCandidates(data, gradients, samples, feature, options.epsilon);
        per_feature[k] = ScanFeature(data, gradients, samples, parent, parent_terms, feature, &candidates, options);
      } else {
        per_feature[k] = ScanFeature(data, gradients, samples, parent, parent_terms, feature, nullptr, options);
      }
    }
  });

  std::optional<SplitDecision> best;
  for (const auto& candidate : per_feature) {
    if (candidate && (!best || candidate->gain > best->gain)) best = candidate;
  }
  if (!best || !(best->gain > options.min_gain)) return std::nullopt;
  return best;
}

std::optional<SplitDecision> FindBestSplitExact(const SurvivalDataset& data,
                                                const GradientField& gradients,
                                                std::span<const std::size_t> samples,
                                                double lambda, double min_gain,
                                                std::size_t min_child_count) {
  SplitOptions options;
  options.lambda = lambda;
  options.min_gain = min_gain;
  options.min_child_count = min_child_count;
  options.mode = SplitMode::kExact;
  return FindBestSplit(data, gradients, SortedSamples::Build(data.features, samples), options);
}

SurvivalTree::SurvivalTree(int periods, int num_features, std::vector<TreeNode> nodes)
    : periods_{periods}, num_features_{num_features}, nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree has no nodes");
  std::vector<int> parents(nodes_.size(), 0);
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const TreeNode& node = nodes_[id];
    if (node.IsLeaf()) {
      if (node.right >= 0) throw DataError("leaf node has a right child");
      if (node.weights.size() != static_cast<std::size_t>(periods_)) {
        throw DataError("leaf weight vector length differs from the period count");
      }
      for (double w : node.weights) {
        if (!std::isfinite(w)) throw DataError("leaf weight is not finite");
      }
      continue;
    }
    if (node.feature < 0 || node.feature >= num_features_) throw DataError("split feature out of range");
    if (!std::isfinite(node.threshold)) throw DataError("split threshold is not finite");
    for (int child : {node.left, node.right}) {
      if (child <= static_cast<int>(id) || child >= static_cast<int>(nodes_.size())) {
        throw DataError("child index out of range");
      }
      ++parents[child];
    }
  }
  for (std::size_t id = 1; id < nodes_.size(); ++id) {
    if (parents[id] != 1) throw DataError("tree node is not reachable exactly once");
  }
}

SurvivalTree SurvivalTree::Leaf(int num_features, std::vector<double> weights) {
  TreeNode leaf;
  int periods = static_cast<int>(weights.size());
  leaf.weights = std::move(weights);
  return SurvivalTree(periods, num_features, {std::move(leaf)});
}

int SurvivalTree::LeafIndex(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(num_features_)) {
    std::ostringstream os;
    os << "feature vector has width " << x.size() << ", tree expects " << num_features_;
    throw DataError(os.str());
  }
  int id = 0;
  while (!nodes_[id].IsLeaf()) {
    const TreeNode& node = nodes_[id];
    id = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return id;
}

std::span<const double> SurvivalTree::Predict(std::span<const double> x) const {
  return nodes_[LeafIndex(x)].weights;
}

int SurvivalTree::Depth() const {
  // children always follow their parent, so one forward pass suffices
  std::vector<int> depth(nodes_.size(), 0);
  int max_depth = 0;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    max_depth = std::max(max_depth, depth[id]);
    if (!nodes_[id].IsLeaf()) {
      depth[nodes_[id].left] = depth[id] + 1;
      depth[nodes_[id].right] = depth[id] + 1;
    }
  }
  return max_depth;
}

std::size_t SurvivalTree::LeafCount() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.IsLeaf(); }));
}

double SurvivalTree::SquaredWeightNorm() const {
  double norm = 0.0;
  for (const auto& node : nodes_) {
    for (double w : node.weights) norm += w * w;
  }
  return norm;
}

namespace {

int GrowNode(const SurvivalDataset& data, const GradientField& gradients, const SortedSamples& samples,
             const GrowParams& params, int depth, std::vector<TreeNode>* nodes) {
  const int id = static_cast<int>(nodes->size());
  nodes->emplace_back();
  std::optional<SplitDecision> split;
  if (depth < params.max_depth && samples.size() >= 2 &&
      samples.size() >= 2 * params.split.min_child_count) {
    split = FindBestSplit(data, gradients, samples, params.split);
  }
  if (!split) {
    (*nodes)[id].weights =
        LeafWeight(NodeStats::Collect(data, gradients, samples.rows()), params.split.lambda);
    return id;
  }
  auto [left, right] = samples.Partition(data.features, split->feature, split->threshold);
  (*nodes)[id].feature = split->feature;
  (*nodes)[id].threshold = split->threshold;
  (*nodes)[id].gain = split->gain;
  const int left_id = GrowNode(data, gradients, left, params, depth + 1, nodes);
  const int right_id = GrowNode(data, gradients, right, params, depth + 1, nodes);
  (*nodes)[id].left = left_id;
  (*nodes)[id].right = right_id;
  return id;
}

}  // namespace

SurvivalTree GrowTree(const SurvivalDataset& data, const GradientField& gradients,
                      const SortedSamples& samples, const GrowParams& params) {
  if (params.max_depth < 0) throw ParamError("max_depth must be non-negative");
  if (samples.size() == 0) throw DataError("cannot grow a tree on an empty sample");
  std::vector<TreeNode> nodes;
  GrowNode(data, gradients, samples, params, 0, &nodes);
  return SurvivalTree(data.periods(), static_cast<int>(data.features.cols()), std::move(nodes));
}

SurvivalTree GrowTree(const SurvivalDataset& data, const GradientField& gradients,
                      std::span<const std::size_t> rows, const GrowParams& params) {
  return GrowTree(data, gradients, SortedSamples::Build(data.features, rows), params);
}

}  // namespace gbst
