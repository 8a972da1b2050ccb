/*!
 * \file booster.h
 * \brief gradient-boosted survival trees: training loop and prediction.
 */
#ifndef GBST_BOOSTER_H_
#define GBST_BOOSTER_H_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gbst/survival.h"
#include "gbst/tree.h"

namespace gbst {

struct BoosterParams {
  int num_trees{30};
  int max_depth{6};
  double learning_rate{0.1};
  double lambda{1e-3};
  double subsample{0.2};
  SplitMode split_mode{SplitMode::kExact};
  double epsilon{0.05};
  double min_gain{0.0};
  std::size_t min_child_count{1};
  std::uint64_t seed{0};
  // worker threads (<= 0: hardware concurrency); never affects results
  int threads{0};

  /*! \throws ParamError when a field is out of range */
  void Validate() const;
};

struct BoosterModel {
  ObservationGrid grid;
  std::vector<std::string> feature_names;
  std::vector<double> base_hazards;  // Kaplan-Meier hazards of the training set
  std::vector<double> base_margins;  // logit of base_hazards
  std::vector<SurvivalTree> trees;   // leaf weights stored before shrinkage
  BoosterParams params;
  double initial_loss{0.0};          // training loss before the first tree
  std::vector<double> loss_trace;    // training loss after each tree

  int periods() const { return grid.periods(); }
  int num_features() const { return static_cast<int>(feature_names.size()); }
};

/*!
 * \brief called after every tree with the number of trees fitted so far
 *        (1-based); return false to stop training early
 */
using IterationCallback = std::function<bool(int iteration, const BoosterModel& model)>;

/*!
 * \brief ceil(rate * n) distinct indices in ascending order, drawn without
 *        replacement; rate = 1 returns 0..n-1.
 */
std::vector<std::size_t> Subsample(std::size_t n, double rate, std::mt19937_64& rng);

/*!
 * \brief fit a model.
 *
 * Margins start at the Kaplan-Meier logits. Every iteration draws a fresh
 * subsample, fits a tree to the derivatives of the sampled rows, adds
 * learning_rate times its leaf weights to the margins of all rows and records
 * the regularized training loss over the full dataset.
 */
BoosterModel Fit(const SurvivalDataset& data, const BoosterParams& params,
                 const IterationCallback& callback = {});

/*! \brief sum over trees of ||scale * w||^2 */
double RegularizationNorm(std::span<const SurvivalTree> trees, double scale);

/*! \brief base_margins + learning_rate * sum of tree outputs, per row */
ScoreMatrix PredictMargins(const BoosterModel& model, const Matrix& features, int threads = 1);

struct SurvivalPrediction {
  std::vector<double> hazards;
  std::vector<double> survival;
};

/*!
 * \brief hazard and survival curve of one record.
 *
 * A model without trees returns the stored baseline hazards unchanged.
 */
SurvivalPrediction PredictSurvival(const BoosterModel& model, std::span<const double> x);

/*! \brief PredictSurvival for every row, as two N x J matrices (hazards, survival) */
std::pair<Matrix, Matrix> PredictSurvival(const BoosterModel& model, const Matrix& features,
                                          int threads = 1);

}  // namespace gbst

#endif  // GBST_BOOSTER_H_
