/*!
 * \file model_io.h
 * \brief JSON persistence of fitted models.
 *
 * Layout (format_version 1):
 * \code
 * {
 *   "format_version": 1,
 *   "grid": [tau_1, ..., tau_J],
 *   "feature_names": [...],
 *   "base_hazards": [...J], "base_margins": [...J],
 *   "learning_rate": eta, "lambda": lambda,
 *   "params": { "num_trees": .., "max_depth": .., "subsample": .., "split_mode": "exact"|"quantile",
 *               "epsilon": .., "min_gain": .., "min_child_count": .., "seed": .. },
 *   "initial_loss": .., "loss_trace": [...],
 *   "trees": [ {"feature": k, "threshold": s, "gain": g, "left": {...}, "right": {...}}
 *              | {"weights": [...J]} , ... ]
 * }
 * \endcode
 * Doubles are written in shortest round-trip form, so save/load is exact.
 */
#ifndef GBST_MODEL_IO_H_
#define GBST_MODEL_IO_H_

#include <string>
#include <string_view>

#include "gbst/booster.h"

namespace gbst {

inline constexpr int kModelFormatVersion = 1;

std::string SerializeModel(const BoosterModel& model);
/*! \throws DataError on malformed documents or unsupported versions */
BoosterModel ParseModel(std::string_view text);

void SaveModel(const BoosterModel& model, const std::string& path);
BoosterModel LoadModel(const std::string& path);

}  // namespace gbst

#endif  // GBST_MODEL_IO_H_
