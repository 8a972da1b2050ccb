#ifndef GBST_SYNTHETIC_H_
#define GBST_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "gbst/survival.h"

namespace gbst {

/*!
 * \brief generator for discrete-time survival data with a known hazard.
 *
 * Features are i.i.d. standard normal. Every period's hazard logit is
 * base_logit + sum_k coefficients[k] * x_k, so the first coefficients.size()
 * features carry all the signal. Each record independently gets, with
 * probability censoring_rate, a censoring period drawn uniformly from 1..J;
 * records that survive all J periods are censored beyond the horizon.
 */
struct SyntheticConfig {
  std::size_t records{2000};
  int features{10};
  int periods{12};
  double base_logit{-4.0};
  std::vector<double> coefficients{3.0, 3.0, -3.0};
  double censoring_rate{0.1};
  std::uint64_t seed{1};
};

SurvivalDataset MakeSyntheticDataset(const SyntheticConfig& config);

/*!
 * \brief the same records as CSV with columns id, x0..x{n-1}, time, event.
 *
 * Times are period midpoints (p - 0.5) on a unit grid; with `extras`, a noise
 * categorical column "segment" and a noise numeric column "income" with
 * roughly 10% missing cells are appended.
 */
std::string SyntheticCsv(const SyntheticConfig& config, bool extras = false);

}  // namespace gbst

#endif  // GBST_SYNTHETIC_H_
