/*!
 * \file metrics.h
 * \brief evaluation of survival predictions: Harrell's C-index, per-period
 *        AUC / KS on the at-risk cohort, cumulative default rate and
 *        decile survival-group analysis.
 *
 * Scores follow the "higher = riskier" convention everywhere.
 */
#ifndef GBST_METRICS_H_
#define GBST_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbst/survival.h"

namespace gbst {

/*!
 * \brief Harrell's C-index.
 *
 * (i, k) is comparable iff i defaulted and event_period_i < event_period_k.
 * The pair is concordant when risk_i > risk_k; equal scores count 1/2.
 * Returns 0.5 when no pair is comparable. O(N log N).
 */
double ConcordanceIndex(std::span<const double> risk, std::span<const SurvivalLabel> labels);

/*!
 * \brief period cohort: rows at risk in `period`, labelled positive when they
 *        default in that period and negative when they survive it. Rows censored
 *        in the period itself have unknown status and are left out.
 */
struct PeriodCohort {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  std::size_t at_risk{0};
};
PeriodCohort BuildPeriodCohort(std::span<const SurvivalLabel> labels, int period);

/*! \brief Mann-Whitney AUC of `scores` on the period cohort; nullopt if a class is empty */
std::optional<double> PeriodAuc(std::span<const double> scores, std::span<const SurvivalLabel> labels,
                                int period);

/*! \brief max over thresholds of |TPR - FPR| on the period cohort; nullopt if a class is empty */
std::optional<double> PeriodKs(std::span<const double> scores, std::span<const SurvivalLabel> labels,
                               int period);

/*!
 * \brief share of `rows` with an observed default in periods 1..period.
 * \throws DataError for an empty row set.
 */
double DefaultRate(std::span<const SurvivalLabel> labels, std::span<const std::size_t> rows, int period);

struct DecileRow {
  int group{0};  // 1 = lowest predicted survival
  std::size_t size{0};
  double mean_survival{0.0};
  double default_rate{0.0};
};

/*!
 * \brief sort rows ascending by predicted survival at `period` (stable), cut
 *        them into 10 contiguous groups (the first N mod 10 groups take one
 *        extra row) and report each group's observed default rate.
 * \throws DataError with fewer than 10 rows.
 */
std::vector<DecileRow> DecileAnalysis(std::span<const double> survival_at_period,
                                      std::span<const SurvivalLabel> labels, int period);

/*! \brief how a survival curve is reduced to one C-index risk score */
enum class RiskReduction {
  kExpectedSurvival,  // -sum_j S_j
  kHorizon,           // -S at a fixed period
};

/*! \brief score used for per-period AUC / KS */
enum class PeriodScore {
  kHazard,      // h_j
  kCumulative,  // 1 - S_j
};

/*! \brief one risk score per row of a survival matrix */
std::vector<double> RiskScores(const Matrix& survival, RiskReduction reduction, int horizon = 0);

struct EvaluationOptions {
  RiskReduction reduction{RiskReduction::kExpectedSurvival};
  int horizon{0};  // period used by kHorizon
  PeriodScore period_score{PeriodScore::kHazard};
  std::vector<int> decile_periods;  // empty: no decile tables
};

struct PeriodMetrics {
  int period{0};
  std::size_t at_risk{0};
  std::size_t positives{0};
  std::size_t negatives{0};
  std::optional<double> auc;
  std::optional<double> ks;
  double default_rate{0.0};  // cumulative, over all evaluated rows
};

struct DecileTable {
  int period{0};
  std::vector<DecileRow> rows;
};

struct EvaluationReport {
  std::size_t records{0};
  double c_index{0.5};
  std::vector<PeriodMetrics> periods;
  std::vector<DecileTable> deciles;
};

/*! \brief full report from predicted hazard and survival matrices (N x J) */
EvaluationReport Evaluate(const Matrix& hazards, const Matrix& survival,
                          std::span<const SurvivalLabel> labels, const EvaluationOptions& options);

std::string ReportToJson(const EvaluationReport& report);
/*! \brief one row per period: period,at_risk,positives,negatives,auc,ks,default_rate */
std::string PeriodMetricsCsv(const EvaluationReport& report);
/*! \brief one row per group: group,size,mean_survival,default_rate */
std::string DecileCsv(const DecileTable& table);

}  // namespace gbst

#endif  // GBST_METRICS_H_
