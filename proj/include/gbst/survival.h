/*!
 * \file survival.h
 * \brief discrete-time survival primitives: observation grid, labels, risk
 *        sets, hazard/survival conversion, Kaplan-Meier baseline, the
 *        per-period logistic loss and its derivatives.
 *
 * Conventions used throughout the library:
 *  - periods are numbered 1..J in label-facing APIs (event_period, CensorLabel);
 *  - matrix columns are 0-based, so column j holds period j + 1;
 *  - a record with event_period = p contributes to periods 1..min(p, J).
 */
#ifndef GBST_SURVIVAL_H_
#define GBST_SURVIVAL_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gbst {

/*! \brief hazards are clamped into [kHazardFloor, 1 - kHazardFloor] */
inline constexpr double kHazardFloor = 1e-7;

/*! \brief strictly increasing observation times tau_1 < ... < tau_J, tau_0 = 0 implied */
class ObservationGrid {
 public:
  ObservationGrid() = default;
  explicit ObservationGrid(std::vector<double> boundaries);
  /*! \brief tau_j = j * step for j = 1..periods */
  static ObservationGrid Regular(int periods, double step = 1.0);

  int periods() const { return static_cast<int>(boundaries_.size()); }
  const std::vector<double>& boundaries() const { return boundaries_; }

  /*!
   * \brief J(t): the period p with tau_{p-1} < t <= tau_p, or J + 1 beyond tau_J.
   * \throws DataError if t <= 0 or t is not finite.
   */
  int PeriodOf(double t) const;

  bool operator==(const ObservationGrid&) const = default;

 private:
  std::vector<double> boundaries_;
};

/*! \brief dense row-major matrix of doubles */
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_{rows}, cols_{cols}, data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> Row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> Row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

/*! \brief margins f(tau_j; x_i): one row per record, one column per period */
using ScoreMatrix = Matrix;

/*! \brief observed outcome of one record on the grid */
struct SurvivalLabel {
  int event_period;  // J(t), in [1, J + 1]
  bool event;        // delta: true = default observed, false = right-censored
  bool operator==(const SurvivalLabel&) const = default;
};

/*! \brief feature matrix plus per-record labels on a fixed grid */
struct SurvivalDataset {
  ObservationGrid grid;
  Matrix features;
  std::vector<SurvivalLabel> labels;
  std::vector<std::string> feature_names;

  std::size_t size() const { return labels.size(); }
  int periods() const { return grid.periods(); }
  /*! \brief min(event_period, J): number of leading periods the record contributes to */
  int ContributingPeriods(std::size_t i) const;
  /*! \throws DataError when the dataset violates its invariants */
  void Validate() const;
};

/*!
 * \brief y_period(t): +1 if the default is observed within the period, -1 otherwise.
 * \throws ParamError when period is outside 1..min(event_period, J).
 */
int CensorLabel(int period, const SurvivalLabel& label, int period_count);

/*! \brief N_j = { i : event_period_i >= j } for j = 1..J (members sorted ascending) */
class RiskSets {
 public:
  explicit RiskSets(const SurvivalDataset& data);

  int periods() const { return static_cast<int>(members_.size()); }
  /*! \brief members of N_period, 1 <= period <= J */
  const std::vector<std::size_t>& Members(int period) const { return members_.at(period - 1); }
  std::size_t Size(int period) const { return Members(period).size(); }
  bool Contains(std::size_t i, int period) const { return event_period_[i] >= period; }

 private:
  std::vector<int> event_period_;
  std::vector<std::vector<std::size_t>> members_;
};

/*! \brief clamp into [kHazardFloor, 1 - kHazardFloor] */
double ClampHazard(double h);
/*! \brief clamped logistic sigmoid 1 / (1 + exp(-f)) */
double HazardFromMargin(double f);
/*! \brief log(h / (1 - h)) of the clamped hazard */
double MarginFromHazard(double h);

/*!
 * \brief S(tau_j) = prod_{l<=j} (1 - h_l).
 * \throws DataError if any hazard is outside (0, 1).
 */
std::vector<double> SurvivalCurve(std::span<const double> hazards);

/*!
 * \brief P(tau_{j-1} < T <= tau_j) = h_j * prod_{l<j} (1 - h_l), period in 1..J.
 * \throws ParamError for an out-of-range period, DataError for hazards outside (0, 1).
 */
double EventProbability(std::span<const double> hazards, int period);

/*!
 * \brief per-period Kaplan-Meier hazard d_j / n_j, clamped.
 *
 * d_j counts observed defaults in period j, n_j = |N_j|. Periods with an empty
 * risk set get kHazardFloor.
 */
std::vector<double> KaplanMeierInit(const SurvivalDataset& data);

/*! \brief first and second derivative of the logistic loss w.r.t. the margin */
struct GradientPair {
  double grad;
  double hess;
};

/*! \brief rho(y, f) = log(1 + exp(-y f)), evaluated through the clamped hazard */
double PointLoss(int y, double f);
/*! \brief r = -(1 - h) for y = +1, r = h for y = -1; sigma = h (1 - h) */
GradientPair GradientHessian(int y, double f);

/*! \brief per-record per-period derivatives; entries outside a record's risk periods are 0 */
struct GradientField {
  Matrix grad;
  Matrix hess;
};

/*!
 * \brief fill rows `rows` of `out` with the derivatives at `margins`.
 *
 * `out` must already be shaped N x J. Rows not listed are left untouched.
 */
void ComputeGradients(const SurvivalDataset& data, const ScoreMatrix& margins,
                      std::span<const std::size_t> rows, GradientField* out, int threads);

/*!
 * \brief regularized negative log-likelihood
 *
 *   sum_j sum_{i in N_j} rho(y_j(t_i), f_ij) + lambda / 2 * squared_weight_norm
 *
 * accumulated period by period, records in index order, with compensated sums.
 */
double TotalLoss(const SurvivalDataset& data, const ScoreMatrix& margins, double lambda,
                 double squared_weight_norm);

/*! \brief Neumaier-compensated running sum */
class CompensatedSum {
 public:
  void Add(double x);
  double Value() const { return sum_ + compensation_; }

 private:
  double sum_{0.0};
  double compensation_{0.0};
};

}  // namespace gbst

#endif  // GBST_SURVIVAL_H_
