#include "gbst/survival.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gbst/error.h"
#include "gbst/parallel.h"

namespace gbst {

namespace {

// hazard h and its complement 1 - h, both computed without cancellation
struct HazardPair {
  double h;
  double survive;
};

HazardPair ClampedHazard(double f) {
  HazardPair p{1.0 / (1.0 + std::exp(-f)), 1.0 / (1.0 + std::exp(f))};
  if (p.h < kHazardFloor) p = {kHazardFloor, 1.0 - kHazardFloor};
  if (p.survive < kHazardFloor) p = {1.0 - kHazardFloor, kHazardFloor};
  return p;
}

void CheckHazards(std::span<const double> hazards) {
  for (double h : hazards) {
    if (!(h > 0.0 && h < 1.0)) {
      std::ostringstream os;
      os << "hazard " << h << " outside (0, 1)";
      throw DataError(os.str());
    }
  }
}

}  // namespace

ObservationGrid::ObservationGrid(std::vector<double> boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.empty()) throw ParamError("observation grid needs at least one period");
  double prev = 0.0;
  for (double b : boundaries_) {
    if (!std::isfinite(b) || !(b > prev)) {
      throw ParamError("observation grid boundaries must be finite, positive and strictly increasing");
    }
    prev = b;
  }
}

ObservationGrid ObservationGrid::Regular(int periods, double step) {
  if (periods < 1) throw ParamError("observation grid needs at least one period");
  if (!(step > 0.0)) throw ParamError("grid step must be positive");
  std::vector<double> b(static_cast<std::size_t>(periods));
  for (int j = 0; j < periods; ++j) b[j] = step * (j + 1);
  return ObservationGrid(std::move(b));
}

int ObservationGrid::PeriodOf(double t) const {
  if (!std::isfinite(t) || t <= 0.0) {
    std::ostringstream os;
    os << "invalid time " << t << ": times must be positive";
    throw DataError(os.str());
  }
  // first boundary >= t, so tau_{p-1} < t <= tau_p
  auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), t);
  return static_cast<int>(it - boundaries_.begin()) + 1;
}

int SurvivalDataset::ContributingPeriods(std::size_t i) const {
  return std::min(labels[i].event_period, periods());
}

void SurvivalDataset::Validate() const {
  if (periods() < 1) throw DataError("dataset has no observation grid");
  if (labels.empty()) throw DataError("dataset is empty");
  if (features.rows() != labels.size()) {
    throw DataError("feature rows and label count differ");
  }
  if (!feature_names.empty() && feature_names.size() != features.cols()) {
    throw DataError("feature name count does not match feature width");
  }
  const int J = periods();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].event_period < 1 || labels[i].event_period > J + 1) {
      std::ostringstream os;
      os << "record " << i << ": event period " << labels[i].event_period
         << " outside [1, " << J + 1 << "]";
      throw DataError(os.str());
    }
  }
}

int CensorLabel(int period, const SurvivalLabel& label, int period_count) {
  if (period < 1 || period > std::min(label.event_period, period_count)) {
    std::ostringstream os;
    os << "period " << period << " outside the record's contribution range [1, "
       << std::min(label.event_period, period_count) << "]";
    throw ParamError(os.str());
  }
  return (label.event && period >= label.event_period) ? 1 : -1;
}

RiskSets::RiskSets(const SurvivalDataset& data)
    : members_(static_cast<std::size_t>(data.periods())) {
  event_period_.reserve(data.size());
  for (const auto& l : data.labels) event_period_.push_back(l.event_period);
  for (std::size_t i = 0; i < data.size(); ++i) {
    int last = data.ContributingPeriods(i);
    for (int p = 1; p <= last; ++p) members_[p - 1].push_back(i);
  }
}

double ClampHazard(double h) { return std::clamp(h, kHazardFloor, 1.0 - kHazardFloor); }

double HazardFromMargin(double f) { return ClampedHazard(f).h; }

double MarginFromHazard(double h) {
  h = ClampHazard(h);
  return std::log(h) - std::log1p(-h);
}

std::vector<double> SurvivalCurve(std::span<const double> hazards) {
  CheckHazards(hazards);
  std::vector<double> s(hazards.size());
  double acc = 1.0;
  for (std::size_t j = 0; j < hazards.size(); ++j) {
    acc *= 1.0 - hazards[j];
    s[j] = acc;
  }
  return s;
}

double EventProbability(std::span<const double> hazards, int period) {
  if (period < 1 || period > static_cast<int>(hazards.size())) {
    throw ParamError("period outside [1, J]");
  }
  CheckHazards(hazards);
  double p = hazards[period - 1];
  for (int l = 0; l < period - 1; ++l) p *= 1.0 - hazards[l];
  return p;
}

std::vector<double> KaplanMeierInit(const SurvivalDataset& data) {
  const int J = data.periods();
  std::vector<std::size_t> defaults(J, 0);
  std::vector<std::size_t> at_risk(J, 0);
  for (const auto& l : data.labels) {
    int last = std::min(l.event_period, J);
    for (int p = 1; p <= last; ++p) ++at_risk[p - 1];
    if (l.event && l.event_period <= J) ++defaults[l.event_period - 1];
  }
  std::vector<double> h(J, kHazardFloor);
  for (int j = 0; j < J; ++j) {
    if (at_risk[j] == 0) continue;
    h[j] = ClampHazard(static_cast<double>(defaults[j]) / static_cast<double>(at_risk[j]));
  }
  return h;
}

double PointLoss(int y, double f) {
  // -log h for y = +1, -log(1 - h) for y = -1
  HazardPair p = ClampedHazard(f);
  return y > 0 ? -std::log(p.h) : -std::log(p.survive);
}

GradientPair GradientHessian(int y, double f) {
  HazardPair p = ClampedHazard(f);
  return {y > 0 ? -p.survive : p.h, p.h * p.survive};
}

void ComputeGradients(const SurvivalDataset& data, const ScoreMatrix& margins,
                      std::span<const std::size_t> rows, GradientField* out, int threads) {
  const int J = data.periods();
  ParallelFor(rows.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      std::size_t i = rows[k];
      const SurvivalLabel& label = data.labels[i];
      int last = data.ContributingPeriods(i);
      for (int j = 0; j < J; ++j) {
        if (j < last) {
          int y = (label.event && j + 1 >= label.event_period) ? 1 : -1;
          GradientPair g = GradientHessian(y, margins(i, j));
          out->grad(i, j) = g.grad;
          out->hess(i, j) = g.hess;
        } else {
          out->grad(i, j) = 0.0;
          out->hess(i, j) = 0.0;
        }
      }
    }
  });
}

double TotalLoss(const SurvivalDataset& data, const ScoreMatrix& margins, double lambda,
                 double squared_weight_norm) {
  if (margins.rows() != data.size() || margins.cols() != static_cast<std::size_t>(data.periods())) {
    throw DataError("margin matrix shape does not match the dataset");
  }
  const int J = data.periods();
  CompensatedSum total;
  for (int j = 0; j < J; ++j) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const SurvivalLabel& label = data.labels[i];
      if (label.event_period < j + 1) continue;  // not in N_j
      int y = (label.event && j + 1 >= label.event_period) ? 1 : -1;
      total.Add(PointLoss(y, margins(i, j)));
    }
  }
  total.Add(0.5 * lambda * squared_weight_norm);
  return total.Value();
}

void CompensatedSum::Add(double x) {
  double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

}  // namespace gbst
