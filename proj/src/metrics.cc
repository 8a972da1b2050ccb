#include "gbst/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gbst/error.h"

namespace gbst {

namespace {

void CheckScores(std::span<const double> scores, std::size_t n) {
  if (scores.size() != n) throw DataError("score count does not match record count");
  for (double s : scores) {
    if (std::isnan(s)) throw DataError("scores contain NaN");
  }
}

// Fenwick tree of counts over dense score ranks
class RankCounter {
 public:
  explicit RankCounter(std::size_t n) : tree_(n + 1, 0) {}
  void Add(std::size_t rank) {
    for (std::size_t i = rank + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // number of inserted ranks < rank
  std::uint64_t CountBelow(std::size_t rank) const {
    std::uint64_t c = 0;
    for (std::size_t i = rank; i > 0; i -= i & (~i + 1)) c += tree_[i];
    return c;
  }

 private:
  std::vector<std::uint64_t> tree_;
};

std::string FormatFixed(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

std::string FormatOptional(const std::optional<double>& v) { return v ? FormatFixed(*v) : ""; }

}  // namespace

double ConcordanceIndex(std::span<const double> risk, std::span<const SurvivalLabel> labels) {
  const std::size_t n = labels.size();
  CheckScores(risk, n);

  std::vector<double> unique(risk.begin(), risk.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    rank[i] = static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), risk[i]) - unique.begin());
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a].event_period > labels[b].event_period; });

  // walk periods from last to first; the counter holds rows with a strictly later period
  RankCounter later(unique.size());
  std::uint64_t comparable = 0, concordant = 0, tied = 0;
  std::size_t inserted = 0;
  for (std::size_t begin = 0; begin < n;) {
    std::size_t end = begin;
    while (end < n && labels[order[end]].event_period == labels[order[begin]].event_period) ++end;
    for (std::size_t p = begin; p < end; ++p) {
      const std::size_t i = order[p];
      if (!labels[i].event) continue;
      const std::uint64_t below = later.CountBelow(rank[i]);
      const std::uint64_t at_or_below = later.CountBelow(rank[i] + 1);
      comparable += inserted;
      concordant += below;
      tied += at_or_below - below;
    }
    for (std::size_t p = begin; p < end; ++p) later.Add(rank[order[p]]);
    inserted += end - begin;
    begin = end;
  }
  if (comparable == 0) return 0.5;
  return static_cast<double>(2 * concordant + tied) / static_cast<double>(2 * comparable);
}

PeriodCohort BuildPeriodCohort(std::span<const SurvivalLabel> labels, int period) {
  PeriodCohort c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const SurvivalLabel& l = labels[i];
    if (l.event_period < period) continue;
    ++c.at_risk;
    if (l.event_period > period) {
      c.negatives.push_back(i);
    } else if (l.event) {
      c.positives.push_back(i);
    }
  }
  return c;
}

std::optional<double> PeriodAuc(std::span<const double> scores, std::span<const SurvivalLabel> labels,
                                int period) {
  CheckScores(scores, labels.size());
  PeriodCohort c = BuildPeriodCohort(labels, period);
  if (c.positives.empty() || c.negatives.empty()) return std::nullopt;

  struct Entry {
    double score;
    bool positive;
  };
  std::vector<Entry> entries;
  entries.reserve(c.positives.size() + c.negatives.size());
  for (std::size_t i : c.positives) entries.push_back({scores[i], true});
  for (std::size_t i : c.negatives) entries.push_back({scores[i], false});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // Mann-Whitney U from mid-ranks; doubled to stay in integers
  std::uint64_t doubled_rank_sum = 0;
  for (std::size_t begin = 0; begin < entries.size();) {
    std::size_t end = begin;
    std::uint64_t pos = 0;
    while (end < entries.size() && entries[end].score == entries[begin].score) {
      pos += entries[end].positive;
      ++end;
    }
    // mid-rank of 1-based ranks begin+1..end, times two
    doubled_rank_sum += pos * static_cast<std::uint64_t>(begin + 1 + end);
    begin = end;
  }
  const auto P = static_cast<std::uint64_t>(c.positives.size());
  const auto Q = static_cast<std::uint64_t>(c.negatives.size());
  const std::uint64_t doubled_u = doubled_rank_sum - P * (P + 1);
  return static_cast<double>(doubled_u) / static_cast<double>(2 * P * Q);
}

std::optional<double> PeriodKs(std::span<const double> scores, std::span<const SurvivalLabel> labels,
                               int period) {
  CheckScores(scores, labels.size());
  PeriodCohort c = BuildPeriodCohort(labels, period);
  if (c.positives.empty() || c.negatives.empty()) return std::nullopt;

  std::vector<std::pair<double, bool>> entries;
  for (std::size_t i : c.positives) entries.emplace_back(scores[i], true);
  for (std::size_t i : c.negatives) entries.emplace_back(scores[i], false);
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double P = static_cast<double>(c.positives.size());
  const double Q = static_cast<double>(c.negatives.size());
  std::size_t tp = 0, fp = 0;
  double ks = 0.0;
  for (std::size_t begin = 0; begin < entries.size();) {
    std::size_t end = begin;
    while (end < entries.size() && entries[end].first == entries[begin].first) {
      (entries[end].second ? tp : fp) += 1;
      ++end;
    }
    ks = std::max(ks, std::abs(static_cast<double>(tp) / P - static_cast<double>(fp) / Q));
    begin = end;
  }
  return ks;
}

double DefaultRate(std::span<const SurvivalLabel> labels, std::span<const std::size_t> rows, int period) {
  if (rows.empty()) throw DataError("default rate of an empty group");
  std::size_t defaults = 0;
  for (std::size_t i : rows) {
    if (labels[i].event && labels[i].event_period <= period) ++defaults;
  }
  return static_cast<double>(defaults) / static_cast<double>(rows.size());
}

std::vector<DecileRow> DecileAnalysis(std::span<const double> survival_at_period,
                                      std::span<const SurvivalLabel> labels, int period) {
  const std::size_t n = labels.size();
  if (survival_at_period.size() != n) throw DataError("prediction count does not match record count");
  if (n < 10) throw DataError("decile analysis needs at least 10 records");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return survival_at_period[a] < survival_at_period[b];
  });
  std::vector<DecileRow> rows;
  const std::size_t base = n / 10, extra = n % 10;
  std::size_t begin = 0;
  for (int g = 0; g < 10; ++g) {
    const std::size_t size = base + (static_cast<std::size_t>(g) < extra ? 1 : 0);
    std::span<const std::size_t> group(order.data() + begin, size);
    double mean = 0.0;
    for (std::size_t i : group) mean += survival_at_period[i];
    rows.push_back({g + 1, size, mean / static_cast<double>(size), DefaultRate(labels, group, period)});
    begin += size;
  }
  return rows;
}

std::vector<double> RiskScores(const Matrix& survival, RiskReduction reduction, int horizon) {
  std::vector<double> scores(survival.rows());
  if (reduction == RiskReduction::kHorizon &&
      (horizon < 1 || horizon > static_cast<int>(survival.cols()))) {
    throw ParamError("horizon period outside [1, J]");
  }
  for (std::size_t i = 0; i < survival.rows(); ++i) {
    if (reduction == RiskReduction::kHorizon) {
      scores[i] = -survival(i, horizon - 1);
    } else {
      double total = 0.0;
      for (double s : survival.Row(i)) total += s;
      scores[i] = -total;
    }
  }
  return scores;
}

EvaluationReport Evaluate(const Matrix& hazards, const Matrix& survival,
                          std::span<const SurvivalLabel> labels, const EvaluationOptions& options) {
  if (hazards.rows() != labels.size() || survival.rows() != labels.size() ||
      hazards.cols() != survival.cols()) {
    throw DataError("prediction matrices do not match the labels");
  }
  const int J = static_cast<int>(survival.cols());
  EvaluationReport report;
  report.records = labels.size();
  report.c_index = ConcordanceIndex(RiskScores(survival, options.reduction, options.horizon), labels);

  std::vector<std::size_t> all(labels.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<double> scores(labels.size());
  for (int p = 1; p <= J; ++p) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      scores[i] = options.period_score == PeriodScore::kHazard ? hazards(i, p - 1) : 1.0 - survival(i, p - 1);
    }
    PeriodCohort cohort = BuildPeriodCohort(labels, p);
    PeriodMetrics m;
    m.period = p;
    m.at_risk = cohort.at_risk;
    m.positives = cohort.positives.size();
    m.negatives = cohort.negatives.size();
    m.auc = PeriodAuc(scores, labels, p);
    m.ks = PeriodKs(scores, labels, p);
    m.default_rate = all.empty() ? 0.0 : DefaultRate(labels, all, p);
    report.periods.push_back(m);
  }

  for (int p : options.decile_periods) {
    if (p < 1 || p > J) throw ParamError("decile period outside [1, J]");
    std::vector<double> s(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) s[i] = survival(i, p - 1);
    report.deciles.push_back({p, DecileAnalysis(s, labels, p)});
  }
  return report;
}

std::string ReportToJson(const EvaluationReport& report) {
  using Json = nlohmann::ordered_json;
  Json j;
  j["records"] = report.records;
  j["c_index"] = report.c_index;
  Json periods = Json::array();
  for (const auto& m : report.periods) {
    Json row;
    row["period"] = m.period;
    row["at_risk"] = m.at_risk;
    row["positives"] = m.positives;
    row["negatives"] = m.negatives;
    row["auc"] = m.auc ? Json(*m.auc) : Json(nullptr);
    row["ks"] = m.ks ? Json(*m.ks) : Json(nullptr);
    row["default_rate"] = m.default_rate;
    periods.push_back(std::move(row));
  }
  j["periods"] = std::move(periods);
  Json deciles = Json::array();
  for (const auto& table : report.deciles) {
    Json t;
    t["period"] = table.period;
    Json groups = Json::array();
    for (const auto& r : table.rows) {
      groups.push_back({{"group", r.group}, {"size", r.size}, {"mean_survival", r.mean_survival},
                        {"default_rate", r.default_rate}});
    }
    t["groups"] = std::move(groups);
    deciles.push_back(std::move(t));
  }
  j["deciles"] = std::move(deciles);
  return j.dump(1) + "\n";
}

std::string PeriodMetricsCsv(const EvaluationReport& report) {
  std::ostringstream os;
  os << "period,at_risk,positives,negatives,auc,ks,default_rate\n";
  for (const auto& m : report.periods) {
    os << m.period << ',' << m.at_risk << ',' << m.positives << ',' << m.negatives << ','
       << FormatOptional(m.auc) << ',' << FormatOptional(m.ks) << ',' << FormatFixed(m.default_rate) << '\n';
  }
  return os.str();
}

std::string DecileCsv(const DecileTable& table) {
  std::ostringstream os;
  os << "group,size,mean_survival,default_rate\n";
  for (const auto& r : table.rows) {
    os << r.group << ',' << r.size << ',' << FormatFixed(r.mean_survival) << ',' << FormatFixed(r.default_rate)
       << '\n';
  }
  return os.str();
}

}  // namespace gbst
