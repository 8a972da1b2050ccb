#include "gbst/dataio.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gbst/error.h"

namespace gbst {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> ParseNumber(std::string_view cell) {
  cell = Trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

double RequireNumber(const RawColumn& column, std::size_t row) {
  auto v = ParseNumber(column.cells[row]);
  if (!v) {
    throw DataError("column '" + column.name + "', row " + std::to_string(row) + ": '" + column.cells[row] +
                    "' is not a number");
  }
  return *v;
}

const RawColumn& RequireColumn(const RawTable& table, const std::string& name) {
  const RawColumn* c = table.Find(name);
  if (c == nullptr) throw DataError("column '" + name + "' is missing from the table");
  return *c;
}

std::string FormatRate(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

std::string_view ColumnKindName(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kTime: return "time";
    case ColumnKind::kEvent: return "event";
    case ColumnKind::kIgnore: return "ignore";
  }
  return "numeric";
}

ColumnKind ParseColumnKind(std::string_view name) {
  for (ColumnKind k : {ColumnKind::kNumeric, ColumnKind::kCategorical, ColumnKind::kTime, ColumnKind::kEvent,
                       ColumnKind::kIgnore}) {
    if (ColumnKindName(k) == name) return k;
  }
  throw DataError("unknown column kind '" + std::string(name) + "'");
}

bool IsMissingCell(std::string_view cell) {
  cell = Trim(cell);
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

std::optional<ColumnKind> TableSchema::Declared(const std::string& name) const {
  if (name == time_column) return ColumnKind::kTime;
  if (name == event_column) return ColumnKind::kEvent;
  auto it = declared.find(name);
  if (it == declared.end()) return std::nullopt;
  return it->second;
}

std::size_t RawColumn::MissingCount() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const std::string& c) { return IsMissingCell(c); }));
}

const RawColumn* RawTable::Find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

RawTable TypeTable(const CsvTable& csv, const TableSchema& schema) {
  RawTable table;
  table.rows = csv.rows.size();
  std::set<std::string> seen;
  for (std::size_t k = 0; k < csv.header.size(); ++k) {
    RawColumn column;
    column.name = std::string(Trim(csv.header[k]));
    if (!seen.insert(column.name).second) throw DataError("duplicate column '" + column.name + "'");
    column.cells.reserve(csv.rows.size());
    for (const auto& row : csv.rows) column.cells.push_back(row[k]);

    if (auto kind = schema.Declared(column.name)) {
      column.kind = *kind;
      column.declared = true;
      if (column.kind == ColumnKind::kNumeric) {
        for (std::size_t r = 0; r < column.cells.size(); ++r) {
          if (!IsMissingCell(column.cells[r])) RequireNumber(column, r);
        }
      }
    } else {
      bool numeric = std::all_of(column.cells.begin(), column.cells.end(), [](const std::string& c) {
        return IsMissingCell(c) || ParseNumber(c).has_value();
      });
      column.kind = numeric ? ColumnKind::kNumeric : ColumnKind::kCategorical;
    }
    table.columns.push_back(std::move(column));
  }

  std::vector<std::string> required;
  for (const auto& [name, kind] : schema.declared) required.push_back(name);
  if (schema.require_labels) {
    required.push_back(schema.time_column);
    required.push_back(schema.event_column);
  }
  for (const auto& name : required) {
    if (table.Find(name) == nullptr) throw DataError("declared column '" + name + "' is missing from the table");
  }
  return table;
}

RawTable LoadTable(const std::string& path, const TableSchema& schema) {
  CsvTable csv = ReadCsv(path);
  try {
    return TypeTable(csv, schema);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::vector<std::string> PreprocessPlan::FeatureNames() const {
  std::vector<std::string> names;
  for (const auto& f : numeric) names.push_back(f.name);
  for (const auto& f : numeric) {
    if (f.indicator) names.push_back(f.name + ":missing");
  }
  for (const auto& f : categorical) {
    for (const auto& level : f.levels) names.push_back(f.name + "=" + level);
  }
  return names;
}

std::size_t PreprocessPlan::width() const { return FeatureNames().size(); }

PreprocessPlan BuildPlan(const RawTable& table, const PlanConfig& config) {
  if (!(config.time_unit > 0.0)) throw ParamError("time unit must be positive");
  PreprocessPlan plan;
  plan.missing_rate_threshold = config.missing_rate_threshold;
  plan.time_unit = config.time_unit;
  for (const auto& column : table.columns) {
    switch (column.kind) {
      case ColumnKind::kTime: plan.time_column = column.name; continue;
      case ColumnKind::kEvent: plan.event_column = column.name; continue;
      case ColumnKind::kIgnore: plan.dropped.push_back({column.name, "ignored by schema"}); continue;
      default: break;
    }
    const std::size_t missing = column.MissingCount();
    const double rate = table.rows == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(table.rows);
    if (rate > config.missing_rate_threshold) {
      plan.dropped.push_back({column.name, "missing rate " + FormatRate(rate) + " > " +
                                               FormatRate(config.missing_rate_threshold)});
      continue;
    }
    if (column.kind == ColumnKind::kCategorical) {
      std::set<std::string> levels;
      for (const auto& c : column.cells) {
        if (!IsMissingCell(c)) levels.insert(std::string(Trim(c)));
      }
      plan.categorical.push_back({column.name, {levels.begin(), levels.end()}});
      continue;
    }
    NumericFeature f{column.name, -1.0, missing > 0};
    bool any = false;
    double lo = 0.0;
    for (std::size_t r = 0; r < column.cells.size(); ++r) {
      if (IsMissingCell(column.cells[r])) continue;
      double v = RequireNumber(column, r);
      if (!any || v < lo) lo = v;
      any = true;
    }
    if (any) f.sentinel = lo - 1.0;
    plan.numeric.push_back(std::move(f));
  }
  return plan;
}

Matrix ApplyPlan(const PreprocessPlan& plan, const RawTable& table) {
  const std::size_t width = plan.width();
  Matrix out(table.rows, width);
  std::size_t col = 0;
  std::vector<const RawColumn*> numeric_columns;
  for (const auto& f : plan.numeric) {
    const RawColumn& column = RequireColumn(table, f.name);
    numeric_columns.push_back(&column);
    for (std::size_t r = 0; r < table.rows; ++r) {
      out(r, col) = IsMissingCell(column.cells[r]) ? f.sentinel : RequireNumber(column, r);
    }
    ++col;
  }
  for (std::size_t k = 0; k < plan.numeric.size(); ++k) {
    if (!plan.numeric[k].indicator) continue;
    for (std::size_t r = 0; r < table.rows; ++r) {
      out(r, col) = IsMissingCell(numeric_columns[k]->cells[r]) ? 1.0 : 0.0;
    }
    ++col;
  }
  for (const auto& f : plan.categorical) {
    const RawColumn& column = RequireColumn(table, f.name);
    for (std::size_t r = 0; r < table.rows; ++r) {
      if (IsMissingCell(column.cells[r])) continue;
      auto it = std::lower_bound(f.levels.begin(), f.levels.end(), Trim(column.cells[r]));
      if (it != f.levels.end() && *it == Trim(column.cells[r])) {
        out(r, col + static_cast<std::size_t>(it - f.levels.begin())) = 1.0;
      }
    }
    col += f.levels.size();
  }
  return out;
}

std::vector<SurvivalLabel> BindLabels(const RawTable& table, const std::string& time_column,
                                      const std::string& event_column, const ObservationGrid& grid,
                                      const LabelConfig& config) {
  if (!(config.time_unit > 0.0)) throw ParamError("time_unit must be positive");
  const RawColumn& times = RequireColumn(table, time_column);
  const RawColumn& events = RequireColumn(table, event_column);
  std::vector<SurvivalLabel> labels;
  labels.reserve(table.rows);
  for (std::size_t r = 0; r < table.rows; ++r) {
    if (IsMissingCell(times.cells[r])) {
      throw DataError("row " + std::to_string(r) + ": missing time in column '" + time_column + "'");
    }
    const double t = RequireNumber(times, r) / config.time_unit;
    if (!(t > 0.0)) {
      throw DataError("row " + std::to_string(r) + ": time must be positive, got '" + times.cells[r] + "'");
    }
    auto delta = ParseNumber(events.cells[r]);
    if (!delta || (*delta != 0.0 && *delta != 1.0)) {
      throw DataError("row " + std::to_string(r) + ": event label '" + events.cells[r] + "' is not 0 or 1");
    }
    labels.push_back({grid.PeriodOf(t), *delta == 1.0});
  }
  return labels;
}

SurvivalDataset MakeDataset(const PreprocessPlan& plan, const RawTable& table, const ObservationGrid& grid) {
  SurvivalDataset data;
  data.grid = grid;
  data.features = ApplyPlan(plan, table);
  data.feature_names = plan.FeatureNames();
  data.labels = BindLabels(table, plan.time_column, plan.event_column, grid, LabelConfig{plan.time_unit});
  data.Validate();
  return data;
}

std::string PlanToJson(const PreprocessPlan& plan) {
  using Json = nlohmann::ordered_json;
  Json j;
  j["format_version"] = 1;
  j["time_column"] = plan.time_column;
  j["event_column"] = plan.event_column;
  j["missing_rate_threshold"] = plan.missing_rate_threshold;
  j["time_unit"] = plan.time_unit;
  Json dropped = Json::array();
  for (const auto& d : plan.dropped) dropped.push_back({{"name", d.name}, {"reason", d.reason}});
  j["dropped"] = std::move(dropped);
  Json numeric = Json::array();
  for (const auto& f : plan.numeric) {
    numeric.push_back({{"name", f.name}, {"sentinel", f.sentinel}, {"indicator", f.indicator}});
  }
  j["numeric"] = std::move(numeric);
  Json categorical = Json::array();
  for (const auto& f : plan.categorical) categorical.push_back({{"name", f.name}, {"levels", f.levels}});
  j["categorical"] = std::move(categorical);
  j["feature_names"] = plan.FeatureNames();
  return j.dump(1) + "\n";
}

PreprocessPlan PlanFromJson(std::string_view text) {
  using Json = nlohmann::ordered_json;
  try {
    Json j = Json::parse(text);
    PreprocessPlan plan;
    plan.time_column = j.at("time_column").get<std::string>();
    plan.event_column = j.at("event_column").get<std::string>();
    plan.missing_rate_threshold = j.at("missing_rate_threshold").get<double>();
    plan.time_unit = j.value("time_unit", 1.0);
    if (!(plan.time_unit > 0.0)) throw DataError("plan time_unit must be positive");
    for (const auto& d : j.at("dropped")) {
      plan.dropped.push_back({d.at("name").get<std::string>(), d.at("reason").get<std::string>()});
    }
    for (const auto& f : j.at("numeric")) {
      plan.numeric.push_back({f.at("name").get<std::string>(), f.at("sentinel").get<double>(),
                              f.at("indicator").get<bool>()});
    }
    for (const auto& f : j.at("categorical")) {
      plan.categorical.push_back({f.at("name").get<std::string>(), f.at("levels").get<std::vector<std::string>>()});
    }
    return plan;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed preprocess plan: ") + e.what());
  }
}

}  // namespace gbst
