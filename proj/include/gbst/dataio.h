/*!
 * \file dataio.h
 * \brief tabular ingestion and preprocessing.
 *
 * Pipeline: LoadTable (typed raw cells) -> BuildPlan (fit on training data)
 * -> ApplyPlan (any table, same columns and order) + BindLabels.
 *
 * Preprocessing rules:
 *  - feature columns whose missing share exceeds the threshold are dropped;
 *  - categorical columns are one-hot encoded over their sorted training levels,
 *    unseen or missing levels encode as an all-zero block;
 *  - missing numeric cells take a sentinel one below the observed training
 *    minimum, and a 0/1 indicator column is added for every numeric column
 *    that had missing cells in training.
 */
#ifndef GBST_DATAIO_H_
#define GBST_DATAIO_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbst/csv.h"
#include "gbst/survival.h"

namespace gbst {

enum class ColumnKind { kNumeric, kCategorical, kTime, kEvent, kIgnore };

std::string_view ColumnKindName(ColumnKind kind);
/*! \throws DataError for unknown names */
ColumnKind ParseColumnKind(std::string_view name);

/*! \brief "", "NA", "NaN" and "null" mark a missing cell */
bool IsMissingCell(std::string_view cell);

/*! \brief declared column roles; undeclared columns are inferred */
struct TableSchema {
  std::string time_column{"time"};
  std::string event_column{"event"};
  std::map<std::string, ColumnKind> declared;
  // prediction tables may come without label columns
  bool require_labels{true};

  /*! \brief kind of `name` if declared (including the two label columns) */
  std::optional<ColumnKind> Declared(const std::string& name) const;
};

struct RawColumn {
  std::string name;
  ColumnKind kind{ColumnKind::kNumeric};
  bool declared{false};
  std::vector<std::string> cells;

  std::size_t MissingCount() const;
};

struct RawTable {
  std::vector<RawColumn> columns;
  std::size_t rows{0};

  /*! \brief column by name, nullptr if absent */
  const RawColumn* Find(std::string_view name) const;
};

/*!
 * \brief type the columns of a parsed CSV.
 *
 * Undeclared columns are numeric when every non-missing cell parses as a
 * number, categorical otherwise.
 * \throws DataError on duplicate headers, absent declared columns or
 *         non-numeric cells in declared numeric columns.
 */
RawTable TypeTable(const CsvTable& csv, const TableSchema& schema);
RawTable LoadTable(const std::string& path, const TableSchema& schema);

struct DroppedColumn {
  std::string name;
  std::string reason;
};

struct NumericFeature {
  std::string name;
  double sentinel{0.0};
  bool indicator{false};
};

struct CategoricalFeature {
  std::string name;
  std::vector<std::string> levels;  // sorted
};

struct PreprocessPlan {
  std::string time_column;
  std::string event_column;
  double missing_rate_threshold{0.8};
  // raw label times are divided by this before mapping onto the grid
  double time_unit{1.0};
  std::vector<DroppedColumn> dropped;
  std::vector<NumericFeature> numeric;
  std::vector<CategoricalFeature> categorical;

  /*! \brief numerics, then indicators, then one-hot blocks */
  std::vector<std::string> FeatureNames() const;
  std::size_t width() const;
};

struct PlanConfig {
  double missing_rate_threshold{0.8};
  double time_unit{1.0};  // stored in the plan for label binding
};

PreprocessPlan BuildPlan(const RawTable& table, const PlanConfig& config = {});

/*!
 * \brief feature matrix of `table` under `plan`.
 * \throws DataError when a planned column is absent or a numeric cell does not parse.
 */
Matrix ApplyPlan(const PreprocessPlan& plan, const RawTable& table);

struct LabelConfig {
  // raw times are divided by this before mapping onto the grid
  double time_unit{1.0};
};

/*!
 * \brief per-row (event_period, event) from the table's label columns.
 * \throws DataError for missing or non-positive times and event labels outside {0, 1}.
 */
std::vector<SurvivalLabel> BindLabels(const RawTable& table, const std::string& time_column,
                                      const std::string& event_column, const ObservationGrid& grid,
                                      const LabelConfig& config = {});

/*! \brief ApplyPlan + BindLabels with the plan's label columns and time unit */
SurvivalDataset MakeDataset(const PreprocessPlan& plan, const RawTable& table, const ObservationGrid& grid);

std::string PlanToJson(const PreprocessPlan& plan);
/*! \throws DataError on malformed documents */
PreprocessPlan PlanFromJson(std::string_view text);

}  // namespace gbst

#endif  // GBST_DATAIO_H_
