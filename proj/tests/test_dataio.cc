#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "gbst/csv.h"
#include "gbst/dataio.h"
#include "gbst/error.h"
#include "gbst/file_util.h"

using namespace gbst;

namespace {

RawTable Table(std::string_view text, TableSchema schema = {}) { return TypeTable(ParseCsv(text), schema); }

const char* kTrain =
    "id,age,income,grade,time,event\n"
    "1,30,5000,B,2.5,1\n"
    "2,45,,A,30,0\n"
    "3,28,7000,C,12,0\n"
    "4,51,NA,B,1,1\n";

TableSchema NoLabels() {
  TableSchema s;
  s.require_labels = false;
  return s;
}

TableSchema TrainSchema() {
  TableSchema s;
  s.declared["id"] = ColumnKind::kIgnore;
  return s;
}

}  // namespace

TEST_SUITE("dataio") {

TEST_CASE("ParseCsv") {
  auto t = ParseCsv("a,b,c\n1,\"x, y\",\"say \"\"hi\"\"\"\r\n\n4,5,6");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x, y");
  CHECK(t.rows[0][2] == "say \"hi\"");
  CHECK(t.rows[1][2] == "6");
  CHECK(ParseCsv("\xEF\xBB\xBFq\n1\n").header[0] == "q");
  CHECK(ParseCsv("a,b\n\"multi\nline\",2\n").rows[0][0] == "multi\nline");
  CHECK_THROWS_AS(ParseCsv("a,b\n1,2,3\n"), DataError);
  CHECK_THROWS_AS(ParseCsv("a,b\n\"open,2\n"), DataError);
  CHECK_THROWS_AS(ParseCsv(""), DataError);
  CHECK(EscapeCsvField("plain") == "plain");
  CHECK(EscapeCsvField("a,b") == "\"a,b\"");
  CHECK(EscapeCsvField("q\"") == "\"q\"\"\"");
}

TEST_CASE("missing cells") {
  for (const char* m : {"", "NA", "NaN", "nan", "null", "  "}) CHECK(IsMissingCell(m));
  for (const char* v : {"0", "N", "none?"}) CHECK_FALSE(IsMissingCell(v));
}

TEST_CASE("TypeTable infers and honours declared kinds") {
  auto t = Table(kTrain, TrainSchema());
  REQUIRE(t.columns.size() == 6);
  CHECK(t.rows == 4);
  CHECK(t.Find("age")->kind == ColumnKind::kNumeric);
  CHECK(t.Find("income")->kind == ColumnKind::kNumeric);
  CHECK(t.Find("income")->MissingCount() == 2);
  CHECK(t.Find("grade")->kind == ColumnKind::kCategorical);
  CHECK(t.Find("id")->kind == ColumnKind::kIgnore);
  CHECK(t.Find("time")->kind == ColumnKind::kTime);
  CHECK(t.Find("event")->kind == ColumnKind::kEvent);
  CHECK(t.Find("nope") == nullptr);

  auto three = Table("a,b,c\n1,x,2\n", NoLabels());
  CHECK(three.columns.size() == 3);

  TableSchema wrong;
  wrong.time_column = "duration";
  CHECK_THROWS_AS(Table(kTrain, wrong), DataError);
  TableSchema numeric_grade = TrainSchema();
  numeric_grade.declared["grade"] = ColumnKind::kNumeric;
  CHECK_THROWS_AS(Table(kTrain, numeric_grade), DataError);
  CHECK_THROWS_AS(Table("a,a,time,event\n1,2,3,1\n"), DataError);
}

TEST_CASE("BuildPlan") {
  auto t = Table(kTrain, TrainSchema());
  auto plan = BuildPlan(t);
  REQUIRE(plan.dropped.size() == 1);
  CHECK(plan.dropped[0].name == "id");
  REQUIRE(plan.numeric.size() == 2);
  CHECK(plan.numeric[0].name == "age");
  CHECK_FALSE(plan.numeric[0].indicator);
  CHECK(plan.numeric[1].name == "income");
  CHECK(plan.numeric[1].indicator);
  CHECK(plan.numeric[1].sentinel == 4999.0);
  REQUIRE(plan.categorical.size() == 1);
  CHECK(plan.categorical[0].levels == std::vector<std::string>{"A", "B", "C"});
  CHECK(plan.FeatureNames() ==
        std::vector<std::string>{"age", "income", "income:missing", "grade=A", "grade=B", "grade=C"});
  CHECK(plan.width() == 6);

  // 9 of 10 missing: dropped at 0.8, kept at 0.95
  std::string sparse = "x,y,time,event\n";
  for (int i = 0; i < 10; ++i) sparse += std::to_string(i) + "," + (i == 0 ? "1" : "") + ",1,0\n";
  auto st = Table(sparse);
  auto dropped = BuildPlan(st);
  REQUIRE(dropped.dropped.size() == 1);
  CHECK(dropped.dropped[0].name == "y");
  CHECK(dropped.FeatureNames() == std::vector<std::string>{"x"});
  CHECK(BuildPlan(st, PlanConfig{0.95}).FeatureNames() == std::vector<std::string>{"x", "y", "y:missing"});

  auto all_missing = Table("z,time,event\n,1,0\n,2,1\n");
  auto p = BuildPlan(all_missing, PlanConfig{1.0});
  REQUIRE(p.numeric.size() == 1);
  CHECK(p.numeric[0].sentinel == -1.0);
}

TEST_CASE("ApplyPlan") {
  auto t = Table(kTrain, TrainSchema());
  auto plan = BuildPlan(t);
  auto x = ApplyPlan(plan, t);
  REQUIRE(x.rows() == 4);
  REQUIRE(x.cols() == plan.width());
  CHECK(x(0, 0) == 30);
  CHECK(x(0, 1) == 5000);
  CHECK(x(0, 2) == 0);
  CHECK(x(1, 1) == 4999);
  CHECK(x(1, 2) == 1);
  CHECK(x(3, 1) == 4999);
  CHECK(x(0, 3) == 0);
  CHECK(x(0, 4) == 1);
  CHECK(x(0, 5) == 0);
  CHECK(ApplyPlan(plan, t).data() == x.data());

  auto test = Table("id,age,income,grade\n9,40,6000,D\n10,,,\n", NoLabels());
  auto y = ApplyPlan(plan, test);
  REQUIRE(y.cols() == plan.width());
  CHECK(y(0, 3) == 0);
  CHECK(y(0, 4) == 0);
  CHECK(y(0, 5) == 0);
  CHECK(y(1, 0) == plan.numeric[0].sentinel);  // no indicator for age, sentinel still applies
  CHECK(y(1, 2) == 1);

  auto missing_col = Table("id,age,grade\n1,2,A\n", NoLabels());
  CHECK_THROWS_AS(ApplyPlan(plan, missing_col), DataError);
}

TEST_CASE("BindLabels") {
  auto grid = ObservationGrid::Regular(24);
  auto t = Table(kTrain, TrainSchema());
  auto labels = BindLabels(t, "time", "event", grid);
  CHECK(labels[0].event_period == 3);
  CHECK(labels[0].event);
  CHECK(labels[1].event_period == 25);
  CHECK_FALSE(labels[1].event);
  CHECK(labels[2].event_period == 12);
  CHECK(labels[3].event_period == 1);

  auto days = Table("time,event\n45,1\n", TableSchema{});
  CHECK(BindLabels(days, "time", "event", grid, LabelConfig{30.0})[0].event_period == 2);

  CHECK_THROWS_AS(BindLabels(Table("time,event\n2,2\n"), "time", "event", grid), DataError);
  CHECK_THROWS_AS(BindLabels(Table("time,event\n0,1\n"), "time", "event", grid), DataError);
  CHECK_THROWS_AS(BindLabels(Table("time,event\n,1\n1,0\n"), "time", "event", grid), DataError);
}

TEST_CASE("plan JSON round trip") {
  auto t = Table(kTrain, TrainSchema());
  auto plan = BuildPlan(t);
  auto text = PlanToJson(plan);
  auto back = PlanFromJson(text);
  CHECK(back.FeatureNames() == plan.FeatureNames());
  CHECK(PlanToJson(back) == text);
  CHECK(ApplyPlan(back, t).data() == ApplyPlan(plan, t).data());
  CHECK_THROWS_AS(PlanFromJson("{}"), DataError);
  CHECK_THROWS_AS(PlanFromJson("not json"), DataError);
}

TEST_CASE("MakeDataset") {
  auto t = Table(kTrain, TrainSchema());
  auto plan = BuildPlan(t);
  auto d = MakeDataset(plan, t, ObservationGrid::Regular(12));
  CHECK(d.size() == 4);
  CHECK(d.feature_names == plan.FeatureNames());
  CHECK(d.labels[1].event_period == 13);

  auto days = Table("x,time,event\n1,45,1\n2,400,0\n");
  auto monthly = BuildPlan(days, PlanConfig{0.8, 30.0});
  CHECK(monthly.time_unit == 30.0);
  auto m = MakeDataset(PlanFromJson(PlanToJson(monthly)), days, ObservationGrid::Regular(12));
  CHECK(m.labels[0].event_period == 2);
  CHECK(m.labels[1].event_period == 13);
  CHECK_THROWS_AS(BuildPlan(days, PlanConfig{0.8, 0.0}), ParamError);
}

TEST_CASE("atomic file writes") {
  auto dir = std::filesystem::temp_directory_path() / "gbst_dataio_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto a = (dir / "a.txt").string(), b = (dir / "b.txt").string();
  WriteFilesAtomic({{a, "alpha"}, {b, "beta"}});
  CHECK(ReadFile(a) == "alpha");
  CHECK(ReadFile(b) == "beta");
  // the second target cannot be written (its parent is a file, or it is a
  // directory): the first must stay untouched
  CHECK_THROWS_AS(WriteFilesAtomic({{a, "changed"}, {(dir / "b.txt" / "c.txt").string(), "x"}}), DataError);
  CHECK(ReadFile(a) == "alpha");
  CHECK_FALSE(std::filesystem::exists(a + ".tmp"));
  std::filesystem::create_directories(dir / "sub");
  CHECK_THROWS_AS(WriteFilesAtomic({{a, "changed"}, {(dir / "sub").string(), "x"}}), DataError);
  CHECK(ReadFile(a) == "alpha");
  // missing parent directories are created
  WriteFileAtomic((dir / "new" / "d.txt").string(), "delta");
  CHECK(ReadFile((dir / "new" / "d.txt").string()) == "delta");
  CHECK_THROWS_AS(ReadFile((dir / "absent").string()), DataError);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
