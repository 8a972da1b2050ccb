#include <cmath>
#include <random>

#include <doctest.h>

#include "gbst/error.h"
#include "gbst/survival.h"
#include "oracles.h"

using namespace gbst;

TEST_SUITE("survival") {

TEST_CASE("PeriodOf uses right-closed intervals") {
  auto grid = ObservationGrid::Regular(12);
  CHECK(grid.PeriodOf(0.5) == 1);
  CHECK(grid.PeriodOf(3.0) == 3);
  CHECK(grid.PeriodOf(3.0001) == 4);
  CHECK(grid.PeriodOf(12.0) == 12);
  CHECK(grid.PeriodOf(12.5) == 13);
  CHECK_THROWS_AS(grid.PeriodOf(0.0), DataError);
  CHECK_THROWS_AS(grid.PeriodOf(-1.0), DataError);
}

TEST_CASE("grid rejects bad boundaries") {
  CHECK_THROWS_AS(ObservationGrid(std::vector<double>{}), ParamError);
  CHECK_THROWS_AS(ObservationGrid({1.0, 1.0}), ParamError);
  CHECK_THROWS_AS(ObservationGrid({0.0, 1.0}), ParamError);
  CHECK_THROWS_AS(ObservationGrid::Regular(0), ParamError);
  ObservationGrid irregular({0.5, 2.0, 7.0});
  CHECK(irregular.PeriodOf(0.5) == 1);
  CHECK(irregular.PeriodOf(1.0) == 2);
  CHECK(irregular.PeriodOf(7.5) == 4);
}

TEST_CASE("CensorLabel") {
  CHECK(CensorLabel(2, {3, true}, 12) == -1);
  CHECK(CensorLabel(3, {3, true}, 12) == 1);
  CHECK(CensorLabel(4, {5, false}, 12) == -1);
  CHECK(CensorLabel(12, {13, false}, 12) == -1);
  CHECK_THROWS_AS(CensorLabel(4, {3, true}, 12), ParamError);
  CHECK_THROWS_AS(CensorLabel(0, {3, true}, 12), ParamError);
}

TEST_CASE("RiskSets") {
  SurvivalDataset d;
  d.grid = ObservationGrid::Regular(3);
  d.features = Matrix(3, 1);
  d.labels = {{1, true}, {2, true}, {4, false}};
  RiskSets rs(d);
  CHECK(rs.Members(1) == std::vector<std::size_t>{0, 1, 2});
  CHECK(rs.Members(2) == std::vector<std::size_t>{1, 2});
  CHECK(rs.Members(3) == std::vector<std::size_t>{2});

  d.labels = {{4, false}, {4, false}, {4, false}};
  RiskSets all(d);
  for (int p = 1; p <= 3; ++p) CHECK(all.Size(p) == 3);

  SurvivalDataset single;
  single.grid = ObservationGrid::Regular(3);
  single.features = Matrix(1, 1);
  single.labels = {{1, true}};
  RiskSets one(single);
  CHECK(one.Size(1) == 1);
  CHECK(one.Size(2) == 0);
  CHECK(one.Size(3) == 0);
}

TEST_CASE("risk sets are nested on random data") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = testing::RandomDataset(rng, 40, 1, 6);
    RiskSets rs(d);
    CHECK(rs.Size(1) == d.size());
    for (int p = 1; p < 6; ++p) {
      for (std::size_t i : rs.Members(p + 1)) CHECK(rs.Contains(i, p));
      CHECK(rs.Size(p + 1) <= rs.Size(p));
    }
  }
}

TEST_CASE("HazardFromMargin") {
  CHECK(HazardFromMargin(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(HazardFromMargin(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(HazardFromMargin(-std::log(9.0)) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(HazardFromMargin(-1000.0) == kHazardFloor);
  CHECK(HazardFromMargin(1000.0) == 1.0 - kHazardFloor);
  CHECK(MarginFromHazard(0.75) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("SurvivalCurve") {
  auto s = SurvivalCurve(std::vector<double>{0.5, 0.5});
  CHECK(s[0] == 0.5);
  CHECK(s[1] == 0.25);
  s = SurvivalCurve(std::vector<double>{1e-12, 1e-12});
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(1.0));
  s = SurvivalCurve(std::vector<double>{0.1, 0.2, 0.3});
  CHECK(s[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(0.72).epsilon(1e-15));
  CHECK(s[2] == doctest::Approx(0.504).epsilon(1e-15));
  CHECK_THROWS_AS(SurvivalCurve(std::vector<double>{0.5, 1.0}), DataError);
  CHECK_THROWS_AS(SurvivalCurve(std::vector<double>{0.0}), DataError);
}

TEST_CASE("EventProbability") {
  std::vector<double> h2{0.5, 0.5}, h3{0.1, 0.2, 0.3};
  CHECK(EventProbability(h2, 2) == 0.25);
  CHECK(EventProbability(h3, 3) == doctest::Approx(0.216).epsilon(1e-15));
  CHECK(EventProbability(h3, 1) == 0.1);
  CHECK_THROWS_AS(EventProbability(h3, 0), ParamError);
  CHECK_THROWS_AS(EventProbability(h3, 4), ParamError);
}

TEST_CASE("event probabilities and terminal survival sum to one") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  std::uniform_int_distribution<int> len(1, 30);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> h(len(rng));
    for (double& x : h) x = u(rng);
    auto s = SurvivalCurve(h);
    double total = s.back();
    for (int p = 1; p <= static_cast<int>(h.size()); ++p) total += EventProbability(h, p);
    REQUIRE(std::abs(total - 1.0) < 1e-12);
    for (std::size_t j = 1; j < s.size(); ++j) REQUIRE(s[j] <= s[j - 1]);
  }
}

TEST_CASE("KaplanMeierInit counts defaults over the at-risk set") {
  SurvivalDataset d;
  d.grid = ObservationGrid::Regular(3);
  d.features = Matrix(5, 1);
  d.labels = {{1, true}, {2, true}, {2, false}, {4, false}, {3, true}};
  auto h = KaplanMeierInit(d);
  CHECK(h[0] == 1.0 / 5.0);
  CHECK(h[1] == 1.0 / 4.0);
  CHECK(h[2] == 1.0 / 2.0);

  d.labels = {{4, false}, {4, false}, {4, false}, {4, false}, {4, false}};
  for (double x : KaplanMeierInit(d)) CHECK(x == kHazardFloor);

  SurvivalDataset one;
  one.grid = ObservationGrid::Regular(3);
  one.features = Matrix(1, 1);
  one.labels = {{1, true}};
  h = KaplanMeierInit(one);
  CHECK(h[0] == 1.0 - kHazardFloor);
  CHECK(h[1] == kHazardFloor);  // empty risk set
}

TEST_CASE("KaplanMeierInit without censoring equals the empirical conditional frequency") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 50);
  for (int trial = 0; trial < 200; ++trial) {
    auto d = testing::RandomDataset(rng, size(rng), 1, 5, 5, 0.0);
    auto h = KaplanMeierInit(d);
    for (int p = 1; p <= 5; ++p) {
      int at_risk = 0, events = 0;
      for (const auto& l : d.labels) {
        if (l.event_period >= p) ++at_risk;
        if (l.event_period == p) ++events;
      }
      double expected = at_risk == 0 ? kHazardFloor : ClampHazard(double(events) / double(at_risk));
      REQUIRE(h[p - 1] == expected);
    }
  }
}

TEST_CASE("GradientHessian examples") {
  auto g = GradientHessian(1, 0.0);
  CHECK(g.grad == -0.5);
  CHECK(g.hess == 0.25);
  g = GradientHessian(-1, 0.0);
  CHECK(g.grad == 0.5);
  CHECK(g.hess == 0.25);
  g = GradientHessian(1, std::log(3.0));
  CHECK(g.grad == doctest::Approx(-0.25).epsilon(1e-14));
  CHECK(g.hess == doctest::Approx(0.1875).epsilon(1e-14));
}

TEST_CASE("derivatives match finite differences of the logistic loss") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> margin(-8.0, 8.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int y = trial % 2 ? 1 : -1;
    const long double f = margin(rng);
    const long double h1 = 1e-5L, h2 = 1e-4L;
    long double fd1 = (testing::LogisticLossLd(y, f + h1) - testing::LogisticLossLd(y, f - h1)) / (2 * h1);
    long double fd2 = (testing::LogisticLossLd(y, f + h2) - 2 * testing::LogisticLossLd(y, f) +
                       testing::LogisticLossLd(y, f - h2)) / (h2 * h2);
    auto g = GradientHessian(y, static_cast<double>(f));
    REQUIRE(std::abs((g.grad - fd1) / fd1) < 1e-6);
    REQUIRE(std::abs((g.hess - fd2) / fd2) < 1e-4);
    REQUIRE(g.hess > 0.0);
    REQUIRE(std::abs(g.grad) < 1.0);
  }
}

TEST_CASE("TotalLoss") {
  SurvivalDataset d;
  d.grid = ObservationGrid::Regular(1);
  d.features = Matrix(1, 1);
  d.labels = {{2, false}};
  CHECK(TotalLoss(d, Matrix(1, 1, 0.0), 0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  // margins pushed far along each label's direction drive the loss to the clamp floor
  d.grid = ObservationGrid::Regular(2);
  d.features = Matrix(2, 1);
  d.labels = {{2, true}, {3, false}};  // labels: (-1, +1) and (-1, -1)
  Matrix far(2, 2);
  far(0, 0) = -50; far(0, 1) = 50; far(1, 0) = -50; far(1, 1) = -50;
  CHECK(TotalLoss(d, far, 0.0, 0.0) < 1e-6);

  Matrix m(2, 2);
  m(0, 0) = 0.3; m(0, 1) = -1.2; m(1, 0) = 2.0; m(1, 1) = -0.7;
  const double norm = 3.5;
  double expected = std::log1p(std::exp(0.3)) + std::log1p(std::exp(1.2)) + std::log1p(std::exp(2.0)) +
                    std::log1p(std::exp(-0.7)) + 0.5 * 0.001 * norm;
  CHECK(TotalLoss(d, m, 0.001, norm) == doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(TotalLoss(d, Matrix(2, 3), 0.0, 0.0), DataError);
}

TEST_CASE("ComputeGradients is thread-count invariant") {
  std::mt19937_64 rng(9);
  auto d = testing::RandomDataset(rng, 500, 1, 8);
  Matrix margins(d.size(), 8);
  std::normal_distribution<double> n(0, 2);
  for (double& v : margins.data()) v = n(rng);
  std::vector<std::size_t> rows(d.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  GradientField a{Matrix(d.size(), 8), Matrix(d.size(), 8)}, b = a;
  ComputeGradients(d, margins, rows, &a, 1);
  ComputeGradients(d, margins, rows, &b, 4);
  CHECK(a.grad == b.grad);
  CHECK(a.hess == b.hess);
}

TEST_CASE("dataset validation") {
  SurvivalDataset d;
  d.grid = ObservationGrid::Regular(2);
  d.features = Matrix(1, 1);
  d.labels = {{4, false}};
  CHECK_THROWS_AS(d.Validate(), DataError);
  d.labels = {{3, true}};
  CHECK_NOTHROW(d.Validate());
  d.labels.clear();
  d.features = Matrix(0, 1);
  CHECK_THROWS_AS(d.Validate(), DataError);
}

}  // TEST_SUITE
