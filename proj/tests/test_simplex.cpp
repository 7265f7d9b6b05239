#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "offsim/simplex.hpp"

using offsim::LpResult;
using offsim::solve_lp;

TEST_CASE("textbook maximization (as minimization of the negation)") {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  x=2, y=6, obj=36.
  LpResult r = solve_lp({{1, 0}, {0, 2}, {3, 2}}, {4, 12, 18}, {-3, -5});
  REQUIRE(r.feasible);
  REQUIRE(r.bounded);
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.x[1] == doctest::Approx(6.0));
  CHECK(r.objective == doctest::Approx(-36.0));
}

TEST_CASE("negative right-hand sides engage phase 1") {
  // min x + y s.t. x + y >= 3, x <= 2  ->  optimum 3 (e.g. x=2, y=1).
  LpResult r = solve_lp({{-1, -1}, {1, 0}}, {-3, 2}, {1, 1});
  REQUIRE(r.feasible);
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.x[0] + r.x[1] == doctest::Approx(3.0));
}

TEST_CASE("infeasible systems are reported, not solved") {
  // x >= 5 and x <= 2 cannot both hold.
  LpResult r = solve_lp({{-1}, {1}}, {-5, 2}, {1});
  CHECK(!r.feasible);
}

TEST_CASE("unbounded objectives are flagged") {
  // min -x with only x >= 1.
  LpResult r = solve_lp({{-1}}, {-1}, {-1});
  REQUIRE(r.feasible);
  CHECK(!r.bounded);
}

TEST_CASE("degenerate ties terminate under Bland's rule") {
  // Multiple constraints active at the optimum.
  LpResult r = solve_lp({{1, 1}, {1, 1}, {1, 0}, {0, 1}}, {1, 1, 1, 1}, {-1, -1});
  REQUIRE(r.feasible);
  CHECK(r.objective == doctest::Approx(-1.0));
}

TEST_CASE("equality-shaped pairs pin a variable") {
  // x <= 0.25 and x >= 0.25; min -x.
  LpResult r = solve_lp({{1}, {-1}}, {0.25, -0.25}, {-1});
  REQUIRE(r.feasible);
  CHECK(r.x[0] == doctest::Approx(0.25));
}

TEST_CASE("solution respects all constraints on a random-ish instance") {
  std::vector<std::vector<double>> a = {
      {2, 1, 0.5}, {0.3, 4, 1}, {1, 1, 1}, {-1, -2, -0.5}};
  std::vector<double> b = {10, 12, 6, -3};
  std::vector<double> c = {1, 0.5, 2};
  LpResult r = solve_lp(a, b, c);
  REQUIRE(r.feasible);
  for (size_t i = 0; i < a.size(); ++i) {
    double lhs = 0;
    for (size_t j = 0; j < c.size(); ++j) lhs += a[i][j] * r.x[j];
    CHECK(lhs <= b[i] + 1e-7);
  }
  for (double v : r.x) CHECK(v >= -1e-9);
}
