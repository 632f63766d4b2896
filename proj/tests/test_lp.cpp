#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "evsp/lp.hpp"

using evsp::lp::BoundedSimplex;
using evsp::lp::Entry;
using evsp::lp::kInf;
using evsp::lp::Status;

namespace {

// Checks primal feasibility, reduced-cost signs and zero duality gap.
void check_certificate(const BoundedSimplex& lp, double tol = 1e-6) {
  const auto x = lp.primal();
  for (int j = 0; j < lp.columns(); ++j) {
    const auto [lo, hi] = lp.column_bounds(j);
    CHECK(x[j] >= lo - tol);
    CHECK(x[j] <= hi + tol);
    const double d = lp.reduced_cost(j);
    if (d > tol) CHECK(x[j] == doctest::Approx(lo).epsilon(1e-9));
    if (d < -tol) CHECK(x[j] == doctest::Approx(hi).epsilon(1e-9));
  }
  const auto y = lp.duals();
  for (int i = 0; i < lp.rows(); ++i) {
    const auto [lo, hi] = lp.row_bounds(i);
    const double r = lp.row_activity(i);
    CHECK(r >= lo - tol);
    CHECK(r <= hi + tol);
    if (y[i] > tol) CHECK(std::fabs(r - lo) < 1e-6);
    if (y[i] < -tol) CHECK(std::fabs(r - hi) < 1e-6);
  }
  CHECK(lp.objective() == doctest::Approx(lp.dual_objective()).epsilon(1e-9).scale(1.0));
}

}  // namespace

TEST_CASE("textbook maximization as a minimization") {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
  BoundedSimplex lp;
  const int r0 = lp.add_row(-kInf, 4);
  const int r1 = lp.add_row(-kInf, 12);
  const int r2 = lp.add_row(-kInf, 18);
  std::vector<Entry> cx{{r0, 1}, {r2, 3}};
  std::vector<Entry> cy{{r1, 2}, {r2, 2}};
  lp.add_column(-3, 0, kInf, cx);
  lp.add_column(-5, 0, kInf, cy);
  REQUIRE(lp.solve() == Status::kOptimal);
  CHECK(lp.objective() == doctest::Approx(-36));
  CHECK(lp.primal()[0] == doctest::Approx(2));
  CHECK(lp.primal()[1] == doctest::Approx(6));
  // shadow prices of the binding rows
  CHECK(lp.duals()[1] == doctest::Approx(-1.5));
  CHECK(lp.duals()[2] == doctest::Approx(-1.0));
  check_certificate(lp);
}

TEST_CASE("equality rows need the artificial phase") {
  // min x + y, x + y = 2, x - y >= 1 -> any point on the segment, objective 2
  BoundedSimplex lp;
  const int a = lp.add_row(2, 2);
  const int b = lp.add_row(1, kInf);
  std::vector<Entry> cx{{a, 1}, {b, 1}};
  std::vector<Entry> cy{{a, 1}, {b, -1}};
  lp.add_column(1, 0, kInf, cx);
  lp.add_column(1, 0, kInf, cy);
  REQUIRE(lp.solve() == Status::kOptimal);
  CHECK(lp.objective() == doctest::Approx(2));
  check_certificate(lp);
}

TEST_CASE("infeasible and unbounded are reported") {
  BoundedSimplex infeasible;
  const int r = infeasible.add_row(3, kInf);
  std::vector<Entry> col{{r, 1}};
  infeasible.add_column(1, 0, 1, col);
  CHECK(infeasible.solve() == Status::kInfeasible);

  BoundedSimplex unbounded;
  const int s = unbounded.add_row(0, kInf);
  std::vector<Entry> c2{{s, 1}};
  unbounded.add_column(-1, 0, kInf, c2);
  CHECK(unbounded.solve() == Status::kUnbounded);
}

TEST_CASE("column upper bounds are handled by bound flips") {
  // min -x - y, x + y <= 1.5, x, y in [0, 1]
  BoundedSimplex lp;
  const int r = lp.add_row(-kInf, 1.5);
  std::vector<Entry> col{{r, 1}};
  lp.add_column(-1, 0, 1, col);
  lp.add_column(-2, 0, 1, col);
  REQUIRE(lp.solve() == Status::kOptimal);
  CHECK(lp.objective() == doctest::Approx(-2.5));
  CHECK(lp.primal()[1] == doctest::Approx(1));
  CHECK(lp.primal()[0] == doctest::Approx(0.5));
  check_certificate(lp);
}

TEST_CASE("warm start after appending columns and changing bounds") {
  BoundedSimplex lp;
  const int a = lp.add_row(1, 1);
  const int b = lp.add_row(1, 1);
  std::vector<Entry> both{{a, 1}, {b, 1}};
  lp.add_column(10, 0, 1, both);
  REQUIRE(lp.solve() == Status::kOptimal);
  const double first = lp.objective();
  CHECK(first == doctest::Approx(10));

  std::vector<Entry> only_a{{a, 1}};
  std::vector<Entry> only_b{{b, 1}};
  lp.add_column(3, 0, 1, only_a);
  lp.add_column(3, 0, 1, only_b);
  REQUIRE(lp.solve() == Status::kOptimal);
  CHECK(lp.objective() == doctest::Approx(6));
  CHECK(lp.objective() <= first);

  lp.set_column_bounds(0, 1, 1);
  REQUIRE(lp.solve() == Status::kOptimal);
  CHECK(lp.objective() == doctest::Approx(10));
  check_certificate(lp);

  lp.set_column_bounds(0, 0, 0);
  lp.set_column_bounds(1, 0, 0);
  CHECK(lp.solve() == Status::kInfeasible);
}

TEST_CASE("random bounded LPs satisfy optimality certificates") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution sparse(0.4);
  int optimal = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 8);
    const int n = 2 + static_cast<int>(rng() % 20);
    BoundedSimplex lp;
    // a known feasible point keeps most instances feasible
    std::vector<double> x0(n);
    for (double& v : x0) v = 0.5 + 0.5 * u(rng);
    std::vector<std::vector<Entry>> cols(n);
    std::vector<double> act(m, 0.0);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i)
        if (sparse(rng)) {
          const double a = std::round(u(rng) * 4.0);
          if (a == 0.0) continue;
          cols[j].push_back({i, a});
          act[i] += a * x0[j];
        }
    for (int i = 0; i < m; ++i) {
      switch (rng() % 3) {
        case 0: lp.add_row(act[i], act[i]); break;
        case 1: lp.add_row(act[i] - 1.0, kInf); break;
        default: lp.add_row(-kInf, act[i] + 0.5); break;
      }
    }
    for (int j = 0; j < n; ++j) lp.add_column(u(rng) * 10.0, 0.0, rng() % 2 ? 1.0 : 3.0, cols[j]);
    const Status s = lp.solve();
    REQUIRE(s == Status::kOptimal);
    ++optimal;
    check_certificate(lp);
  }
  CHECK(optimal == 200);
}
