#include <doctest.h>

#include <cmath>

#include "evsp/master.hpp"
#include "evsp/pricing.hpp"
#include "oracles.hpp"

using namespace evsp;

namespace {

struct Setup {
  Instance in;
  DepotGraph g;
  ChargingFunction ch;
  std::vector<Column> all;

  explicit Setup(Instance instance)
      : in(std::move(instance)), g(build_graph(in, 0)), ch(ChargingFunction::for_instance(in)) {
    for (const auto& s : oracle::enumerate_schedules(in, g)) all.push_back(make_column(g, in, ch, s.path));
  }
  int k() const { return static_cast<int>(g.intervals.size()); }
};

}  // namespace

TEST_CASE("chance right-hand side") {
  Instance in = oracle::tiny_instance(1);
  in.policy.epsilon = 0.05;
  CHECK(MasterProblem(in, 3).chance_rhs() == doctest::Approx(std::log(0.95)));
  in.policy.epsilon = 0.0;
  CHECK(MasterProblem(in, 3).chance_rhs() == 0.0);
  // two schedules at 0.99 each use 2 ln 0.99 of the budget and fit under ln 0.95
  CHECK(2.0 * std::log(0.99) >= std::log(0.95));
  CHECK(2.0 * std::log(0.99) == doctest::Approx(-0.0201007).epsilon(1e-6));
}

TEST_CASE("a single covering column prices at its cost") {
  oracle::TinyOptions opt;
  opt.trips = 1;
  Setup s(oracle::tiny_instance(3, opt));
  REQUIRE_FALSE(s.all.empty());
  Column cheapest = s.all.front();
  for (const Column& c : s.all)
    if (c.cost < cheapest.cost) cheapest = c;
  MasterProblem m(s.in, s.k());
  m.strip_perturbation();
  CHECK(m.add_columns({cheapest}) == 1);
  const RmpResult r = m.solve();
  REQUIRE(r.status == lp::Status::kOptimal);
  CHECK(r.objective == doctest::Approx(cheapest.cost));
  CHECK(r.y[0] == doctest::Approx(1.0));
  CHECK(r.artificial == doctest::Approx(0.0));
}

TEST_CASE("pool deduplicates by node sequence") {
  Setup s(oracle::tiny_instance(2));
  REQUIRE(s.all.size() >= 3);
  MasterProblem m(s.in, s.k());
  CHECK(m.add_columns({s.all[0], s.all[1], s.all[2]}) == 3);
  CHECK(m.add_columns({s.all[0], s.all[1]}) == 0);
  CHECK(m.add_columns({s.all[2], s.all[2]}) == 0);
  CHECK(m.columns().size() == 3);
}

TEST_CASE("objective never increases as columns are added") {
  Setup s(oracle::tiny_instance(6));
  MasterProblem m(s.in, s.k());
  double last = m.solve().objective;
  for (std::size_t k = 0; k < s.all.size(); k += 3) {
    std::vector<Column> batch(s.all.begin() + k, s.all.begin() + std::min(s.all.size(), k + 3));
    m.add_columns(batch);
    const RmpResult r = m.solve();
    REQUIRE(r.status == lp::Status::kOptimal);
    CHECK(r.objective <= last + 1e-7);
    last = r.objective;
  }
}

TEST_CASE("stripping the perturbation is idempotent and weakly raises the bound") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Setup s(oracle::tiny_instance(seed));
    MasterProblem m(s.in, s.k());
    m.add_columns(s.all);
    const double soft = m.solve().objective;
    m.strip_perturbation();
    const double hard = m.solve().objective;
    m.strip_perturbation();
    CHECK_FALSE(m.perturbation_active());
    const RmpResult again = m.solve();
    CHECK(again.objective == doctest::Approx(hard));
    CHECK(again.perturbation == 0.0);
    CHECK(hard >= soft - 1e-7);
    m.restore_perturbation();
    CHECK(m.solve().objective == doctest::Approx(soft));
  }
}

TEST_CASE("LP over all schedules: duality, signs and the integer bound") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    oracle::TinyOptions opt;
    opt.epsilon = seed % 2 ? 0.1 : 0.3;
    Setup s(oracle::tiny_instance(seed, opt));
    MasterProblem m(s.in, s.k());
    m.strip_perturbation();
    m.add_columns(s.all);
    const RmpResult r = m.solve();
    REQUIRE(r.status == lp::Status::kOptimal);
    CAPTURE(seed);
    CHECK(r.objective == doctest::Approx(r.dual_objective).epsilon(1e-9));
    for (double p : r.duals.depot) CHECK(p <= 1e-9);
    for (double a : r.duals.charger) CHECK(a <= 1e-9);
    CHECK(r.duals.chance >= -1e-9);
    for (std::size_t c = 0; c < s.all.size(); ++c) {
      const double rc = column_reduced_cost(s.all[c], r.duals, s.k());
      if (r.y[c] < 1.0 - 1e-9) CHECK(rc >= -1e-6);
      if (r.y[c] > 1e-9 && r.y[c] < 1.0 - 1e-9) CHECK(std::fabs(rc) <= 1e-6);
    }
    const auto best = oracle::best_partition(s.in, oracle::enumerate_schedules(s.in, s.g), s.k());
    if (best.feasible) {
      CHECK(r.artificial == doctest::Approx(0.0));
      CHECK(r.objective <= best.cost + 1e-6);
    }
  }
}

TEST_CASE("with epsilon 0 the chance row is redundant") {
  Setup s(worst_case_projection(oracle::tiny_instance(8)));
  for (const Column& c : s.all) CHECK(c.beta == 0.0);
  MasterProblem m(s.in, s.k());
  m.add_columns(s.all);
  const RmpResult r = m.solve();
  REQUIRE(r.status == lp::Status::kOptimal);
  CHECK(r.duals.chance == doctest::Approx(0.0));
}

TEST_CASE("column bounds and LP text") {
  Setup s(oracle::tiny_instance(2));
  MasterProblem m(s.in, s.k());
  m.add_columns({s.all[0]});
  m.set_column_bounds(0, 1.0, 1.0);
  CHECK(m.column_bounds(0) == std::pair{1.0, 1.0});
  const RmpResult r = m.solve();
  CHECK(r.y[0] == doctest::Approx(1.0));
  m.set_fleet_bounds(2.0, 3.0);
  CHECK(m.fleet_bounds() == std::pair{2.0, 3.0});
  const std::string text = m.lp_text();
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("chance_lo:") != std::string::npos);
  CHECK(text.find("fleet_lo:") != std::string::npos);
  CHECK(text.find("y_0") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
