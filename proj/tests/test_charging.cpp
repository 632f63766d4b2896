#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "evsp/charging.hpp"
#include "oracles.hpp"

using namespace evsp;

namespace {

ChargingFunction uncapped(int max_intervals = 8) {
  return ChargingFunction(ChargerProfile::fast_charger(), 300.0, 100, 15, max_intervals);
}

}  // namespace

TEST_CASE("fast charger fills an empty 300 kWh battery in 45 minutes") {
  const ChargingFunction f = uncapped();
  CHECK(f.charge(0, 45) == 100);
  CHECK(f.charge_intervals(0, 3) == 100);
  // 80 % takes 32 min at 7.5 kWh/min, 90 % two more at 6, 100 % eight more at 3.75
  CHECK(f.integrate(0, 32) == doctest::Approx(80.0));
  CHECK(f.integrate(0, 37) == doctest::Approx(90.0));
  CHECK(f.integrate(0, 45) == doctest::Approx(100.0));
}

TEST_CASE("frozen charge values") {
  const ChargingFunction f = uncapped();
  CHECK(f.charge(80, 0) == 80);
  CHECK(f.charge(0, 15) == 38);  // 112.5 kWh = 37.5 %, rounded half up
  CHECK(f.charge(50, 15) == 86);
  CHECK(f.charge(85, 15) == 100);
}

TEST_CASE("the cap absorbs everything above it") {
  const ChargingFunction f(ChargerProfile::fast_charger(), 300.0, 80, 15, 4);
  CHECK(f.charge(0, 45) == 80);
  CHECK(f.charge(79, 15) == 80);
  const auto pre = f.preimage(80, 1);
  // every SoC that reaches 80 within 15 minutes
  for (int x = 0; x <= 80; ++x)
    CHECK((std::find(pre.begin(), pre.end(), x) != pre.end()) == (f.charge(x, 15) == 80));
  CHECK(pre.front() == 42);  // 42 + 37.5 rounds up to 80
}

TEST_CASE("preimages invert the table") {
  const ChargingFunction f = uncapped();
  const auto pre = f.preimage(38, 1);
  REQUIRE(pre.size() == 1);
  CHECK(pre[0] == 0);
  for (int x = 0; x <= 100; ++x) {
    const auto id = f.preimage(x, 0);
    REQUIRE(id.size() == 1);
    CHECK(id[0] == x);
  }
  // a value no grid point maps to has an empty preimage
  CHECK(f.preimage(1, 1).empty());
  for (int m = 0; m <= 4; ++m) {
    std::size_t total = 0;
    for (int y = 0; y <= 100; ++y) {
      for (int x : f.preimage(y, m)) CHECK(f.charge_intervals(x, m) == y);
      total += f.preimage(y, m).size();
    }
    CHECK(total == 101);
  }
}

TEST_CASE("charge is monotone in SoC and in duration") {
  const ChargingFunction f = uncapped(12);
  for (int m = 0; m <= 12; ++m)
    for (int x = 0; x <= 100; ++x) {
      if (x > 0) CHECK(f.charge_intervals(x, m) >= f.charge_intervals(x - 1, m));
      if (m > 0) CHECK(f.charge_intervals(x, m) >= f.charge_intervals(x, m - 1));
      CHECK(f.charge_intervals(x, m) >= x);
    }
}

TEST_CASE("table agrees with an independent segment integration") {
  const Instance in = generate_instance(4, 1);
  for (int cap : {80, 100}) {
    const ChargingFunction f(in.charger, in.battery_kwh, cap, 15, 6);
    for (int m = 0; m <= 6; ++m)
      for (int x = 0; x <= cap; ++x) CHECK(f.charge_intervals(x, m) == oracle::lambda(in, x, 15 * m, cap));
  }
}

TEST_CASE("out-of-range SoC is a domain error") {
  const ChargingFunction f(ChargerProfile::fast_charger(), 300.0, 80, 15, 4);
  CHECK_THROWS_AS(f.charge(81, 15), std::domain_error);
  CHECK_THROWS_AS(f.charge(-1, 15), std::domain_error);
  CHECK_THROWS_AS(ChargingFunction(ChargerProfile::fast_charger(), 300.0, 80, 0, 4), std::invalid_argument);
}

TEST_CASE("for_instance caps at the recommended upper bound") {
  const Instance in = generate_instance(4, 1);
  const ChargingFunction f = ChargingFunction::for_instance(in);
  CHECK(f.cap() == std::min(in.policy.sigma_up, in.policy.sigma_max));
  CHECK(f.interval_minutes() == in.policy.interval_minutes);
}
