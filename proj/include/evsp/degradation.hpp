#ifndef EVSP_DEGRADATION_HPP
#define EVSP_DEGRADATION_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "evsp/charging.hpp"
#include "evsp/column.hpp"
#include "evsp/instance.hpp"
#include "evsp/network.hpp"

namespace evsp {

/// Lam-style capacity fading: phi = g1 dev e^{g2 avg} + g3 e^{g4 dev},
/// in kWh lost per kWh processed.
struct FadingParams {
  double gamma1 = -4.092e-4;
  double gamma2 = -2.167;
  double gamma3 = 1.408e-5;
  double gamma4 = 6.130;
  double capacity_kwh = 300.0;
  double end_of_life = 0.8;  // retire at this fraction of the initial capacity
};

/// One discharge/charge cycle: node subsequence and SoC anchors (fractions).
struct Cycle {
  std::vector<int> nodes;
  double begin = 0.0;
  double mid = 0.0;
  double end = 0.0;
};

/// Cuts a node path after each waiting node that closes a charge run; the
/// last piece runs to the sink. Concatenating the pieces gives the path.
std::vector<std::vector<int>> split_cycles(const DepotGraph& graph, std::span<const int> path);

struct CycleFade {
  double rate = 0.0;   // phi, kWh per kWh processed
  double fade = 0.0;   // Phi, kWh
  double processed = 0.0;  // kWh charged plus discharged
};

/// Throws std::domain_error when an anchor lies outside [0, 1].
CycleFade cycle_fade(double begin, double mid, double end, const FadingParams& params);

/// capacity * (1 - end_of_life) / yearly fade.
double lifetime_years(const FadingParams& params, double yearly_fade_kwh);

/// One simulated day of a schedule with consumptions drawn per trip.
struct DayOutcome {
  std::vector<Cycle> cycles;
  double fade = 0.0;      // sum of Phi over the cycles, kWh
  bool overused = false;  // SoC fell below sigma_low at some node
  bool below_min = false; // SoC fell below sigma_min at some node
};

/// `draws[i]` is the consumption of the i-th trip of the path.
DayOutcome simulate_day(const DepotGraph& graph, const Instance& instance, const ChargingFunction& charging,
                        std::span<const int> path, std::span<const int> draws, const FadingParams& params);

struct FadeEstimate {
  int iterations = 0;
  double daily_fade_per_vehicle = 0.0;  // W / (K |S|), kWh
  double yearly_fade_per_vehicle = 0.0;
  double daily_fade_stderr = 0.0;       // over iterations, of the per-vehicle daily mean
  std::vector<double> schedule_daily_fade;
  std::vector<double> within_range_frequency;  // empirical P_s
  std::vector<long long> overuse_events;
  std::vector<long long> below_min_events;
};

/// Monte Carlo estimate of the daily capacity fade of a solution. Schedule
/// s uses its own stream seeded from (seed, s).
FadeEstimate monte_carlo_fade(const std::vector<Column>& schedules, const std::vector<DepotGraph>& graphs,
                              const Instance& instance, const ChargingFunction& charging, int iterations,
                              std::uint64_t seed, const FadingParams& params);

/// Fading parameters of an instance's battery.
FadingParams fading_for(const Instance& instance);

}  // namespace evsp

#endif  // EVSP_DEGRADATION_HPP
