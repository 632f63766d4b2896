#include "evsp/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace evsp {

std::vector<std::vector<int>> split_cycles(const DepotGraph& g, std::span<const int> path) {
  std::vector<std::vector<int>> out(1);
  bool charged = false;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const NodeKind kind = g.nodes[path[k]].kind;
    out.back().push_back(path[k]);
    if (kind == NodeKind::kCharging) charged = true;
    if (kind == NodeKind::kWaiting && charged) {
      charged = false;
      if (k + 1 < path.size()) out.emplace_back();
    }
  }
  return out;
}

CycleFade cycle_fade(double begin, double mid, double end, const FadingParams& p) {
  for (double v : {begin, mid, end})
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("SoC anchor outside [0, 1]");
  const double avg = (begin + mid + end) / 3.0;
  const double dev = ((begin - mid) + (end - mid)) / 3.0;  // avg - mid, exactly 0 on flat cycles
  CycleFade f;
  f.rate = p.gamma1 * dev * std::exp(p.gamma2 * avg) + p.gamma3 * std::exp(p.gamma4 * dev);
  f.processed = ((begin - mid) + (end - mid)) * p.capacity_kwh;
  f.fade = f.processed * f.rate;
  return f;
}

double lifetime_years(const FadingParams& p, double yearly_fade_kwh) {
  if (yearly_fade_kwh <= 0.0) throw std::domain_error("yearly fade must be positive");
  return p.capacity_kwh * (1.0 - p.end_of_life) / yearly_fade_kwh;
}

FadingParams fading_for(const Instance& instance) {
  FadingParams p;
  p.capacity_kwh = instance.battery_kwh;
  return p;
}

DayOutcome simulate_day(const DepotGraph& g, const Instance& in, const ChargingFunction& charging,
                        std::span<const int> path, std::span<const int> draws, const FadingParams& params) {
  DayOutcome day;
  const SocPolicy& pol = in.policy;
  const auto pieces = split_cycles(g, path);
  double soc = pol.sigma_init;
  std::size_t trip_index = 0;
  int run = 0;
  int run_start = 0;
  int prev = -1;
  auto clamp01 = [](double pct) { return std::clamp(pct / 100.0, 0.0, 1.0); };

  for (std::size_t t = 0; t < pieces.size(); ++t) {
    Cycle c;
    c.nodes = pieces[t];
    c.begin = soc;
    double before_charge = soc;
    for (int v : pieces[t]) {
      if (prev < 0) {
        prev = v;
        continue;
      }
      const int arc = g.find_arc(prev, v);
      if (arc < 0) throw std::invalid_argument("schedule uses a missing arc");
      const int energy = g.arcs[arc].energy;
      const Node& node = g.nodes[v];
      if (node.kind == NodeKind::kCharging) {
        if (g.nodes[prev].kind != NodeKind::kCharging) {
          run = 0;
          run_start = std::max(0, static_cast<int>(std::lround(soc)) - energy);
          before_charge = run_start;
        }
        ++run;
        soc = charging.charge_intervals(std::min(run_start, charging.cap()), run);
      } else {
        soc -= energy;
        if (node.kind == NodeKind::kTrip) {
          if (trip_index >= draws.size()) throw std::invalid_argument("fewer draws than trips");
          soc -= draws[trip_index++];
        }
        if (soc < pol.sigma_low) day.overused = true;
        if (soc < pol.sigma_min) day.below_min = true;
      }
      prev = v;
    }
    const bool last = t + 1 == pieces.size();
    if (last) {
      c.mid = soc;
      c.end = pol.sigma_init;
    } else {
      c.mid = before_charge;
      c.end = soc;
    }
    const CycleFade f = cycle_fade(clamp01(c.begin), clamp01(std::min(c.mid, c.begin)), clamp01(c.end), params);
    day.fade += f.fade;
    c.begin /= 100.0;
    c.mid /= 100.0;
    c.end /= 100.0;
    day.cycles.push_back(std::move(c));
  }
  return day;
}

FadeEstimate monte_carlo_fade(const std::vector<Column>& schedules, const std::vector<DepotGraph>& graphs,
                              const Instance& in, const ChargingFunction& charging, int iterations,
                              std::uint64_t seed, const FadingParams& params) {
  if (iterations < 1) throw std::invalid_argument("at least one iteration is required");
  FadeEstimate est;
  est.iterations = iterations;
  const std::size_t n = schedules.size();
  est.schedule_daily_fade.assign(n, 0.0);
  est.within_range_frequency.assign(n, 0.0);
  est.overuse_events.assign(n, 0);
  est.below_min_events.assign(n, 0);
  if (n == 0) return est;

  // cumulative tables per trip
  std::vector<std::vector<double>> cumulative(in.trips.size());
  for (const Trip& t : in.trips) {
    double acc = 0.0;
    for (const auto& [mu, p] : t.energy.support) cumulative[t.id].push_back(acc += p);
  }
  std::vector<double> per_iteration(iterations, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const Column& col = schedules[s];
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> draws(col.trips.size());
    double total = 0.0;
    for (int k = 0; k < iterations; ++k) {
      for (std::size_t i = 0; i < col.trips.size(); ++i) {
        const Trip& trip = in.trips[col.trips[i]];
        if (trip.energy.is_point_mass()) {
          draws[i] = trip.energy.support.front().first;
          continue;
        }
        const auto& cum = cumulative[trip.id];
        const double u = unit(rng) * cum.back();
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        const std::size_t idx = std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
        draws[i] = trip.energy.support[idx].first;
      }
      const DayOutcome day = simulate_day(graphs.at(col.depot), in, charging, col.nodes, draws, params);
      total += day.fade;
      per_iteration[k] += day.fade / static_cast<double>(n);
      est.overuse_events[s] += day.overused;
      est.below_min_events[s] += day.below_min;
    }
    est.schedule_daily_fade[s] = total / iterations;
    est.within_range_frequency[s] = 1.0 - static_cast<double>(est.overuse_events[s]) / iterations;
  }
  // shifted by the first value so identical days give exactly zero variance
  const double shift = per_iteration.front();
  double mean_shifted = 0.0;
  for (double v : per_iteration) mean_shifted += v - shift;
  mean_shifted /= iterations;
  double var = 0.0;
  for (double v : per_iteration) var += (v - shift - mean_shifted) * (v - shift - mean_shifted);
  const double mean = shift + mean_shifted;
  est.daily_fade_per_vehicle = mean;
  est.yearly_fade_per_vehicle = 365.0 * mean;
  est.daily_fade_stderr = iterations > 1 ? std::sqrt(var / (iterations - 1) / iterations) : 0.0;
  return est;
}

}  // namespace evsp
