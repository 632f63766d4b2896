// Acceptance run: one PASS/FAIL line per criterion on stdout, details on stderr.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>

#include "evsp/bnp.hpp"
#include "evsp/degradation.hpp"
#include "evsp/pricing.hpp"
#include "evsp/probability.hpp"
#include "oracles.hpp"

using namespace evsp;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass = false;
  std::string summary;
};

// Solutions collected for the chance-row check.
struct Solved {
  std::string label;
  Instance instance;
  Solution solution;
};
std::vector<Solved> g_solved;

void keep(const std::string& label, const Instance& in, const SolveResult& r) {
  if (r.has_solution) g_solved.push_back({label, in, r.solution});
}

std::vector<DepotGraph> graphs_of(const Instance& in) {
  std::vector<DepotGraph> g;
  for (int d = 0; d < static_cast<int>(in.depots.size()); ++d) g.push_back(build_graph(in, d));
  return g;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Branch-and-price against exhaustive set partitioning on tiny instances.
Verdict oracle_optimality() {
  const auto t0 = Clock::now();
  int matched = 0, dive_matched = 0, feasible = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    oracle::TinyOptions opt;
    opt.trips = 4 + static_cast<int>(seed % 3);
    opt.intervals = 3;
    opt.epsilon = std::array{0.0, 0.05, 0.1, 0.3}[seed % 4];
    const Instance in = oracle::tiny_instance(100 + seed, opt);
    const DepotGraph g = build_graph(in, 0);
    const auto best = oracle::best_partition(in, oracle::enumerate_schedules(in, g), static_cast<int>(g.intervals.size()));
    SolveOptions so;
    so.complete_search = true;
    const SolveResult exact = solve(in, so);
    const SolveResult dive = solve(in, {});
    keep("tiny " + std::to_string(seed), in, exact);
    bool ok = false;
    if (!best.feasible) {
      ok = !exact.has_solution;
      dive_matched += !dive.has_solution;
    } else {
      ++feasible;
      if (exact.has_solution) {
        const double diff = std::fabs(exact.solution.cost - best.cost);
        worst = std::max(worst, diff);
        ok = diff <= 1e-6;
      }
      dive_matched += dive.has_solution && std::fabs(dive.solution.cost - best.cost) <= 1e-6;
    }
    matched += ok;
    std::cerr << fmt("  [1] seed %2d trips %d eps %.2f oracle %s %.4f  bnp %s %.4f  dive %.4f\n", (int)seed, opt.trips,
                     opt.epsilon, best.feasible ? "opt" : "infeasible", best.cost, to_string(exact.status),
                     exact.solution.cost, dive.solution.cost);
  }
  const double secs = since(t0);
  return {matched == 20 && secs < 300.0,
          fmt("%d/20 match the exhaustive optimum (%d feasible, max |diff| %.2e, plain dive %d/20), %.1f s", matched,
              feasible, worst, dive_matched, secs)};
}

// 2. schedule_probability against brute force over the joint support.
Verdict probability_exactness() {
  std::mt19937_64 rng(7);
  int checked = 0, stochastic = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; checked < 100 && seed < 1000; ++seed) {
    const Instance in = oracle::wide_instance(seed);
    const DepotGraph g = build_graph(in, 0);
    const ChargingFunction f = ChargingFunction::for_instance(in);
    for (int tries = 0; tries < 30 && checked < 100; ++tries) {
      const auto path = oracle::random_walk(g, rng);
      if (path.empty() || !oracle::path_is_feasible_deterministic(in, g, path)) continue;
      int random_trips = 0;
      for (int v : path)
        if (g.nodes[v].kind == NodeKind::kTrip) random_trips += !in.trips[g.nodes[v].trip].energy.is_point_mass();
      if (random_trips > 4) continue;
      const double expected = oracle::path_probability(in, g, path);
      worst = std::max(worst, std::fabs(schedule_probability(path, g, in, f) - expected));
      stochastic += expected < 1.0;
      ++checked;
    }
  }
  return {checked == 100 && worst <= 1e-12,
          fmt("%d paths (%d with P < 1), max |diff| %.2e", checked, stochastic, worst)};
}

// P(X >= k) for X ~ Binomial(n, q).
double binomial_upper_tail(long long n, double q, long long k) {
  double below = 0.0;
  for (long long j = 0; j < k; ++j)
    below += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) + j * std::log(q) +
                      (n - j) * std::log1p(-q));
  return std::max(0.0, 1.0 - below);
}

// 3. Simulated within-range frequency against P_s for 50 solved schedules.
Verdict monte_carlo_consistency() {
  const int draws = 100000;
  int checked = 0, inside = 0, below_one = 0;
  double worst_z = 0.0;
  std::string outliers;
  for (std::uint64_t seed = 1; checked < 50 && seed < 40; ++seed) {
    Instance in = with_soc_range(generate_instance(24, seed), 30, 80);
    in.policy.epsilon = 0.3;
    const SolveResult r = solve(in, {});
    keep("mc " + std::to_string(seed), in, r);
    if (!r.has_solution) continue;
    const auto graphs = graphs_of(in);
    const ChargingFunction f = ChargingFunction::for_instance(in);
    std::vector<Column> cols = r.solution.schedules;
    if (static_cast<int>(cols.size()) > 50 - checked) cols.resize(50 - checked);
    const FadeEstimate est = monte_carlo_fade(cols, graphs, in, f, draws, 1000 + seed, fading_for(in));
    for (std::size_t s = 0; s < cols.size(); ++s) {
      const double p = cols[s].probability();
      const double se = std::sqrt(p * (1.0 - p) / draws);
      const double diff = std::fabs(est.within_range_frequency[s] - p);
      const bool ok = diff <= 3.0 * se + 1e-12;
      inside += ok;
      below_one += p < 1.0 - 1e-9;
      if (se > 0.0) worst_z = std::max(worst_z, diff / se);
      ++checked;
      if (!ok) {
        // exact tail of the observed count, then a longer run of the same schedule
        const long long events = est.overuse_events[s];
        const double tail = binomial_upper_tail(draws, 1.0 - p, events);
        const std::vector<Column> one{cols[s]};
        const int long_draws = 10000000;
        const FadeEstimate again = monte_carlo_fade(one, graphs, in, f, long_draws, 5000 + seed, fading_for(in));
        const double long_se = std::sqrt(p * (1.0 - p) / long_draws);
        outliers += fmt("; outlier: %lld overuse days where %.2f expected (binomial tail %.3f), 1e7-day rerun z %.2f",
                        events, (1.0 - p) * draws, tail,
                        std::fabs(again.within_range_frequency[0] - p) / long_se);
      }
      std::cerr << fmt("  [3] seed %2d schedule %zu  P %.6f  simulated %.6f  se %.2e %s\n", (int)seed, s, p,
                       est.within_range_frequency[s], se, ok ? "" : "OUTSIDE");
    }
  }
  return {checked == 50 && inside == 50,
          fmt("%d/%d schedules within 3 SE over 1e5 days (%d with P < 1, max |z| %.2f)", inside, checked, below_one,
              worst_z) +
              outliers};
}

// 4. Worst-case (epsilon 0) schedules never leave the range under the real PMFs.
Verdict deterministic_safety() {
  const int draws = 100000;
  long long events = 0, days = 0;
  int schedules = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
    for (auto [low, up] : {std::pair{20, 80}, std::pair{30, 80}}) {
      const Instance real = with_soc_range(generate_instance(30, seed), low, up);
      const Instance worst = worst_case_projection(real);
      const SolveResult r = solve(worst, {});
      keep(fmt("safety %d %d-%d", (int)seed, low, up), worst, r);
      if (!r.has_solution) return {false, fmt("no worst-case solution for seed %d", (int)seed)};
      const ChargingFunction f = ChargingFunction::for_instance(real);
      const FadeEstimate est = monte_carlo_fade(r.solution.schedules, graphs_of(real), real, f, draws, seed, fading_for(real));
      for (long long e : est.overuse_events) events += e;
      schedules += static_cast<int>(r.solution.schedules.size());
      days += static_cast<long long>(draws) * static_cast<long long>(r.solution.schedules.size());
    }
  return {events == 0, fmt("%lld overuse events in %lld simulated schedule-days (%d schedules)", events, days, schedules)};
}

// 5. Dominance never changes the minimum reduced cost.
Verdict dominance_exactness() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int vectors = 0, equal = 0, negative = 0;
  double worst = 0.0;
  long long with_labels = 0, without_labels = 0;
  for (std::uint64_t seed = 1; vectors < 100; ++seed) {
    const Instance in = oracle::tiny_instance(seed, {6, 3, seed % 2 ? 0.1 : 0.3});
    const DepotGraph g = build_graph(in, 0);
    const ChargingFunction f = ChargingFunction::for_instance(in);
    for (int k = 0; k < 10; ++k, ++vectors) {
      DualPrices d = DualPrices::zero(6, 1, static_cast<int>(g.intervals.size()));
      for (double& x : d.trip) x = 900.0 * u(rng);
      d.depot[0] = -60.0 * u(rng);
      for (double& x : d.charger) x = u(rng) < 0.5 ? 0.0 : -30.0 * u(rng);
      d.chance = 400.0 * u(rng);
      PricingOptions on, off;
      off.use_dominance = false;
      const auto a = solve_pricing(g, in, f, d, on);
      const auto b = solve_pricing(g, in, f, d, off);
      const double diff = std::fabs(a.min_reduced_cost - b.min_reduced_cost);
      worst = std::max(worst, diff);
      equal += diff <= 1e-9;
      negative += a.min_reduced_cost < -1e-6;
      with_labels += a.labels;
      without_labels += b.labels;
    }
  }
  return {equal == vectors, fmt("%d/%d dual vectors agree (%d negative minima, max |diff| %.2e, labels %lld vs %lld)",
                                equal, vectors, negative, worst, with_labels, without_labels)};
}

// 6. Joint probability of every integer solution found in this run.
Verdict chance_row_algebra() {
  int ok = 0;
  double worst = 0.0;
  for (const Solved& s : g_solved) {
    const auto graphs = graphs_of(s.instance);
    const ChargingFunction f = ChargingFunction::for_instance(s.instance);
    double product = 1.0, beta = 0.0;
    for (const Column& c : s.solution.schedules) {
      product *= schedule_probability(c.nodes, graphs[c.depot], s.instance, f);
      beta += c.beta;
    }
    const double diff = std::fabs(product - std::exp(beta));
    worst = std::max(worst, diff);
    const bool good = product >= 1.0 - s.instance.policy.epsilon - 1e-12 && diff <= 1e-12;
    if (!good) std::cerr << fmt("  [6] %s: product %.15f exp(sum beta) %.15f\n", s.label.c_str(), product, std::exp(beta));
    ok += good;
  }
  const int n = static_cast<int>(g_solved.size());
  return {n > 0 && ok == n, fmt("%d/%d integer solutions satisfy the bound, max |prod - exp(sum beta)| %.2e", ok, n, worst)};
}

// 7. Charger profile.
Verdict charging_profile() {
  const ChargingFunction full(ChargerProfile::fast_charger(), 300.0, 100, 15, 60);
  const int at45 = full.charge(0, 45);
  bool monotone = true;
  int checks = 0;
  for (const ChargingFunction& f : {full, ChargingFunction(ChargerProfile::fast_charger(), 300.0, 80, 15, 60)}) {
    for (int soc = 0; soc <= f.cap(); ++soc)
      for (int m = 0; m <= 600; ++m) {
        const int v = f.charge(soc, m);
        if (soc > 0 && v < f.charge(soc - 1, m)) monotone = false;
        if (m > 0 && v < f.charge(soc, m - 1)) monotone = false;
        if (v < soc || v > f.cap()) monotone = false;
        ++checks;
      }
    for (int soc = 0; soc <= f.cap(); ++soc)
      for (int k = 0; k <= f.max_intervals(); ++k) {
        if (f.charge_intervals(soc, k) != f.charge(soc, k * f.interval_minutes())) monotone = false;
        ++checks;
      }
  }
  return {at45 == 100 && monotone,
          fmt("lambda(0, 45 min) = %d%%, monotone %s over %d grid points", at45, monotone ? "yes" : "no", checks)};
}

// 8. Degradation anchors.
Verdict degradation_anchors() {
  const FadingParams p;
  bool flat = true;
  for (int s = 0; s <= 100; ++s) flat = flat && cycle_fade(s / 100.0, s / 100.0, s / 100.0, p).rate == 1.408e-5;
  const double ten = lifetime_years(p, 10.0), fourteen = lifetime_years(p, 14.0);
  return {flat && std::fabs(ten - 6.0) <= 0.1 && std::fabs(fourteen - 4.3) <= 0.1,
          fmt("flat cycles phi == gamma3: %s; lifetime %.3f y at 10 kWh/y, %.3f y at 14 kWh/y", flat ? "yes" : "no",
              ten, fourteen)};
}

struct TrendRun {
  double cost = 0.0;
  int vehicles = 0;
  double yearly_fade = 0.0;
  double gap = 0.0;
  double final_gap = 0.0;
  double seconds = 0.0;
  bool solved = false;
};

std::map<std::tuple<int, int, double>, TrendRun> g_trend;  // (seed, low, eps)

void run_trend_grid(int trips, double time_limit, int fade_draws) {
  if (!g_trend.empty()) return;
  for (int seed = 1; seed <= 5; ++seed)
    for (int low : {20, 30})
      for (double eps : {0.0, 0.05}) {
        const Instance real = with_soc_range(generate_instance(trips, seed), low, 80);
        Instance in = eps == 0.0 ? worst_case_projection(real) : real;
        if (eps > 0.0) in.policy.epsilon = eps;
        SolveOptions so;
        so.time_limit_seconds = time_limit;
        const SolveResult r = solve(in, so);
        keep(fmt("trend %d %d-80 eps %.2f", seed, low, eps), in, r);
        TrendRun t;
        t.solved = r.status == SolveStatus::kSolved || r.status == SolveStatus::kLimitWithSolution;
        t.seconds = r.stats.total_seconds;
        t.gap = r.stats.gap_pct;
        t.final_gap = r.stats.final_gap_pct;
        if (r.has_solution) {
          t.cost = r.solution.cost;
          t.vehicles = static_cast<int>(r.solution.schedules.size());
          const ChargingFunction f = ChargingFunction::for_instance(real);
          t.yearly_fade = monte_carlo_fade(r.solution.schedules, graphs_of(real), real, f, fade_draws, 77,
                                           fading_for(real))
                              .yearly_fade_per_vehicle;
        }
        std::cerr << fmt("  [9] seed %d range %d-80 eps %.2f: %s cost %.1f  vehicles %d  root LP %.1f  gap %.2f%%  "
                         "proven gap %.2f%%  fade %.3f kWh/y  %.1f s\n",
                         seed, low, eps, to_string(r.status), t.cost, t.vehicles, r.stats.root_lower_bound, t.gap,
                         t.final_gap, t.yearly_fade, t.seconds);
        g_trend[{seed, low, eps}] = t;
      }
}

// 9. Table-5 and fading directions.
Verdict trends() {
  int cost_ok = 0, cost_total = 0, unsolved = 0;
  std::map<std::pair<int, double>, double> vehicles, fade;
  for (const auto& [key, t] : g_trend) {
    const auto [seed, low, eps] = key;
    unsolved += !t.solved;
    vehicles[{low, eps}] += t.vehicles / 5.0;
    fade[{low, eps}] += t.yearly_fade / 5.0;
    if (eps == 0.05) {
      ++cost_total;
      cost_ok += t.cost <= g_trend.at({seed, low, 0.0}).cost + 1e-6;
    }
  }
  bool ebs = true, fading = true;
  for (int low : {20, 30}) ebs = ebs && vehicles[{low, 0.05}] <= vehicles[{low, 0.0}] + 1e-9;
  for (double eps : {0.0, 0.05}) fading = fading && fade[{30, eps}] < fade[{20, eps}];
  return {unsolved == 0 && cost_ok == cost_total && ebs && fading,
          fmt("cost(0.05) <= cost(0) in %d/%d; mean EBs 20-80: %.1f -> %.1f, 30-80: %.1f -> %.1f; "
              "mean yearly fade eps 0: %.3f (20-80) vs %.3f (30-80), eps 0.05: %.3f vs %.3f kWh",
              cost_ok, cost_total, vehicles[{20, 0.0}], vehicles[{20, 0.05}], vehicles[{30, 0.0}],
              vehicles[{30, 0.05}], fade[{20, 0.0}], fade[{30, 0.0}], fade[{20, 0.05}], fade[{30, 0.05}])};
}

// 10. Gap between the incumbent and the root LP.
Verdict solver_quality() {
  double worst = 0.0, mean = 0.0, worst_final = 0.0, slowest = 0.0;
  int within = 0;
  for (const auto& [key, t] : g_trend) {
    worst = std::max(worst, t.gap);
    mean += t.gap / static_cast<double>(g_trend.size());
    worst_final = std::max(worst_final, t.final_gap);
    slowest = std::max(slowest, t.seconds);
    within += t.solved && t.gap <= 1.0;
  }
  const int n = static_cast<int>(g_trend.size());
  return {within == n && slowest <= 600.0,
          fmt("%d/%d runs with gap <= 1%% (mean %.2f%%, max %.2f%%); max gap to the vehicle-split bound %.2f%%; "
              "slowest run %.1f s",
              within, n, mean, worst, worst_final, slowest)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::set<int> only;
  int trips = 60;
  double time_limit = 600.0;
  int fade_draws = 5000;
  app.add_option("--only", only, "Run only these criteria (1-10)");
  app.add_option("--trips", trips, "Trips of the trend and gap instances");
  app.add_option("--time-limit", time_limit, "Seconds per trend solve");
  app.add_option("--fade-draws", fade_draws, "Simulated days per trend solution");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"oracle optimality", oracle_optimality},
      {"probability exactness", probability_exactness},
      {"Monte Carlo consistency", monte_carlo_consistency},
      {"deterministic safety", deterministic_safety},
      {"dominance exactness", dominance_exactness},
      {"chance-row algebra", nullptr},
      {"charging profile", charging_profile},
      {"degradation anchors", degradation_anchors},
      {"trend reproduction", [&] { run_trend_grid(trips, time_limit, fade_draws); return trends(); }},
      {"solver quality", [&] { run_trend_grid(trips, time_limit, fade_draws); return solver_quality(); }},
  };
  // the chance-row check reads every solution found, so it runs last
  std::vector<std::pair<int, Verdict>> results;
  for (int k = 0; k < static_cast<int>(criteria.size()); ++k) {
    if (!criteria[k].second || (!only.empty() && !only.count(k + 1))) continue;
    const auto t0 = Clock::now();
    Verdict v = criteria[k].second();
    std::cerr << fmt("  criterion %d took %.1f s\n", k + 1, since(t0));
    results.push_back({k, std::move(v)});
  }
  if (only.empty() || only.count(6)) results.push_back({5, chance_row_algebra()});
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  int failed = 0;
  for (const auto& [k, v] : results) {
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << k + 1 << "] " << criteria[k].first << ": " << v.summary << '\n';
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
