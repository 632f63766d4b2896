#include "evsp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace evsp {

int EnergyPmf::max_consumption() const {
  int best = 0;
  for (const auto& [c, p] : support)
    if (p > 0.0) best = std::max(best, c);
  return best;
}

int EnergyPmf::min_consumption() const {
  int best = 100;
  for (const auto& [c, p] : support)
    if (p > 0.0) best = std::min(best, c);
  return best;
}

double EnergyPmf::total_probability() const {
  double total = 0.0;
  for (const auto& entry : support) total += entry.second;
  return total;
}

double EnergyPmf::mean() const {
  double m = 0.0;
  for (const auto& [c, p] : support) m += c * p;
  return m;
}

void EnergyPmf::normalize() {
  std::sort(support.begin(), support.end());
  const double total = total_probability();
  if (total <= 0.0) return;
  for (auto& entry : support) entry.second /= total;
}

ChargerProfile ChargerProfile::fast_charger() {
  return ChargerProfile{{{80, 7.5}, {90, 6.0}, {100, 3.75}}};
}

namespace {

std::string trip_tag(const Trip& trip) { return "trip " + std::to_string(trip.id); }

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace

void validate(const Instance& in) {
  const SocPolicy& p = in.policy;
  require(p.sigma_min >= 0 && p.sigma_max <= 100, "SoC bounds must lie in [0, 100]");
  require(p.sigma_min <= p.sigma_low && p.sigma_low <= p.sigma_up && p.sigma_up <= p.sigma_max,
          "SoC bounds must satisfy sigma_min <= sigma_low <= sigma_up <= sigma_max");
  require(p.sigma_init == p.sigma_up, "sigma_init must equal sigma_up");
  require(p.epsilon >= 0.0 && p.epsilon < 1.0, "epsilon must lie in [0, 1)");
  require(p.interval_minutes > 0, "interval length must be positive");
  require(p.min_layover >= 0 && p.max_terminal_wait >= 0, "layover and terminal wait must be non-negative");

  const CostParams& c = in.costs;
  require(c.vehicle >= 0 && c.deadhead_per_minute >= 0 && c.waiting_per_minute >= 0 &&
              c.charging_activity >= 0 && c.under_cover_penalty >= 0 && c.over_cover_penalty >= 0,
          "cost parameters must be non-negative");

  require(in.battery_kwh > 0.0, "battery capacity must be positive");
  require(in.horizon_end > in.horizon_start, "planning horizon must be non-empty");

  require(!in.charger.segments.empty(), "charger profile is empty");
  int previous_threshold = -1;
  double previous_rate = INFINITY;
  for (const auto& seg : in.charger.segments) {
    require(seg.soc_upper > previous_threshold, "charger thresholds must be strictly increasing");
    require(seg.kwh_per_minute > 0.0, "charger rates must be positive");
    require(seg.kwh_per_minute <= previous_rate, "charger rates must be non-increasing");
    previous_threshold = seg.soc_upper;
    previous_rate = seg.kwh_per_minute;
  }
  require(previous_threshold == 100, "charger profile must end at 100%");

  const int n_loc = static_cast<int>(in.locations.size());
  require(n_loc > 0, "no locations");
  require(in.travel.size() == n_loc, "travel matrix size does not match location count");
  for (int a = 0; a < n_loc; ++a) {
    require(in.travel.time(a, a) == 0 && in.travel.energy(a, a) == 0, "travel matrix diagonal must be 0");
    for (int b = 0; b < n_loc; ++b)
      require(in.travel.time(a, b) >= 0 && in.travel.energy(a, b) >= 0, "travel matrix entries must be >= 0");
  }
  auto valid_location = [n_loc](int l) { return l >= 0 && l < n_loc; };

  require(!in.depots.empty(), "at least one depot is required");
  for (std::size_t d = 0; d < in.depots.size(); ++d) {
    require(in.depots[d].id == static_cast<int>(d), "depot ids must be 0..n-1 in order");
    require(valid_location(in.depots[d].location), "depot location out of range");
    require(in.depots[d].capacity >= 1, "depot capacity must be >= 1");
  }
  for (std::size_t h = 0; h < in.stations.size(); ++h) {
    require(in.stations[h].id == static_cast<int>(h), "station ids must be 0..n-1 in order");
    require(valid_location(in.stations[h].location), "station location out of range");
    require(in.stations[h].chargers >= 1, "station charger count must be >= 1");
  }

  const int budget = p.sigma_up - p.sigma_min;
  for (std::size_t i = 0; i < in.trips.size(); ++i) {
    const Trip& t = in.trips[i];
    const std::string tag = trip_tag(t);
    require(t.id == static_cast<int>(i), tag + ": trip ids must be 0..n-1 in order");
    require(valid_location(t.origin) && valid_location(t.destination), tag + ": location out of range");
    require(t.departure >= 0, tag + ": negative departure time");
    require(t.travel_time > 0, tag + ": travel time must be positive");
    require(t.departure >= in.horizon_start && t.arrival() <= in.horizon_end, tag + ": outside the planning horizon");
    require(t.under_cover_cap >= 0 && t.over_cover_cap >= 0, tag + ": perturbation caps must be non-negative");
    require(!t.energy.support.empty(), tag + ": empty energy PMF");
    std::set<int> seen;
    for (const auto& [mu, prob] : t.energy.support) {
      require(mu >= 0 && mu <= 100, tag + ": consumption outside 0..100");
      require(seen.insert(mu).second, tag + ": duplicate consumption value");
      require(prob >= 0.0 && prob <= 1.0, tag + ": probability outside [0, 1]");
    }
    require(std::fabs(t.energy.total_probability() - 1.0) <= 1e-9, tag + ": energy probabilities do not sum to 1");
    const int worst = t.energy.max_consumption();
    require(worst <= budget, tag + ": worst-case consumption " + std::to_string(worst) +
                                 "% exceeds sigma_up - sigma_min = " + std::to_string(budget) + "%");
  }
}

namespace {

double draw_mean_rate(std::mt19937_64& rng, const GeneratorOptions& o) {
  std::exponential_distribution<double> exp(1.0 / o.rate_scale);
  return o.rate_location + exp(rng);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

std::vector<double> sample_mean_rates(int count, std::uint64_t seed, const GeneratorOptions& options) {
  std::mt19937_64 rng(seed);
  std::vector<double> rates(count);
  for (auto& r : rates) r = draw_mean_rate(rng, options);
  return rates;
}

EnergyPmf discretize_normal(double mean_pct, double sd_pct, double truncation_sigmas) {
  const int top = std::max(0, round_half_up(mean_pct + truncation_sigmas * sd_pct));
  EnergyPmf pmf;
  if (sd_pct <= 0.0) {
    pmf.support.emplace_back(std::max(0, round_half_up(mean_pct)), 1.0);
    return pmf;
  }
  double previous = 0.0;  // mass below the first bucket folds into bucket 0
  for (int k = 0; k <= top; ++k) {
    const double upper = k == top ? 1.0 : normal_cdf((k + 0.5 - mean_pct) / sd_pct);
    const double mass = upper - previous;
    previous = upper;
    if (mass > 0.0) pmf.support.emplace_back(k, mass);
  }
  pmf.normalize();
  return pmf;
}

Instance generate_instance(int n_trips, std::uint64_t seed, const GeneratorOptions& o) {
  if (n_trips < 1) throw ValidationError("n_trips must be >= 1");
  const int span = o.horizon_end - o.trip_minutes - o.horizon_start;
  if (span <= 0) throw ValidationError("trip duration does not fit the horizon");
  const double step = static_cast<double>(span) / n_trips;
  // consecutive departures alternate direction, so one direction sees 2*step
  if (n_trips > 1 && 2.0 * step < o.min_headway)
    throw ValidationError("cannot fit " + std::to_string(n_trips) + " trips in the horizon with a " +
                          std::to_string(o.min_headway) + "-minute headway");

  Instance in;
  in.name = "line-" + std::to_string(n_trips) + "-" + std::to_string(seed);
  in.seed = seed;
  in.policy = o.policy;
  in.costs = o.costs;
  in.horizon_start = o.horizon_start;
  in.horizon_end = o.horizon_end;
  in.locations = {"terminus_a", "terminus_b", "depot", "charging_station"};
  const std::vector<double> position = {0.0, o.line_length_km, 0.0, 0.0};
  in.travel = TravelMatrix(4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double km = std::fabs(position[a] - position[b]);
      const int minutes = round_half_up(km / o.deadhead_speed_kmh * 60.0);
      const int energy = round_half_up(km * o.deadhead_kwh_per_km / in.battery_kwh * 100.0);
      in.travel.set(a, b, minutes, energy);
    }
  in.depots.push_back({0, 2, o.depot_capacity > 0 ? o.depot_capacity : n_trips});
  in.stations.push_back({0, 3, o.chargers});

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> variance(o.variance_low, o.variance_high);
  std::uniform_real_distribution<double> cap(0.0, o.max_perturbation_cap);
  const double shift = unit(rng);

  const int budget = o.policy.sigma_up - o.policy.sigma_min;
  for (int k = 0; k < n_trips; ++k) {
    Trip t;
    t.id = k;
    t.origin = k % 2 == 0 ? 0 : 1;
    t.destination = 1 - t.origin;
    t.departure = o.horizon_start + static_cast<int>(std::floor((k + shift) * step));
    t.travel_time = o.trip_minutes;
    const double rate = draw_mean_rate(rng, o);
    const double var = variance(rng);
    const double mean_pct = rate * o.line_length_km / in.battery_kwh * 100.0;
    const double sd_pct = std::sqrt(var) * o.line_length_km / in.battery_kwh * 100.0;
    t.energy = discretize_normal(mean_pct, sd_pct, o.truncation_sigmas);
    t.under_cover_cap = cap(rng);
    t.over_cover_cap = cap(rng);
    if (t.energy.max_consumption() > budget)
      throw ValidationError("trip " + std::to_string(k) + ": worst-case consumption exceeds sigma_up - sigma_min");
    in.trips.push_back(std::move(t));
  }
  validate(in);
  return in;
}

Instance worst_case_projection(const Instance& instance) {
  Instance out = instance;
  for (auto& t : out.trips) t.energy = EnergyPmf::point_mass(t.energy.max_consumption());
  out.policy.epsilon = 0.0;
  return out;
}

Instance with_soc_range(const Instance& instance, int sigma_low, int sigma_up) {
  Instance out = instance;
  out.policy.sigma_low = sigma_low;
  out.policy.sigma_up = sigma_up;
  out.policy.sigma_init = sigma_up;
  return out;
}

std::uint64_t instance_hash(const Instance& instance) {
  const std::string text = serialize_instance(instance);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << serialize_instance(instance);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Instance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

}  // namespace evsp
