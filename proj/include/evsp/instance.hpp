#ifndef EVSP_INSTANCE_HPP
#define EVSP_INSTANCE_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evsp {

/// Raised when an instance file cannot be parsed. `field()` names the
/// offending key (JSON path), `line()` is 0 when no position is known.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, int line, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Raised when instance data breaks a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discrete energy consumption of a trip, in integer % of battery capacity.
struct EnergyPmf {
  // (consumption %, probability), sorted by consumption.
  std::vector<std::pair<int, double>> support;

  static EnergyPmf point_mass(int consumption) { return {{{consumption, 1.0}}}; }

  int max_consumption() const;
  int min_consumption() const;
  double total_probability() const;
  double mean() const;
  bool is_point_mass() const { return support.size() == 1; }
  void normalize();

  bool operator==(const EnergyPmf&) const = default;
};

struct Trip {
  int id = 0;
  int origin = 0;       // location index
  int destination = 0;  // location index
  int departure = 0;    // minutes from midnight
  int travel_time = 0;  // minutes
  EnergyPmf energy;
  // Perturbation caps on under/over-coverage of this trip.
  double under_cover_cap = 0.0;
  double over_cover_cap = 0.0;

  int arrival() const { return departure + travel_time; }
  bool operator==(const Trip&) const = default;
};

struct Depot {
  int id = 0;
  int location = 0;
  int capacity = 1;
  bool operator==(const Depot&) const = default;
};

struct ChargingStation {
  int id = 0;
  int location = 0;
  int chargers = 1;
  bool operator==(const ChargingStation&) const = default;
};

/// Deadhead travel time (minutes) and deterministic energy (%) between
/// every ordered pair of locations.
class TravelMatrix {
 public:
  TravelMatrix() = default;
  explicit TravelMatrix(int locations)
      : n_(locations), time_(locations * locations, 0), energy_(locations * locations, 0) {}

  int size() const { return n_; }
  int time(int from, int to) const { return time_[from * n_ + to]; }
  int energy(int from, int to) const { return energy_[from * n_ + to]; }
  void set(int from, int to, int minutes, int energy_pct) {
    time_[from * n_ + to] = minutes;
    energy_[from * n_ + to] = energy_pct;
  }

  bool operator==(const TravelMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<int> time_;
  std::vector<int> energy_;
};

/// State-of-charge bounds (integer %) and timing rules.
struct SocPolicy {
  int sigma_min = 0;
  int sigma_low = 20;
  int sigma_up = 80;
  int sigma_max = 100;
  int sigma_init = 80;
  double epsilon = 0.05;
  int interval_minutes = 15;
  int min_layover = 5;
  int max_terminal_wait = 45;

  bool operator==(const SocPolicy&) const = default;
};

struct CostParams {
  double vehicle = 1000.0;
  double deadhead_per_minute = 0.4;
  double waiting_per_minute = 0.2;
  double charging_activity = 10.0;
  double under_cover_penalty = 1.0;
  double over_cover_penalty = 1.0;

  bool operator==(const CostParams&) const = default;
};

/// One constant-power segment of a CC-CV charger: applies below `soc_upper`.
struct ChargerSegment {
  int soc_upper = 100;
  double kwh_per_minute = 7.5;
  bool operator==(const ChargerSegment&) const = default;
};

struct ChargerProfile {
  std::vector<ChargerSegment> segments;

  /// 450 kW fast charger: 7.5 / 6 / 3.75 kWh per minute below 80 / 90 / 100 %.
  static ChargerProfile fast_charger();
  bool operator==(const ChargerProfile&) const = default;
};

struct Instance {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::string> locations;
  std::vector<Trip> trips;
  std::vector<Depot> depots;
  std::vector<ChargingStation> stations;
  TravelMatrix travel;
  SocPolicy policy;
  CostParams costs;
  ChargerProfile charger = ChargerProfile::fast_charger();
  double battery_kwh = 300.0;
  int horizon_start = 300;
  int horizon_end = 1440;

  bool operator==(const Instance&) const = default;
};

/// Throws ValidationError naming the first broken invariant.
void validate(const Instance& instance);

/// Knobs of the synthetic single-line generator.
struct GeneratorOptions {
  SocPolicy policy;
  CostParams costs;
  double line_length_km = 8.5;
  int trip_minutes = 30;
  double deadhead_speed_kmh = 20.0;
  double deadhead_kwh_per_km = 1.83;
  double rate_location = 1.57;  // kWh/km
  double rate_scale = 0.26;     // kWh/km
  double variance_low = 0.35;
  double variance_high = 0.5;
  double truncation_sigmas = 4.0;
  int min_headway = 2;  // minutes between departures in one direction
  int horizon_start = 300;
  int horizon_end = 1440;
  int chargers = 1;
  int depot_capacity = 0;  // 0: one vehicle per trip
  double max_perturbation_cap = 0.1;
};

/// Mean consumption rate sampled for each trip (kWh/km), exposed for tests.
std::vector<double> sample_mean_rates(int count, std::uint64_t seed, const GeneratorOptions& options = {});

/// Discretizes N(mean_pct, sd_pct^2) on the integer grid [0, mean + k*sd].
EnergyPmf discretize_normal(double mean_pct, double sd_pct, double truncation_sigmas);

Instance generate_instance(int n_trips, std::uint64_t seed, const GeneratorOptions& options = {});

/// Replaces every PMF by a point mass on its largest consumption; epsilon = 0.
Instance worst_case_projection(const Instance& instance);

/// Applies a recommended SoC range [low, up] (sigma_init follows sigma_up).
Instance with_soc_range(const Instance& instance, int sigma_low, int sigma_up);

Instance read_instance(const std::filesystem::path& path);
Instance parse_instance(const std::string& text);
void write_instance(const Instance& instance, const std::filesystem::path& path);
std::string serialize_instance(const Instance& instance);

/// FNV-1a over the serialized instance.
std::uint64_t instance_hash(const Instance& instance);

}  // namespace evsp

#endif  // EVSP_INSTANCE_HPP
