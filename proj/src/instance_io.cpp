// JSON encoding of Instance. Units are carried in the key names.

#include <algorithm>
#include <string>

#include "evsp/instance.hpp"
#include "json.hpp"

namespace evsp {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormat = "evsp-instance/1";

int line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Best-effort line of a dotted key path: each named component is searched
// forward from the previous hit.
int line_of_path(const std::string& text, const std::string& path) {
  std::size_t pos = 0;
  std::size_t found = std::string::npos;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('.', start);
    if (end == std::string::npos) end = path.size();
    std::string component = path.substr(start, end - start);
    const auto bracket = component.find('[');
    if (bracket != std::string::npos) component = component.substr(0, bracket);
    if (!component.empty()) {
      const auto hit = text.find("\"" + component + "\"", pos);
      if (hit == std::string::npos) break;
      found = hit;
      pos = hit + 1;
    }
    start = end + 1;
  }
  return found == std::string::npos ? 0 : line_at(text, found);
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& why) const {
    const int line = line_of_path(text_, path);
    std::string message = "parse error: field '" + path + "'";
    if (line > 0) message += " (near line " + std::to_string(line) + ")";
    message += ": " + why;
    throw ParseError(path, line, message);
  }

  const Json& at(const Json& obj, const std::string& parent, const std::string& key) const {
    const std::string path = parent.empty() ? key : parent + "." + key;
    if (!obj.is_object()) fail(parent, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) {
      // report the line of the enclosing object when the key is absent
      const int line = line_of_path(text_, parent);
      std::string message = "parse error: missing field '" + path + "'";
      if (line > 0) message += " (object near line " + std::to_string(line) + ")";
      throw ParseError(path, line, message);
    }
    return *it;
  }

  int integer(const Json& obj, const std::string& parent, const std::string& key) const {
    const Json& v = at(obj, parent, key);
    if (!v.is_number_integer()) fail(join(parent, key), "expected an integer");
    return v.get<int>();
  }

  double real(const Json& obj, const std::string& parent, const std::string& key) const {
    const Json& v = at(obj, parent, key);
    if (!v.is_number()) fail(join(parent, key), "expected a number");
    return v.get<double>();
  }

  std::string string(const Json& obj, const std::string& parent, const std::string& key) const {
    const Json& v = at(obj, parent, key);
    if (!v.is_string()) fail(join(parent, key), "expected a string");
    return v.get<std::string>();
  }

  const Json& array(const Json& obj, const std::string& parent, const std::string& key) const {
    const Json& v = at(obj, parent, key);
    if (!v.is_array()) fail(join(parent, key), "expected an array");
    return v;
  }

  static std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
  }

 private:
  const std::string& text_;
};

std::string indexed(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

}  // namespace

std::string serialize_instance(const Instance& in) {
  Json j;
  j["format"] = kFormat;
  j["name"] = in.name;
  j["seed"] = in.seed;
  j["battery_capacity_kwh"] = in.battery_kwh;
  j["horizon"] = {{"start_min", in.horizon_start}, {"end_min", in.horizon_end}};
  const SocPolicy& p = in.policy;
  j["soc_policy"] = {{"sigma_min_pct", p.sigma_min},
                     {"sigma_low_pct", p.sigma_low},
                     {"sigma_up_pct", p.sigma_up},
                     {"sigma_max_pct", p.sigma_max},
                     {"sigma_init_pct", p.sigma_init},
                     {"epsilon", p.epsilon},
                     {"interval_min", p.interval_minutes},
                     {"min_layover_min", p.min_layover},
                     {"max_terminal_wait_min", p.max_terminal_wait}};
  const CostParams& c = in.costs;
  j["costs"] = {{"vehicle", c.vehicle},
                {"deadhead_per_min", c.deadhead_per_minute},
                {"waiting_per_min", c.waiting_per_minute},
                {"charging_activity", c.charging_activity},
                {"under_cover_penalty", c.under_cover_penalty},
                {"over_cover_penalty", c.over_cover_penalty}};
  Json profile = Json::array();
  for (const auto& seg : in.charger.segments)
    profile.push_back({{"soc_upper_pct", seg.soc_upper}, {"rate_kwh_per_min", seg.kwh_per_minute}});
  j["charger_profile"] = profile;
  j["locations"] = in.locations;
  Json times = Json::array(), energies = Json::array();
  for (int a = 0; a < in.travel.size(); ++a) {
    Json trow = Json::array(), erow = Json::array();
    for (int b = 0; b < in.travel.size(); ++b) {
      trow.push_back(in.travel.time(a, b));
      erow.push_back(in.travel.energy(a, b));
    }
    times.push_back(trow);
    energies.push_back(erow);
  }
  j["travel"] = {{"time_min", times}, {"energy_pct", energies}};
  Json depots = Json::array();
  for (const auto& d : in.depots)
    depots.push_back({{"id", d.id}, {"location", d.location}, {"capacity", d.capacity}});
  j["depots"] = depots;
  Json stations = Json::array();
  for (const auto& h : in.stations)
    stations.push_back({{"id", h.id}, {"location", h.location}, {"chargers", h.chargers}});
  j["stations"] = stations;
  Json trips = Json::array();
  for (const auto& t : in.trips) {
    Json pmf = Json::array();
    for (const auto& [mu, prob] : t.energy.support) pmf.push_back(Json::array({mu, prob}));
    trips.push_back({{"id", t.id},
                     {"origin", t.origin},
                     {"destination", t.destination},
                     {"departure_min", t.departure},
                     {"travel_time_min", t.travel_time},
                     {"energy_pmf_pct", pmf},
                     {"under_cover_cap", t.under_cover_cap},
                     {"over_cover_cap", t.over_cover_cap}});
  }
  j["trips"] = trips;
  return j.dump(2) + "\n";
}

Instance parse_instance(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const int line = line_at(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("", line, "parse error at line " + std::to_string(line) + ": " + e.what());
  }
  Reader r(text);
  Instance in;
  if (!j.is_object()) r.fail("", "top level must be an object");
  if (r.string(j, "", "format") != kFormat) r.fail("format", "unsupported format tag");
  in.name = r.string(j, "", "name");
  {
    const Json& seed = r.at(j, "", "seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer()) r.fail("seed", "expected an integer");
    in.seed = seed.get<std::uint64_t>();
  }
  in.battery_kwh = r.real(j, "", "battery_capacity_kwh");
  const Json& horizon = r.at(j, "", "horizon");
  in.horizon_start = r.integer(horizon, "horizon", "start_min");
  in.horizon_end = r.integer(horizon, "horizon", "end_min");

  const Json& p = r.at(j, "", "soc_policy");
  in.policy.sigma_min = r.integer(p, "soc_policy", "sigma_min_pct");
  in.policy.sigma_low = r.integer(p, "soc_policy", "sigma_low_pct");
  in.policy.sigma_up = r.integer(p, "soc_policy", "sigma_up_pct");
  in.policy.sigma_max = r.integer(p, "soc_policy", "sigma_max_pct");
  in.policy.sigma_init = r.integer(p, "soc_policy", "sigma_init_pct");
  in.policy.epsilon = r.real(p, "soc_policy", "epsilon");
  in.policy.interval_minutes = r.integer(p, "soc_policy", "interval_min");
  in.policy.min_layover = r.integer(p, "soc_policy", "min_layover_min");
  in.policy.max_terminal_wait = r.integer(p, "soc_policy", "max_terminal_wait_min");

  const Json& c = r.at(j, "", "costs");
  in.costs.vehicle = r.real(c, "costs", "vehicle");
  in.costs.deadhead_per_minute = r.real(c, "costs", "deadhead_per_min");
  in.costs.waiting_per_minute = r.real(c, "costs", "waiting_per_min");
  in.costs.charging_activity = r.real(c, "costs", "charging_activity");
  in.costs.under_cover_penalty = r.real(c, "costs", "under_cover_penalty");
  in.costs.over_cover_penalty = r.real(c, "costs", "over_cover_penalty");

  const Json& profile = r.array(j, "", "charger_profile");
  in.charger.segments.clear();
  for (std::size_t k = 0; k < profile.size(); ++k) {
    const std::string path = indexed("charger_profile", k);
    in.charger.segments.push_back(
        {r.integer(profile[k], path, "soc_upper_pct"), r.real(profile[k], path, "rate_kwh_per_min")});
  }

  const Json& locations = r.array(j, "", "locations");
  for (std::size_t k = 0; k < locations.size(); ++k) {
    if (!locations[k].is_string()) r.fail(indexed("locations", k), "expected a string");
    in.locations.push_back(locations[k].get<std::string>());
  }

  const int n_loc = static_cast<int>(in.locations.size());
  const Json& travel = r.at(j, "", "travel");
  const Json& times = r.array(travel, "travel", "time_min");
  const Json& energies = r.array(travel, "travel", "energy_pct");
  auto check_matrix = [&](const Json& m, const std::string& path) {
    if (static_cast<int>(m.size()) != n_loc) r.fail(path, "expected " + std::to_string(n_loc) + " rows");
    for (std::size_t a = 0; a < m.size(); ++a) {
      if (!m[a].is_array() || static_cast<int>(m[a].size()) != n_loc)
        r.fail(indexed(path, a), "expected a row of " + std::to_string(n_loc) + " integers");
      for (const auto& v : m[a])
        if (!v.is_number_integer()) r.fail(indexed(path, a), "expected integers");
    }
  };
  check_matrix(times, "travel.time_min");
  check_matrix(energies, "travel.energy_pct");
  in.travel = TravelMatrix(n_loc);
  for (int a = 0; a < n_loc; ++a)
    for (int b = 0; b < n_loc; ++b) in.travel.set(a, b, times[a][b].get<int>(), energies[a][b].get<int>());

  const Json& depots = r.array(j, "", "depots");
  for (std::size_t k = 0; k < depots.size(); ++k) {
    const std::string path = indexed("depots", k);
    in.depots.push_back({r.integer(depots[k], path, "id"), r.integer(depots[k], path, "location"),
                         r.integer(depots[k], path, "capacity")});
  }
  const Json& stations = r.array(j, "", "stations");
  for (std::size_t k = 0; k < stations.size(); ++k) {
    const std::string path = indexed("stations", k);
    in.stations.push_back({r.integer(stations[k], path, "id"), r.integer(stations[k], path, "location"),
                           r.integer(stations[k], path, "chargers")});
  }

  const Json& trips = r.array(j, "", "trips");
  for (std::size_t k = 0; k < trips.size(); ++k) {
    const std::string path = indexed("trips", k);
    const Json& tj = trips[k];
    Trip t;
    t.id = r.integer(tj, path, "id");
    t.origin = r.integer(tj, path, "origin");
    t.destination = r.integer(tj, path, "destination");
    t.departure = r.integer(tj, path, "departure_min");
    t.travel_time = r.integer(tj, path, "travel_time_min");
    const Json& pmf = r.array(tj, path, "energy_pmf_pct");
    for (std::size_t q = 0; q < pmf.size(); ++q) {
      const Json& entry = pmf[q];
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() || !entry[1].is_number())
        r.fail(path + ".energy_pmf_pct", "entries must be [integer consumption, probability]");
      t.energy.support.emplace_back(entry[0].get<int>(), entry[1].get<double>());
    }
    std::sort(t.energy.support.begin(), t.energy.support.end());
    t.under_cover_cap = r.real(tj, path, "under_cover_cap");
    t.over_cover_cap = r.real(tj, path, "over_cover_cap");
    in.trips.push_back(std::move(t));
  }

  validate(in);
  return in;
}

}  // namespace evsp
