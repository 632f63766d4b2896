// evsp: generate instances, solve them, sweep epsilon and evaluate fading.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "evsp/bnp.hpp"
#include "evsp/degradation.hpp"
#include "evsp/instance.hpp"
#include "evsp/pricing.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace evsp;

namespace {

enum Exit { kOk = 0, kFailure = 1, kIo = 2, kInvalid = 3, kLimit = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string instance_path;
  std::string solution_path;
  std::string out;
  std::string mode = "stochastic";
  std::string range = "20-80";
  std::optional<double> epsilon;
  std::vector<double> epsilons{0.001, 0.005, 0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40, 0.50};
  std::vector<std::string> ranges{"20-80", "30-80"};
  std::uint64_t seed = 1;
  double time_limit = 600.0;
  int node_limit = 100000;
  int trips = 60;
  int chargers = 1;
  int iterations = 10000;
  int jobs = 1;
  std::string dump_graph;
  std::string dump_lp;
  bool verbose = false;
  bool complete = false;
};

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::pair<int, int> parse_range(const std::string& text) {
  int low = 0, up = 0;
  char dash = 0;
  std::istringstream is(text);
  if (!(is >> low >> dash >> up) || dash != '-' || !is.eof()) throw CLI::ValidationError("--range", text);
  return {std::min(low, up), std::max(low, up)};
}

Instance load(const std::string& path) {
  if (path.empty()) throw IoError("no instance given (--instance)");
  if (!fs::is_regular_file(path)) throw IoError("cannot read instance file " + path);
  return read_instance(path);
}

// Applies SoC range, mode and epsilon to an instance.
Instance configure(const Instance& base, const std::string& range, const std::string& mode,
                   std::optional<double> epsilon) {
  const auto [low, up] = parse_range(range);
  Instance in = with_soc_range(base, low, up);
  if (mode == "deterministic") return worst_case_projection(in);
  if (epsilon) {
    in.policy.epsilon = *epsilon;
    validate(in);
  }
  return in;
}

json config_json(const RunConfig& c, const std::string& command) {
  json j = {{"command", command}, {"instance", c.instance_path}, {"mode", c.mode},     {"range", c.range},
            {"seed", c.seed},     {"time_limit", c.time_limit}, {"iterations", c.iterations}};
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  return j;
}

// Reproducibility header for every CSV.
void csv_header(std::ostream& os, std::uint64_t seed, const Instance& in, const json& config) {
  os << "# seed=" << seed << "\n# instance_hash=" << hex(instance_hash(in)) << "\n# config=" << config.dump() << '\n';
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << std::setprecision(10);
  return os;
}

int charge_runs(const DepotGraph& g, const Column& c) {
  int runs = 0;
  for (std::size_t k = 1; k < c.nodes.size(); ++k)
    runs += g.nodes[c.nodes[k]].kind == NodeKind::kCharging && g.nodes[c.nodes[k - 1]].kind != NodeKind::kCharging;
  return runs;
}

json solution_json(const Instance& in, const SolveResult& r, const json& config) {
  std::vector<DepotGraph> graphs;
  for (int d = 0; d < static_cast<int>(in.depots.size()); ++d) graphs.push_back(build_graph(in, d));
  const SolverStats& s = r.stats;
  json out = {{"format", "evsp-solution/1"},
              {"instance_hash", hex(instance_hash(in))},
              {"config", config},
              {"status", to_string(r.status)},
              {"epsilon", in.policy.epsilon},
              {"sigma_low_pct", in.policy.sigma_low},
              {"sigma_up_pct", in.policy.sigma_up}};
  out["stats"] = {{"gap_pct", s.gap_pct},
                  {"final_gap_pct", s.final_gap_pct},
                  {"bb_nodes", s.nodes},
                  {"total_seconds", s.total_seconds},
                  {"root_seconds", s.root_seconds},
                  {"pricing_seconds", s.pricing_seconds},
                  {"lp_seconds", s.lp_seconds},
                  {"columns", s.columns},
                  {"cg_iterations", s.cg_iterations},
                  {"lp_iterations", s.lp_iterations},
                  {"root_lower_bound", s.root_lower_bound},
                  {"lower_bound", s.lower_bound},
                  {"upper_bound", s.upper_bound}};
  if (!r.has_solution) return out;
  out["cost"] = r.solution.cost;
  out["probability"] = r.solution.probability;
  out["vehicles"] = r.solution.schedules.size();
  json list = json::array();
  for (const Column& c : r.solution.schedules)
    list.push_back({{"depot", c.depot},
                    {"nodes", c.nodes},
                    {"trips", c.trips},
                    {"charger_slots", c.charger_slots},
                    {"charges", charge_runs(graphs[c.depot], c)},
                    {"cost", c.cost},
                    {"beta", c.beta},
                    {"probability", c.probability()}});
  out["schedules"] = list;
  return out;
}

int status_exit(const SolveResult& r) {
  switch (r.status) {
    case SolveStatus::kSolved: return kOk;
    case SolveStatus::kLimitWithSolution: return kLimit;
    default: return kFailure;
  }
}

int cmd_generate(const RunConfig& c) {
  GeneratorOptions opt;
  opt.chargers = c.chargers;
  const Instance in = generate_instance(c.trips, c.seed, opt);
  if (c.out.empty()) throw IoError("no output file given (--out)");
  if (fs::path(c.out).has_parent_path()) fs::create_directories(fs::path(c.out).parent_path());
  write_instance(in, c.out);
  std::cout << "wrote " << c.out << " (" << in.trips.size() << " trips, hash " << hex(instance_hash(in)) << ")\n";
  return kOk;
}

int cmd_solve(const RunConfig& c) {
  const Instance in = configure(load(c.instance_path), c.range, c.mode, c.epsilon);
  if (!c.dump_graph.empty()) {
    std::ofstream os = open_out(c.dump_graph);
    for (int d = 0; d < static_cast<int>(in.depots.size()); ++d) os << dump_graph(build_graph(in, d));
  }
  SolveOptions opt;
  opt.time_limit_seconds = c.time_limit;
  opt.node_limit = c.node_limit;
  opt.complete_search = c.complete;
  if (c.verbose) opt.log = &std::cerr;
  std::string root_lp;
  if (!c.dump_lp.empty()) opt.root_lp = &root_lp;
  const SolveResult r = solve(in, opt);
  if (!c.dump_lp.empty()) open_out(c.dump_lp) << root_lp;

  const json out = solution_json(in, r, config_json(c, "solve"));
  if (!c.out.empty()) open_out(c.out) << out.dump(2) << '\n';
  std::cout << "status " << to_string(r.status);
  if (r.has_solution)
    std::cout << "  cost " << r.solution.cost << "  vehicles " << r.solution.schedules.size() << "  P "
              << r.solution.probability;
  std::cout << "  root LP " << r.stats.root_lower_bound << "  gap " << r.stats.gap_pct << "%  nodes " << r.stats.nodes
            << "  " << r.stats.total_seconds << "s\n";
  return status_exit(r);
}

int cmd_evaluate(const RunConfig& c) {
  if (c.solution_path.empty()) throw IoError("no solution file given (--solution)");
  std::ifstream is(c.solution_path);
  if (!is) throw IoError("cannot read solution file " + c.solution_path);
  json sol;
  try {
    sol = json::parse(is);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed solution file: ") + e.what());
  }
  const json cfg = sol.value("config", json::object());
  const std::string range = cfg.value("range", c.range);
  const std::string mode = cfg.value("mode", c.mode);
  std::optional<double> eps = c.epsilon;
  if (!eps && sol.contains("epsilon")) eps = sol["epsilon"].get<double>();
  const Instance in = configure(load(c.instance_path), range, mode, eps);
  if (sol.value("instance_hash", hex(instance_hash(in))) != hex(instance_hash(in)))
    std::cerr << "warning: solution was produced for a different instance\n";

  std::vector<DepotGraph> graphs;
  for (int d = 0; d < static_cast<int>(in.depots.size()); ++d) graphs.push_back(build_graph(in, d));
  const ChargingFunction charging = ChargingFunction::for_instance(in);
  std::vector<Column> cols;
  std::vector<double> reported;
  for (const json& s : sol.value("schedules", json::array())) {
    const int depot = s.at("depot").get<int>();
    if (depot < 0 || depot >= static_cast<int>(graphs.size())) throw ValidationError("schedule depot out of range");
    try {
      cols.push_back(make_column(graphs[depot], in, charging, s.at("nodes").get<std::vector<int>>()));
    } catch (const std::invalid_argument& e) {
      throw ValidationError(std::string("schedule does not fit the instance: ") + e.what());
    }
    reported.push_back(s.value("probability", cols.back().probability()));
  }
  const auto issues = check_solution(in, graphs, charging, cols);
  for (const auto& msg : issues) std::cerr << "warning: " << msg << '\n';

  const FadingParams params = fading_for(in);
  const FadeEstimate est = monte_carlo_fade(cols, graphs, in, charging, c.iterations, c.seed, params);
  json config = config_json(c, "evaluate");
  config["range"] = range;
  config["mode"] = mode;
  config["solution"] = c.solution_path;

  std::ostringstream csv;
  csv << std::setprecision(10);
  csv_header(csv, c.seed, in, config);
  csv << "schedule,depot,trips,charges,reported_p,simulated_p,binomial_se,within_3se,overuse_freq,below_min_freq,"
         "daily_fade_kwh,yearly_fade_kwh\n";
  int outside = 0;
  for (std::size_t s = 0; s < cols.size(); ++s) {
    const double p = reported[s];
    const double se = std::sqrt(p * (1.0 - p) / c.iterations);
    const bool ok = std::fabs(est.within_range_frequency[s] - p) <= 3.0 * se + 1e-12;
    outside += !ok;
    csv << s << ',' << cols[s].depot << ',' << cols[s].trips.size() << ',' << charge_runs(graphs[cols[s].depot], cols[s])
        << ',' << p << ',' << est.within_range_frequency[s] << ',' << se << ',' << (ok ? 1 : 0) << ','
        << static_cast<double>(est.overuse_events[s]) / c.iterations << ','
        << static_cast<double>(est.below_min_events[s]) / c.iterations << ',' << est.schedule_daily_fade[s] << ','
        << 365.0 * est.schedule_daily_fade[s] << '\n';
  }
  if (!c.out.empty()) open_out(c.out) << csv.str();
  else std::cout << csv.str();

  std::cerr << "schedules " << cols.size() << "  daily fade/vehicle " << est.daily_fade_per_vehicle << " kWh (se "
            << est.daily_fade_stderr << ")  yearly " << est.yearly_fade_per_vehicle << " kWh";
  if (est.yearly_fade_per_vehicle > 0.0)
    std::cerr << "  lifetime " << lifetime_years(params, est.yearly_fade_per_vehicle) << " years";
  std::cerr << "  outside 3 SE " << outside << '\n';
  return kOk;
}

struct SweepRow {
  std::string range;
  std::string mode;
  double epsilon = 0.0;
  std::string status = "not run";
  bool has_solution = false;
  double cost = 0.0;
  int vehicles = 0;
  double probability = 1.0;
  double root_lb = 0.0;
  double gap_pct = 0.0;
  double seconds = 0.0;
  int charges = 0;
  FadeEstimate fade;
  double lifetime = 0.0;
};

void run_sweep_row(const Instance& base, const RunConfig& c, SweepRow& row) {
  try {
    const Instance in = configure(base, row.range, row.mode, row.epsilon);
    SolveOptions opt;
    opt.time_limit_seconds = c.time_limit;
    const SolveResult r = solve(in, opt);
    row.status = to_string(r.status);
    row.root_lb = r.stats.root_lower_bound;
    row.gap_pct = r.stats.gap_pct;
    row.seconds = r.stats.total_seconds;
    if (!r.has_solution) return;
    row.has_solution = true;
    row.cost = r.solution.cost;
    row.vehicles = static_cast<int>(r.solution.schedules.size());
    row.probability = r.solution.probability;
    std::vector<DepotGraph> graphs;
    for (int d = 0; d < static_cast<int>(in.depots.size()); ++d) graphs.push_back(build_graph(in, d));
    for (const Column& col : r.solution.schedules) row.charges += charge_runs(graphs[col.depot], col);
    // fading is always simulated under the stochastic consumptions
    const Instance sim = configure(base, row.range, "stochastic", std::nullopt);
    const ChargingFunction charging = ChargingFunction::for_instance(sim);
    row.fade = monte_carlo_fade(r.solution.schedules, graphs, sim, charging, c.iterations, c.seed, fading_for(sim));
    if (row.fade.yearly_fade_per_vehicle > 0.0)
      row.lifetime = lifetime_years(fading_for(sim), row.fade.yearly_fade_per_vehicle);
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
}

int cmd_sweep(const RunConfig& c) {
  const Instance base = load(c.instance_path);
  for (const auto& r : c.ranges) parse_range(r);
  for (double e : c.epsilons)
    if (!(e >= 0.0 && e < 1.0)) throw CLI::ValidationError("--epsilons", "values must lie in [0, 1)");
  std::vector<SweepRow> rows;
  for (const auto& range : c.ranges) {
    rows.push_back({range, "deterministic", 0.0});
    for (double e : c.epsilons) rows.push_back({range, "stochastic", e});
  }

  std::atomic<std::size_t> next{0};
  std::mutex print;
  auto worker = [&] {
    for (std::size_t k; (k = next++) < rows.size();) {
      run_sweep_row(base, c, rows[k]);
      std::lock_guard lock(print);
      std::cerr << rows[k].range << " eps " << rows[k].epsilon << ' ' << rows[k].status << " cost " << rows[k].cost
                << " vehicles " << rows[k].vehicles << '\n';
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::max(1, c.jobs); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json config = config_json(c, "sweep");
  config["epsilons"] = c.epsilons;
  config["ranges"] = c.ranges;
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  std::ofstream os = open_out(dir / "sweep.csv");
  csv_header(os, c.seed, base, config);
  os << "range,mode,epsilon,status,cost,improvement_pct,vehicles,probability,root_lb,gap_pct,seconds,charges,"
        "daily_fade_kwh,daily_fade_se,yearly_fade_kwh,lifetime_years\n";
  for (const SweepRow& row : rows) {
    double baseline = 0.0;
    for (const SweepRow& b : rows)
      if (b.range == row.range && b.mode == "deterministic" && b.has_solution) baseline = b.cost;
    os << row.range << ',' << row.mode << ',' << row.epsilon << ",\"" << row.status << "\",";
    if (row.has_solution) {
      os << row.cost << ',';
      if (baseline > 0.0) os << (baseline - row.cost) / baseline * 100.0;
      os << ',' << row.vehicles << ',' << row.probability << ',' << row.root_lb << ',' << row.gap_pct << ','
         << row.seconds << ',' << row.charges << ',' << row.fade.daily_fade_per_vehicle << ','
         << row.fade.daily_fade_stderr << ',' << row.fade.yearly_fade_per_vehicle << ',' << row.lifetime << '\n';
    } else {
      os << ",,,,," << row.root_lb << ',' << row.gap_pct << ',' << row.seconds << ",,,,,\n";
    }
  }
  std::cout << "wrote " << (dir / "sweep.csv").string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electric vehicle scheduling with stochastic energy and battery fading"};
  app.require_subcommand(1);
  RunConfig c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--out", c.out, "Output file (directory for sweep)");
  };
  auto problem = [&](CLI::App* sub) {
    sub->add_option("--instance", c.instance_path, "Instance JSON")->required();
    sub->add_option("--range", c.range, "Recommended SoC range, e.g. 20-80 or 30-80");
    sub->add_option("--mode", c.mode, "deterministic (worst case, epsilon 0) or stochastic")
        ->check(CLI::IsMember({"deterministic", "stochastic"}));
  };

  CLI::App* gen = app.add_subcommand("generate", "Write a random instance");
  common(gen);
  gen->add_option("--trips", c.trips, "Number of timetabled trips")->check(CLI::PositiveNumber);
  gen->add_option("--chargers", c.chargers, "Chargers per station")->check(CLI::PositiveNumber);

  CLI::App* sol = app.add_subcommand("solve", "Solve an instance by branch-and-price");
  common(sol);
  problem(sol);
  sol->add_option("--epsilon", c.epsilon, "Allowed probability of leaving the SoC range")->check(CLI::Range(0.0, 0.999999));
  sol->add_option("--time-limit", c.time_limit, "Seconds")->check(CLI::NonNegativeNumber);
  sol->add_option("--node-limit", c.node_limit, "Branch-and-bound nodes")->check(CLI::PositiveNumber);
  sol->add_option("--dump-graph", c.dump_graph, "Write the depot graphs as text");
  sol->add_option("--dump-lp", c.dump_lp, "Write the root restricted master in LP format");
  sol->add_flag("--complete", c.complete, "Search both sides of every arc fixing instead of diving");
  sol->add_flag("-v,--verbose", c.verbose, "Log branch-and-price progress to stderr");

  CLI::App* sweep = app.add_subcommand("sweep", "Solve for a list of epsilon values and both SoC ranges");
  common(sweep);
  sweep->add_option("--instance", c.instance_path, "Instance JSON")->required();
  sweep->add_option("--epsilons", c.epsilons, "Epsilon values")->delimiter(',');
  sweep->add_option("--ranges", c.ranges, "SoC ranges")->delimiter(',');
  sweep->add_option("--time-limit", c.time_limit, "Seconds per solve")->check(CLI::NonNegativeNumber);
  sweep->add_option("--iterations", c.iterations, "Simulated days per solution")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", c.jobs, "Parallel solves")->check(CLI::PositiveNumber);

  CLI::App* eval = app.add_subcommand("evaluate", "Monte Carlo fading and range check of a solution");
  common(eval);
  problem(eval);
  eval->add_option("--solution", c.solution_path, "Solution JSON written by solve")->required();
  eval->add_option("--epsilon", c.epsilon, "Override the solution's epsilon");
  eval->add_option("--iterations", c.iterations, "Simulated days")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) return cmd_generate(c);
    if (sol->parsed()) return cmd_solve(c);
    if (sweep->parsed()) return cmd_sweep(c);
    return cmd_evaluate(c);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
