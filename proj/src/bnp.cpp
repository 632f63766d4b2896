#include "evsp/bnp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "evsp/master.hpp"

namespace evsp {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kSolved: return "solved";
    case SolveStatus::kLimitWithSolution: return "limit_with_solution";
    case SolveStatus::kLimitNoSolution: return "limit_no_solution";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kNoSolutionFound: return "no_solution_found";
  }
  return "?";
}

const char* to_string(RoundingStrategy strategy) {
  switch (strategy) {
    case RoundingStrategy::kSchedule: return "schedule";
    case RoundingStrategy::kConnectionArc: return "connection_arc";
    case RoundingStrategy::kAnyArc: return "any_arc";
  }
  return "?";
}

std::vector<std::pair<double, double>> branch_vehicle_count(double total, std::pair<double, double> bounds) {
  const double lo = std::floor(total + 1e-6), hi = std::ceil(total - 1e-6);
  if (lo >= hi) return {};
  return {{bounds.first, std::min(bounds.second, lo)}, {std::max(bounds.first, hi), bounds.second}};
}

namespace {

DualPrices mix(const DualPrices& center, const DualPrices& current, double weight) {
  auto blend = [&](double a, double b) { return weight * a + (1.0 - weight) * b; };
  DualPrices out = current;
  for (std::size_t i = 0; i < out.trip.size(); ++i) out.trip[i] = blend(center.trip[i], current.trip[i]);
  for (std::size_t i = 0; i < out.depot.size(); ++i) out.depot[i] = blend(center.depot[i], current.depot[i]);
  for (std::size_t i = 0; i < out.charger.size(); ++i) out.charger[i] = blend(center.charger[i], current.charger[i]);
  out.fleet = blend(center.fleet, current.fleet);
  out.chance = blend(center.chance, current.chance);
  return out;
}

constexpr double kIntTol = 1e-6;
constexpr double kFixThreshold = 0.99;
constexpr double kAnyArcWeight = 0.7;
constexpr int kMaxFixings = 3;

bool touches_trip(const DepotGraph& g, int arc) {
  const Arc& a = g.arcs[arc];
  return g.nodes[a.tail].kind == NodeKind::kTrip || g.nodes[a.head].kind == NodeKind::kTrip;
}

template <class T>
std::vector<T> pick_targets(std::vector<std::pair<double, T>> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<T> out;
  for (const auto& [v, t] : candidates)
    if (v >= kFixThreshold && static_cast<int>(out.size()) < kMaxFixings) out.push_back(t);
  if (out.empty() && !candidates.empty()) out.push_back(candidates.front().second);
  return out;
}

}  // namespace

RoundingChoice select_rounding(const std::vector<Column>& columns, std::span<const double> y,
                               const std::vector<DepotGraph>& graphs, std::span<const char> fixed_columns,
                               const std::vector<ArcRef>& excluded_arcs) {
  std::vector<std::pair<double, int>> schedules;
  std::map<ArcRef, double> flow;
  for (int k = 0; k < static_cast<int>(columns.size()); ++k) {
    const double v = y[k];
    if (v <= 1e-9) continue;
    const bool fixed = !fixed_columns.empty() && fixed_columns[k];
    if (!fixed && v > kIntTol && v < 1.0 - kIntTol) schedules.push_back({v, k});
    const DepotGraph& g = graphs[columns[k].depot];
    for (int arc : columns[k].arcs)
      if (touches_trip(g, arc)) flow[{columns[k].depot, arc}] += v;
  }
  std::vector<std::pair<double, ArcRef>> connection, any;
  for (const auto& [ref, v] : flow) {
    if (v <= kIntTol || v >= 1.0 - kIntTol) continue;
    if (std::find(excluded_arcs.begin(), excluded_arcs.end(), ref) != excluded_arcs.end()) continue;
    any.push_back({v, ref});
    if (graphs[ref.depot].arcs[ref.arc].kind == ArcKind::kConnection) connection.push_back({v, ref});
  }
  auto best = [](const auto& list) {
    double m = 0.0;
    for (const auto& c : list) m = std::max(m, c.first);
    return m;
  };
  RoundingChoice choice;
  const double s1 = best(schedules), s2 = best(connection), s3 = kAnyArcWeight * best(any);
  if (s1 >= s2 && s1 >= s3) {
    choice.strategy = RoundingStrategy::kSchedule;
    choice.score = s1;
    choice.value = s1;
    choice.columns = pick_targets(schedules);
  } else if (s2 >= s3) {
    choice.strategy = RoundingStrategy::kConnectionArc;
    choice.score = s2;
    choice.value = s2;
    choice.arcs = pick_targets(connection);
  } else {
    choice.strategy = RoundingStrategy::kAnyArc;
    choice.score = s3;
    choice.value = best(any);
    choice.arcs = pick_targets(any);
  }
  return choice;
}

std::vector<std::string> check_solution(const Instance& instance, const std::vector<DepotGraph>& graphs,
                                        const ChargingFunction& charging, const std::vector<Column>& schedules) {
  std::vector<std::string> issues;
  const int k = graphs.empty() ? 0 : static_cast<int>(graphs.front().intervals.size());
  std::vector<int> covered(instance.trips.size(), 0);
  std::vector<int> per_depot(instance.depots.size(), 0);
  std::vector<int> slots(instance.stations.size() * k, 0);
  double log_p = 0.0;
  const DualPrices zero = DualPrices::zero(static_cast<int>(instance.trips.size()),
                                           static_cast<int>(instance.depots.size()), static_cast<int>(slots.size()));
  for (std::size_t s = 0; s < schedules.size(); ++s) {
    const Column& c = schedules[s];
    const std::string tag = "schedule " + std::to_string(s);
    if (c.depot < 0 || c.depot >= static_cast<int>(graphs.size())) {
      issues.push_back(tag + ": unknown depot");
      continue;
    }
    const DepotGraph& g = graphs[c.depot];
    ++per_depot[c.depot];
    Pricer replay(g, instance, charging);
    Label l = replay.initial();
    bool ok = !c.nodes.empty() && c.nodes.front() == DepotGraph::source() && c.nodes.back() == DepotGraph::sink();
    for (std::size_t i = 1; ok && i < c.nodes.size(); ++i) {
      const int arc = g.find_arc(c.nodes[i - 1], c.nodes[i]);
      if (arc < 0) {
        issues.push_back(tag + ": missing arc");
        ok = false;
        break;
      }
      auto next = replay.extend(l, arc, zero);
      if (!next) {
        issues.push_back(tag + ": infeasible at node " + std::to_string(c.nodes[i]) +
                         " (energy, chance bound or recharge rule)");
        ok = false;
        break;
      }
      l = std::move(*next);
      const Node& v = g.nodes[c.nodes[i]];
      if (v.kind == NodeKind::kTrip) ++covered[v.trip];
      if (v.kind == NodeKind::kCharging) ++slots[v.station * k + v.interval];
    }
    if (!ok) continue;
    log_p += std::log(l.dist.survival());
  }
  for (std::size_t i = 0; i < covered.size(); ++i)
    if (covered[i] != 1)
      issues.push_back("trip " + std::to_string(i) + " covered " + std::to_string(covered[i]) + " times");
  for (std::size_t d = 0; d < per_depot.size(); ++d)
    if (per_depot[d] > instance.depots[d].capacity)
      issues.push_back("depot " + std::to_string(d) + " exceeds its capacity");
  for (std::size_t slot = 0; slot < slots.size(); ++slot)
    if (slots[slot] > instance.stations[slot / k].chargers)
      issues.push_back("station " + std::to_string(slot / k) + " interval " + std::to_string(slot % k) +
                       " exceeds its chargers");
  if (std::exp(log_p) < 1.0 - instance.policy.epsilon - 1e-12)
    issues.push_back("joint probability " + std::to_string(std::exp(log_p)) + " below 1 - epsilon");
  return issues;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct BnbNode {
  std::vector<int> fixed_columns;
  std::vector<ArcRef> fixed_arcs;
  std::vector<ArcRef> forbidden_arcs;
  std::pair<double, double> fleet{0.0, lp::kInf};
  bool perturbation = true;
  bool vehicle_branched = false;
  int split_child = -1;  // 0: <= floor child, 1: >= ceil child of the vehicle split
  double parent_bound = -lp::kInf;
  int depth = 0;
};

class Driver {
 public:
  Driver(const Instance& instance, const SolveOptions& options)
      : in_(instance),
        opt_(options),
        charging_(ChargingFunction::for_instance(instance)),
        master_(instance, static_cast<int>(make_intervals(instance).size())) {
    for (int d = 0; d < static_cast<int>(instance.depots.size()); ++d) graphs_.push_back(build_graph(instance, d));
    for (const DepotGraph& g : graphs_) pricers_.emplace_back(g, instance, charging_);
    masks_.resize(graphs_.size());
  }

  SolveResult run();

 private:
  enum class Cg { kConverged, kLimit };

  bool out_of_time() const { return seconds_since(start_) >= opt_.time_limit_seconds; }
  void apply(const BnbNode& node);
  Cg column_generation(RmpResult& rmp);
  void record_incumbent(const RmpResult& rmp);
  void log_node(const BnbNode& node, const RmpResult& rmp, const char* what) const;

  const Instance& in_;
  SolveOptions opt_;
  ChargingFunction charging_;
  std::vector<DepotGraph> graphs_;
  std::vector<Pricer> pricers_;
  MasterProblem master_;
  std::vector<std::vector<char>> masks_;
  std::vector<char> fixed_;
  std::vector<int> trip_owner_;  // trip -> fixed column or -1
  std::optional<DualPrices> center_;

  Clock::time_point start_;
  SolveResult result_;
  bool root_done_ = false;
  double split_bound_[2] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
};

void Driver::apply(const BnbNode& node) {
  center_.reset();
  for (std::size_t d = 0; d < graphs_.size(); ++d) masks_[d].assign(graphs_[d].arcs.size(), 1);
  auto disable_around = [&](int trip_node, bool outgoing, const ArcRef* keep) {
    for (std::size_t d = 0; d < graphs_.size(); ++d) {
      const DepotGraph& g = graphs_[d];
      for (int a : outgoing ? g.out(trip_node) : g.in(trip_node))
        if (!keep || keep->depot != static_cast<int>(d) || keep->arc != a) masks_[d][a] = 0;
    }
  };
  for (const ArcRef& ref : node.fixed_arcs) {
    const Arc& a = graphs_[ref.depot].arcs[ref.arc];
    if (graphs_[ref.depot].nodes[a.tail].kind == NodeKind::kTrip) disable_around(a.tail, true, &ref);
    if (graphs_[ref.depot].nodes[a.head].kind == NodeKind::kTrip) disable_around(a.head, false, &ref);
  }
  for (const ArcRef& ref : node.forbidden_arcs) masks_[ref.depot][ref.arc] = 0;

  const auto& cols = master_.columns();
  fixed_.assign(cols.size(), 0);
  trip_owner_.assign(in_.trips.size(), -1);
  for (int k : node.fixed_columns) {
    fixed_[k] = 1;
    for (int t : cols[k].trips) {
      trip_owner_[t] = k;
      disable_around(2 + t, true, nullptr);
      disable_around(2 + t, false, nullptr);
    }
  }
  for (int k = 0; k < static_cast<int>(cols.size()); ++k) {
    if (fixed_[k]) {
      master_.set_column_bounds(k, 1.0, 1.0);
      continue;
    }
    bool allowed = true;
    for (int t : cols[k].trips) allowed = allowed && trip_owner_[t] < 0;
    for (int a : cols[k].arcs) allowed = allowed && masks_[cols[k].depot][a];
    master_.set_column_bounds(k, 0.0, allowed ? 1.0 : 0.0);
  }
  master_.set_fleet_bounds(node.fleet.first, node.fleet.second);
  if (node.perturbation) master_.restore_perturbation();
  else master_.strip_perturbation();
}

Driver::Cg Driver::column_generation(RmpResult& rmp) {
  while (true) {
    if (out_of_time()) return Cg::kLimit;
    auto t0 = Clock::now();
    rmp = master_.solve();
    result_.stats.lp_seconds += seconds_since(t0);
    ++result_.stats.cg_iterations;
    result_.stats.lp_iterations += rmp.iterations;
    if (rmp.status != lp::Status::kOptimal) return Cg::kConverged;

    t0 = Clock::now();
    int added = 0;
    double min_rc = 0.0;
    auto price = [&](const DualPrices& duals, int label_cap, bool& truncated) {
      PricingOptions po;
      po.max_columns = opt_.max_columns;
      po.max_labels_per_node = label_cap;
      truncated = false;
      min_rc = 0.0;
      std::vector<Column> found;
      for (std::size_t d = 0; d < pricers_.size(); ++d) {
        PricingResult pr = pricers_[d].solve(duals, po, masks_[d]);
        truncated = truncated || pr.truncated;
        min_rc = std::min(min_rc, pr.min_reduced_cost);
        for (Column& c : pr.columns) found.push_back(std::move(c));
      }
      return found;
    };
    bool truncated = false;
    if (opt_.dual_smoothing > 0.0 && center_) {
      // price at a point between the stability center and the current duals;
      // keep only columns that also price out at the current duals
      const DualPrices mixed = mix(*center_, rmp.duals, opt_.dual_smoothing);
      std::vector<Column> found = price(mixed, opt_.heuristic_label_cap, truncated);
      std::erase_if(found, [&](const Column& c) {
        return column_reduced_cost(c, rmp.duals, master_.intervals()) >= -1e-6;
      });
      added = master_.add_columns(std::move(found));
      center_ = added > 0 ? mixed : rmp.duals;
    } else {
      center_ = rmp.duals;
    }
    for (int pass = 0; pass < 2 && added == 0; ++pass) {
      const int cap = pass == 0 ? opt_.heuristic_label_cap : 0;
      if (pass == 0 && cap == 0) continue;
      added = master_.add_columns(price(rmp.duals, cap, truncated));
      if (pass == 0 && !truncated) break;  // the capped pass was exact
    }
    result_.stats.pricing_seconds += seconds_since(t0);
    if (opt_.log)
      *opt_.log << "  cg " << result_.stats.cg_iterations << " lp " << rmp.objective << " pivots " << rmp.iterations
                << " added " << added << " rc " << min_rc << " t " << seconds_since(start_) << "s\n";
    fixed_.resize(master_.columns().size(), 0);
    if (added == 0) return Cg::kConverged;
  }
}

void Driver::record_incumbent(const RmpResult& rmp) {
  Solution s;
  const auto& cols = master_.columns();
  for (std::size_t k = 0; k < cols.size(); ++k)
    if (rmp.y[k] > 0.5) {
      s.schedules.push_back(cols[k]);
      s.cost += cols[k].cost;
      s.probability *= cols[k].probability();
    }
  if (!check_solution(in_, graphs_, charging_, s.schedules).empty()) return;
  if (result_.has_solution && s.cost >= result_.solution.cost - 1e-9) return;
  result_.has_solution = true;
  result_.solution = std::move(s);
  result_.stats.upper_bound = result_.solution.cost;
  result_.stats.vehicles = static_cast<int>(result_.solution.schedules.size());
}

void Driver::log_node(const BnbNode& node, const RmpResult& rmp, const char* what) const {
  if (!opt_.log) return;
  *opt_.log << "node " << result_.stats.nodes << " depth " << node.depth << " cg " << result_.stats.cg_iterations
            << " lp " << rmp.objective << " cols " << master_.columns().size() << " ub "
            << (result_.has_solution ? result_.solution.cost : std::numeric_limits<double>::infinity()) << " "
            << what << " t " << seconds_since(start_) << "s\n";
}

SolveResult Driver::run() {
  start_ = Clock::now();
  BnbNode root;
  root.perturbation = opt_.perturbation;
  std::vector<BnbNode> open{root};
  bool limit = false;
  bool root_infeasible = false;

  while (!open.empty() && !limit) {
    if (result_.stats.nodes >= opt_.node_limit || out_of_time()) {
      limit = true;
      break;
    }
    BnbNode node = std::move(open.back());
    open.pop_back();
    if (result_.has_solution && node.parent_bound >= result_.solution.cost - 1e-6) {
      if (node.split_child >= 0) split_bound_[node.split_child] = node.parent_bound;
      continue;
    }
    apply(node);
    ++result_.stats.nodes;

    while (true) {
      RmpResult rmp;
      if (column_generation(rmp) == Cg::kLimit) {
        limit = true;
        break;
      }
      if (rmp.status != lp::Status::kOptimal) {
        log_node(node, rmp, "lp failure");
        break;
      }
      if (!root_done_) {
        root_done_ = true;
        if (master_.perturbation_active()) {
          // the perturbed LP is a weak bound; take it from exact partitioning
          master_.strip_perturbation();
          RmpResult exact;
          if (column_generation(exact) == Cg::kLimit) {
            limit = true;
            break;
          }
          result_.stats.root_lower_bound = exact.objective;
          if (opt_.root_lp) *opt_.root_lp = master_.lp_text();
          root_infeasible = exact.artificial > kIntTol;
          result_.stats.root_seconds = seconds_since(start_);
          log_node(node, exact, "root bound");
          if (root_infeasible) break;
          if (opt_.perturbation) {
            master_.restore_perturbation();
            continue;
          }
          node.perturbation = false;
          rmp = std::move(exact);
        } else {
          result_.stats.root_lower_bound = rmp.objective;
          if (opt_.root_lp) *opt_.root_lp = master_.lp_text();
          result_.stats.root_seconds = seconds_since(start_);
          root_infeasible = rmp.artificial > kIntTol;
        }
      }
      if (node.split_child >= 0 && std::isnan(split_bound_[node.split_child]))
        split_bound_[node.split_child] = rmp.artificial > kIntTol ? lp::kInf : rmp.objective;
      if (rmp.artificial > kIntTol) {
        log_node(node, rmp, "infeasible");
        break;
      }
      if (result_.has_solution && rmp.objective >= result_.solution.cost - 1e-6) {
        log_node(node, rmp, "pruned");
        break;
      }
      bool integral = true;
      double total = 0.0;
      for (double v : rmp.y) {
        integral = integral && (v < kIntTol || v > 1.0 - kIntTol);
        total += v;
      }
      if (integral) {
        if (master_.perturbation_active() && rmp.perturbation > 1e-9) {
          master_.strip_perturbation();
          node.perturbation = false;
          log_node(node, rmp, "perturbation removed");
          continue;
        }
        record_incumbent(rmp);
        log_node(node, rmp, "integer");
        break;
      }

      if (!node.vehicle_branched) {
        const auto children = branch_vehicle_count(total, node.fleet);
        if (!children.empty()) {
          BnbNode le = node, ge = node;
          le.fleet = children[0];
          ge.fleet = children[1];
          le.vehicle_branched = ge.vehicle_branched = true;
          le.split_child = 0;
          ge.split_child = 1;
          le.parent_bound = ge.parent_bound = rmp.objective;
          le.depth = ge.depth = node.depth + 1;
          open.push_back(std::move(ge));
          open.push_back(std::move(le));
          log_node(node, rmp, "vehicle branch");
          break;
        }
        node.vehicle_branched = true;
      }

      std::vector<ArcRef> excluded = node.fixed_arcs;
      excluded.insert(excluded.end(), node.forbidden_arcs.begin(), node.forbidden_arcs.end());
      RoundingChoice choice = select_rounding(master_.columns(), rmp.y, graphs_, fixed_, excluded);
      BnbNode child = node;
      child.split_child = -1;
      child.parent_bound = rmp.objective;
      child.depth = node.depth + 1;
      if (opt_.complete_search && choice.strategy == RoundingStrategy::kSchedule) {
        // a schedule fixing has no complement; use the best arc when one exists
        const std::vector<char> skip_all(master_.columns().size(), 1);
        RoundingChoice arcs = select_rounding(master_.columns(), rmp.y, graphs_, skip_all, excluded);
        if (!arcs.arcs.empty()) choice = arcs;
      }
      if (choice.strategy == RoundingStrategy::kSchedule) {
        if (choice.columns.empty()) {
          log_node(node, rmp, "no rounding candidate");
          break;
        }
        child.fixed_columns.insert(child.fixed_columns.end(), choice.columns.begin(), choice.columns.end());
      } else {
        if (opt_.complete_search) {
          choice.arcs.resize(1);
          BnbNode other = node;
          other.split_child = -1;
          other.parent_bound = rmp.objective;
          other.depth = node.depth + 1;
          other.forbidden_arcs.push_back(choice.arcs.front());
          open.push_back(std::move(other));
        }
        child.fixed_arcs.insert(child.fixed_arcs.end(), choice.arcs.begin(), choice.arcs.end());
      }
      open.push_back(std::move(child));
      log_node(node, rmp, to_string(choice.strategy));
      break;
    }
  }

  SolverStats& st = result_.stats;
  st.total_seconds = seconds_since(start_);
  st.columns = static_cast<int>(master_.columns().size());
  st.lower_bound = st.root_lower_bound;
  if (!std::isnan(split_bound_[0]) && !std::isnan(split_bound_[1]))
    st.lower_bound = std::max(st.lower_bound, std::min(split_bound_[0], split_bound_[1]));
  if (result_.has_solution) {
    st.lower_bound = std::min(st.lower_bound, st.upper_bound);
    st.gap_pct = std::max(0.0, (st.upper_bound - st.root_lower_bound) / st.upper_bound * 100.0);
    st.final_gap_pct = std::max(0.0, (st.upper_bound - st.lower_bound) / st.upper_bound * 100.0);
    result_.status = limit ? SolveStatus::kLimitWithSolution : SolveStatus::kSolved;
  } else if (root_infeasible) {
    result_.status = SolveStatus::kInfeasible;
  } else {
    result_.status = limit ? SolveStatus::kLimitNoSolution : SolveStatus::kNoSolutionFound;
  }
  return result_;
}

}  // namespace

SolveResult solve(const Instance& instance, const SolveOptions& options) {
  validate(instance);
  Driver driver(instance, options);
  return driver.run();
}

}  // namespace evsp
