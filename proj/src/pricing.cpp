#include "evsp/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evsp {

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kProbTol = 1e-12;

// Survivor mass at or above every grid SoC of `a` is at least that of `b`.
bool survivors_dominate(const SocDistribution& a, const SocDistribution& b) {
  const auto fa = a.cdf_values();
  const auto fb = b.cdf_values();
  const double sa = fa.back(), sb = fb.back();
  if (sa < sb - kProbTol) return false;
  for (std::size_t k = 0; k + 1 < fa.size(); ++k)
    if (sa - fa[k] < sb - fb[k] - kProbTol) return false;
  return true;
}

struct Trace {
  int pred;
  int arc;
};

}  // namespace

double modified_arc_cost(const DepotGraph& g, int arc, const DualPrices& duals) {
  const Arc& a = g.arcs[arc];
  const Node& tail = g.nodes[a.tail];
  double c = a.cost;
  switch (tail.kind) {
    case NodeKind::kSource: c -= duals.depot[g.depot] + duals.fleet; break;
    case NodeKind::kTrip: c -= duals.trip[tail.trip]; break;
    case NodeKind::kCharging:
      c -= duals.charger[tail.station * static_cast<int>(g.intervals.size()) + tail.interval];
      break;
    default: break;
  }
  return c;
}

Pricer::Pricer(const DepotGraph& graph, const Instance& instance, const ChargingFunction& charging)
    : graph_(graph), instance_(instance), charging_(charging), min_survival_(1.0 - instance.policy.epsilon) {}

Label Pricer::initial() const {
  Label l;
  l.node = DepotGraph::source();
  l.dist = init_distribution(instance_.policy);
  l.omega = instance_.policy.sigma_init;
  return l;
}

std::optional<Label> Pricer::extend(const Label& from, int arc, const DualPrices& duals) const {
  const Arc& a = graph_.arcs[arc];
  const NodeKind tail = graph_.nodes[a.tail].kind;
  const Node& head = graph_.nodes[a.head];

  Label l;
  l.node = a.head;
  l.cost = from.cost + modified_arc_cost(graph_, arc, duals);
  l.recharges = from.recharges;
  l.idle = from.idle;
  if (tail == NodeKind::kWaiting && head.kind == NodeKind::kCharging) {
    ++l.recharges;
    --l.idle;
  } else if (tail == NodeKind::kWaiting && head.kind == NodeKind::kTrip) {
    --l.recharges;
  } else if (tail == NodeKind::kTrip && head.kind == NodeKind::kWaiting) {
    ++l.idle;
  }
  const int window = head.kind == NodeKind::kTrip ? 0 : 1;
  if (l.recharges > window || l.idle > window) return std::nullopt;

  switch (head.kind) {
    case NodeKind::kCharging:
      if (tail == NodeKind::kCharging) {
        l.run = from.run + 1;
        l.run_start = from.run_start;
        l.run_start_omega = from.run_start_omega;
      } else {
        l.run = 1;
        l.run_start = from.dist.shifted(a.energy);
        l.run_start_omega = from.omega - a.energy;
        if (l.run_start_omega < instance_.policy.sigma_min) return std::nullopt;
      }
      l.dist = l.run_start.after_charge(charging_, l.run);
      l.omega = charging_.charge_intervals(l.run_start_omega, l.run);
      break;
    case NodeKind::kTrip: {
      const EnergyPmf& pmf = instance_.trips[head.trip].energy;
      l.dist = from.dist.after_trip(pmf, a.energy);
      l.omega = from.omega - a.energy - pmf.max_consumption();
      break;
    }
    default:
      l.dist = from.dist.shifted(a.energy);
      l.omega = from.omega - a.energy;
      break;
  }
  if (l.omega < instance_.policy.sigma_min) return std::nullopt;
  const double survival = l.dist.survival();
  if (survival < min_survival_ - kProbTol || survival <= 0.0) return std::nullopt;
  if (head.kind == NodeKind::kSink) l.cost -= duals.chance * std::log(survival);
  return l;
}

bool Pricer::dominates(const Label& a, const Label& b) const {
  if (a.cost > b.cost + kCostTol) return false;
  if (a.recharges > b.recharges || a.idle > b.idle) return false;
  if (graph_.nodes[a.node].kind == NodeKind::kCharging) {
    // compare where the run started: lambda is monotone in SoC and duration
    if (a.run < b.run || a.run_start_omega < b.run_start_omega) return false;
    return survivors_dominate(a.run_start, b.run_start);
  }
  if (a.omega < b.omega) return false;
  return survivors_dominate(a.dist, b.dist);
}

PricingResult Pricer::solve(const DualPrices& duals, const PricingOptions& options,
                            std::span<const char> arc_enabled) const {
  const int n = static_cast<int>(graph_.nodes.size());
  std::vector<std::vector<Label>> labels(n);
  std::vector<Trace> traces;
  PricingResult result;

  Label start = initial();
  start.trace = 0;
  traces.push_back({-1, -1});
  labels[DepotGraph::source()].push_back(std::move(start));
  ++result.labels;

  std::vector<Label> done;  // sink labels
  for (int v : graph_.topological_order) {
    std::vector<Label>& here = labels[v];
    if (v == DepotGraph::sink()) {
      done = std::move(here);
      break;
    }
    if (here.empty()) continue;
    if (options.max_labels_per_node > 0 && static_cast<int>(here.size()) > options.max_labels_per_node) {
      std::stable_sort(here.begin(), here.end(), [](const Label& x, const Label& y) { return x.cost < y.cost; });
      here.resize(options.max_labels_per_node);
      result.truncated = true;
    }
    for (const Label& l : here) {
      for (int arc : graph_.out(v)) {
        if (!arc_enabled.empty() && !arc_enabled[arc]) continue;
        std::optional<Label> next = extend(l, arc, duals);
        if (!next) continue;
        ++result.labels;
        const int head = graph_.arcs[arc].head;
        std::vector<Label>& bucket = labels[head];
        if (options.use_dominance && head != DepotGraph::sink()) {
          bool dominated = false;
          for (const Label& other : bucket)
            if (dominates(other, *next)) {
              dominated = true;
              break;
            }
          if (dominated) continue;
          std::erase_if(bucket, [&](const Label& other) { return dominates(*next, other); });
        }
        next->trace = static_cast<int>(traces.size());
        traces.push_back({l.trace, arc});
        bucket.push_back(std::move(*next));
      }
    }
    std::vector<Label>().swap(here);
  }

  for (const Label& l : done) result.min_reduced_cost = std::min(result.min_reduced_cost, l.cost);
  std::vector<int> order;
  for (int k = 0; k < static_cast<int>(done.size()); ++k)
    if (done[k].cost < options.reduced_cost_threshold) order.push_back(k);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return done[x].cost < done[y].cost; });
  if (static_cast<int>(order.size()) > options.max_columns) order.resize(options.max_columns);

  for (int k : order) {
    std::vector<int> arcs;
    for (int t = done[k].trace; traces[t].arc >= 0; t = traces[t].pred) arcs.push_back(traces[t].arc);
    std::reverse(arcs.begin(), arcs.end());
    std::vector<int> path{DepotGraph::source()};
    for (int arc : arcs) path.push_back(graph_.arcs[arc].head);
    Column c = make_column(graph_, instance_, charging_, path);
    result.columns.push_back(std::move(c));
    result.reduced_costs.push_back(done[k].cost);
  }
  return result;
}

PricingResult solve_pricing(const DepotGraph& graph, const Instance& instance, const ChargingFunction& charging,
                            const DualPrices& duals, const PricingOptions& options,
                            std::span<const char> arc_enabled) {
  return Pricer(graph, instance, charging).solve(duals, options, arc_enabled);
}

Column make_column(const DepotGraph& g, const Instance& instance, const ChargingFunction& charging,
                   std::span<const int> path) {
  if (path.size() < 2 || path.front() != DepotGraph::source() || path.back() != DepotGraph::sink())
    throw std::invalid_argument("a schedule must run from the source to the sink");
  Column c;
  c.depot = g.depot;
  c.nodes.assign(path.begin(), path.end());
  const int k = static_cast<int>(g.intervals.size());
  for (std::size_t i = 1; i < path.size(); ++i) {
    const int arc = g.find_arc(path[i - 1], path[i]);
    if (arc < 0) throw std::invalid_argument("schedule uses a missing arc");
    c.arcs.push_back(arc);
    c.cost += g.arcs[arc].cost;
    const Node& v = g.nodes[path[i]];
    if (v.kind == NodeKind::kTrip) c.trips.push_back(v.trip);
    if (v.kind == NodeKind::kCharging) c.charger_slots.push_back(v.station * k + v.interval);
  }
  const double p = schedule_probability(path, g, instance, charging);
  c.beta = p >= 1.0 ? 0.0 : std::log(p);
  return c;
}

double column_reduced_cost(const Column& column, const DualPrices& duals, int) {
  double rc = column.cost - duals.depot[column.depot] - duals.fleet - duals.chance * column.beta;
  for (int t : column.trips) rc -= duals.trip[t];
  for (int slot : column.charger_slots) rc -= duals.charger[slot];
  return rc;
}

}  // namespace evsp
