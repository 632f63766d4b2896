#include "evsp/network.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <sstream>

namespace evsp {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kSource: return "source";
    case NodeKind::kSink: return "sink";
    case NodeKind::kTrip: return "trip";
    case NodeKind::kCharging: return "charging";
    case NodeKind::kWaiting: return "waiting";
  }
  return "?";
}

const char* to_string(ArcKind kind) {
  switch (kind) {
    case ArcKind::kPullOut: return "pull-out";
    case ArcKind::kPullIn: return "pull-in";
    case ArcKind::kConnection: return "connection";
    case ArcKind::kCharging: return "charging";
    case ArcKind::kToCharge: return "to-charge";
  }
  return "?";
}

std::vector<TimeInterval> make_intervals(const Instance& instance) {
  const int rho = instance.policy.interval_minutes;
  const int count = (instance.horizon_end - instance.horizon_start + rho - 1) / rho;
  std::vector<TimeInterval> out;
  out.reserve(count);
  for (int r = 0; r < count; ++r)
    out.push_back({r, instance.horizon_start + r * rho, instance.horizon_start + (r + 1) * rho});
  return out;
}

int DepotGraph::find_arc(int tail, int head) const {
  for (int a : out(tail))
    if (arcs[a].head == head) return a;
  return -1;
}

void DepotGraph::index() {
  const int n = static_cast<int>(nodes.size());
  auto build = [&](std::vector<int>& offsets, std::vector<int>& list, bool outgoing) {
    offsets.assign(n + 1, 0);
    for (const Arc& a : arcs) ++offsets[(outgoing ? a.tail : a.head) + 1];
    for (int v = 0; v < n; ++v) offsets[v + 1] += offsets[v];
    list.assign(arcs.size(), 0);
    std::vector<int> fill(offsets.begin(), offsets.end() - 1);
    for (int id = 0; id < static_cast<int>(arcs.size()); ++id)
      list[fill[outgoing ? arcs[id].tail : arcs[id].head]++] = id;
  };
  build(out_offsets, out_list, true);
  build(in_offsets, in_list, false);

  // Kahn's algorithm, ties broken by node time then id
  std::vector<int> indegree(n, 0);
  for (const Arc& a : arcs) ++indegree[a.head];
  auto later = [&](int a, int b) {
    if (nodes[a].begin != nodes[b].begin) return nodes[a].begin > nodes[b].begin;
    return a > b;
  };
  std::priority_queue<int, std::vector<int>, decltype(later)> ready(later);
  for (int v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  topological_order.clear();
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    topological_order.push_back(v);
    for (int a : out(v))
      if (--indegree[arcs[a].head] == 0) ready.push(arcs[a].head);
  }
}

namespace {

int interval_of(const std::vector<TimeInterval>& intervals, int minute) {
  if (intervals.empty() || minute < intervals.front().begin || minute >= intervals.back().end) return -1;
  return (minute - intervals.front().begin) / (intervals.front().end - intervals.front().begin);
}

}  // namespace

DepotGraph build_graph(const Instance& in, int depot) {
  DepotGraph g;
  g.depot = depot;
  g.n_trips = static_cast<int>(in.trips.size());
  g.n_stations = static_cast<int>(in.stations.size());
  g.min_layover = in.policy.min_layover;
  g.max_terminal_wait = in.policy.max_terminal_wait;
  g.intervals = make_intervals(in);
  const int n_int = static_cast<int>(g.intervals.size());

  g.nodes.resize(2 + g.n_trips + 2 * g.n_stations * n_int);
  g.nodes[DepotGraph::source()] = {NodeKind::kSource, -1, -1, -1, in.horizon_start, in.horizon_start};
  g.nodes[DepotGraph::sink()] = {NodeKind::kSink, -1, -1, -1, std::numeric_limits<int>::max(),
                                 std::numeric_limits<int>::max()};
  for (const Trip& t : in.trips)
    g.nodes[g.trip_node(t.id)] = {NodeKind::kTrip, t.id, -1, -1, t.departure, t.arrival()};
  for (int h = 0; h < g.n_stations; ++h)
    for (const TimeInterval& r : g.intervals) {
      g.nodes[g.charging_node(h, r.index)] = {NodeKind::kCharging, -1, h, r.index, r.begin, r.end};
      g.nodes[g.waiting_node(h, r.index)] = {NodeKind::kWaiting, -1, h, r.index, r.begin, r.end};
    }

  const CostParams& c = in.costs;
  const TravelMatrix& tm = in.travel;
  const int home = in.depots[depot].location;
  const int tau = in.policy.min_layover;
  auto add = [&g](Arc arc) { g.arcs.push_back(arc); };

  for (const Trip& t : in.trips) {
    const int out_min = tm.time(home, t.origin);
    add({DepotGraph::source(), g.trip_node(t.id), ArcKind::kPullOut, c.vehicle + out_min * c.deadhead_per_minute,
         tm.energy(home, t.origin), out_min, 0, false});
    const int in_min = tm.time(t.destination, home);
    add({g.trip_node(t.id), DepotGraph::sink(), ArcKind::kPullIn, in_min * c.deadhead_per_minute,
         tm.energy(t.destination, home), in_min, 0, false});
  }

  for (const Trip& i : in.trips)
    for (const Trip& j : in.trips) {
      if (i.id == j.id) continue;
      const int deadhead = tm.time(i.destination, j.origin);
      if (j.departure < i.arrival() + deadhead + tau) continue;
      const int wait = j.departure - i.arrival() - deadhead - tau;  // idle time beyond the layover
      if (wait <= in.policy.max_terminal_wait) {
        add({g.trip_node(i.id), g.trip_node(j.id), ArcKind::kConnection,
             deadhead * c.deadhead_per_minute + wait * c.waiting_per_minute, tm.energy(i.destination, j.origin),
             deadhead, wait, false});
        continue;
      }
      // long idle: detour through the nearest depot, where waiting is free
      int best = -1, best_minutes = std::numeric_limits<int>::max();
      for (const Depot& d : in.depots) {
        const int minutes = tm.time(i.destination, d.location) + tm.time(d.location, j.origin);
        if (minutes < best_minutes) {
          best = d.location;
          best_minutes = minutes;
        }
      }
      if (j.departure < i.arrival() + best_minutes + tau) continue;
      add({g.trip_node(i.id), g.trip_node(j.id), ArcKind::kConnection, best_minutes * c.deadhead_per_minute,
           tm.energy(i.destination, best) + tm.energy(best, j.origin), best_minutes, 0, true});
    }

  for (const ChargingStation& h : in.stations) {
    for (const Trip& t : in.trips) {
      const int to_station = tm.time(t.destination, h.location);
      const int r = interval_of(g.intervals, t.arrival() + to_station);
      if (r >= 0)
        add({g.trip_node(t.id), g.waiting_node(h.id, r), ArcKind::kToCharge, to_station * c.deadhead_per_minute,
             tm.energy(t.destination, h.location), to_station, 0, false});
      // Leaving waiting node r at the end of interval r: the latest
      // departure from the station must fall in interval r + 1.
      const int from_station = tm.time(h.location, t.origin);
      const int latest = t.departure - tau - from_station;
      const int r_dep = interval_of(g.intervals, latest);
      if (r_dep >= 1)
        add({g.waiting_node(h.id, r_dep - 1), g.trip_node(t.id), ArcKind::kCharging,
             from_station * c.deadhead_per_minute, tm.energy(h.location, t.origin), from_station, 0, false});
    }
    for (int r = 0; r < n_int; ++r) {
      const int cn = g.charging_node(h.id, r), wn = g.waiting_node(h.id, r);
      add({cn, wn, ArcKind::kCharging, 0.0, 0, 0, 0, false});
      if (r + 1 < n_int) {
        add({cn, g.charging_node(h.id, r + 1), ArcKind::kCharging, 0.0, 0, 0, 0, false});
        add({wn, g.waiting_node(h.id, r + 1), ArcKind::kCharging, 0.0, 0, 0, 0, false});
        add({wn, g.charging_node(h.id, r + 1), ArcKind::kCharging, c.charging_activity, 0, 0, 0, false});
      }
    }
    const int back = tm.time(h.location, home);
    add({g.waiting_node(h.id, n_int - 1), DepotGraph::sink(), ArcKind::kPullIn, back * c.deadhead_per_minute,
         tm.energy(h.location, home), back, 0, false});
  }

  g.index();
  return g;
}

std::vector<std::string> validate_graph(const DepotGraph& g) {
  std::vector<std::string> issues;
  const int n = static_cast<int>(g.nodes.size());
  auto kind = [&](int v) { return g.nodes[v].kind; };

  if (static_cast<int>(g.topological_order.size()) != n) issues.push_back("graph contains a cycle");
  std::vector<int> position(n, -1);
  for (int k = 0; k < static_cast<int>(g.topological_order.size()); ++k) position[g.topological_order[k]] = k;

  int sources = 0, sinks = 0, charging = 0, waiting = 0;
  for (const Node& v : g.nodes) {
    sources += v.kind == NodeKind::kSource;
    sinks += v.kind == NodeKind::kSink;
    charging += v.kind == NodeKind::kCharging;
    waiting += v.kind == NodeKind::kWaiting;
  }
  if (sources != 1 || kind(DepotGraph::source()) != NodeKind::kSource) issues.push_back("expected exactly one source");
  if (sinks != 1 || kind(DepotGraph::sink()) != NodeKind::kSink) issues.push_back("expected exactly one sink");
  const int expected = g.n_stations * static_cast<int>(g.intervals.size());
  if (charging != expected || waiting != expected)
    issues.push_back("expected " + std::to_string(expected) + " charging and waiting nodes, found " +
                     std::to_string(charging) + " and " + std::to_string(waiting));

  for (int id = 0; id < static_cast<int>(g.arcs.size()); ++id) {
    const Arc& a = g.arcs[id];
    const std::string tag = "arc " + std::to_string(id) + " (" + to_string(a.kind) + " " + std::to_string(a.tail) +
                            "->" + std::to_string(a.head) + ")";
    if (a.tail < 0 || a.tail >= n || a.head < 0 || a.head >= n) {
      issues.push_back(tag + ": endpoint out of range");
      continue;
    }
    if (position[a.tail] >= 0 && position[a.head] >= 0 && position[a.tail] >= position[a.head])
      issues.push_back(tag + ": not in topological order");
    if (a.cost < 0.0 || a.energy < 0 || a.deadhead_minutes < 0 || a.waiting_minutes < 0)
      issues.push_back(tag + ": negative cost, energy or duration");
    const NodeKind t = kind(a.tail), h = kind(a.head);
    bool shape = false;
    switch (a.kind) {
      case ArcKind::kPullOut: shape = t == NodeKind::kSource && h == NodeKind::kTrip; break;
      case ArcKind::kPullIn: shape = (t == NodeKind::kTrip || t == NodeKind::kWaiting) && h == NodeKind::kSink; break;
      case ArcKind::kConnection: shape = t == NodeKind::kTrip && h == NodeKind::kTrip; break;
      case ArcKind::kToCharge: shape = t == NodeKind::kTrip && h == NodeKind::kWaiting; break;
      case ArcKind::kCharging:
        shape = (t == NodeKind::kCharging || t == NodeKind::kWaiting) &&
                (h == NodeKind::kTrip || h == NodeKind::kCharging || h == NodeKind::kWaiting) &&
                !(t == NodeKind::kCharging && h == NodeKind::kTrip);
        break;
    }
    if (!shape) issues.push_back(tag + ": endpoint kinds do not match the arc kind");
    if (a.kind == ArcKind::kConnection && shape) {
      const Node& i = g.nodes[a.tail];
      const Node& j = g.nodes[a.head];
      if (j.begin < i.end + a.deadhead_minutes + g.min_layover)
        issues.push_back(tag + ": departs before the previous trip can arrive");
      if (!a.via_depot && a.waiting_minutes > g.max_terminal_wait)
        issues.push_back(tag + ": terminal wait exceeds the threshold without a depot detour");
    }
    if ((t == NodeKind::kCharging || t == NodeKind::kWaiting) &&
        (h == NodeKind::kCharging || h == NodeKind::kWaiting)) {
      const Node& i = g.nodes[a.tail];
      const Node& j = g.nodes[a.head];
      const bool same_interval = j.interval == i.interval && t == NodeKind::kCharging && h == NodeKind::kWaiting;
      if (i.station != j.station || !(j.interval == i.interval + 1 || same_interval))
        issues.push_back(tag + ": station arcs must stay at one station and move forward one interval");
    }
    if (t == NodeKind::kWaiting && h == NodeKind::kTrip && g.nodes[a.head].begin < g.nodes[a.tail].end)
      issues.push_back(tag + ": trip departs before the waiting interval ends");
  }

  // pull-out / pull-in reachability of every trip
  for (int v = 0; v < n; ++v) {
    if (kind(v) != NodeKind::kTrip) continue;
    if (g.in_offsets.empty()) break;
    bool has_in = false, has_out = false;
    for (int a : g.in(v)) has_in |= g.arcs[a].tail == DepotGraph::source();
    for (int a : g.out(v)) has_out |= g.arcs[a].head == DepotGraph::sink();
    if (!has_in || !has_out) issues.push_back("trip node " + std::to_string(v) + " lacks a pull-out or pull-in arc");
  }
  return issues;
}

std::string dump_graph(const DepotGraph& g) {
  std::ostringstream os;
  os << "depot " << g.depot << ": " << g.nodes.size() << " nodes, " << g.arcs.size() << " arcs, "
     << g.intervals.size() << " intervals\n";
  for (int v = 0; v < static_cast<int>(g.nodes.size()); ++v) {
    const Node& n = g.nodes[v];
    os << "node " << v << ' ' << to_string(n.kind);
    if (n.trip >= 0) os << " trip=" << n.trip;
    if (n.station >= 0) os << " station=" << n.station << " interval=" << n.interval;
    if (n.kind != NodeKind::kSink) os << " time=[" << n.begin << ',' << n.end << ')';
    os << '\n';
  }
  for (int id = 0; id < static_cast<int>(g.arcs.size()); ++id) {
    const Arc& a = g.arcs[id];
    os << "arc " << id << ' ' << to_string(a.kind) << ' ' << a.tail << "->" << a.head << " cost=" << a.cost
       << " energy=" << a.energy << " deadhead=" << a.deadhead_minutes << " wait=" << a.waiting_minutes
       << (a.via_depot ? " via_depot" : "") << '\n';
  }
  return os.str();
}

}  // namespace evsp
