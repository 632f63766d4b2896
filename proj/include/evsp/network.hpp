#ifndef EVSP_NETWORK_HPP
#define EVSP_NETWORK_HPP

#include <span>
#include <string>
#include <vector>

#include "evsp/instance.hpp"

namespace evsp {

struct TimeInterval {
  int index = 0;
  int begin = 0;  // minutes
  int end = 0;
};

/// Intervals of length rho partitioning [horizon_start, horizon_end); the
/// last one may extend past horizon_end.
std::vector<TimeInterval> make_intervals(const Instance& instance);

enum class NodeKind { kSource, kSink, kTrip, kCharging, kWaiting };
enum class ArcKind { kPullOut, kPullIn, kConnection, kCharging, kToCharge };

const char* to_string(NodeKind kind);
const char* to_string(ArcKind kind);

struct Node {
  NodeKind kind = NodeKind::kTrip;
  int trip = -1;
  int station = -1;
  int interval = -1;
  int begin = 0;  // trip: departure; station nodes: interval begin
  int end = 0;    // trip: arrival; station nodes: interval end
};

struct Arc {
  int tail = 0;
  int head = 0;
  ArcKind kind = ArcKind::kConnection;
  double cost = 0.0;
  int energy = 0;  // deterministic deadhead consumption, % of capacity
  int deadhead_minutes = 0;
  int waiting_minutes = 0;
  bool via_depot = false;
};

/// Connection network of one depot with time-expanded charging (H^C) and
/// waiting (H^W) nodes per station and interval. Node layout: 0 is the
/// source, 1 the sink, then one node per trip, then a (charging, waiting)
/// pair per (station, interval).
struct DepotGraph {
  int depot = 0;
  int n_trips = 0;
  int n_stations = 0;
  int min_layover = 0;
  int max_terminal_wait = 0;
  std::vector<TimeInterval> intervals;
  std::vector<Node> nodes;
  std::vector<Arc> arcs;

  // filled by index()
  std::vector<int> out_offsets, out_list;
  std::vector<int> in_offsets, in_list;
  std::vector<int> topological_order;  // shorter than nodes when cyclic

  static constexpr int source() { return 0; }
  static constexpr int sink() { return 1; }
  int trip_node(int trip) const { return 2 + trip; }
  int charging_node(int station, int interval) const {
    return 2 + n_trips + 2 * (station * static_cast<int>(intervals.size()) + interval);
  }
  int waiting_node(int station, int interval) const { return charging_node(station, interval) + 1; }

  std::span<const int> out(int node) const {
    return {out_list.data() + out_offsets[node], out_list.data() + out_offsets[node + 1]};
  }
  std::span<const int> in(int node) const {
    return {in_list.data() + in_offsets[node], in_list.data() + in_offsets[node + 1]};
  }

  /// Arc id from tail to head, or -1.
  int find_arc(int tail, int head) const;

  /// Rebuilds adjacency lists and the topological order.
  void index();
};

/// Builds G^d for one depot: pull-out, pull-in, connection (direct or via
/// the nearest depot when the terminal wait exceeds the threshold),
/// to-charge and charging arcs.
DepotGraph build_graph(const Instance& instance, int depot);

/// Structural checks; returns one message per violation.
std::vector<std::string> validate_graph(const DepotGraph& graph);

/// Human-readable node and arc listing.
std::string dump_graph(const DepotGraph& graph);

}  // namespace evsp

#endif  // EVSP_NETWORK_HPP
