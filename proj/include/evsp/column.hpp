#ifndef EVSP_COLUMN_HPP
#define EVSP_COLUMN_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace evsp {

/// One vehicle schedule of a depot graph.
struct Column {
  int depot = 0;
  std::vector<int> nodes;          // source ... sink
  std::vector<int> arcs;           // arc ids, one fewer than nodes
  std::vector<int> trips;          // covered trip ids, in order
  std::vector<int> charger_slots;  // station * intervals + interval, one per charging node
  double cost = 0.0;
  double beta = 0.0;  // ln P_s

  double probability() const { return std::exp(beta); }
  std::uint64_t hash() const;
  bool operator==(const Column&) const = default;
};

/// Duals of the restricted master problem.
struct DualPrices {
  std::vector<double> trip;     // u_i, coverage rows
  std::vector<double> depot;    // pi_d, capacity rows (<= 0)
  double fleet = 0.0;           // total-vehicle row used by branching
  std::vector<double> charger;  // alpha^{hr}, indexed station * intervals + interval (<= 0)
  double chance = 0.0;          // theta (>= 0)

  static DualPrices zero(int trips, int depots, int charger_slots) {
    DualPrices d;
    d.trip.assign(trips, 0.0);
    d.depot.assign(depots, 0.0);
    d.charger.assign(charger_slots, 0.0);
    return d;
  }
};

}  // namespace evsp

#endif  // EVSP_COLUMN_HPP
