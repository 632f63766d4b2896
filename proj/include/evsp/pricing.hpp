#ifndef EVSP_PRICING_HPP
#define EVSP_PRICING_HPP

#include <optional>
#include <span>
#include <vector>

#include "evsp/charging.hpp"
#include "evsp/column.hpp"
#include "evsp/instance.hpp"
#include "evsp/network.hpp"
#include "evsp/probability.hpp"

namespace evsp {

/// Partial path state. At a charging node the label also keeps the state
/// at the start of the current charge run, so that a run of m intervals is
/// always evaluated as lambda(x, m * rho) from that state.
struct Label {
  int node = 0;
  SocDistribution dist;
  int omega = 0;      // worst-case SoC
  double cost = 0.0;  // reduced cost so far
  int recharges = 0;  // R
  int idle = 0;       // E
  int run = 0;        // charge intervals in the current run (charging nodes only)
  SocDistribution run_start;
  int run_start_omega = 0;
  int trace = -1;
};

struct PricingOptions {
  int max_columns = 200;
  bool use_dominance = true;
  double reduced_cost_threshold = -1e-6;
  // Keep at most this many labels (cheapest first) per node; 0 keeps all.
  // A positive cap makes pricing heuristic.
  int max_labels_per_node = 0;
};

struct PricingResult {
  std::vector<Column> columns;  // most negative reduced cost first
  std::vector<double> reduced_costs;
  double min_reduced_cost = 0.0;  // over all sink labels; 0 when none
  long long labels = 0;           // labels created
  bool truncated = false;         // the per-node cap discarded labels
};

/// c_ij minus the duals attached to the arc's tail: pi_d (and the fleet
/// dual) on pull-out arcs, u_i on arcs leaving trip i, alpha^{hr} on arcs
/// leaving charging node h^c_r. The chance term is added at the sink.
double modified_arc_cost(const DepotGraph& graph, int arc, const DualPrices& duals);

/// Labeling algorithm on one depot graph.
class Pricer {
 public:
  Pricer(const DepotGraph& graph, const Instance& instance, const ChargingFunction& charging);

  Label initial() const;

  /// Extends `label` along `arc`; nullopt when the result violates the
  /// worst-case SoC bound, the chance bound or a resource window.
  std::optional<Label> extend(const Label& label, int arc, const DualPrices& duals) const;

  /// True when `a` dominates `b` (both at the same node).
  bool dominates(const Label& a, const Label& b) const;

  /// Arcs disabled by `arc_enabled[a] == 0` are skipped; an empty span enables all.
  PricingResult solve(const DualPrices& duals, const PricingOptions& options,
                      std::span<const char> arc_enabled = {}) const;

  const DepotGraph& graph() const { return graph_; }

 private:
  const DepotGraph& graph_;
  const Instance& instance_;
  const ChargingFunction& charging_;
  double min_survival_;
};

/// Convenience wrapper around Pricer::solve.
PricingResult solve_pricing(const DepotGraph& graph, const Instance& instance, const ChargingFunction& charging,
                            const DualPrices& duals, const PricingOptions& options = {},
                            std::span<const char> arc_enabled = {});

/// Rebuilds a column from a node path of `graph` (cost, coverage, charger
/// slots and ln P_s recomputed from scratch).
Column make_column(const DepotGraph& graph, const Instance& instance, const ChargingFunction& charging,
                   std::span<const int> path);

/// Reduced cost of a column under `duals`, from its coefficients.
double column_reduced_cost(const Column& column, const DualPrices& duals, int intervals);

}  // namespace evsp

#endif  // EVSP_PRICING_HPP
