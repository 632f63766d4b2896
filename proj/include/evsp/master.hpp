#ifndef EVSP_MASTER_HPP
#define EVSP_MASTER_HPP

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "evsp/column.hpp"
#include "evsp/instance.hpp"
#include "evsp/lp.hpp"

namespace evsp {

struct RmpResult {
  lp::Status status = lp::Status::kInfeasible;
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<double> y;  // one value per pooled column
  DualPrices duals;
  int iterations = 0;
  // Mass on the prohibitive artificial columns; > 0 means the restriction
  // admits no real solution with the current pool.
  double artificial = 0.0;
  double perturbation = 0.0;  // sum of eta values
};

/// Restricted master problem over a growing column pool:
///
///   min  sum c_s y_s + sum (d+ eta+_i + d- eta-_i) + M * artificials
///   s.t. sum_s a_is y_s + eta+_i - eta-_i = 1          every trip
///        sum_{s in S_d} y_s <= b_d                     every depot
///        fleet_lo <= sum_s y_s <= fleet_hi             vehicle-count branching
///        sum_s w_s^{hr} y_s <= g_h                     every station and interval
///        sum_s beta_s y_s >= ln(1 - eps)
///        0 <= y_s <= 1, 0 <= eta+-_i <= xi+-_i
///
/// Each trip has an artificial single-trip column; the fleet and chance rows
/// have artificial slacks, so the LP is always feasible.
class MasterProblem {
 public:
  static constexpr double kArtificialCost = 1e5;

  MasterProblem(const Instance& instance, int intervals);

  int trips() const { return n_trips_; }
  int intervals() const { return n_intervals_; }
  double chance_rhs() const { return chance_rhs_; }

  /// Appends columns not yet pooled (by depot and node sequence); returns the number added.
  int add_columns(std::vector<Column> columns);
  const std::vector<Column>& columns() const { return columns_; }

  RmpResult solve();

  /// Sets every xi to 0 so coverage is exact again. Idempotent.
  void strip_perturbation();
  /// Restores the instance caps (used when the driver backtracks).
  void restore_perturbation();
  bool perturbation_active() const { return perturbation_active_; }

  void set_fleet_bounds(double lower, double upper);
  std::pair<double, double> fleet_bounds() const { return {fleet_lo_, fleet_hi_}; }

  /// Bounds of a pooled column: [0, 1] free, [1, 1] fixed, [0, 0] inactive.
  void set_column_bounds(int column, double lower, double upper);
  std::pair<double, double> column_bounds(int column) const;

  /// CPLEX LP text of the current restricted master.
  std::string lp_text() const;

 private:
  int n_trips_;
  int n_depots_;
  int n_stations_;
  int n_intervals_;
  double chance_rhs_;
  std::vector<double> under_caps_, over_caps_;
  bool perturbation_active_ = true;
  double fleet_lo_ = 0.0, fleet_hi_ = lp::kInf;

  lp::BoundedSimplex lp_;
  int depot_row0_, fleet_row_, charger_row0_, chance_row_;
  std::vector<int> under_col_, over_col_, artificial_col_;
  int fleet_slack_col_, chance_slack_col_;
  std::vector<Column> columns_;
  std::vector<int> lp_col_;  // pooled column -> lp column
  std::unordered_map<std::uint64_t, std::vector<int>> by_hash_;
};

}  // namespace evsp

#endif  // EVSP_MASTER_HPP
