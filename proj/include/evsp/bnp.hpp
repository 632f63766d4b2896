#ifndef EVSP_BNP_HPP
#define EVSP_BNP_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evsp/charging.hpp"
#include "evsp/column.hpp"
#include "evsp/instance.hpp"
#include "evsp/network.hpp"
#include "evsp/pricing.hpp"

namespace evsp {

struct SolveOptions {
  double time_limit_seconds = 7200.0;
  int node_limit = 100000;
  // Labels kept per node in the heuristic pricing pass; exact pricing
  // (no cap) always confirms convergence. 0 skips the heuristic pass.
  int heuristic_label_cap = 32;
  int max_columns = 200;
  // Weight of the previous pricing point when smoothing duals; 0 prices at
  // the RMP duals only. Convergence is always confirmed at the RMP duals.
  double dual_smoothing = 0.5;
  // Also queue the complement of every single-arc fixing, turning the dive
  // into a complete depth-first search.
  bool complete_search = false;
  // Bounded under/over-coverage slack during the dive.
  bool perturbation = true;
  std::ostream* log = nullptr;
  // Receives the LP text of the restricted master at the root bound.
  std::string* root_lp = nullptr;
};

enum class SolveStatus { kSolved, kLimitWithSolution, kLimitNoSolution, kInfeasible, kNoSolutionFound };
const char* to_string(SolveStatus status);

struct SolverStats {
  double gap_pct = 0.0;  // (UB - root LP) / UB
  int nodes = 0;         // branch-and-bound nodes solved (BBn)
  double total_seconds = 0.0;
  double root_seconds = 0.0;
  double pricing_seconds = 0.0;
  double lp_seconds = 0.0;
  int columns = 0;        // pooled columns
  int cg_iterations = 0;  // RMP solves
  int lp_iterations = 0;  // simplex pivots
  double root_lower_bound = 0.0;
  // Root LP, raised to the smaller LP bound of the two vehicle-count
  // children once both are known.
  double lower_bound = 0.0;
  double final_gap_pct = 0.0;  // (UB - lower_bound) / UB
  double upper_bound = 0.0;
  int vehicles = 0;
};

struct Solution {
  std::vector<Column> schedules;
  double cost = 0.0;
  double probability = 1.0;  // product of P_s
};

struct SolveResult {
  SolveStatus status = SolveStatus::kNoSolutionFound;
  bool has_solution = false;
  Solution solution;
  SolverStats stats;
};

SolveResult solve(const Instance& instance, const SolveOptions& options = {});

/// Children fleet bounds (<= floor first, then >= ceil) for a fractional
/// vehicle total; empty when the total is integral.
std::vector<std::pair<double, double>> branch_vehicle_count(double total, std::pair<double, double> bounds);

enum class RoundingStrategy { kSchedule, kConnectionArc, kAnyArc };
const char* to_string(RoundingStrategy strategy);

struct ArcRef {
  int depot = 0;
  int arc = 0;
  bool operator==(const ArcRef&) const = default;
  auto operator<=>(const ArcRef&) const = default;
};

struct RoundingChoice {
  RoundingStrategy strategy = RoundingStrategy::kSchedule;
  double score = 0.0;
  std::vector<int> columns;  // schedule strategy
  std::vector<ArcRef> arcs;  // arc strategies
  double value = 0.0;        // largest candidate value
};

/// Scores the three rounding strategies on a fractional solution and picks
/// up to three targets at >= 0.99, else the single largest. Arc candidates
/// are arcs touching a trip node; `excluded_arcs` and fixed columns
/// (`fixed_columns[k] != 0`) are skipped. Returns nullopt-like choice with
/// score 0 when nothing is fractional.
RoundingChoice select_rounding(const std::vector<Column>& columns, std::span<const double> y,
                               const std::vector<DepotGraph>& graphs, std::span<const char> fixed_columns,
                               const std::vector<ArcRef>& excluded_arcs);

/// Independent feasibility re-check of a set of schedules: exact coverage,
/// depot and charger capacities, worst-case energy and the chance bound.
std::vector<std::string> check_solution(const Instance& instance, const std::vector<DepotGraph>& graphs,
                                        const ChargingFunction& charging, const std::vector<Column>& schedules);

}  // namespace evsp

#endif  // EVSP_BNP_HPP
