#ifndef EVSP_LP_HPP
#define EVSP_LP_HPP

#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace evsp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(Status status);

using Entry = std::pair<int, double>;  // (row, coefficient)

/// Minimal LP interface used by the restricted master problem:
///   min c'x  s.t.  row_lower <= A x <= row_upper,  col_lower <= x <= col_upper.
/// Duals follow the usual sign convention: reduced cost = c_j - duals' A_j.
class LpSolver {
 public:
  virtual ~LpSolver() = default;

  virtual int add_row(double lower, double upper) = 0;
  virtual int add_column(double cost, double lower, double upper, std::span<const Entry> entries) = 0;
  virtual void set_row_bounds(int row, double lower, double upper) = 0;
  virtual void set_column_bounds(int col, double lower, double upper) = 0;

  virtual int rows() const = 0;
  virtual int columns() const = 0;

  virtual Status solve() = 0;
  virtual double objective() const = 0;
  virtual double dual_objective() const = 0;
  virtual std::span<const double> primal() const = 0;
  virtual std::span<const double> duals() const = 0;
  virtual double reduced_cost(int col) const = 0;
  virtual double row_activity(int row) const = 0;
  virtual int iterations() const = 0;
};

/// Bounded-variable primal revised simplex with a dense explicit basis
/// inverse, refactored with Eigen's LU every `refactor_period` pivots.
///
/// Each row i carries a logical z_i = a_i x bounded by the row bounds.
/// Rows that cannot start with their logical basic get a big-M artificial;
/// a solve that ends with a positive artificial reports kInfeasible.
/// The basis is kept between solves: appending columns at a zero lower
/// bound leaves it primal feasible; bound changes alone leave it dual
/// feasible and are repaired with dual simplex pivots. Anything else
/// cold-starts. Stalling on degenerate vertices is broken by shifting the
/// bounds of degenerate basic variables, removed again before returning.
class BoundedSimplex final : public LpSolver {
 public:
  struct Options {
    double big_m = 1e7;
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-9;
    int refactor_period = 100;
    int max_iterations = 1'000'000;
    // consecutive degenerate pivots before the bounds of degenerate basic
    // variables are shifted (up to max_shift_rounds times), then Bland's rule
    int degenerate_switch = 5;
    int max_shift_rounds = 50;
    double bound_shift = 1e-5;
    int shifted_solves = 3;  // rounds that may shift before a final plain round
    int pricing_chunk = 1000;    // minimum columns scanned per pivot before choosing
  };

  BoundedSimplex() : BoundedSimplex(Options{}) {}
  explicit BoundedSimplex(Options options) : options_(options) {}

  int add_row(double lower, double upper) override;
  int add_column(double cost, double lower, double upper, std::span<const Entry> entries) override;
  void set_row_bounds(int row, double lower, double upper) override;
  void set_column_bounds(int col, double lower, double upper) override;

  int rows() const override { return static_cast<int>(row_logical_.size()); }
  int columns() const override { return static_cast<int>(structural_.size()); }

  Status solve() override;
  double objective() const override { return objective_; }
  double dual_objective() const override;
  std::span<const double> primal() const override { return primal_; }
  std::span<const double> duals() const override { return duals_; }
  double reduced_cost(int col) const override;
  double row_activity(int row) const override;
  int iterations() const override { return iterations_; }

  double column_cost(int col) const { return vars_[structural_[col]].cost; }
  std::span<const Entry> column_entries(int col) const { return vars_[structural_[col]].entries; }
  std::pair<double, double> column_bounds(int col) const {
    return {vars_[structural_[col]].lower, vars_[structural_[col]].upper};
  }
  std::pair<double, double> row_bounds(int row) const {
    return {vars_[row_logical_[row]].lower, vars_[row_logical_[row]].upper};
  }

 private:
  enum class State { kBasic, kAtLower, kAtUpper, kFreeZero };
  enum class Kind { kStructural, kLogical, kArtificial };

  struct Var {
    Kind kind;
    double cost;
    double lower;
    double upper;
    std::vector<Entry> entries;
    State state = State::kAtLower;
    double value = 0.0;
  };

  struct Shift {
    int var;
    double lower, upper;
  };

  void cold_start();
  Status primal_phase(bool allow_shift);
  bool dual_phase();
  bool primal_feasible() const;
  bool dual_feasible();
  void shift_degenerate_bounds();
  void unshift_bounds();
  void pivot(int leave, int entering, const std::vector<double>& alpha);
  void column_of(int var, std::vector<double>& alpha) const;
  void leave_basis(Var& out, State state);
  bool recompute_basic_values();
  void refactor();
  void compute_duals(std::vector<double>& y) const;
  double reduced_cost_of(int var, const std::vector<double>& y) const;
  void finish(Status status);
  static double nonbasic_value(const Var& v);

  Options options_;
  std::vector<Var> vars_;
  std::vector<int> structural_;   // column index -> var
  std::vector<int> row_logical_;  // row -> var
  std::vector<int> row_artificial_;
  std::vector<int> basis_;        // row position -> var
  std::vector<double> binv_;      // dense m x m, row-major
  bool have_basis_ = false;
  bool dirty_ = true;
  int pivots_since_refactor_ = 0;
  int price_start_ = 0;
  std::vector<Shift> shifts_;
  std::mt19937 rng_{12345};

  double objective_ = 0.0;
  std::vector<double> primal_;
  std::vector<double> duals_;
  int iterations_ = 0;
};

}  // namespace evsp::lp

#endif  // EVSP_LP_HPP
