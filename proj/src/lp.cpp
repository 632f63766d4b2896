#include "evsp/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace evsp::lp {

const char* to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration limit";
  }
  return "?";
}

int BoundedSimplex::add_row(double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("row lower bound exceeds upper bound");
  const int row = rows();
  row_logical_.push_back(static_cast<int>(vars_.size()));
  vars_.push_back({Kind::kLogical, 0.0, lower, upper, {{row, -1.0}}});
  row_artificial_.push_back(static_cast<int>(vars_.size()));
  vars_.push_back({Kind::kArtificial, options_.big_m, 0.0, 0.0, {{row, 1.0}}});
  have_basis_ = false;
  return row;
}

int BoundedSimplex::add_column(double cost, double lower, double upper, std::span<const Entry> entries) {
  if (lower > upper) throw std::invalid_argument("column lower bound exceeds upper bound");
  Var v{Kind::kStructural, cost, lower, upper, {entries.begin(), entries.end()}};
  for (const auto& [row, coef] : v.entries)
    if (row < 0 || row >= rows()) throw std::out_of_range("column entry refers to a missing row");
  v.state = std::isfinite(lower) ? State::kAtLower : std::isfinite(upper) ? State::kAtUpper : State::kFreeZero;
  v.value = nonbasic_value(v);
  if (v.value != 0.0) dirty_ = true;
  structural_.push_back(static_cast<int>(vars_.size()));
  vars_.push_back(std::move(v));
  return columns() - 1;
}

void BoundedSimplex::set_row_bounds(int row, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("row lower bound exceeds upper bound");
  Var& v = vars_[row_logical_.at(row)];
  v.lower = lower;
  v.upper = upper;
  dirty_ = true;
}

void BoundedSimplex::set_column_bounds(int col, double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("column lower bound exceeds upper bound");
  Var& v = vars_[structural_.at(col)];
  if (v.lower == lower && v.upper == upper) return;
  v.lower = lower;
  v.upper = upper;
  dirty_ = true;
}

double BoundedSimplex::nonbasic_value(const Var& v) {
  switch (v.state) {
    case State::kAtLower: return v.lower;
    case State::kAtUpper: return v.upper;
    case State::kFreeZero: return 0.0;
    case State::kBasic: return v.value;
  }
  return 0.0;
}

void BoundedSimplex::cold_start() {
  const int m = rows();
  std::vector<double> activity(m, 0.0);
  for (Var& v : vars_) {
    if (v.kind == Kind::kArtificial) {
      v.upper = 0.0;
      v.state = State::kAtLower;
      v.value = 0.0;
      continue;
    }
    v.state = std::isfinite(v.lower) ? State::kAtLower : std::isfinite(v.upper) ? State::kAtUpper : State::kFreeZero;
    v.value = nonbasic_value(v);
    if (v.kind == Kind::kStructural && v.value != 0.0)
      for (const auto& [row, coef] : v.entries) activity[row] += coef * v.value;
  }
  basis_.assign(m, -1);
  binv_.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    Var& z = vars_[row_logical_[i]];
    const double r = activity[i];
    if (r >= z.lower - options_.feasibility_tol && r <= z.upper + options_.feasibility_tol) {
      z.state = State::kBasic;
      z.value = r;
      basis_[i] = row_logical_[i];
      binv_[static_cast<std::size_t>(i) * m + i] = -1.0;
      continue;
    }
    // logical sits on its nearest bound; an artificial absorbs the gap
    const double bound = r < z.lower ? z.lower : z.upper;
    z.state = r < z.lower ? State::kAtLower : State::kAtUpper;
    z.value = bound;
    Var& a = vars_[row_artificial_[i]];
    const double sign = bound - r > 0.0 ? 1.0 : -1.0;
    a.entries = {{i, sign}};
    a.upper = kInf;
    a.state = State::kBasic;
    a.value = std::fabs(bound - r);
    basis_[i] = row_artificial_[i];
    binv_[static_cast<std::size_t>(i) * m + i] = sign;
  }
  have_basis_ = true;
  dirty_ = false;
  pivots_since_refactor_ = 0;
}

bool BoundedSimplex::recompute_basic_values() {
  const int m = rows();
  std::vector<double> rhs(m, 0.0);
  for (Var& v : vars_) {
    if (v.state == State::kBasic) continue;
    if (v.state == State::kAtLower && !std::isfinite(v.lower))
      v.state = std::isfinite(v.upper) ? State::kAtUpper : State::kFreeZero;
    if (v.state == State::kAtUpper && !std::isfinite(v.upper))
      v.state = std::isfinite(v.lower) ? State::kAtLower : State::kFreeZero;
    v.value = nonbasic_value(v);
    if (v.value != 0.0)
      for (const auto& [row, coef] : v.entries) rhs[row] -= coef * v.value;
  }
  bool feasible = true;
  for (int i = 0; i < m; ++i) {
    double x = 0.0;
    const double* row = &binv_[static_cast<std::size_t>(i) * m];
    for (int k = 0; k < m; ++k) x += row[k] * rhs[k];
    Var& b = vars_[basis_[i]];
    b.value = x;
    if (x < b.lower - 1e-7 || x > b.upper + 1e-7) feasible = false;
  }
  return feasible;
}

void BoundedSimplex::refactor() {
  const int m = rows();
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (const auto& [row, coef] : vars_[basis_[i]].entries) basis(row, i) = coef;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
  Eigen::MatrixXd inverse = lu.inverse();
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) binv_[static_cast<std::size_t>(i) * m + k] = inverse(i, k);
  pivots_since_refactor_ = 0;
  recompute_basic_values();
}

void BoundedSimplex::compute_duals(std::vector<double>& y) const {
  const int m = rows();
  y.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const double cb = vars_[basis_[i]].cost;
    if (cb == 0.0) continue;
    const double* row = &binv_[static_cast<std::size_t>(i) * m];
    for (int k = 0; k < m; ++k) y[k] += cb * row[k];
  }
}

double BoundedSimplex::reduced_cost_of(int var, const std::vector<double>& y) const {
  const Var& v = vars_[var];
  double d = v.cost;
  for (const auto& [row, coef] : v.entries) d -= y[row] * coef;
  return d;
}

Status BoundedSimplex::solve() {
  const int m = rows();
  iterations_ = 0;
  if (m == 0) {
    // every column sits at its cheapest bound
    for (int s : structural_) {
      Var& v = vars_[s];
      v.state = v.cost >= 0 ? State::kAtLower : State::kAtUpper;
      if (!std::isfinite(nonbasic_value(v)) && v.cost != 0.0) {
        finish(Status::kUnbounded);
        return Status::kUnbounded;
      }
      v.value = std::isfinite(nonbasic_value(v)) ? nonbasic_value(v) : 0.0;
    }
    finish(Status::kOptimal);
    return Status::kOptimal;
  }
  if (!have_basis_) {
    cold_start();
  } else if (dirty_) {
    dirty_ = false;
    // bound changes keep the basis dual feasible; new columns keep it primal feasible
    if (!recompute_basic_values() && !(dual_feasible() && dual_phase())) cold_start();
  }

  // a few shifted rounds, each followed by removing the shifts and
  // repairing feasibility; the last round runs without shifting
  Status status = Status::kOptimal;
  for (int round = 0;; ++round) {
    status = primal_phase(round < options_.shifted_solves);
    if (shifts_.empty()) break;
    unshift_bounds();
    refactor();
    if (!primal_feasible() && !dual_phase()) cold_start();
  }
  if (status != Status::kOptimal) {
    finish(status);
    return status;
  }
  for (int i = 0; i < m; ++i) {
    const Var& a = vars_[row_artificial_[i]];
    if (a.value > 1e-7) {
      finish(Status::kInfeasible);
      return Status::kInfeasible;
    }
  }
  finish(Status::kOptimal);
  return Status::kOptimal;
}

bool BoundedSimplex::primal_feasible() const {
  for (int var : basis_) {
    const Var& b = vars_[var];
    if (b.value < b.lower - 1e-7 || b.value > b.upper + 1e-7) return false;
  }
  return true;
}

bool BoundedSimplex::dual_feasible() {
  std::vector<double> y;
  compute_duals(y);
  const double tol = 1e-7;
  for (int j = 0; j < static_cast<int>(vars_.size()); ++j) {
    const Var& v = vars_[j];
    if (v.state == State::kBasic || v.lower == v.upper) continue;
    const double d = reduced_cost_of(j, y);
    if (v.state == State::kAtLower && d < -tol) return false;
    if (v.state == State::kAtUpper && d > tol) return false;
    if (v.state == State::kFreeZero && std::fabs(d) > tol) return false;
  }
  return true;
}

void BoundedSimplex::shift_degenerate_bounds() {
  std::uniform_real_distribution<double> unit(1.0, 2.0);
  for (int var : basis_) {
    Var& b = vars_[var];
    const bool at_lower = std::isfinite(b.lower) && b.value - b.lower <= options_.feasibility_tol;
    const bool at_upper = std::isfinite(b.upper) && b.upper - b.value <= options_.feasibility_tol;
    if (!at_lower && !at_upper) continue;
    shifts_.push_back({var, b.lower, b.upper});
    if (at_lower) b.lower -= options_.bound_shift * unit(rng_) * std::max(1.0, std::fabs(b.lower));
    if (at_upper) b.upper += options_.bound_shift * unit(rng_) * std::max(1.0, std::fabs(b.upper));
  }
}

void BoundedSimplex::unshift_bounds() {
  // restore in reverse so a variable shifted twice gets its first saved bounds
  for (auto it = shifts_.rbegin(); it != shifts_.rend(); ++it) {
    Var& v = vars_[it->var];
    v.lower = it->lower;
    v.upper = it->upper;
    if (v.state != State::kBasic) v.value = nonbasic_value(v);
  }
  shifts_.clear();
}

void BoundedSimplex::pivot(int leave, int entering, const std::vector<double>& alpha) {
  const int m = rows();
  basis_[leave] = entering;
  double* pivot_row = &binv_[static_cast<std::size_t>(leave) * m];
  const double p = alpha[leave];
  for (int k = 0; k < m; ++k) pivot_row[k] /= p;
  for (int i = 0; i < m; ++i) {
    if (i == leave || alpha[i] == 0.0) continue;
    double* row = &binv_[static_cast<std::size_t>(i) * m];
    const double factor = alpha[i];
    for (int k = 0; k < m; ++k) row[k] -= factor * pivot_row[k];
  }
  if (++pivots_since_refactor_ >= options_.refactor_period) refactor();
}

void BoundedSimplex::column_of(int var, std::vector<double>& alpha) const {
  const int m = rows();
  alpha.assign(m, 0.0);
  for (const auto& [row, coef] : vars_[var].entries)
    for (int i = 0; i < m; ++i) alpha[i] += binv_[static_cast<std::size_t>(i) * m + row] * coef;
}

void BoundedSimplex::leave_basis(Var& out, State state) {
  out.state = state;
  out.value = nonbasic_value(out);
  if (out.kind == Kind::kArtificial) {
    out.upper = 0.0;
    out.state = State::kAtLower;
    out.value = 0.0;
  }
}

bool BoundedSimplex::dual_phase() {
  const int m = rows();
  std::vector<double> y, alpha;
  const int limit = iterations_ + 50 * (m + 10);
  while (iterations_ < limit) {
    int r = -1;
    double worst = 1e-9;
    for (int i = 0; i < m; ++i) {
      const Var& b = vars_[basis_[i]];
      const double infeasibility = std::max(b.lower - b.value, b.value - b.upper);
      if (infeasibility > worst) {
        worst = infeasibility;
        r = i;
      }
    }
    if (r < 0) return true;
    compute_duals(y);
    Var& br = vars_[basis_[r]];
    const bool up = br.value < br.lower;
    const double target = up ? br.lower : br.upper;
    const double* rho = &binv_[static_cast<std::size_t>(r) * m];

    int q = -1;
    double best_ratio = kInf, best_alpha = 0.0;
    for (int j = 0; j < static_cast<int>(vars_.size()); ++j) {
      const Var& v = vars_[j];
      if (v.state == State::kBasic || v.lower == v.upper) continue;
      double a = 0.0;
      for (const auto& [row, coef] : v.entries) a += rho[row] * coef;
      if (std::fabs(a) <= options_.pivot_tol) continue;
      const bool eligible = v.state == State::kFreeZero ||
                            (up ? (v.state == State::kAtLower) == (a < 0) : (v.state == State::kAtLower) == (a > 0));
      if (!eligible) continue;
      const double ratio = std::fabs(reduced_cost_of(j, y)) / std::fabs(a);
      if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::fabs(a) > best_alpha)) {
        best_ratio = ratio;
        best_alpha = std::fabs(a);
        q = j;
      }
    }
    if (q < 0) return false;
    column_of(q, alpha);
    const double delta = (br.value - target) / alpha[r];
    for (int i = 0; i < m; ++i)
      if (alpha[i] != 0.0) vars_[basis_[i]].value -= delta * alpha[i];
    Var& in = vars_[q];
    in.value += delta;
    leave_basis(br, up ? State::kAtLower : State::kAtUpper);
    in.state = State::kBasic;
    ++iterations_;
    pivot(r, q, alpha);
  }
  return false;
}

Status BoundedSimplex::primal_phase(bool allow_shift) {
  const int m = rows();
  std::vector<double> y;
  std::vector<double> alpha(m);
  int degenerate_run = 0;
  int shift_rounds = 0;
  bool bland = false;
  const double tol = options_.optimality_tol;

  while (true) {
    if (iterations_ >= options_.max_iterations) return Status::kIterationLimit;
    compute_duals(y);

    // partial pricing: scan rotating chunks, take the best candidate of the
    // first chunk that has one; a full sweep without candidates is optimal
    int entering = -1;
    double best = 0.0;
    double direction = 0.0;
    const int n = static_cast<int>(vars_.size());
    const int chunk = bland ? n : std::max(options_.pricing_chunk, n / 8);
    for (int scanned = 0; scanned < n && entering < 0;) {
      const int stop = std::min(n, scanned + chunk);
      for (; scanned < stop; ++scanned) {
        const int j = bland ? scanned : (price_start_ + scanned) % n;
        const Var& v = vars_[j];
        if (v.state == State::kBasic || v.lower == v.upper) continue;
        const double d = reduced_cost_of(j, y);
        double dir = 0.0;
        if (v.state == State::kAtLower && d < -tol) dir = 1.0;
        else if (v.state == State::kAtUpper && d > tol) dir = -1.0;
        else if (v.state == State::kFreeZero && std::fabs(d) > tol) dir = d < 0 ? 1.0 : -1.0;
        if (dir == 0.0) continue;
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::fabs(d) > best) {
          best = std::fabs(d);
          entering = j;
          direction = dir;
        }
      }
    }
    if (!bland) price_start_ = (price_start_ + chunk) % std::max(1, n);
    if (entering < 0) break;

    column_of(entering, alpha);

    // two-pass ratio test: relaxed bound first, then the largest pivot
    const double ftol = options_.feasibility_tol;
    // Bland's rule needs the exact minimum ratio to keep its guarantee
    const double slack = bland ? 0.0 : ftol;
    double relaxed = kInf;
    for (int i = 0; i < m; ++i) {
      if (std::fabs(alpha[i]) <= options_.pivot_tol) continue;
      const Var& b = vars_[basis_[i]];
      const double rate = -direction * alpha[i];
      const double t = rate < 0 ? (b.value - b.lower + slack) / -rate : (b.upper - b.value + slack) / rate;
      relaxed = std::min(relaxed, std::max(0.0, t) + (bland ? 1e-12 : 0.0));
    }
    int leave = -1;
    double step = kInf;
    double best_pivot = 0.0;
    for (int i = 0; i < m; ++i) {
      if (std::fabs(alpha[i]) <= options_.pivot_tol) continue;
      const Var& b = vars_[basis_[i]];
      const double rate = -direction * alpha[i];
      const double t = rate < 0 ? (b.value - b.lower) / -rate : (b.upper - b.value) / rate;
      if (!std::isfinite(t) || t > relaxed) continue;
      const bool better = bland ? (leave < 0 || basis_[i] < basis_[leave])
                                : std::fabs(alpha[i]) > best_pivot;
      if (better) {
        leave = i;
        best_pivot = std::fabs(alpha[i]);
        step = std::max(0.0, t);
      }
    }
    Var& q = vars_[entering];
    const double flip = q.upper - q.lower;
    if (leave < 0 && !std::isfinite(flip)) return Status::kUnbounded;
    const bool bound_flip = std::isfinite(flip) && (leave < 0 || flip <= step);
    if (bound_flip) step = flip;

    ++iterations_;
    if (step <= 1e-12) {
      if (++degenerate_run >= options_.degenerate_switch) {
        degenerate_run = 0;
        if (allow_shift && shift_rounds < options_.max_shift_rounds) {
          ++shift_rounds;
          shift_degenerate_bounds();
          continue;  // the ratio test is stale after shifting
        }
        bland = true;
      }
    } else {
      degenerate_run = 0;
      bland = false;
    }

    for (int i = 0; i < m; ++i)
      if (alpha[i] != 0.0) vars_[basis_[i]].value -= direction * step * alpha[i];
    if (bound_flip) {
      q.state = q.state == State::kAtLower ? State::kAtUpper
                : q.state == State::kAtUpper ? State::kAtLower
                                             : (direction > 0 ? State::kAtUpper : State::kAtLower);
      q.value = nonbasic_value(q);
      continue;
    }
    q.value += direction * step;

    Var& out = vars_[basis_[leave]];
    const double rate = -direction * alpha[leave];
    leave_basis(out, rate < 0 ? State::kAtLower : State::kAtUpper);
    q.state = State::kBasic;
    pivot(leave, entering, alpha);
  }
  refactor();
  return Status::kOptimal;
}

void BoundedSimplex::finish(Status) {
  primal_.resize(structural_.size());
  for (std::size_t j = 0; j < structural_.size(); ++j) primal_[j] = vars_[structural_[j]].value;
  if (rows() > 0 && have_basis_) compute_duals(duals_);
  else duals_.assign(rows(), 0.0);
  objective_ = 0.0;
  for (const Var& v : vars_)
    if (v.value != 0.0) objective_ += v.cost * v.value;
}

double BoundedSimplex::reduced_cost(int col) const {
  const Var& v = vars_[structural_.at(col)];
  double d = v.cost;
  for (const auto& [row, coef] : v.entries) d -= duals_[row] * coef;
  return d;
}

double BoundedSimplex::row_activity(int row) const {
  double total = 0.0;
  const Var& z = vars_[row_logical_.at(row)];
  total = z.value;
  const Var& a = vars_[row_artificial_.at(row)];
  if (a.value != 0.0) total -= a.entries.front().second * a.value;
  return total;
}

double BoundedSimplex::dual_objective() const {
  // sum over nonbasic variables of d_j times the bound its sign selects
  double total = 0.0;
  for (const Var& v : vars_) {
    if (v.state == State::kBasic) continue;
    double d = v.cost;
    for (const auto& [row, coef] : v.entries) d -= duals_[row] * coef;
    if (d == 0.0) continue;
    const double bound = d > 0 ? v.lower : v.upper;
    if (!std::isfinite(bound)) {
      if (std::fabs(d) > options_.optimality_tol) return -kInf;
      continue;
    }
    total += d * bound;
  }
  return total;
}

}  // namespace evsp::lp
