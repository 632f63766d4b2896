#include "evsp/master.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace evsp {

std::uint64_t Column::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int k = 0; k < 4; ++k) {
      h ^= (v >> (16 * k)) & 0xffff;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(depot));
  for (int v : nodes) mix(static_cast<std::uint64_t>(v));
  return h;
}

MasterProblem::MasterProblem(const Instance& instance, int intervals)
    : n_trips_(static_cast<int>(instance.trips.size())),
      n_depots_(static_cast<int>(instance.depots.size())),
      n_stations_(static_cast<int>(instance.stations.size())),
      n_intervals_(intervals),
      chance_rhs_(std::log(1.0 - instance.policy.epsilon)) {
  for (int i = 0; i < n_trips_; ++i) lp_.add_row(1.0, 1.0);
  depot_row0_ = lp_.rows();
  for (const Depot& d : instance.depots) lp_.add_row(-lp::kInf, d.capacity);
  fleet_row_ = lp_.add_row(fleet_lo_, fleet_hi_);
  charger_row0_ = lp_.rows();
  for (const ChargingStation& h : instance.stations)
    for (int r = 0; r < intervals; ++r) lp_.add_row(-lp::kInf, h.chargers);
  chance_row_ = lp_.add_row(chance_rhs_, lp::kInf);

  for (const Trip& t : instance.trips) {
    under_caps_.push_back(t.under_cover_cap);
    over_caps_.push_back(t.over_cover_cap);
    const lp::Entry plus[] = {{t.id, 1.0}};
    const lp::Entry minus[] = {{t.id, -1.0}};
    under_col_.push_back(lp_.add_column(instance.costs.under_cover_penalty, 0.0, t.under_cover_cap, plus));
    over_col_.push_back(lp_.add_column(instance.costs.over_cover_penalty, 0.0, t.over_cover_cap, minus));
    artificial_col_.push_back(lp_.add_column(kArtificialCost, 0.0, 1.0, plus));
  }
  const lp::Entry fleet[] = {{fleet_row_, 1.0}};
  fleet_slack_col_ = lp_.add_column(kArtificialCost, 0.0, lp::kInf, fleet);
  const lp::Entry chance[] = {{chance_row_, 1.0}};
  chance_slack_col_ = lp_.add_column(kArtificialCost, 0.0, lp::kInf, chance);
}

int MasterProblem::add_columns(std::vector<Column> columns) {
  int added = 0;
  for (Column& c : columns) {
    const std::uint64_t h = c.hash();
    auto& bucket = by_hash_[h];
    bool duplicate = false;
    for (int k : bucket)
      if (columns_[k].depot == c.depot && columns_[k].nodes == c.nodes) duplicate = true;
    if (duplicate) continue;
    if (c.depot < 0 || c.depot >= n_depots_) throw std::out_of_range("column depot out of range");

    std::vector<lp::Entry> entries;
    for (int t : c.trips) entries.push_back({t, 1.0});
    entries.push_back({depot_row0_ + c.depot, 1.0});
    entries.push_back({fleet_row_, 1.0});
    std::vector<double> usage(static_cast<std::size_t>(n_stations_) * n_intervals_, 0.0);
    for (int slot : c.charger_slots) usage.at(slot) += 1.0;
    for (int slot = 0; slot < static_cast<int>(usage.size()); ++slot)
      if (usage[slot] != 0.0) entries.push_back({charger_row0_ + slot, usage[slot]});
    if (c.beta != 0.0) entries.push_back({chance_row_, c.beta});

    bucket.push_back(static_cast<int>(columns_.size()));
    lp_col_.push_back(lp_.add_column(c.cost, 0.0, 1.0, entries));
    columns_.push_back(std::move(c));
    ++added;
  }
  return added;
}

RmpResult MasterProblem::solve() {
  RmpResult out;
  out.status = lp_.solve();
  out.iterations = lp_.iterations();
  if (out.status != lp::Status::kOptimal) return out;
  out.objective = lp_.objective();
  out.dual_objective = lp_.dual_objective();
  const auto x = lp_.primal();
  out.y.resize(columns_.size());
  for (std::size_t k = 0; k < columns_.size(); ++k) out.y[k] = x[lp_col_[k]];
  for (int i = 0; i < n_trips_; ++i) {
    out.artificial += x[artificial_col_[i]];
    out.perturbation += x[under_col_[i]] + x[over_col_[i]];
  }
  out.artificial += x[fleet_slack_col_] + x[chance_slack_col_];

  const auto y = lp_.duals();
  out.duals.trip.assign(y.begin(), y.begin() + n_trips_);
  out.duals.depot.assign(y.begin() + depot_row0_, y.begin() + depot_row0_ + n_depots_);
  out.duals.fleet = y[fleet_row_];
  out.duals.charger.assign(y.begin() + charger_row0_,
                           y.begin() + charger_row0_ + static_cast<std::ptrdiff_t>(n_stations_) * n_intervals_);
  out.duals.chance = y[chance_row_];
  return out;
}

void MasterProblem::strip_perturbation() {
  if (!perturbation_active_) return;
  for (int i = 0; i < n_trips_; ++i) {
    lp_.set_column_bounds(under_col_[i], 0.0, 0.0);
    lp_.set_column_bounds(over_col_[i], 0.0, 0.0);
  }
  perturbation_active_ = false;
}

void MasterProblem::restore_perturbation() {
  if (perturbation_active_) return;
  for (int i = 0; i < n_trips_; ++i) {
    lp_.set_column_bounds(under_col_[i], 0.0, under_caps_[i]);
    lp_.set_column_bounds(over_col_[i], 0.0, over_caps_[i]);
  }
  perturbation_active_ = true;
}

void MasterProblem::set_fleet_bounds(double lower, double upper) {
  fleet_lo_ = lower;
  fleet_hi_ = upper;
  lp_.set_row_bounds(fleet_row_, lower, upper);
}

void MasterProblem::set_column_bounds(int column, double lower, double upper) {
  lp_.set_column_bounds(lp_col_.at(column), lower, upper);
}

std::pair<double, double> MasterProblem::column_bounds(int column) const {
  return lp_.column_bounds(lp_col_.at(column));
}

std::string MasterProblem::lp_text() const {
  std::ostringstream os;
  os << std::setprecision(17);
  const int n = lp_.columns();
  std::vector<std::string> names(n);
  for (int i = 0; i < n_trips_; ++i) {
    names[under_col_[i]] = "eta_plus_" + std::to_string(i);
    names[over_col_[i]] = "eta_minus_" + std::to_string(i);
    names[artificial_col_[i]] = "art_" + std::to_string(i);
  }
  names[fleet_slack_col_] = "art_fleet";
  names[chance_slack_col_] = "art_chance";
  for (std::size_t k = 0; k < columns_.size(); ++k) names[lp_col_[k]] = "y_" + std::to_string(k);

  std::vector<std::vector<std::pair<int, double>>> rows(lp_.rows());
  for (int j = 0; j < n; ++j)
    for (const auto& [r, a] : lp_.column_entries(j)) rows[r].push_back({j, a});

  auto row_name = [&](int r) {
    if (r < n_trips_) return "cover_" + std::to_string(r);
    if (r < fleet_row_) return "depot_" + std::to_string(r - depot_row0_);
    if (r == fleet_row_) return std::string("fleet");
    if (r == chance_row_) return std::string("chance");
    const int slot = r - charger_row0_;
    return "charger_" + std::to_string(slot / n_intervals_) + "_" + std::to_string(slot % n_intervals_);
  };
  auto terms = [&](const std::vector<std::pair<int, double>>& list) {
    std::ostringstream t;
    t << std::setprecision(17);
    bool first = true;
    for (const auto& [j, a] : list) {
      t << (a < 0 ? " - " : first ? " " : " + ") << std::fabs(a) << ' ' << names[j];
      first = false;
    }
    if (first) t << " 0 " << names[0];
    return t.str();
  };

  os << "\\ restricted master problem\nMinimize\n obj:";
  std::vector<std::pair<int, double>> objective;
  for (int j = 0; j < n; ++j)
    if (lp_.column_cost(j) != 0.0) objective.push_back({j, lp_.column_cost(j)});
  os << terms(objective) << "\nSubject To\n";
  for (int r = 0; r < lp_.rows(); ++r) {
    const auto [lo, hi] = lp_.row_bounds(r);
    const std::string body = terms(rows[r]);
    if (lo == hi) {
      os << ' ' << row_name(r) << ':' << body << " = " << lo << '\n';
      continue;
    }
    if (std::isfinite(lo)) os << ' ' << row_name(r) << "_lo:" << body << " >= " << lo << '\n';
    if (std::isfinite(hi)) os << ' ' << row_name(r) << "_hi:" << body << " <= " << hi << '\n';
  }
  os << "Bounds\n";
  for (int j = 0; j < n; ++j) {
    const auto [lo, hi] = lp_.column_bounds(j);
    os << ' ' << lo << " <= " << names[j] << " <= ";
    if (std::isfinite(hi)) os << hi;
    else os << "+inf";
    os << '\n';
  }
  os << "End\n";
  return os.str();
}

}  // namespace evsp
