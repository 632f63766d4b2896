#ifndef EVSP_PROBABILITY_HPP
#define EVSP_PROBABILITY_HPP

#include <span>
#include <vector>

#include "evsp/charging.hpp"
#include "evsp/instance.hpp"
#include "evsp/network.hpp"

namespace evsp {

/// CDF of the SoC on [sigma_low, sigma_up], conditioned on the battery not
/// having been overused yet. Overused mass is never renormalized: it is the
/// deficit 1 - survival().
class SocDistribution {
 public:
  SocDistribution() = default;
  SocDistribution(int low, int up) : low_(low), cdf_(static_cast<std::size_t>(up - low + 1), 0.0) {}

  static SocDistribution point_mass(int low, int up, int soc);
  static SocDistribution from_pmf(int low, std::span<const double> pmf);

  int low() const { return low_; }
  int up() const { return low_ + static_cast<int>(cdf_.size()) - 1; }

  /// F(x); 0 below the range, survival() above it.
  double cdf(int x) const {
    if (x < low_) return 0.0;
    if (x >= up()) return cdf_.back();
    return cdf_[x - low_];
  }
  double mass(int x) const { return cdf(x) - cdf(x - 1); }
  double survival() const { return cdf_.back(); }
  std::span<const double> cdf_values() const { return cdf_; }
  std::vector<double> pmf() const;

  /// Deterministic consumption (deadhead, pull-in/out): X -> X - energy.
  SocDistribution shifted(int energy) const;
  /// Timetabled trip with deadhead approach: X -> X - energy - mu, mu ~ pmf.
  SocDistribution after_trip(const EnergyPmf& pmf, int deadhead) const;
  /// Charging for m intervals: mass at x moves to lambda(x, m * rho).
  SocDistribution after_charge(const ChargingFunction& charging, int intervals) const;

  bool operator==(const SocDistribution&) const = default;

 private:
  int low_ = 0;
  std::vector<double> cdf_;
};

/// Point mass at sigma_init.
SocDistribution init_distribution(const SocPolicy& policy);

enum class StepKind { kTrip, kCharge, kMove };

/// One propagation step. A charge step applies lambda over
/// `charge_intervals` from the distribution it is given.
struct PropagationStep {
  StepKind kind = StepKind::kMove;
  int deadhead = 0;
  const EnergyPmf* energy = nullptr;
  int charge_intervals = 0;
};

/// Throws std::invalid_argument when a trip PMF exceeds the battery range.
SocDistribution propagate(const SocDistribution& dist, const PropagationStep& step,
                          const ChargingFunction* charging = nullptr);

/// Distribution at the sink after following `path` (node ids of `graph`,
/// source to sink). Consecutive charging nodes form one charge of m
/// intervals evaluated from the SoC at the start of the run.
SocDistribution path_distribution(std::span<const int> path, const DepotGraph& graph, const Instance& instance,
                                  const ChargingFunction& charging);

/// P_s: probability of never leaving the recommended range along `path`.
double schedule_probability(std::span<const int> path, const DepotGraph& graph, const Instance& instance,
                            const ChargingFunction& charging);

}  // namespace evsp

#endif  // EVSP_PROBABILITY_HPP
