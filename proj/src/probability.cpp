#include "evsp/probability.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace evsp {

SocDistribution SocDistribution::point_mass(int low, int up, int soc) {
  SocDistribution d(low, up);
  if (soc < low) return d;
  for (int x = std::min(soc, up); x <= up; ++x) d.cdf_[x - low] = 1.0;
  return d;
}

SocDistribution SocDistribution::from_pmf(int low, std::span<const double> pmf) {
  SocDistribution d(low, low + static_cast<int>(pmf.size()) - 1);
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    acc += pmf[k];
    d.cdf_[k] = acc;
  }
  return d;
}

std::vector<double> SocDistribution::pmf() const {
  std::vector<double> out(cdf_.size());
  double previous = 0.0;
  for (std::size_t k = 0; k < cdf_.size(); ++k) {
    out[k] = cdf_[k] - previous;
    previous = cdf_[k];
  }
  return out;
}

SocDistribution SocDistribution::shifted(int energy) const {
  if (energy == 0) return *this;
  SocDistribution d(low_, up());
  // survivors need x - energy >= low, i.e. x >= low + energy
  const double dropped = cdf(low_ + energy - 1);
  for (int x = low_; x <= up(); ++x) d.cdf_[x - low_] = cdf(x + energy) - dropped;
  return d;
}

SocDistribution SocDistribution::after_trip(const EnergyPmf& pmf, int deadhead) const {
  SocDistribution d(low_, up());
  for (const auto& [mu, prob] : pmf.support) {
    if (prob == 0.0) continue;
    const int drop = mu + deadhead;
    const double dropped = cdf(low_ + drop - 1);
    for (int x = low_; x <= up(); ++x) d.cdf_[x - low_] += prob * (cdf(x + drop) - dropped);
  }
  return d;
}

SocDistribution SocDistribution::after_charge(const ChargingFunction& charging, int intervals) const {
  std::vector<double> moved(cdf_.size(), 0.0);
  for (int y = low_; y <= up(); ++y)
    for (int x : charging.preimage(y, intervals))
      if (x >= low_ && x <= up()) moved[y - low_] += mass(x);
  return from_pmf(low_, moved);
}

SocDistribution init_distribution(const SocPolicy& policy) {
  return SocDistribution::point_mass(policy.sigma_low, policy.sigma_up, policy.sigma_init);
}

SocDistribution propagate(const SocDistribution& dist, const PropagationStep& step, const ChargingFunction* charging) {
  switch (step.kind) {
    case StepKind::kMove:
      return dist.shifted(step.deadhead);
    case StepKind::kTrip:
      if (step.energy == nullptr) throw std::invalid_argument("trip step without an energy PMF");
      for (const auto& [mu, prob] : step.energy->support)
        if (mu < 0 || mu > 100) throw std::invalid_argument("energy support outside the battery range");
      return dist.after_trip(*step.energy, step.deadhead);
    case StepKind::kCharge:
      if (charging == nullptr) throw std::invalid_argument("charge step without a charging function");
      return dist.after_charge(*charging, step.charge_intervals);
  }
  return dist;
}

SocDistribution path_distribution(std::span<const int> path, const DepotGraph& graph, const Instance& instance,
                                  const ChargingFunction& charging) {
  SocDistribution dist = init_distribution(instance.policy);
  SocDistribution run_start;
  int run = 0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const int arc = graph.find_arc(path[k - 1], path[k]);
    if (arc < 0) throw std::invalid_argument("path uses a missing arc");
    const Arc& a = graph.arcs[arc];
    const Node& head = graph.nodes[a.head];
    if (head.kind == NodeKind::kCharging) {
      if (run == 0) run_start = dist.shifted(a.energy);
      ++run;
      dist = run_start.after_charge(charging, run);
      continue;
    }
    run = 0;
    if (head.kind == NodeKind::kTrip)
      dist = propagate(dist, {StepKind::kTrip, a.energy, &instance.trips[head.trip].energy, 0}, &charging);
    else
      dist = dist.shifted(a.energy);
  }
  return dist;
}

double schedule_probability(std::span<const int> path, const DepotGraph& graph, const Instance& instance,
                            const ChargingFunction& charging) {
  return path_distribution(path, graph, instance, charging).survival();
}

}  // namespace evsp
