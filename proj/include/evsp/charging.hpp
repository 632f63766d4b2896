#ifndef EVSP_CHARGING_HPP
#define EVSP_CHARGING_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "evsp/instance.hpp"

namespace evsp {

/// Piecewise-linear CC-CV charging curve on the integer SoC grid.
///
/// A charge of m consecutive intervals is evaluated once over the full
/// duration m * interval, integrated exactly across the power segments,
/// rounded to the nearest integer % and capped at `cap`. Both the forward
/// map and its (set-valued) inverse are tabulated for m = 0..max_intervals.
class ChargingFunction {
 public:
  ChargingFunction(ChargerProfile profile, double capacity_kwh, int cap, int interval_minutes, int max_intervals);

  /// Builds the curve of an instance, capped at sigma_up.
  static ChargingFunction for_instance(const Instance& instance);

  int cap() const { return cap_; }
  int interval_minutes() const { return interval_minutes_; }
  int max_intervals() const { return max_intervals_; }

  /// Unrounded, uncapped SoC (%) after charging `minutes` from `soc`.
  double integrate(double soc, double minutes) const;

  /// lambda(soc, minutes). Throws std::domain_error when soc lies outside [0, cap].
  int charge(int soc, int minutes) const;

  /// lambda(soc, m * interval) from the table.
  int charge_intervals(int soc, int intervals) const;

  /// All grid SoCs in [0, cap] that charge to `soc` in m intervals, ascending.
  /// Empty when `soc` is unreachable.
  std::span<const int> preimage(int soc, int intervals) const;

  /// Same as preimage() for a duration in minutes (must be a multiple of the interval).
  std::span<const int> preimage_minutes(int soc, int minutes) const;

 private:
  int compute(int soc, double minutes) const;

  ChargerProfile profile_;
  double capacity_kwh_;
  int cap_;
  int interval_minutes_;
  int max_intervals_;
  std::vector<int> forward_;                        // [m][soc]
  std::vector<std::vector<std::vector<int>>> inverse_;  // [m][soc] -> preimage
};

}  // namespace evsp

#endif  // EVSP_CHARGING_HPP
