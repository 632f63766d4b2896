#include "evsp/charging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace evsp {

ChargingFunction::ChargingFunction(ChargerProfile profile, double capacity_kwh, int cap, int interval_minutes,
                                   int max_intervals)
    : profile_(std::move(profile)),
      capacity_kwh_(capacity_kwh),
      cap_(cap),
      interval_minutes_(interval_minutes),
      max_intervals_(max_intervals) {
  if (cap_ < 0 || cap_ > 100) throw std::invalid_argument("charging cap must lie in [0, 100]");
  if (interval_minutes_ <= 0) throw std::invalid_argument("interval length must be positive");
  if (max_intervals_ < 0) throw std::invalid_argument("negative interval count");
  const int width = cap_ + 1;
  forward_.resize(static_cast<std::size_t>(max_intervals_ + 1) * width);
  inverse_.assign(max_intervals_ + 1, std::vector<std::vector<int>>(width));
  for (int m = 0; m <= max_intervals_; ++m)
    for (int x = 0; x <= cap_; ++x) {
      const int y = compute(x, static_cast<double>(m) * interval_minutes_);
      forward_[static_cast<std::size_t>(m) * width + x] = y;
      inverse_[m][y].push_back(x);
    }
}

ChargingFunction ChargingFunction::for_instance(const Instance& instance) {
  const int span = instance.horizon_end - instance.horizon_start;
  const int rho = instance.policy.interval_minutes;
  const int intervals = (span + rho - 1) / rho;
  return ChargingFunction(instance.charger, instance.battery_kwh, std::min(instance.policy.sigma_up,
                                                                           instance.policy.sigma_max),
                          rho, intervals);
}

double ChargingFunction::integrate(double soc, double minutes) const {
  double x = soc;
  double remaining = minutes;
  for (const auto& seg : profile_.segments) {
    if (remaining <= 0.0) break;
    if (x >= seg.soc_upper) continue;
    const double pct_per_minute = seg.kwh_per_minute / capacity_kwh_ * 100.0;
    const double needed = (seg.soc_upper - x) / pct_per_minute;
    if (needed >= remaining) {
      x += remaining * pct_per_minute;
      remaining = 0.0;
    } else {
      x = seg.soc_upper;
      remaining -= needed;
    }
  }
  return x;
}

int ChargingFunction::compute(int soc, double minutes) const {
  const double raw = integrate(soc, minutes);
  // half-up rounding; the epsilon absorbs representation error on exact halves
  const int rounded = static_cast<int>(std::floor(raw + 0.5 + 1e-9));
  return std::min(rounded, cap_);
}

int ChargingFunction::charge(int soc, int minutes) const {
  if (soc < 0 || soc > cap_)
    throw std::domain_error("SoC " + std::to_string(soc) + "% outside the chargeable range [0, " +
                            std::to_string(cap_) + "]");
  if (minutes < 0) throw std::domain_error("negative charging duration");
  if (minutes % interval_minutes_ == 0 && minutes / interval_minutes_ <= max_intervals_)
    return charge_intervals(soc, minutes / interval_minutes_);
  return compute(soc, minutes);
}

int ChargingFunction::charge_intervals(int soc, int intervals) const {
  if (soc < 0 || soc > cap_) throw std::domain_error("SoC outside the chargeable range");
  if (intervals < 0) throw std::domain_error("negative charging duration");
  if (intervals > max_intervals_) return compute(soc, static_cast<double>(intervals) * interval_minutes_);
  return forward_[static_cast<std::size_t>(intervals) * (cap_ + 1) + soc];
}

std::span<const int> ChargingFunction::preimage(int soc, int intervals) const {
  if (soc < 0 || soc > cap_ || intervals < 0) return {};
  if (intervals > max_intervals_) throw std::out_of_range("charging duration beyond the tabulated horizon");
  return inverse_[intervals][soc];
}

std::span<const int> ChargingFunction::preimage_minutes(int soc, int minutes) const {
  if (minutes % interval_minutes_ != 0) throw std::domain_error("duration is not a multiple of the interval");
  return preimage(soc, minutes / interval_minutes_);
}

}  // namespace evsp
