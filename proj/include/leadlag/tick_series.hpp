#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leadlag/error.hpp"

namespace leadlag {

// Observation times and prices of one asset. Consecutive observations define
// the half-open intervals (t_{i-1}, t_i]. `horizon` is the end of the
// observation window [0, T + delta]; it defaults to the last observation time.
class TickSeries {
 public:
  TickSeries() = default;

  TickSeries(std::vector<double> times, std::vector<double> prices, double tau,
             std::optional<double> horizon = std::nullopt)
      : times_(std::move(times)), prices_(std::move(prices)), tau_(tau) {
    if (times_.size() != prices_.size())
      throw data_error("TickSeries: times and prices differ in length");
    if (times_.size() < 2) throw data_error("TickSeries: need at least two observations");
    if (!(tau_ > 0.0)) throw usage_error("TickSeries: resolution must be positive");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1]))
        throw data_error("TickSeries: times must be strictly increasing (index " +
                         std::to_string(i) + ")");
    horizon_ = horizon.value_or(times_.back());
    if (horizon_ < times_.back())
      throw data_error("TickSeries: horizon precedes the last observation");
  }

  std::span<const double> times() const { return times_; }
  std::span<const double> prices() const { return prices_; }
  double tau() const { return tau_; }
  double horizon() const { return horizon_; }
  std::size_t size() const { return times_.size(); }
  std::size_t intervals() const { return times_.size() - 1; }

  // Return over interval i, i.e. X(t_{i+1}) - X(t_i).
  double increment(std::size_t i) const { return prices_[i + 1] - prices_[i]; }

  TickSeries scaled(double factor) const {
    std::vector<double> p(prices_);
    for (double& v : p) v *= factor;
    return TickSeries(times_, std::move(p), tau_, horizon_);
  }

  TickSeries shifted(double offset, std::optional<double> horizon = std::nullopt) const {
    std::vector<double> t(times_);
    for (double& v : t) v += offset;
    return TickSeries(std::move(t), prices_, tau_, horizon.value_or(horizon_ + offset));
  }

 private:
  std::vector<double> times_;
  std::vector<double> prices_;
  double tau_ = 1.0;
  double horizon_ = 0.0;
};

// Integer lattice index of t on a grid of step `step`, or nothing if t is
// not a lattice point up to 1e-6 steps plus the rounding of t itself.
inline std::optional<std::int64_t> lattice_index(double t, double step) {
  const double x = t / step;
  const double r = std::nearbyint(x);
  if (std::abs(x - r) > 1e-6 + 64.0 * 2.220446049250313e-16 * std::abs(x)) return std::nullopt;
  return static_cast<std::int64_t>(r);
}

// Search grid {l * step : |l| <= max_index} with closed exclusion intervals
// (in the same time unit as step) removed.
struct LagGrid {
  double step = 1.0;
  int max_index = 0;
  std::vector<std::pair<double, double>> exclusions;

  static LagGrid symmetric(double step, int max_index) {
    LagGrid g;
    g.step = step;
    g.max_index = max_index;
    g.validate();
    return g;
  }

  // Grid spanning [-max_lag, max_lag] at the given step, e.g. 2ms at 1us.
  static LagGrid spanning(double max_lag, double step) {
    if (!(step > 0.0)) throw usage_error("LagGrid: step must be positive");
    return symmetric(step, static_cast<int>(std::floor(max_lag / step + 1e-9)));
  }

  LagGrid& exclude(double lo, double hi) {
    if (hi < lo) std::swap(lo, hi);
    exclusions.emplace_back(lo, hi);
    return *this;
  }

  void validate() const {
    if (!(step > 0.0)) throw usage_error("LagGrid: step must be positive");
    if (max_index < 0) throw usage_error("LagGrid: max index must be nonnegative");
  }

  bool contains(int l) const {
    if (l < -max_index || l > max_index) return false;
    const double lag = l * step;
    const double tol = 1e-9 * step;
    for (const auto& [lo, hi] : exclusions)
      if (lag >= lo - tol && lag <= hi + tol) return false;
    return true;
  }

  std::vector<int> indices() const {
    validate();
    std::vector<int> out;
    for (int l = -max_index; l <= max_index; ++l)
      if (contains(l)) out.push_back(l);
    if (out.empty()) throw usage_error("LagGrid: grid is empty after exclusions");
    return out;
  }
};

}  // namespace leadlag
