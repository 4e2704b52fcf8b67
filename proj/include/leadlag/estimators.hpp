#pragma once

// Lead-lag estimators over a lag grid. A positive estimate means series 1
// leads series 2.
//
//   theta_j : argmax |rho_j(theta)|, rho_j the wavelet-filtered HY curve
//   hry     : argmax |U(theta)|
//   ds      : argmax of the lattice coincidence rate A(theta)
//   wccf    : theta_j machinery on previous-tick synchronised data

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leadlag/crosscov.hpp"
#include "leadlag/error.hpp"
#include "leadlag/fft.hpp"
#include "leadlag/tick_series.hpp"
#include "leadlag/wavelet_filters.hpp"

namespace leadlag {

enum class Estimator { theta_j, hry, ds, wccf };

inline std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::theta_j: return "theta";
    case Estimator::hry: return "hry";
    case Estimator::ds: return "ds";
    case Estimator::wccf: return "wccf";
  }
  return "?";
}

inline Estimator parse_estimator(const std::string& s) {
  if (s == "theta" || s == "theta_j") return Estimator::theta_j;
  if (s == "hry") return Estimator::hry;
  if (s == "ds") return Estimator::ds;
  if (s == "wccf") return Estimator::wccf;
  throw usage_error("unknown estimator '" + s + "' (expected theta, hry, ds or wccf)");
}

struct LeadLagEstimate {
  Estimator estimator = Estimator::theta_j;
  int level = 0;  // 0 for the single-scale estimators
  double theta = 0.0;
  int lag_index = 0;
  double objective = 0.0;  // signed objective at the maximiser
  bool low_signal = false;
  double step = 1.0;
  std::vector<int> lags;        // grid indices searched
  std::vector<double> curve;    // signed objective at each searched index
};

inline constexpr double kLowSignalRatio = 3.0;

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw data_error("median of an empty sample");
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double hi = v[n / 2];
  if (n % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + n / 2);
  return 0.5 * (lo + hi);
}

// Position of the maximiser of |values|. Ties go to the smallest |lag|, then
// to the negative lag.
inline std::size_t select_argmax(std::span<const int> lags, std::span<const double> values) {
  if (lags.empty() || lags.size() != values.size())
    throw invariant_error("select_argmax: empty or mismatched objective");
  std::size_t best = 0;
  for (std::size_t i = 1; i < lags.size(); ++i) {
    const double a = std::abs(values[i]);
    const double b = std::abs(values[best]);
    if (a > b) {
      best = i;
    } else if (a == b) {
      const int la = std::abs(lags[i]);
      const int lb = std::abs(lags[best]);
      if (la < lb || (la == lb && lags[i] < lags[best])) best = i;
    }
  }
  return best;
}

inline LeadLagEstimate make_estimate(Estimator e, int level, double step, std::vector<int> lags,
                                     std::vector<double> values) {
  const std::size_t k = select_argmax(lags, values);
  LeadLagEstimate out;
  out.estimator = e;
  out.level = level;
  out.step = step;
  out.lag_index = lags[k];
  out.theta = lags[k] * step;
  out.objective = values[k];
  // A(theta) has a positive floor, so the DS curve is judged about its median
  const double centre = e == Estimator::ds ? median_of(values) : 0.0;
  std::vector<double> mags(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) mags[i] = std::abs(values[i] - centre);
  out.low_signal = std::abs(values[k] - centre) <= kLowSignalRatio * median_of(std::move(mags));
  out.lags = std::move(lags);
  out.curve = std::move(values);
  return out;
}

// theta_j for several levels from one HY curve.
inline std::vector<LeadLagEstimate> estimate_theta_levels(
    const TickSeries& x1, const TickSeries& x2, const FilterBank& bank,
    std::span<const int> levels, const LagGrid& grid, double T,
    CurveMethod method = CurveMethod::automatic, Estimator label = Estimator::theta_j) {
  if (levels.empty()) throw usage_error("estimate_theta_j: no levels requested");
  const auto idx = grid.indices();
  int top = 0;
  for (int j : levels) {
    if (j < 1 || j > bank.max_level())
      throw usage_error("level " + std::to_string(j) + " outside the filter bank (1.." +
                        std::to_string(bank.max_level()) + ")");
    top = std::max(top, j);
  }
  const int extension = static_cast<int>(bank.width(top)) - 1;
  const auto curve = hy_crosscov_curve(x1, x2, grid, extension, T, method);

  std::vector<LeadLagEstimate> out;
  for (int j : levels) {
    const auto rho = wavelet_crosscov_range(curve, bank.psi(j), -grid.max_index, grid.max_index);
    std::vector<double> vals;
    vals.reserve(idx.size());
    for (int l : idx) vals.push_back(rho[static_cast<std::size_t>(l + grid.max_index)]);
    out.push_back(make_estimate(label, j, grid.step, idx, std::move(vals)));
  }
  return out;
}

inline LeadLagEstimate estimate_theta_j(const TickSeries& x1, const TickSeries& x2,
                                        const FilterBank& bank, int j, const LagGrid& grid,
                                        double T, CurveMethod method = CurveMethod::automatic) {
  const int lv[] = {j};
  return estimate_theta_levels(x1, x2, bank, lv, grid, T, method).front();
}

inline LeadLagEstimate estimate_hry(const TickSeries& x1, const TickSeries& x2,
                                    const LagGrid& grid, double T,
                                    CurveMethod method = CurveMethod::automatic) {
  const auto idx = grid.indices();
  const auto curve = hy_crosscov_curve(x1, x2, grid, 0, T, method);
  std::vector<double> vals;
  vals.reserve(idx.size());
  for (int l : idx) vals.push_back(curve.at(l));
  return make_estimate(Estimator::hry, 0, grid.step, idx, std::move(vals));
}

namespace detail {

inline std::vector<std::int64_t> lattice_or_throw(std::span<const double> times, double tau,
                                                  const char* which) {
  std::vector<std::int64_t> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto k = lattice_index(times[i], tau);
    if (!k)
      throw data_error(std::string("estimate_ds: ") + which + " time " + std::to_string(times[i]) +
                       " is not on the resolution lattice " + std::to_string(tau));
    out[i] = *k;
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1])
      throw data_error(std::string("estimate_ds: ") + which +
                       " times are not strictly increasing on the lattice");
  return out;
}

// counts[d + D] = #{(a, b) : b - a = d}, |d| <= D, by binary search.
inline std::vector<double> coincidence_search(std::span<const std::int64_t> s1,
                                              std::span<const std::int64_t> s2, std::int64_t D) {
  std::vector<double> counts(2 * static_cast<std::size_t>(D) + 1, 0.0);
  for (std::int64_t a : s1) {
    auto it = std::lower_bound(s2.begin(), s2.end(), a - D);
    for (; it != s2.end() && *it <= a + D; ++it)
      counts[static_cast<std::size_t>(*it - a + D)] += 1.0;
  }
  return counts;
}

// Same counts from the FFT cross-correlation of the two indicator sequences.
inline std::vector<double> coincidence_fft(std::span<const std::int64_t> s1,
                                           std::span<const std::int64_t> s2, std::int64_t D) {
  const std::int64_t origin = std::min(s1.front(), s2.front());
  const std::int64_t span = std::max(s1.back(), s2.back()) - origin;
  const std::size_t len = static_cast<std::size_t>(span) + 1;
  const std::size_t F = fft::good_size(2 * len + 1);
  std::vector<double> a(len, 0.0), b(len, 0.0);
  for (auto t : s1) a[static_cast<std::size_t>(t - origin)] = 1.0;
  for (auto t : s2) b[static_cast<std::size_t>(t - origin)] = 1.0;
  auto A = fft::forward(a, F);
  const auto B = fft::forward(b, F);
  for (std::size_t m = 0; m < A.size(); ++m) A[m] = std::conj(A[m]) * B[m];
  const auto c = fft::inverse(A, F);
  std::vector<double> counts(2 * static_cast<std::size_t>(D) + 1, 0.0);
  for (std::int64_t d = -D; d <= D; ++d) {
    if (std::abs(d) > span) continue;
    const std::size_t k = static_cast<std::size_t>(d >= 0 ? d : d + static_cast<std::int64_t>(F));
    counts[static_cast<std::size_t>(d + D)] = std::nearbyint(c[k]);
  }
  return counts;
}

}  // namespace detail

enum class CountMethod { automatic, search, fft };

// A(theta) = #{k : k tau in S1 and k tau + theta in S2} / min(|S1|, |S2|).
inline LeadLagEstimate estimate_ds(std::span<const double> times1, std::span<const double> times2,
                                   const LagGrid& grid, double tau,
                                   CountMethod method = CountMethod::automatic) {
  if (!(tau > 0.0)) throw usage_error("estimate_ds: resolution must be positive");
  if (times1.empty() || times2.empty()) throw data_error("estimate_ds: empty time list");
  const auto idx = grid.indices();
  const auto ratio = lattice_index(grid.step, tau);
  if (!ratio || *ratio < 1)
    throw usage_error("estimate_ds: grid step must be a positive multiple of the resolution");
  const auto s1 = detail::lattice_or_throw(times1, tau, "series 1");
  const auto s2 = detail::lattice_or_throw(times2, tau, "series 2");
  const std::int64_t D = static_cast<std::int64_t>(grid.max_index) * *ratio;

  bool use_fft = method == CountMethod::fft;
  if (method == CountMethod::automatic) {
    const double span = static_cast<double>(std::max(s1.back(), s2.back()) -
                                            std::min(s1.front(), s2.front()));
    const double density = static_cast<double>(s2.size()) / std::max(1.0, span);
    const double search_cost = static_cast<double>(s1.size()) * (density * (2.0 * D + 1.0) + 20.0);
    const double F = 2.0 * span + 2.0;
    use_fft = span <= static_cast<double>(detail::kMaxLatticeSpan) &&
              6.0 * F * std::log2(F) < search_cost;
  }
  const auto counts = use_fft ? detail::coincidence_fft(s1, s2, D)
                              : detail::coincidence_search(s1, s2, D);
  const double norm = static_cast<double>(std::min(s1.size(), s2.size()));
  std::vector<double> vals;
  vals.reserve(idx.size());
  for (int l : idx) vals.push_back(counts[static_cast<std::size_t>(l * *ratio + D)] / norm);
  return make_estimate(Estimator::ds, 0, grid.step, idx, std::move(vals));
}

inline LeadLagEstimate estimate_ds(const TickSeries& x1, const TickSeries& x2, const LagGrid& grid,
                                   double tau, CountMethod method = CountMethod::automatic) {
  return estimate_ds(x1.times(), x2.times(), grid, tau, method);
}

inline constexpr std::int64_t kMaxSynchronisedPoints = std::int64_t{1} << 24;

// Previous-tick values on the grid {first_index * step, ..., last_index * step}.
// Grid points before the first observation take the first observed price.
inline TickSeries synchronize_previous_tick(const TickSeries& x, double step,
                                            std::int64_t first_index, std::int64_t last_index) {
  if (last_index <= first_index) throw usage_error("synchronize_previous_tick: empty grid");
  if (last_index - first_index + 1 > kMaxSynchronisedPoints)
    throw usage_error("synchronize_previous_tick: grid of " +
                      std::to_string(last_index - first_index + 1) + " points is too large");
  const auto t = x.times();
  const auto p = x.prices();
  const double eps = detail::kTieTolerance * step;
  std::vector<double> times, prices;
  times.reserve(static_cast<std::size_t>(last_index - first_index + 1));
  prices.reserve(times.capacity());
  std::size_t i = 0;
  for (std::int64_t k = first_index; k <= last_index; ++k) {
    const double g = static_cast<double>(k) * step;
    while (i + 1 < t.size() && t[i + 1] <= g + eps) ++i;
    times.push_back(g);
    prices.push_back(p[i]);
  }
  return TickSeries(std::move(times), std::move(prices), step);
}

// WCCF: both series synchronised onto the lag-grid step over their common
// window, then the theta_j machinery on the synchronous pair.
inline std::vector<LeadLagEstimate> estimate_wccf_levels(
    const TickSeries& x1, const TickSeries& x2, const FilterBank& bank,
    std::span<const int> levels, const LagGrid& grid, double T) {
  grid.validate();
  const double step = grid.step;
  const double start = std::min(x1.times().front(), x2.times().front());
  const double end = std::min(x1.horizon(), x2.horizon());
  const auto first = static_cast<std::int64_t>(std::floor(start / step + detail::kTieTolerance));
  const auto last = static_cast<std::int64_t>(std::floor(end / step + detail::kTieTolerance));
  const auto y1 = synchronize_previous_tick(x1, step, first, last);
  const auto y2 = synchronize_previous_tick(x2, step, first, last);
  return estimate_theta_levels(y1, y2, bank, levels, grid, T, CurveMethod::automatic,
                               Estimator::wccf);
}

inline LeadLagEstimate estimate_wccf(const TickSeries& x1, const TickSeries& x2,
                                     const FilterBank& bank, int j, const LagGrid& grid,
                                     double T) {
  const int lv[] = {j};
  return estimate_wccf_levels(x1, x2, bank, lv, grid, T).front();
}

}  // namespace leadlag
