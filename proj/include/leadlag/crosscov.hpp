#pragma once

// Hayashi-Yoshida cross-covariance U(theta) of two non-synchronously observed
// series and its autocorrelation-wavelet filtered version rho_j(theta).
//
//   U(theta) = sum_{I, J : sup I <= T} X1(I) X2(J) 1{I meets J - theta}   theta >= 0
//   U(theta) = sum_{I, J : sup J <= T} X1(I) X2(J) 1{I + theta meets J}   theta <  0
//
// Intervals are half-open (t_{i-1}, t_i], so (a, b] and (c, d] meet iff
// a < d and c < b. For a pair (I, J) = ((a, b], (c, d]) the set of lags at
// which they meet is the open interval c - b < theta < d - a; the curve is
// assembled from these ranges without interpolating either series.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leadlag/error.hpp"
#include "leadlag/fft.hpp"
#include "leadlag/tick_series.hpp"

namespace leadlag {

// Values of U at the consecutive lag indices first_index..last_index(), lag
// l meaning theta = l * step.
struct CrossCovCurve {
  int first_index = 0;
  std::vector<double> values;
  double step = 1.0;
  double T = 0.0;

  int last_index() const { return first_index + static_cast<int>(values.size()) - 1; }
  bool covers(long lo, long hi) const { return lo >= first_index && hi <= last_index(); }
  double at(long l) const { return values.at(static_cast<std::size_t>(l - first_index)); }
};

enum class CurveMethod { automatic, sweep, lattice_fft };

namespace detail {

inline constexpr double kTieTolerance = 1e-9;     // in units of the lag step
inline constexpr std::int64_t kMaxLatticeSpan = std::int64_t{1} << 23;

// Observation times in units of `unit`. Lattice data are converted to exact
// integers so that coincident endpoints compare exactly.
struct Coordinates {
  std::vector<double> u;
  std::vector<std::int64_t> index;
  bool lattice = true;
};

inline Coordinates coordinates(std::span<const double> times, double unit) {
  Coordinates c;
  c.u.resize(times.size());
  c.index.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (c.lattice) {
      if (auto k = lattice_index(times[i], unit)) {
        c.index[i] = *k;
        continue;
      }
      c.lattice = false;
    }
    break;
  }
  if (c.lattice) {
    for (std::size_t i = 0; i < times.size(); ++i) c.u[i] = static_cast<double>(c.index[i]);
  } else {
    c.index.clear();
    for (std::size_t i = 0; i < times.size(); ++i) c.u[i] = times[i] / unit;
  }
  return c;
}

inline double lag_coordinate(double theta, double unit, bool exact) {
  if (exact)
    if (auto k = lattice_index(theta, unit)) return static_cast<double>(*k);
  return theta / unit;
}

inline double horizon_coordinate(double T, double unit, bool exact) {
  if (exact)
    if (auto k = lattice_index(T, unit)) return static_cast<double>(*k);
  return T / unit;
}

// sum over outer intervals (o_i, o_{i+1}] with o_{i+1} <= limit of
//   r_outer(i) * sum of inner returns over intervals (t_k + s, t_{k+1} + s]
// meeting the outer one. Inner returns telescope, so each outer interval
// costs two binary searches.
inline double overlap_sum(std::span<const double> outer_u, std::span<const double> outer_p,
                          std::span<const double> inner_u, std::span<const double> inner_p,
                          double shift, double limit) {
  const double eps = kTieTolerance;
  const std::size_t m = inner_u.size();
  long double acc = 0.0L;
  for (std::size_t i = 0; i + 1 < outer_u.size(); ++i) {
    const double a = outer_u[i];
    const double b = outer_u[i + 1];
    if (b > limit + eps) break;
    // first inner k with t_{k+1} + s > a, i.e. t_{k+1} > a - s
    const auto first_end = std::upper_bound(inner_u.begin() + 1, inner_u.end(), a - shift + eps);
    // last inner k with t_k + s < b
    const auto past_start = std::lower_bound(inner_u.begin(), inner_u.end() - 1, b - shift - eps);
    const std::size_t k_lo = static_cast<std::size_t>(first_end - inner_u.begin()) - 1;
    const std::size_t k_hi_excl = static_cast<std::size_t>(past_start - inner_u.begin());
    if (first_end == inner_u.end() || k_hi_excl == 0 || k_lo >= k_hi_excl) continue;
    const std::size_t k_hi = std::min(k_hi_excl, m - 1) - 1;
    if (k_lo > k_hi) continue;
    acc += static_cast<long double>(outer_p[i + 1] - outer_p[i]) * (inner_p[k_hi + 1] - inner_p[k_lo]);
  }
  return static_cast<double>(acc);
}

inline void require_window(const TickSeries& x1, const TickSeries& x2, double T, double max_lag,
                           double unit) {
  const double tol = kTieTolerance * unit;
  if (x1.horizon() + tol < T || x2.horizon() + tol < T)
    throw data_error("estimation horizon T exceeds the observation window");
  if (x2.horizon() + tol < T + max_lag)
    throw data_error("data window too short for positive lags: series 2 must be observed up to T + " +
                     std::to_string(max_lag) + " (horizon " + std::to_string(x2.horizon()) + ")");
  if (x1.horizon() + tol < T + max_lag)
    throw data_error("data window too short for negative lags: series 1 must be observed up to T + " +
                     std::to_string(max_lag) + " (horizon " + std::to_string(x1.horizon()) + ")");
}

// Pairwise sweep with difference arrays; works for arbitrary real times.
inline std::vector<double> curve_sweep(const Coordinates& c1, std::span<const double> p1,
                                       const Coordinates& c2, std::span<const double> p2,
                                       int M, double Tu) {
  const double eps = kTieTolerance;
  const auto& u1 = c1.u;
  const auto& u2 = c2.u;
  // long double: the running sums below cancel heavily on small curve values
  std::vector<long double> diff_pos(static_cast<std::size_t>(M) + 2, 0.0L);  // lags 0..M+1
  std::vector<long double> diff_neg(static_cast<std::size_t>(M) + 1, 0.0L);  // lags -M..0
  const std::size_t n2 = u2.size();

  for (std::size_t i = 0; i + 1 < u1.size(); ++i) {
    const double a = u1[i];
    const double b = u1[i + 1];
    const double r1 = p1[i + 1] - p1[i];
    const bool pos_ok = b <= Tu + eps;
    // J = (c, d] can meet I at some |l| <= M only if d > a - M - 1 and c < b + M + 1
    auto jt = std::upper_bound(u2.begin() + 1, u2.end(), a - M - 1.0);
    std::size_t j = static_cast<std::size_t>(jt - u2.begin()) - 1;
    for (; j + 1 < n2; ++j) {
      const double c = u2[j];
      const double d = u2[j + 1];
      if (c >= b + M + 1.0) break;
      long lo = static_cast<long>(std::floor(c - b + eps)) + 1;
      long hi = static_cast<long>(std::ceil(d - a - eps)) - 1;
      lo = std::max<long>(lo, -M);
      hi = std::min<long>(hi, M);
      if (lo > hi) continue;
      const long double p = static_cast<long double>(r1) * (p2[j + 1] - p2[j]);
      if (pos_ok && hi >= 0) {
        diff_pos[static_cast<std::size_t>(std::max<long>(lo, 0))] += p;
        diff_pos[static_cast<std::size_t>(hi + 1)] -= p;
      }
      if (d <= Tu + eps && lo < 0) {
        const long top = std::min<long>(hi, -1);
        diff_neg[static_cast<std::size_t>(lo + M)] += p;
        diff_neg[static_cast<std::size_t>(top + 1 + M)] -= p;
      }
    }
  }

  std::vector<double> out(2 * static_cast<std::size_t>(M) + 1);
  long double run = 0.0L;
  for (int l = -M; l < 0; ++l) {
    run += diff_neg[static_cast<std::size_t>(l + M)];
    out[static_cast<std::size_t>(l + M)] = static_cast<double>(run);
  }
  run = 0.0L;
  for (int l = 0; l <= M; ++l) {
    run += diff_pos[static_cast<std::size_t>(l)];
    out[static_cast<std::size_t>(l + M)] = static_cast<double>(run);
  }
  return out;
}

// Same curve for lattice data via FFT cross-correlations. With u[b], u'[a]
// the return of I = (a, b] placed at its end/start and v[c], v'[d] likewise
// for J = (c, d], the difference array of the pair ranges is
//   q[k] = corr(u, v)[k - 1] - corr(u', v')[k],  corr(x, y)[k] = sum_b x[b] y[b + k],
// and U(l) = sum_{k <= l} q[k] (per branch, with the branch's edge mask).
inline std::vector<double> curve_lattice(const Coordinates& c1, std::span<const double> p1,
                                         const Coordinates& c2, std::span<const double> p2,
                                         int M, double Tu) {
  const std::int64_t origin = std::min(c1.index.front(), c2.index.front());
  const std::int64_t span = std::max(c1.index.back(), c2.index.back()) - origin;
  const std::size_t len = static_cast<std::size_t>(span) + 1;
  const std::size_t F = fft::good_size(2 * len + 2);
  const double Trel = Tu - static_cast<double>(origin) + kTieTolerance;

  auto place = [&](const Coordinates& c, std::span<const double> p, bool at_end, bool masked) {
    std::vector<double> arr(len, 0.0);
    for (std::size_t i = 0; i + 1 < c.index.size(); ++i) {
      const std::int64_t end = c.index[i + 1] - origin;
      if (masked && static_cast<double>(end) > Trel) continue;
      const std::int64_t pos = at_end ? end : c.index[i] - origin;
      arr[static_cast<std::size_t>(pos)] += p[i + 1] - p[i];
    }
    return arr;
  };

  auto branch = [&](bool mask_first) {
    const auto U = fft::forward(place(c1, p1, true, mask_first), F);
    const auto V = fft::forward(place(c2, p2, false, !mask_first), F);
    auto Q = std::vector<fft::cplx>(U.size());
    for (std::size_t m = 0; m < U.size(); ++m) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(F);
      Q[m] = std::conj(U[m]) * V[m] * std::polar(1.0, -w);
    }
    {
      const auto U2 = fft::forward(place(c1, p1, false, mask_first), F);
      const auto V2 = fft::forward(place(c2, p2, true, !mask_first), F);
      for (std::size_t m = 0; m < U.size(); ++m) Q[m] -= std::conj(U2[m]) * V2[m];
    }
    return fft::inverse(Q, F);
  };

  const long S = static_cast<long>(span);
  auto q_at = [&](const std::vector<double>& q, long k) {
    if (k < -S || k > S + 1) return 0.0;
    const long idx = k >= 0 ? k : k + static_cast<long>(F);
    return q[static_cast<std::size_t>(idx)];
  };

  std::vector<double> out(2 * static_cast<std::size_t>(M) + 1);
  {
    const auto q = branch(true);
    double run = 0.0;
    for (long k = -S; k < 0; ++k) run += q_at(q, k);
    for (long l = 0; l <= M; ++l) {
      run += q_at(q, l);
      out[static_cast<std::size_t>(l + M)] = run;
    }
  }
  {
    const auto q = branch(false);
    double run = 0.0;
    for (long k = -S; k < -M; ++k) run += q_at(q, k);
    for (long l = -M; l < 0; ++l) {
      run += q_at(q, l);
      out[static_cast<std::size_t>(l + M)] = run;
    }
  }
  return out;
}

}  // namespace detail

// U(theta) at a single arbitrary lag, straight from the definition.
inline double hy_crosscov_at(const TickSeries& x1, const TickSeries& x2, double theta, double T) {
  const double unit = std::min(x1.tau(), x2.tau());
  detail::require_window(x1, x2, T, std::abs(theta), unit);
  const auto c1 = detail::coordinates(x1.times(), unit);
  const auto c2 = detail::coordinates(x2.times(), unit);
  const bool exact = c1.lattice && c2.lattice;
  const double s = detail::lag_coordinate(theta, unit, exact);
  const double Tu = detail::horizon_coordinate(T, unit, exact);
  if (theta >= 0.0)  // outer: I with sup I <= T, inner: J - theta
    return detail::overlap_sum(c1.u, x1.prices(), c2.u, x2.prices(), -s, Tu);
  // outer: J with sup J <= T, inner: I + theta
  return detail::overlap_sum(c2.u, x2.prices(), c1.u, x1.prices(), s, Tu);
}

// U at lag indices -(Gamma + extension)..(Gamma + extension) of the grid step.
inline CrossCovCurve hy_crosscov_curve(const TickSeries& x1, const TickSeries& x2,
                                       const LagGrid& grid, int extension, double T,
                                       CurveMethod method = CurveMethod::automatic) {
  grid.validate();
  if (extension < 0) throw usage_error("hy_crosscov_curve: extension must be nonnegative");
  const int M = grid.max_index + extension;
  const double step = grid.step;
  detail::require_window(x1, x2, T, M * step, step);

  const auto c1 = detail::coordinates(x1.times(), step);
  const auto c2 = detail::coordinates(x2.times(), step);
  const bool exact = c1.lattice && c2.lattice;
  const double Tu = detail::horizon_coordinate(T, step, exact);

  bool use_fft = false;
  if (exact && method != CurveMethod::sweep) {
    const std::int64_t span = std::max(c1.index.back(), c2.index.back()) -
                              std::min(c1.index.front(), c2.index.front());
    const bool fits = span <= detail::kMaxLatticeSpan;
    if (method == CurveMethod::lattice_fft && !fits)
      throw usage_error("hy_crosscov_curve: lattice span too large for the FFT route");
    if (fits) {
      const double n1 = static_cast<double>(c1.u.size());
      const double n2 = static_cast<double>(c2.u.size());
      const double density = n2 / std::max<double>(1.0, static_cast<double>(span));
      const double sweep_cost = n1 * (density * (2.0 * M + 2.0) + 2.0);
      const double F = static_cast<double>(fft::good_size(2 * static_cast<std::size_t>(span) + 4));
      const double fft_cost = 8.0 * F * std::log2(F) + 4.0 * F;
      use_fft = method == CurveMethod::lattice_fft || fft_cost < sweep_cost;
    }
  } else if (method == CurveMethod::lattice_fft) {
    throw usage_error("hy_crosscov_curve: the FFT route needs lattice-aligned times");
  }

  CrossCovCurve curve;
  curve.first_index = -M;
  curve.step = step;
  curve.T = T;
  curve.values = use_fft ? detail::curve_lattice(c1, x1.prices(), c2, x2.prices(), M, Tu)
                         : detail::curve_sweep(c1, x1.prices(), c2, x2.prices(), M, Tu);
  return curve;
}

// rho_j(theta) = sum_{|l| < L_j} U(theta - l tau) Psi_j(l) at one lag index.
inline double wavelet_crosscov(const CrossCovCurve& curve, std::span<const double> psi,
                               long theta_index) {
  const long half = static_cast<long>(psi.size() / 2);
  if (!curve.covers(theta_index - half, theta_index + half))
    throw data_error("wavelet_crosscov: curve does not cover lag " + std::to_string(theta_index) +
                     " +/- " + std::to_string(half));
  double acc = 0.0;
  for (long l = -half; l <= half; ++l)
    acc += curve.at(theta_index - l) * psi[static_cast<std::size_t>(l + half)];
  return acc;
}

enum class ConvolutionMethod { automatic, direct, fft };

inline constexpr double kDirectConvolutionLimit = 1e7;

// rho_j at the consecutive lag indices lo..hi.
inline std::vector<double> wavelet_crosscov_range(const CrossCovCurve& curve,
                                                  std::span<const double> psi, long lo, long hi,
                                                  ConvolutionMethod method = ConvolutionMethod::automatic) {
  if (hi < lo) return {};
  const long half = static_cast<long>(psi.size() / 2);
  if (!curve.covers(lo - half, hi + half))
    throw data_error("wavelet_crosscov: curve does not cover lags " + std::to_string(lo - half) +
                     ".." + std::to_string(hi + half));
  const double work = static_cast<double>(hi - lo + 1) * static_cast<double>(half + 1);
  const bool use_fft = method == ConvolutionMethod::fft ||
                       (method == ConvolutionMethod::automatic && work > kDirectConvolutionLimit);
  std::vector<double> out(static_cast<std::size_t>(hi - lo + 1));
  if (!use_fft) {
    for (long t = lo; t <= hi; ++t) out[static_cast<std::size_t>(t - lo)] = wavelet_crosscov(curve, psi, t);
    return out;
  }
  const auto begin = curve.values.begin() + (lo - half - curve.first_index);
  const std::span<const double> segment(&*begin, static_cast<std::size_t>(hi - lo + 1 + 2 * half));
  const auto conv = fft::convolve(segment, psi);
  for (long t = lo; t <= hi; ++t)
    out[static_cast<std::size_t>(t - lo)] = conv[static_cast<std::size_t>(t - lo + 2 * half)];
  return out;
}

}  // namespace leadlag
