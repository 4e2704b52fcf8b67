#pragma once

// Daubechies wavelet/scaling filters, level-j filters and autocorrelation
// wavelets Psi_j(l).
//
// Conventions: (h_p) is the wavelet (high-pass) filter and (g_p) the scaling
// (low-pass) filter, linked by g_p = (-1)^{p+1} h_{L-p-1}. Published tables
// usually list the scaling filter; they are mapped into this convention by
// `wavelet_from_scaling`.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/Polynomials>

#include "leadlag/error.hpp"

namespace leadlag {

enum class FilterVariant { extremal_phase, least_asymmetric };

struct FilterSpec {
  int length = 20;
  FilterVariant variant = FilterVariant::least_asymmetric;
};

inline void validate(const FilterSpec& spec) {
  if (spec.length < 2 || spec.length % 2 != 0)
    throw usage_error("filter length must be an even integer >= 2, got " +
                      std::to_string(spec.length));
}

// L_j = (2^j - 1)(L - 1) + 1
inline std::size_t filter_width(int length, int level) {
  if (level < 1) throw usage_error("wavelet level must be >= 1");
  return ((std::size_t{1} << level) - 1) * static_cast<std::size_t>(length - 1) + 1;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Squared gain of the length-L Daubechies wavelet filter,
// H_L(l) = 2 sin^L(l/2) sum_{p<L/2} C(L/2-1+p, p) cos^{2p}(l/2).
inline double power_transfer_h(int length, double lambda) {
  const int half = length / 2;
  const double s = std::sin(0.5 * lambda);
  const double c2 = std::pow(std::cos(0.5 * lambda), 2);
  double sum = 0.0;
  double cpow = 1.0;
  for (int p = 0; p < half; ++p) {
    sum += binomial(half - 1 + p, p) * cpow;
    cpow *= c2;
  }
  return 2.0 * std::pow(s * s, half) * sum;
}

inline double power_transfer_g(int length, double lambda) {
  return power_transfer_h(length, lambda - std::numbers::pi);
}

// h_q = (-1)^q g_{L-1-q}, the inverse of the quadrature mirror map below.
inline std::vector<double> wavelet_from_scaling(std::span<const double> g) {
  const std::size_t L = g.size();
  std::vector<double> h(L);
  for (std::size_t q = 0; q < L; ++q) h[q] = (q % 2 == 0 ? 1.0 : -1.0) * g[L - 1 - q];
  return h;
}

// g_p = (-1)^{p+1} h_{L-p-1}
inline std::vector<double> scaling_filter(std::span<const double> h) {
  const std::size_t L = h.size();
  if (L == 0 || L % 2 != 0) throw usage_error("scaling_filter: wavelet filter length must be even");
  std::vector<double> g(L);
  for (std::size_t p = 0; p < L; ++p) g[p] = (p % 2 == 0 ? -1.0 : 1.0) * h[L - p - 1];
  return g;
}

namespace detail {

// Scaling filters as published (Percival & Walden ordering: D(L) extremal
// phase, LA(L) least asymmetric).
inline const std::vector<double>& scaling_table(int length, FilterVariant variant) {
  static const std::vector<double> haar{0.70710678118654757, 0.70710678118654757};
  static const std::vector<double> d4{0.48296291314453416, 0.83651630373780794,
                                      0.22414386804201339, -0.12940952255126037};
  static const std::vector<double> d8{
      0.23037781330889651,  0.71484657055291567,   0.63088076792985892, -0.027983769416859854,
      -0.18703481171909309, 0.030841381835560764, 0.032883011666885197, -0.010597401785069032};
  static const std::vector<double> d20{
      0.026670057900555554,     0.1881768000776915,     0.52720118893172563,
      0.68845903945360354,      0.28117234366057747,    -0.24984642432731538,
      -0.19594627437737705,     0.12736934033579325,    0.093057364603572348,
      -0.071394147166397082,    -0.029457536821875813,  0.033212674059341002,
      0.0036065535669561697,    -0.010733175483330575,  0.0013953517470529011,
      0.0019924052951850561,    -0.00068585669495971162, -0.00011646685512928545,
      9.3588670320069592e-05,   -1.3264202894521244e-05};
  static const std::vector<double> la8{
      -0.075765714789273325, -0.02963552764599851,  0.49761866763201545,  0.80373875180591614,
      0.29785779560527736,   -0.099219543576847216, -0.012603967262037833, 0.032223100604042702};
  static const std::vector<double> la20{
      0.00077015980911449011,  9.5632670722894754e-05,  -0.0086412992770224222,
      -0.0014653825813050513,  0.045927239231092203,    0.011609893903711381,
      -0.15949427888491757,    -0.070880535783243853,   0.47169066693843925,
      0.7695100370211071,      0.38382676106708546,     -0.035536740473817552,
      -0.0319900568824278,     0.049994972077376687,    0.0057649120335819086,
      -0.02035493981231129,    -0.00080435893201654491, 0.0045931735853118284,
      5.7036083618494284e-05,  -0.00045932942100465878};
  static const std::vector<double> none;

  switch (length) {
    case 2: return haar;
    case 4: return d4;  // the only length-4 factorisation up to time reversal
    case 8: return variant == FilterVariant::extremal_phase ? d8 : la8;
    case 20: return variant == FilterVariant::extremal_phase ? d20 : la20;
    default: return none;
  }
}

}  // namespace detail

inline constexpr int kMaxFactorizedLength = 40;

namespace detail {

// Scaling filter by spectral factorisation of
// |G(l)|^2 = 2 cos^L(l/2) P(sin^2(l/2)), P(y) = sum_{k<K} C(K-1+k, k) y^k, K = L/2.
// Each root y_r of P gives a reciprocal pair z, 1/z of z^2 - (2 - 4 y_r) z + 1 with
// z = e^{-il}. Bit r of `inner` keeps the root inside the unit circle for y_r;
// mask 0 is extremal phase. Empty result when the choice gives complex taps.
inline std::vector<double> factorized_scaling(int length, unsigned inner) {
  const int K = length / 2;
  using cd = std::complex<double>;
  std::vector<cd> poly{cd(1.0)};  // ascending powers of z
  auto multiply = [&poly](cd root) {  // poly *= (z - root)
    std::vector<cd> out(poly.size() + 1, cd(0.0));
    for (std::size_t i = 0; i < poly.size(); ++i) {
      out[i + 1] += poly[i];
      out[i] -= root * poly[i];
    }
    poly = std::move(out);
  };
  for (int k = 0; k < K; ++k) multiply(cd(-1.0));

  if (K > 1) {
    Eigen::VectorXd coeffs(K);
    for (int k = 0; k < K; ++k) coeffs[k] = binomial(K - 1 + k, k);
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeffs);
    const auto& roots = solver.roots();
    for (Eigen::Index r = 0; r < roots.size(); ++r) {
      const cd b = 2.0 - 4.0 * cd(roots[r].real(), roots[r].imag());
      const cd disc = std::sqrt(b * b - 4.0);
      const cd z1 = 0.5 * (b + disc), z2 = 0.5 * (b - disc);
      const bool outer = !((inner >> r) & 1u);
      multiply((std::abs(z1) >= std::abs(z2)) == outer ? z1 : z2);
    }
  }

  std::vector<double> g(poly.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (std::abs(poly[i].imag()) > 1e-8 * std::max(1.0, std::abs(poly[i]))) return {};
    g[i] = poly[i].real();
    sum += g[i];
  }
  const double scale = std::numbers::sqrt2 / sum;
  for (double& v : g) v *= scale;
  return g;
}

// The published tables carry 12 to 16 significant digits. Rebuild each one
// by factorisation, using the table only to pick the root set (and the
// orientation), so orthonormality holds to rounding.
inline std::vector<double> refine_table(const std::vector<double>& table) {
  const int L = static_cast<int>(table.size());
  if (L <= 2) return table;
  std::vector<double> best;
  double best_err = 1e300;
  for (unsigned mask = 0; mask < (1u << (L / 2 - 1)); ++mask) {
    auto g = factorized_scaling(L, mask);
    if (g.empty()) continue;
    for (int flip = 0; flip < 2; ++flip) {
      double err = 0.0;
      for (int i = 0; i < L; ++i) err = std::max(err, std::abs(g[i] - table[i]));
      if (err < best_err) {
        best_err = err;
        best = g;
      }
      std::reverse(g.begin(), g.end());
    }
  }
  if (best_err > 1e-8)
    throw invariant_error("no factorisation reproduces the length-" + std::to_string(L) +
                          " table (closest " + std::to_string(best_err) + ")");
  return best;
}

inline const std::vector<double>& refined_table(int length, FilterVariant variant) {
  static const std::vector<double> none;
  static const auto cached = [] {
    std::vector<std::vector<double>> out;
    for (int L : {2, 4, 8, 20})
      for (auto v : {FilterVariant::extremal_phase, FilterVariant::least_asymmetric})
        out.push_back(refine_table(scaling_table(L, v)));
    return out;
  }();
  int slot = 0;
  for (int L : {2, 4, 8, 20}) {
    if (L == length) return cached[static_cast<std::size_t>(slot + (variant == FilterVariant::least_asymmetric))];
    slot += 2;
  }
  return none;
}

}  // namespace detail

inline std::vector<double> factorized_extremal_scaling(int length) {
  return detail::factorized_scaling(length, 0);
}

// Wavelet filter h_0..h_{L-1} for the given spec. Published tables cover
// L in {2, 4, 8, 20}; other even lengths up to kMaxFactorizedLength are
// available in extremal phase through spectral factorisation.
inline std::vector<double> base_filter_coeffs(const FilterSpec& spec) {
  validate(spec);
  const auto& table = detail::refined_table(spec.length, spec.variant);
  if (!table.empty()) return wavelet_from_scaling(table);
  if (spec.variant == FilterVariant::extremal_phase && spec.length <= kMaxFactorizedLength)
    return wavelet_from_scaling(factorized_extremal_scaling(spec.length));
  throw usage_error("unsupported filter length " + std::to_string(spec.length) +
                    (spec.variant == FilterVariant::least_asymmetric
                         ? " for the least-asymmetric variant (supported: 2, 4, 8, 20)"
                         : " (supported: even lengths 2.." + std::to_string(kMaxFactorizedLength) + ")"));
}

// h_{j,p} = sum_q g_{p-2q} h_{j-1,q}, with h_{1,p} = h_p.
inline std::vector<double> level_filter(std::span<const double> h, std::span<const double> g,
                                        int level) {
  if (level < 1) throw usage_error("level_filter: level must be >= 1");
  const int L = static_cast<int>(h.size());
  std::vector<double> cur(h.begin(), h.end());
  for (int j = 2; j <= level; ++j) {
    std::vector<double> next(filter_width(L, j), 0.0);
    for (std::size_t q = 0; q < cur.size(); ++q)
      for (int k = 0; k < L; ++k) next[2 * q + k] += g[k] * cur[q];
    cur = std::move(next);
  }
  return cur;
}

// Psi_j(l) = sum_p h_{j,p} h_{j,p+|l|}, l = -(L_j-1)..(L_j-1); element
// index l + L_j - 1.
inline std::vector<double> autocorrelation_wavelet(std::span<const double> hj) {
  const std::size_t n = hj.size();
  std::vector<double> psi(2 * n - 1);
  // the filters have unit energy, so dividing by the zero-lag sum only removes
  // coefficient rounding (Haar would otherwise give psi(0) = 1 + 2^-52)
  long double energy = 0.0L;
  for (double c : hj) energy += static_cast<long double>(c) * c;
  for (std::size_t lag = 0; lag < n; ++lag) {
    long double s = 0.0L;
    for (std::size_t p = 0; p + lag < n; ++p) s += static_cast<long double>(hj[p]) * hj[p + lag];
    s /= energy;
    psi[n - 1 + lag] = static_cast<double>(s);
    psi[n - 1 - lag] = static_cast<double>(s);
  }
  return psi;
}

// Sum_l psi[l] e^{-i l lambda} for a symmetric sequence stored centred.
inline double autocorrelation_transfer(std::span<const double> psi, double lambda) {
  const std::size_t centre = psi.size() / 2;
  double s = psi[centre];
  for (std::size_t l = 1; l <= centre; ++l) s += 2.0 * psi[centre + l] * std::cos(lambda * l);
  return s;
}

// H_{j,L}(l) = H_L(2^{j-1} l) prod_{i=0}^{j-2} G_L(2^i l)
inline double transfer_H_jL(int length, int level, double lambda) {
  double v = power_transfer_h(length, std::ldexp(lambda, level - 1));
  for (int i = 0; i <= level - 2; ++i) v *= power_transfer_g(length, std::ldexp(lambda, i));
  return v;
}

// Littlewood-Paley wavelet (pi s)^{-1}(sin 2 pi s - sin pi s).
inline double psi_lp(double s) {
  constexpr double pi = std::numbers::pi;
  if (std::abs(s) < 1e-6) return 1.0 - 7.0 * pi * pi * s * s / 6.0;
  return (std::sin(2.0 * pi * s) - std::sin(pi * s)) / (pi * s);
}

// Level filters and autocorrelation wavelets for levels 1..max_level.
// Immutable after construction.
class FilterBank {
 public:
  FilterBank(FilterSpec spec, int max_level) : spec_(spec), max_level_(max_level) {
    if (max_level < 1) throw usage_error("FilterBank: max_level must be >= 1");
    if (max_level > 20) throw usage_error("FilterBank: max_level must be <= 20");
    h_ = base_filter_coeffs(spec);
    g_ = scaling_filter(h_);
    levels_.reserve(max_level);
    std::vector<double> cur = h_;
    for (int j = 1; j <= max_level; ++j) {
      if (j > 1) cur = level_filter_step(cur);
      levels_.push_back(cur);
      psi_.push_back(autocorrelation_wavelet(cur));
    }
  }

  const FilterSpec& spec() const { return spec_; }
  int length() const { return spec_.length; }
  int max_level() const { return max_level_; }
  std::span<const double> wavelet_filter() const { return h_; }
  std::span<const double> scaling() const { return g_; }
  std::size_t width(int level) const { return filter_width(spec_.length, level); }
  std::span<const double> level(int j) const { return levels_.at(check(j) - 1); }

  // Centred storage: element l + L_j - 1 holds Psi_j(l).
  std::span<const double> psi(int j) const { return psi_.at(check(j) - 1); }

  double psi_at(int j, long lag) const {
    const auto p = psi(j);
    const long half = static_cast<long>(p.size() / 2);
    if (lag < -half || lag > half) return 0.0;
    return p[static_cast<std::size_t>(lag + half)];
  }

  double transfer(int j, double lambda) const {
    return transfer_H_jL(spec_.length, check(j), lambda);
  }

 private:
  int check(int j) const {
    if (j < 1 || j > max_level_)
      throw usage_error("level " + std::to_string(j) + " outside 1.." + std::to_string(max_level_));
    return j;
  }

  std::vector<double> level_filter_step(const std::vector<double>& prev) const {
    const std::size_t L = g_.size();
    std::vector<double> next(2 * (prev.size() - 1) + L, 0.0);
    for (std::size_t q = 0; q < prev.size(); ++q)
      for (std::size_t k = 0; k < L; ++k) next[2 * q + k] += g_[k] * prev[q];
    return next;
  }

  FilterSpec spec_;
  int max_level_;
  std::vector<double> h_, g_;
  std::vector<std::vector<double>> levels_;
  std::vector<std::vector<double>> psi_;
};

}  // namespace leadlag
