#pragma once

// Synthetic market: a bivariate Gaussian driver with piecewise-constant
// cross-spectral density R_j e^{-i theta_j lambda} on dyadic bands, Heston
// volatility, price integration, Bernoulli (Lo-MacKinlay) sampling, and the
// closed-form oracles D(lambda) and Sigma_T(theta).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leadlag/error.hpp"
#include "leadlag/fft.hpp"
#include "leadlag/rng.hpp"

namespace leadlag {

// Band parameters indexed by level j = 1..N+1 (element j-1). Level j covers
// |lambda| in (2^{N-j+1} pi, 2^{N-j+2} pi], i.e. normalised frequency
// lambda * tau in (pi / 2^j, pi / 2^{j-1}] with tau = 2^{-N-1}.
struct SpectralModel {
  int N = 14;
  std::vector<double> R;
  std::vector<double> theta;
  double delta = 1.0;

  double tau() const { return std::ldexp(1.0, -N - 1); }
  int levels() const { return N + 1; }

  void validate() const {
    if (N < 1 || N > 40) throw usage_error("SpectralModel: N must lie in 1..40");
    if (R.size() != static_cast<std::size_t>(N + 1) ||
        theta.size() != static_cast<std::size_t>(N + 1))
      throw usage_error("SpectralModel: R and theta need N+1 entries");
    if (!(delta > 0.0)) throw usage_error("SpectralModel: delta must be positive");
    for (int j = 0; j <= N; ++j) {
      if (!(R[j] >= -1.0 && R[j] <= 1.0))
        throw usage_error("SpectralModel: R_" + std::to_string(j + 1) + " outside [-1, 1]");
      if (!(std::abs(theta[j]) < delta))
        throw usage_error("SpectralModel: |theta_" + std::to_string(j + 1) + "| >= delta");
    }
  }

  // Levels 1..8 carry R = (0.3, 0.5, 0.7, 0.5, 0.5, 0.5, 0.5, 0.5) and
  // theta / tau = (-1, -1, -2, -2, -3, -5, -7, -10); the remaining levels are
  // uncorrelated.
  static SpectralModel simulation_study(int N = 14) {
    static constexpr double r[] = {0.3, 0.5, 0.7, 0.5, 0.5, 0.5, 0.5, 0.5};
    static constexpr double lag[] = {-1, -1, -2, -2, -3, -5, -7, -10};
    SpectralModel m;
    m.N = N;
    m.R.assign(N + 1, 0.0);
    m.theta.assign(N + 1, 0.0);
    const double tau = m.tau();
    for (int j = 0; j < 8 && j <= N; ++j) {
      m.R[j] = r[j];
      m.theta[j] = lag[j] * tau;
    }
    m.delta = 0.5;
    return m;
  }

  static SpectralModel uniform(int N, double r, double lag) {
    SpectralModel m;
    m.N = N;
    m.R.assign(N + 1, r);
    m.theta.assign(N + 1, lag);
    m.delta = std::max(1.0, 2.0 * std::abs(lag));
    return m;
  }
};

// Level j of DFT bin m of an n-point transform: the largest j with m 2^j <= n,
// so the bin at exactly pi / 2^j falls in the lower band j + 1. Returns 0 for
// the DC bin.
inline int band_of_bin(std::size_t m, std::size_t n) {
  if (m == 0) return 0;
  int j = 0;
  while ((m << (j + 1)) <= n) ++j;
  return j;
}

// Increments of (B^1, B^2) on n grid steps of size tau, realising the model's
// cross-spectrum exactly at the discrete Fourier frequencies. B^2 increments
// are built per bin as c X^1 + s Z with |c|^2 + s^2 = 1, so both marginals are
// i.i.d. N(0, tau). The construction is circular over the n steps.
inline std::pair<std::vector<double>, std::vector<double>> simulate_driver_pair(
    const SpectralModel& model, std::size_t n, double tau, std::uint64_t seed) {
  model.validate();
  if (n < 2) throw usage_error("simulate_driver_pair: n must be >= 2");
  if (std::abs(tau - model.tau()) > 1e-12 * model.tau())
    throw usage_error("simulate_driver_pair: tau must equal 2^{-N-1}");

  Engine rng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(tau));
  std::vector<double> x(n), z(n);
  for (double& v : x) v = normal(rng);
  for (double& v : z) v = normal(rng);

  const auto X = fft::forward(x, n);
  const auto Z = fft::forward(z, n);
  std::vector<fft::cplx> Y(X.size());
  for (std::size_t m = 0; m < X.size(); ++m) {
    const int j = band_of_bin(m, n);
    if (j < 1 || j > model.levels() || model.R[j - 1] == 0.0) {
      Y[m] = Z[m];
      continue;
    }
    const double r = model.R[j - 1];
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    const double phase = -omega * model.theta[j - 1] / tau;
    if (2 * m == n) {  // Nyquist bin is real
      const double c = r * std::cos(phase);
      Y[m] = c * X[m] + std::sqrt(std::max(0.0, 1.0 - c * c)) * Z[m];
    } else {
      Y[m] = r * std::polar(1.0, phase) * X[m] + std::sqrt(1.0 - r * r) * Z[m];
    }
  }
  return {std::move(x), fft::inverse(Y, n)};
}

struct HestonParams {
  double kappa = 5.0;
  double eta = 0.04;
  double xi = 0.5;
  double rho = -0.5;

  void validate() const {
    if (!(kappa > 0.0) || !(eta > 0.0) || !(xi >= 0.0))
      throw usage_error("Heston: kappa and eta must be positive, xi nonnegative");
    if (!(rho >= -1.0 && rho <= 1.0)) throw usage_error("Heston: rho outside [-1, 1]");
  }

  bool feller_satisfied() const { return 2.0 * kappa * eta >= xi * xi; }
};

struct VolatilityScenario {
  enum class Kind { constant, heston };
  Kind kind = Kind::constant;
  double level = 1.0;
  HestonParams heston{};

  static VolatilityScenario constant_vol(double level = 1.0) {
    return {Kind::constant, level, {}};
  }
  static VolatilityScenario heston_vol(HestonParams p = {}) { return {Kind::heston, 1.0, p}; }
};

// Full-truncation Euler scheme for dv = kappa (eta - v) dt + xi sqrt(v) dU,
// dU = rho dB + sqrt(1 - rho^2) dW, on n steps of size tau. Returns
// sigma_k = sqrt(max(v_k, 0)), k = 0..n. Without an explicit v0 the initial
// variance is drawn from the stationary Gamma(2 kappa eta / xi^2, rate 2 kappa / xi^2).
inline std::vector<double> simulate_heston_vol(const HestonParams& p, std::size_t n, double tau,
                                               std::span<const double> driver_increments,
                                               std::uint64_t seed,
                                               std::optional<double> v0 = std::nullopt) {
  p.validate();
  if (p.rho != 0.0 && driver_increments.size() < n)
    throw usage_error("simulate_heston_vol: driver increments shorter than the path");
  Engine rng = make_engine(seed);

  double v;
  if (v0) {
    v = *v0;
  } else if (p.xi == 0.0) {
    v = p.eta;
  } else {
    std::gamma_distribution<double> gamma(2.0 * p.kappa * p.eta / (p.xi * p.xi),
                                          p.xi * p.xi / (2.0 * p.kappa));
    v = gamma(rng);
  }

  std::normal_distribution<double> normal(0.0, std::sqrt(tau));
  const double rho_bar = std::sqrt(1.0 - p.rho * p.rho);
  std::vector<double> sigma(n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double vp = std::max(v, 0.0);
    sigma[k] = std::sqrt(vp);
    const double dw = normal(rng);
    const double db = p.rho != 0.0 ? driver_increments[k] : 0.0;
    v += p.kappa * (p.eta - vp) * tau + p.xi * sigma[k] * (p.rho * db + rho_bar * dw);
  }
  sigma[n] = std::sqrt(std::max(v, 0.0));
  return sigma;
}

// X_{k+1} = X_k + sigma_k dB_k
inline std::vector<double> integrate_price(double x0, std::span<const double> increments,
                                           std::span<const double> sigma) {
  if (sigma.size() < increments.size())
    throw usage_error("integrate_price: volatility path shorter than the driver");
  std::vector<double> x(increments.size() + 1);
  x[0] = x0;
  for (std::size_t k = 0; k < increments.size(); ++k) x[k + 1] = x[k] + sigma[k] * increments[k];
  return x;
}

inline std::vector<double> integrate_price(double x0, std::span<const double> increments,
                                           double sigma = 1.0) {
  std::vector<double> s(increments.size(), sigma);
  return integrate_price(x0, increments, s);
}

// Observation scheme on the grid {0, tau, ..., n tau}. Bernoulli drops each grid
// point independently with probability pi_nu for asset nu.
struct SamplingScheme {
  enum class Kind { full_grid, bernoulli };
  Kind kind = Kind::full_grid;
  double pi1 = 0.0;
  double pi2 = 0.0;

  static SamplingScheme full() { return {}; }
  static SamplingScheme bernoulli(double pi1, double pi2) { return {Kind::bernoulli, pi1, pi2}; }

  double missing_probability(int asset) const {
    if (kind == Kind::full_grid) return 0.0;
    return asset == 1 ? pi1 : pi2;
  }

  void validate() const {
    for (double p : {pi1, pi2})
      if (!(p >= 0.0 && p < 1.0)) throw usage_error("SamplingScheme: pi must lie in [0, 1)");
  }
};

inline std::vector<std::int64_t> sample_indices(const SamplingScheme& scheme, int asset,
                                                std::size_t n, std::uint64_t seed) {
  scheme.validate();
  if (asset != 1 && asset != 2) throw usage_error("sample_indices: asset must be 1 or 2");
  const double pi = scheme.missing_probability(asset);
  std::vector<std::int64_t> idx;
  if (pi == 0.0) {
    idx.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) idx[k] = static_cast<std::int64_t>(k);
  } else {
    Engine rng = make_engine(seed);
    std::bernoulli_distribution keep(1.0 - pi);
    idx.reserve(static_cast<std::size_t>((1.0 - pi) * (n + 1)) + 16);
    for (std::size_t k = 0; k <= n; ++k)
      if (keep(rng)) idx.push_back(static_cast<std::int64_t>(k));
  }
  if (idx.size() < 2)
    throw data_error("sampling kept fewer than two observations for asset " +
                     std::to_string(asset));
  return idx;
}

inline std::vector<double> sample_times(const SamplingScheme& scheme, int asset, std::size_t n,
                                        double tau, std::uint64_t seed) {
  const auto idx = sample_indices(scheme, asset, n, seed);
  std::vector<double> t(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) t[i] = static_cast<double>(idx[i]) * tau;
  return t;
}

// D(lambda) for Bernoulli sampling with missing probabilities pi1, pi2:
// (1 - cos l)/(pi l^2) (1-pi1)(1-pi2)(1+pi1+pi2-pi1 pi2 (2 cos l + 1))
//   / (|1 - pi1 e^{-il}|^2 |1 - pi2 e^{-il}|^2).
inline double theoretical_D_bernoulli(double pi1, double pi2, double lambda) {
  const double c = std::cos(lambda);
  // (1 - cos l)/l^2 = 2 sin^2(l/2)/l^2, without the cancellation near 0
  const double s = std::sin(0.5 * lambda);
  const double head = std::abs(lambda) < 1e-8 ? 0.5 - lambda * lambda / 24.0
                                              : 2.0 * s * s / (lambda * lambda);
  const double num = (1.0 - pi1) * (1.0 - pi2) * (1.0 + pi1 + pi2 - pi1 * pi2 * (2.0 * c + 1.0));
  const double den1 = 1.0 - 2.0 * pi1 * c + pi1 * pi1;
  const double den2 = 1.0 - 2.0 * pi2 * c + pi2 * pi2;
  return head / std::numbers::pi * num / (den1 * den2);
}

// Left Riemann sum of int_0^T sigma1_s sigma2_{s+theta} ds (theta >= 0) or
// int_0^T sigma1_{s-theta} sigma2_s ds (theta < 0) on paths sampled every tau.
inline double sigma_T(double theta, std::span<const double> sigma1,
                      std::span<const double> sigma2, double T, double tau) {
  const auto K = static_cast<std::size_t>(std::llround(T / tau));
  const auto s = static_cast<std::size_t>(std::llround(std::abs(theta) / tau));
  const bool forward = theta >= 0.0;
  const auto& lead = forward ? sigma1 : sigma2;
  const auto& lagged = forward ? sigma2 : sigma1;
  if (lead.size() < K || lagged.size() < K + s)
    throw data_error("sigma_T: volatility paths do not cover [0, T + |theta|]");
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) acc += lead[k] * lagged[k + s];
  return acc * tau;
}

}  // namespace leadlag
