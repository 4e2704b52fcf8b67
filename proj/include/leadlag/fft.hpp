#pragma once

// Thin wrapper over FFTW's real-data transforms. Plans are cached per size
// and created under a mutex; execution uses the new-array interface and is
// safe to call from several threads.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace leadlag::fft {

using cplx = std::complex<double>;

namespace detail {

struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

inline PlanCache& cache() {
  static PlanCache c;
  return c;
}

// direction 0: r2c, 1: c2r
inline fftw_plan plan_for(std::size_t n, int direction) {
  auto& c = cache();
  std::lock_guard lock(c.mutex);
  auto it = c.plans.find({n, direction});
  if (it != c.plans.end()) return it->second;
  std::vector<double> real(n);
  std::vector<cplx> spec(n / 2 + 1);
  auto* cp = reinterpret_cast<fftw_complex*>(spec.data());
  const int ni = static_cast<int>(n);
  fftw_plan p = direction == 0
                    ? fftw_plan_dft_r2c_1d(ni, real.data(), cp, FFTW_ESTIMATE | FFTW_UNALIGNED)
                    : fftw_plan_dft_c2r_1d(ni, cp, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  c.plans.emplace(std::make_pair(n, direction), p);
  return p;
}

}  // namespace detail

// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
inline std::size_t good_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

// Forward transform of x zero-padded to length n: X_m = sum_k x_k e^{-2 pi i k m / n},
// m = 0..n/2.
inline std::vector<cplx> forward(std::span<const double> x, std::size_t n) {
  std::vector<double> in(n, 0.0);
  std::copy_n(x.begin(), std::min(n, x.size()), in.begin());
  std::vector<cplx> out(n / 2 + 1);
  fftw_execute_dft_r2c(detail::plan_for(n, 0), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

// Inverse of `forward`, including the 1/n normalisation.
inline std::vector<double> inverse(std::span<const cplx> spectrum, std::size_t n) {
  std::vector<cplx> in(spectrum.begin(), spectrum.end());
  in.resize(n / 2 + 1);
  std::vector<double> out(n);
  fftw_execute_dft_c2r(detail::plan_for(n, 1), reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

// Linear convolution (a * b)[k] = sum_i a[i] b[k - i], length |a| + |b| - 1.
inline std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t len = a.size() + b.size() - 1;
  const std::size_t n = good_size(len);
  auto fa = forward(a, n);
  auto fb = forward(b, n);
  for (std::size_t m = 0; m < fa.size(); ++m) fa[m] *= fb[m];
  auto out = inverse(fa, n);
  out.resize(len);
  return out;
}

}  // namespace leadlag::fft
