#pragma once

// Monte Carlo harness for the two simulation scenarios: constant volatility
// (scenario 1) and Heston volatility with leverage (scenario 2), Bernoulli
// missing observations, theta_j and WCCF estimates per level, summarised by
// median and MAD in grid units.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "leadlag/error.hpp"
#include "leadlag/estimators.hpp"
#include "leadlag/market_model.hpp"
#include "leadlag/parallel.hpp"
#include "leadlag/rng.hpp"
#include "leadlag/tick_series.hpp"
#include "leadlag/wavelet_filters.hpp"

namespace leadlag {

struct ExperimentConfig {
  int N = 14;
  std::size_t n = 30000;
  int scenario = 1;
  double pi1 = 0.25;
  std::vector<double> pi2_values{0.25, 0.5, 0.75};
  int L = 20;
  int gamma = 100;
  int levels = 8;
  int replications = 200;
  std::uint64_t seed = 20170607;
  unsigned threads = 0;  // 0: hardware concurrency
  HestonParams heston{};
  bool run_wccf = true;

  static constexpr int kFullReplications = 1000;

  void validate() const {
    if (N < 1 || N > 30) throw usage_error("experiment: N must lie in 1..30");
    if (n < 16) throw usage_error("experiment: n must be at least 16");
    if (scenario != 1 && scenario != 2) throw usage_error("experiment: scenario must be 1 or 2");
    if (!(pi1 >= 0.0 && pi1 < 1.0)) throw usage_error("experiment: pi1 must lie in [0, 1)");
    if (pi2_values.empty()) throw usage_error("experiment: no pi2 values");
    for (double p : pi2_values)
      if (!(p >= 0.0 && p < 1.0)) throw usage_error("experiment: pi2 must lie in [0, 1)");
    if (L < 2 || L % 2) throw usage_error("experiment: L must be even and >= 2");
    if (gamma < 0) throw usage_error("experiment: Gamma must be nonnegative");
    if (levels < 1 || levels > std::min(N + 1, 20))
      throw usage_error("experiment: levels must lie in 1..min(N+1, 20)");
    if (replications < 1) throw usage_error("experiment: replications must be positive");
    if (scenario == 2) heston.validate();
  }

  SpectralModel model() const { return SpectralModel::simulation_study(N); }
};

struct MedianMad {
  double median = 0.0;
  double mad = 0.0;
};

inline MedianMad median_mad(std::span<const double> values) {
  if (values.empty()) throw data_error("median_mad: empty sample");
  MedianMad out;
  out.median = median_of(std::vector<double>(values.begin(), values.end()));
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - out.median);
  out.mad = median_of(std::move(dev));
  return out;
}

// One simulated pair of observed series with its horizon T.
struct SimulatedPair {
  TickSeries x1, x2;
  double T = 0.0;
  double tau = 0.0;
  std::size_t n_total = 0;
};

// Path length: the estimation window n plus the lag margin needed by the
// widest filter and the largest true lag.
inline std::size_t simulation_length(const ExperimentConfig& cfg) {
  const auto model = cfg.model();
  double max_lag = 0.0;
  for (double t : model.theta) max_lag = std::max(max_lag, std::abs(t));
  const auto lag_steps = static_cast<std::size_t>(std::ceil(max_lag / model.tau() - 1e-9));
  return cfg.n + static_cast<std::size_t>(cfg.gamma) + filter_width(cfg.L, cfg.levels) + lag_steps + 64;
}

enum class SeedStream : std::uint64_t { driver = 1, vol1 = 2, vol2 = 3, sample1 = 4, sample2 = 5 };

inline std::uint64_t replication_seed(std::uint64_t master, int rep, SeedStream s) {
  return derive_seed(master, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(s));
}

// Random numbers depend only on (seed, rep), so different pi2 values see the
// same driver, volatility and Bernoulli draws.
inline SimulatedPair simulate_replication(const ExperimentConfig& cfg, int rep, double pi2) {
  const auto model = cfg.model();
  const double tau = model.tau();
  const std::size_t n_total = simulation_length(cfg);
  std::size_t n_fft = 1;
  while (n_fft < n_total) n_fft <<= 1;

  auto [b1, b2] = simulate_driver_pair(model, n_fft, tau, replication_seed(cfg.seed, rep, SeedStream::driver));
  b1.resize(n_total);
  b2.resize(n_total);

  std::vector<double> p1, p2;
  if (cfg.scenario == 1) {
    p1 = integrate_price(0.0, b1, 1.0);
    p2 = integrate_price(0.0, b2, 1.0);
  } else {
    const auto s1 = simulate_heston_vol(cfg.heston, n_total, tau, b1, replication_seed(cfg.seed, rep, SeedStream::vol1));
    const auto s2 = simulate_heston_vol(cfg.heston, n_total, tau, b2, replication_seed(cfg.seed, rep, SeedStream::vol2));
    p1 = integrate_price(0.0, b1, s1);
    p2 = integrate_price(0.0, b2, s2);
  }

  const auto scheme = SamplingScheme::bernoulli(cfg.pi1, pi2);
  auto observe = [&](int asset, const std::vector<double>& path, SeedStream s) {
    const auto idx = sample_indices(scheme, asset, n_total, replication_seed(cfg.seed, rep, s));
    std::vector<double> t(idx.size()), p(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      t[i] = static_cast<double>(idx[i]) * tau;
      p[i] = path[static_cast<std::size_t>(idx[i])];
    }
    return TickSeries(std::move(t), std::move(p), tau, static_cast<double>(n_total) * tau);
  };

  SimulatedPair out{observe(1, p1, SeedStream::sample1), observe(2, p2, SeedStream::sample2),
                    static_cast<double>(cfg.n) * tau, tau, n_total};
  return out;
}

struct ReplicationResult {
  std::size_t pi2_index = 0;
  int rep = 0;
  std::vector<int> theta;  // per level, grid units
  std::vector<int> wccf;
};

struct SummaryRow {
  Estimator estimator = Estimator::theta_j;
  int level = 0;
  double pi2 = 0.0;
  double median = 0.0;
  double mad = 0.0;
  std::size_t count = 0;
};

struct MonteCarloReport {
  ExperimentConfig config;
  std::vector<double> truth;  // theta_j / tau for j = 1..levels
  std::vector<SummaryRow> rows;
  std::vector<ReplicationResult> raw;
  double seconds = 0.0;

  const SummaryRow& row(Estimator e, int level, double pi2) const {
    for (const auto& r : rows)
      if (r.estimator == e && r.level == level && std::abs(r.pi2 - pi2) < 1e-12) return r;
    throw usage_error("report has no row for " + to_string(e) + " level " + std::to_string(level));
  }
};

inline ReplicationResult run_replication(const ExperimentConfig& cfg, const FilterBank& bank,
                                         std::size_t pi2_index, int rep) {
  const auto sim = simulate_replication(cfg, rep, cfg.pi2_values[pi2_index]);
  const auto grid = LagGrid::symmetric(sim.tau, cfg.gamma);
  std::vector<int> levels(static_cast<std::size_t>(cfg.levels));
  for (int j = 1; j <= cfg.levels; ++j) levels[static_cast<std::size_t>(j - 1)] = j;

  ReplicationResult r;
  r.pi2_index = pi2_index;
  r.rep = rep;
  for (const auto& e : estimate_theta_levels(sim.x1, sim.x2, bank, levels, grid, sim.T))
    r.theta.push_back(e.lag_index);
  if (cfg.run_wccf)
    for (const auto& e : estimate_wccf_levels(sim.x1, sim.x2, bank, levels, grid, sim.T))
      r.wccf.push_back(e.lag_index);
  return r;
}

inline MonteCarloReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const FilterBank bank(FilterSpec{cfg.L, FilterVariant::least_asymmetric}, cfg.levels);
  const auto model = cfg.model();

  MonteCarloReport report;
  report.config = cfg;
  for (int j = 1; j <= cfg.levels; ++j)
    report.truth.push_back(model.theta[static_cast<std::size_t>(j - 1)] / model.tau());

  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  const std::size_t tasks = reps * cfg.pi2_values.size();
  report.raw.resize(tasks);
  parallel_for(tasks, cfg.threads, [&](std::size_t t) {
    const std::size_t k = t / reps;
    const int rep = static_cast<int>(t % reps);
    try {
      report.raw[t] = run_replication(cfg, bank, k, rep);
    } catch (const usage_error&) {
      throw;
    } catch (const invariant_error&) {
      throw;
    } catch (const std::exception& e) {
      throw data_error("replication " + std::to_string(rep) + " (pi2 = " +
                       std::to_string(cfg.pi2_values[k]) + "): " + e.what());
    }
  });

  for (std::size_t k = 0; k < cfg.pi2_values.size(); ++k) {
    for (Estimator e : {Estimator::theta_j, Estimator::wccf}) {
      if (e == Estimator::wccf && !cfg.run_wccf) continue;
      for (int j = 1; j <= cfg.levels; ++j) {
        std::vector<double> v;
        v.reserve(reps);
        for (std::size_t r = 0; r < reps; ++r) {
          const auto& res = report.raw[k * reps + r];
          const auto& src = e == Estimator::theta_j ? res.theta : res.wccf;
          v.push_back(src[static_cast<std::size_t>(j - 1)]);
        }
        const auto mm = median_mad(v);
        report.rows.push_back({e, j, cfg.pi2_values[k], mm.median, mm.mad, reps});
      }
    }
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace detail {

inline std::string format_half(double v) {
  std::ostringstream os;
  if (v == std::floor(v)) os << static_cast<long long>(v);
  else os << std::fixed << std::setprecision(1) << v;
  return os.str();
}

inline std::string pi_label(double p) {
  const double q = p * 4.0;
  if (std::abs(q - std::round(q)) < 1e-12 && p > 0.0) {
    const int k = static_cast<int>(std::round(q));
    if (k == 2) return "1/2";
    return std::to_string(k) + "/4";
  }
  std::ostringstream os;
  os << p;
  return os.str();
}

}  // namespace detail

// Aligned text table: true values, then per pi2 the median (MAD) rows.
inline void write_table(std::ostream& os, const MonteCarloReport& r) {
  const int J = r.config.levels;
  const int w = 12;
  os << "Scenario " << r.config.scenario << ": median (MAD) of estimates / tau, "
     << r.config.replications << " replications\n";
  os << std::left << std::setw(8) << "j" << std::right;
  for (int j = 1; j <= J; ++j) os << std::setw(w) << j;
  os << '\n' << std::left << std::setw(8) << "True" << std::right;
  for (double t : r.truth) os << std::setw(w) << detail::format_half(t);
  os << '\n';
  for (double p : r.config.pi2_values) {
    os << "pi2 = " << detail::pi_label(p) << '\n';
    for (Estimator e : {Estimator::theta_j, Estimator::wccf}) {
      if (e == Estimator::wccf && !r.config.run_wccf) continue;
      os << std::left << std::setw(8) << (e == Estimator::theta_j ? "theta_j" : "WCCF") << std::right;
      for (int j = 1; j <= J; ++j) {
        const auto& row = r.row(e, j, p);
        os << std::setw(w)
           << (detail::format_half(row.median) + " (" + detail::format_half(row.mad) + ")");
      }
      os << '\n';
    }
  }
  os << "wall-clock " << std::fixed << std::setprecision(1) << r.seconds << " s\n";
}

inline void write_csv(std::ostream& os, const MonteCarloReport& r) {
  os << "estimator,level,pi2,true,median,mad,replications\n";
  for (const auto& row : r.rows)
    os << to_string(row.estimator) << ',' << row.level << ',' << row.pi2 << ','
       << r.truth[static_cast<std::size_t>(row.level - 1)] << ',' << row.median << ',' << row.mad
       << ',' << row.count << '\n';
}

}  // namespace leadlag
