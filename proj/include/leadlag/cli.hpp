#pragma once

// Command-line front end: filters, simulate, mc, estimate, empirical.
// Exit codes: 0 success, 2 usage, 3 data, 4 internal invariant.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "leadlag/error.hpp"
#include "leadlag/estimators.hpp"
#include "leadlag/ingest.hpp"
#include "leadlag/montecarlo.hpp"
#include "leadlag/report.hpp"
#include "leadlag/wavelet_filters.hpp"

namespace leadlag::cli {

enum ExitCode : int { ok = 0, usage = 2, data = 3, internal = 4 };

// "J" (meaning 1..J), "a..b" or a comma list.
inline std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  auto to_int = [&](const std::string& v) {
    try {
      std::size_t pos = 0;
      const int k = std::stoi(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return k;
    } catch (const std::exception&) {
      throw usage_error("invalid level list '" + s + "'");
    }
  };
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const int a = to_int(s.substr(0, dots));
    const int b = to_int(s.substr(dots + 2));
    if (a < 1 || b < a) throw usage_error("invalid level range '" + s + "'");
    for (int j = a; j <= b; ++j) out.push_back(j);
  } else if (s.find(',') != std::string::npos) {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_int(item));
  } else {
    const int J = to_int(s);
    for (int j = 1; j <= J; ++j) out.push_back(j);
  }
  for (int j : out)
    if (j < 1 || j > 20) throw usage_error("levels must lie in 1..20");
  if (out.empty()) throw usage_error("no levels in '" + s + "'");
  return out;
}

inline std::vector<Estimator> parse_estimators(const std::string& s) {
  std::vector<Estimator> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_estimator(item));
  if (out.empty()) throw usage_error("no estimators selected");
  return out;
}

// Writes to the named file, or to `fallback` when the name is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw data_error("cannot write " + path);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

struct TickOptions {
  std::string time_col = "time";
  std::string price_col = "price";
  std::string date_col;
  std::string unit = "s";
  std::string basis = "relative";
  std::string session;
  double resolution_us = 1.0;
  bool raw_prices = false;
  std::string duplicates = "last";

  void add_to(CLI::App* app) {
    app->add_option("--time-col", time_col, "Timestamp column name")->capture_default_str();
    app->add_option("--price-col", price_col, "Price column name")->capture_default_str();
    app->add_option("--date-col", date_col, "Trading-date column name (splits days)");
    app->add_option("--time-unit", unit, "Unit of numeric timestamps: s, ms, us")->capture_default_str();
    app->add_option("--time-basis", basis, "relative, midnight or epoch")->capture_default_str();
    app->add_option("--session", session, "Session window HH:MM-HH:MM (clock times only)");
    app->add_option("--resolution-us", resolution_us, "Timestamp resolution in microseconds")
        ->capture_default_str();
    app->add_flag("--raw-prices", raw_prices, "Do not log-transform prices");
    app->add_option("--duplicates", duplicates, "Same-timestamp policy: last, first, median")
        ->capture_default_str();
  }

  TickFileSpec spec(const std::string& path, std::optional<double> resolution = std::nullopt) const {
    TickFileSpec s;
    s.path = path;
    s.time_column = time_col;
    s.price_column = price_col;
    s.date_column = date_col;
    s.unit = parse_time_unit(unit);
    s.basis = parse_time_basis(basis);
    if (!session.empty()) s.session = Session::parse(session);
    s.resolution = resolution.value_or(resolution_us * 1e-6);
    s.log_prices = !raw_prices;
    s.duplicates = parse_duplicate_policy(duplicates);
    return s;
  }
};

struct GridOptions {
  double grid_ms = 2.0;
  double step_us = 1.0;
  double tau = 0.0;  // model-unit alternative to grid_ms / step_us
  int gamma = 100;
  std::vector<double> exclude_ms;
  std::string levels = "1..10";
  std::string estimators = "theta,hry,ds";
  int filter_length = 20;

  void add_to(CLI::App* app) {
    app->add_option("--grid-ms", grid_ms, "Half-width of the lag grid in ms")->capture_default_str();
    app->add_option("--grid-step-us", step_us, "Lag grid step in microseconds")->capture_default_str();
    app->add_option("--tau", tau, "Lag grid step in time units (with --gamma; overrides the ms grid)");
    app->add_option("--gamma", gamma, "Number of grid steps each side when --tau is given")
        ->capture_default_str();
    app->add_option("--exclude-ms", exclude_ms,
                    "Remove lags with |lag| <= x ms from every estimator's grid");
    app->add_option("--levels", levels, "Levels: J, a..b or a list")->capture_default_str();
    app->add_option("--estimators", estimators, "Comma list of theta, hry, ds, wccf")
        ->capture_default_str();
    app->add_option("--filter-length", filter_length, "Daubechies filter length L")->capture_default_str();
  }

  LagGrid grid() const {
    LagGrid g = tau > 0.0 ? LagGrid::symmetric(tau, gamma) : LagGrid::spanning(grid_ms * 1e-3, step_us * 1e-6);
    for (double x : exclude_ms) g.exclude(-std::abs(x) * 1e-3, std::abs(x) * 1e-3);
    g.indices();
    return g;
  }
};

inline void write_filters(std::ostream& os, const FilterBank& bank, const std::string& format) {
  if (format == "json") {
    json levels = json::array();
    for (int j = 1; j <= bank.max_level(); ++j) {
      const auto p = bank.psi(j);
      levels.push_back({{"level", j},
                        {"width", bank.width(j)},
                        {"psi", std::vector<double>(p.begin(), p.end())}});
    }
    os << json{{"length", bank.length()}, {"levels", levels}}.dump(2) << '\n';
    return;
  }
  os << "level,lag,value\n";
  char buf[64];
  for (int j = 1; j <= bank.max_level(); ++j) {
    const auto p = bank.psi(j);
    const long half = static_cast<long>(p.size() / 2);
    for (long l = -half; l <= half; ++l) {
      std::snprintf(buf, sizeof buf, "%.17g", p[static_cast<std::size_t>(l + half)]);
      os << j << ',' << l << ',' << buf << '\n';
    }
  }
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scale-by-scale lead-lag estimation for non-synchronous tick data", "leadlag"};
  app.set_config("--config", "", "Key-value configuration file ([subcommand] sections)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(0, 1);

  std::uint64_t seed = 20170607;
  unsigned threads = 0;
  std::string format;
  app.add_option("--seed", seed, "Master seed")->envname("LEADLAG_SEED")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
  app.add_option("--format", format, "Output format: csv, json or table")
      ->check(CLI::IsMember({"csv", "json", "table"}));

  // filters
  auto* filters = app.add_subcommand("filters", "Print autocorrelation wavelets Psi_j as CSV");
  int f_length = 20, f_levels = 1;
  std::string f_variant = "la", f_output;
  filters->add_option("--length", f_length, "Filter length L")->capture_default_str();
  filters->add_option("--levels", f_levels, "Highest level J")->capture_default_str();
  filters->add_option("--variant", f_variant, "la (least asymmetric) or ep (extremal phase)")
      ->check(CLI::IsMember({"la", "ep"}))->capture_default_str();
  filters->add_option("-o,--output", f_output, "Output file (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate one observed pair as two tick CSVs");
  ExperimentConfig s_cfg;
  double s_pi2 = 0.25;
  int s_rep = 0;
  std::string s_prefix = "sim";
  simulate->add_option("--N", s_cfg.N, "Resolution exponent, tau = 2^-(N+1)")->capture_default_str();
  simulate->add_option("--n", s_cfg.n, "Estimation window in grid steps")->capture_default_str();
  simulate->add_option("--scenario", s_cfg.scenario, "1 constant, 2 Heston volatility")
      ->check(CLI::IsMember({1, 2}))->capture_default_str();
  simulate->add_option("--pi1", s_cfg.pi1, "Missing probability, asset 1")->capture_default_str();
  simulate->add_option("--pi2", s_pi2, "Missing probability, asset 2")->capture_default_str();
  simulate->add_option("--replication", s_rep, "Replication index used for the seed stream")
      ->capture_default_str();
  simulate->add_option("--out-prefix", s_prefix, "Writes <prefix>_1.csv and <prefix>_2.csv")
      ->capture_default_str();

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo study; median (MAD) table of estimates");
  ExperimentConfig m_cfg;
  std::vector<double> m_pi2;
  bool m_full = false, m_no_wccf = false;
  std::string m_output;
  mc->add_option("--scenario", m_cfg.scenario, "1 constant, 2 Heston volatility")
      ->check(CLI::IsMember({1, 2}))->capture_default_str();
  mc->add_option("--pi1", m_cfg.pi1, "Missing probability, asset 1")->capture_default_str();
  mc->add_option("--pi2", m_pi2, "Missing probabilities for asset 2 (default 0.25 0.5 0.75)");
  mc->add_option("--reps", m_cfg.replications, "Replications")->capture_default_str();
  mc->add_flag("--full", m_full, "Use 1000 replications");
  mc->add_option("--N", m_cfg.N, "Resolution exponent")->capture_default_str();
  mc->add_option("--n", m_cfg.n, "Estimation window in grid steps")->capture_default_str();
  mc->add_option("--L", m_cfg.L, "Filter length")->capture_default_str();
  mc->add_option("--gamma", m_cfg.gamma, "Grid half-width in steps")->capture_default_str();
  mc->add_option("--levels", m_cfg.levels, "Highest level")->capture_default_str();
  mc->add_flag("--no-wccf", m_no_wccf, "Skip the WCCF comparison");
  mc->add_option("-o,--output", m_output, "Output file (default stdout)");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Lead-lag estimates for one pair of tick files");
  std::vector<std::string> e_pair;
  TickOptions e_ticks;
  GridOptions e_grid;
  double e_T = 0.0;
  bool e_curves = false;
  std::string e_output;
  estimate->add_option("--pair", e_pair, "Two tick CSV files (series 1, series 2)")
      ->expected(2)->required();
  e_ticks.add_to(estimate);
  e_grid.add_to(estimate);
  estimate->add_option("--T", e_T, "Estimation horizon in time units (default: window end less the lag margin)");
  estimate->add_flag("--curves", e_curves, "Include objective curves in the JSON report");
  estimate->add_option("-o,--output", e_output, "Output file (default stdout)");

  // empirical
  auto* empirical = app.add_subcommand("empirical", "Per-day estimates and median/MAD summary for two venues");
  std::string v1, v2, daily_out, summary_out, curve_dir, p_output;
  TickOptions p_ticks;
  p_ticks.basis = "midnight";
  p_ticks.session = "09:30-16:00";
  GridOptions p_grid;
  empirical->add_option("--venue1", v1, "Tick CSV of venue 1")->required();
  empirical->add_option("--venue2", v2, "Tick CSV of venue 2")->required();
  p_ticks.add_to(empirical);
  p_grid.add_to(empirical);
  empirical->add_option("--daily-out", daily_out, "CSV of per-day estimates (date, estimator, level, theta_ms)");
  empirical->add_option("--summary-out", summary_out, "CSV summary (estimator, level, median_ms, mad_ms)");
  empirical->add_option("--curve-dir", curve_dir, "Directory for per-day objective curves");
  empirical->add_option("-o,--output", p_output, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return usage;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return usage;
  }

  try {
    if (filters->parsed()) {
      if (f_levels < 1 || f_levels > 20) throw usage_error("--levels must lie in 1..20");
      const FilterSpec spec{f_length, f_variant == "la" ? FilterVariant::least_asymmetric
                                                        : FilterVariant::extremal_phase};
      const FilterBank bank(spec, f_levels);
      Sink sink(f_output, out);
      write_filters(*sink, bank, format.empty() ? "csv" : format);
    } else if (simulate->parsed()) {
      s_cfg.pi2_values = {s_pi2};
      s_cfg.seed = seed;
      s_cfg.replications = 1;
      s_cfg.validate();
      if (s_rep < 0) throw usage_error("--replication must be nonnegative");
      const auto sim = simulate_replication(s_cfg, s_rep, s_pi2);
      write_ticks(s_prefix + "_1.csv", sim.x1);
      write_ticks(s_prefix + "_2.csv", sim.x2);
      out << "tau " << sim.tau << "\nT " << sim.T << "\nhorizon " << sim.x1.horizon()
          << "\nticks " << sim.x1.size() << ' ' << sim.x2.size() << "\nwrote " << s_prefix
          << "_1.csv " << s_prefix << "_2.csv\n";
    } else if (mc->parsed()) {
      if (!m_pi2.empty()) m_cfg.pi2_values = m_pi2;
      if (m_full) m_cfg.replications = ExperimentConfig::kFullReplications;
      m_cfg.run_wccf = !m_no_wccf;
      m_cfg.seed = seed;
      m_cfg.threads = threads;
      const auto report = run_experiment(m_cfg);
      Sink sink(m_output, out);
      const std::string f = format.empty() ? "table" : format;
      if (f == "json") *sink << to_json(report).dump(2) << '\n';
      else if (f == "csv") write_csv(*sink, report);
      else write_table(*sink, report);
    } else if (estimate->parsed()) {
      const auto grid = e_grid.grid();
      const auto est = parse_estimators(e_grid.estimators);
      const auto levels = parse_levels(e_grid.levels);
      const std::optional<double> res = e_grid.tau > 0.0 ? std::optional<double>(e_grid.tau) : std::nullopt;
      EstimateReport report;
      std::vector<TickSeries> xs;
      for (const auto& path : e_pair) xs.push_back(load_ticks(e_ticks.spec(path, res), &report.warnings));
      report.series = {describe(e_pair[0], xs[0]), describe(e_pair[1], xs[1])};
      report.grid = grid;
      report.resolution = res.value_or(e_ticks.resolution_us * 1e-6);

      EmpiricalConfig cfg;
      cfg.grid = grid;
      cfg.levels = levels;
      cfg.estimators = est;
      cfg.filter = FilterSpec{e_grid.filter_length, FilterVariant::least_asymmetric};
      cfg.resolution = report.resolution;
      cfg.validate();
      DayPair day{"", xs[0], xs[1]};
      std::optional<FilterBank> bank;
      if (cfg.wants(Estimator::theta_j) || cfg.wants(Estimator::wccf)) bank.emplace(cfg.filter, cfg.top_level());
      auto daily = estimate_day(day, cfg, bank ? &*bank : nullptr);
      if (e_T > 0.0) {
        // explicit horizon: recompute with the requested T
        std::vector<LeadLagEstimate> ests;
        if (cfg.wants(Estimator::hry)) ests.push_back(estimate_hry(xs[0], xs[1], grid, e_T));
        if (cfg.wants(Estimator::theta_j))
          for (auto& e : estimate_theta_levels(xs[0], xs[1], *bank, levels, grid, e_T)) ests.push_back(std::move(e));
        if (cfg.wants(Estimator::wccf))
          for (auto& e : estimate_wccf_levels(xs[0], xs[1], *bank, levels, grid, e_T)) ests.push_back(std::move(e));
        if (cfg.wants(Estimator::ds)) ests.push_back(estimate_ds(xs[0], xs[1], grid, cfg.resolution));
        daily.estimates = std::move(ests);
        daily.T = e_T;
      }
      report.T = daily.T;
      report.estimates = std::move(daily.estimates);
      Sink sink(e_output, out);
      const std::string f = format.empty() ? "json" : format;
      if (f == "json") {
        *sink << to_json(report, e_curves).dump(2) << '\n';
      } else {
        *sink << "estimator,level,theta_seconds,lag_index,objective,low_signal\n";
        char buf[128];
        for (const auto& e : report.estimates) {
          std::snprintf(buf, sizeof buf, "%.12g,%d,%.17g,%d", e.theta, e.lag_index, e.objective,
                        e.low_signal ? 1 : 0);
          *sink << to_string(e.estimator) << ',' << e.level << ',' << buf << '\n';
        }
      }
      for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    } else if (empirical->parsed()) {
      EmpiricalConfig cfg;
      cfg.grid = p_grid.grid();
      cfg.levels = parse_levels(p_grid.levels);
      cfg.estimators = parse_estimators(p_grid.estimators);
      cfg.filter = FilterSpec{p_grid.filter_length, FilterVariant::least_asymmetric};
      cfg.resolution = p_grid.tau > 0.0 ? p_grid.tau : p_ticks.resolution_us * 1e-6;
      cfg.threads = threads;
      cfg.curve_dir = curve_dir;
      const std::optional<double> res = p_grid.tau > 0.0 ? std::optional<double>(p_grid.tau) : std::nullopt;
      const auto result = run_empirical(p_ticks.spec(v1, res), p_ticks.spec(v2, res), cfg);
      for (const auto& n : result.notices) err << "notice: " << n << '\n';
      if (!daily_out.empty()) {
        Sink s(daily_out, out);
        write_daily_csv(*s, result);
      }
      if (!summary_out.empty()) {
        Sink s(summary_out, out);
        write_summary_csv(*s, result);
      }
      Sink sink(p_output, out);
      const std::string f = format.empty() ? "table" : format;
      if (f == "json") *sink << to_json(result, cfg.grid).dump(2) << '\n';
      else if (f == "csv") write_summary_csv(*sink, result);
      else write_summary_table(*sink, result);
    }
  } catch (const usage_error& e) {
    err << "usage error: " << e.what() << '\n';
    return usage;
  } catch (const data_error& e) {
    err << "data error: " << e.what() << '\n';
    return data;
  } catch (const invariant_error& e) {
    err << "internal error: " << e.what() << '\n';
    return internal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return internal;
  }
  return ok;
}

}  // namespace leadlag::cli
