#pragma once

// Tick CSV loading (trading-session filter, per-day split, duplicate
// timestamps collapsed) and the per-day empirical pipeline.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "leadlag/error.hpp"
#include "leadlag/estimators.hpp"
#include "leadlag/montecarlo.hpp"
#include "leadlag/parallel.hpp"
#include "leadlag/tick_series.hpp"
#include "leadlag/wavelet_filters.hpp"

namespace leadlag {

enum class TimeUnit { s, ms, us };
enum class TimeBasis { relative, since_midnight, epoch };
enum class DuplicatePolicy { last, first, median };

inline double unit_seconds(TimeUnit u) {
  switch (u) {
    case TimeUnit::s: return 1.0;
    case TimeUnit::ms: return 1e-3;
    case TimeUnit::us: return 1e-6;
  }
  return 1.0;
}

inline TimeUnit parse_time_unit(const std::string& s) {
  if (s == "s") return TimeUnit::s;
  if (s == "ms") return TimeUnit::ms;
  if (s == "us") return TimeUnit::us;
  throw usage_error("unknown time unit '" + s + "' (expected s, ms or us)");
}

inline TimeBasis parse_time_basis(const std::string& s) {
  if (s == "relative") return TimeBasis::relative;
  if (s == "midnight" || s == "since-midnight") return TimeBasis::since_midnight;
  if (s == "epoch") return TimeBasis::epoch;
  throw usage_error("unknown time basis '" + s + "' (expected relative, midnight or epoch)");
}

inline DuplicatePolicy parse_duplicate_policy(const std::string& s) {
  if (s == "last") return DuplicatePolicy::last;
  if (s == "first") return DuplicatePolicy::first;
  if (s == "median") return DuplicatePolicy::median;
  throw usage_error("unknown duplicate policy '" + s + "' (expected last, first or median)");
}

// Seconds since midnight for "HH:MM[:SS[.frac]]".
inline std::optional<double> parse_clock(std::string_view s) {
  int hh = 0, mm = 0;
  double ss = 0.0;
  const auto c1 = s.find(':');
  if (c1 == std::string_view::npos) return std::nullopt;
  auto to_int = [](std::string_view v, int& out) {
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    return ec == std::errc() && p == v.data() + v.size() && !v.empty();
  };
  if (!to_int(s.substr(0, c1), hh)) return std::nullopt;
  const auto rest = s.substr(c1 + 1);
  const auto c2 = rest.find(':');
  if (c2 == std::string_view::npos) {
    if (!to_int(rest, mm)) return std::nullopt;
  } else {
    if (!to_int(rest.substr(0, c2), mm)) return std::nullopt;
    const auto sec = rest.substr(c2 + 1);
    auto [p, ec] = std::from_chars(sec.data(), sec.data() + sec.size(), ss);
    if (ec != std::errc() || p != sec.data() + sec.size() || sec.empty()) return std::nullopt;
  }
  if (hh < 0 || hh > 47 || mm < 0 || mm > 59 || ss < 0.0 || ss >= 61.0) return std::nullopt;
  return hh * 3600.0 + mm * 60.0 + ss;
}

struct Session {
  double open = 9.5 * 3600.0;  // seconds since midnight
  double close = 16.0 * 3600.0;

  static Session parse(const std::string& s) {
    const auto dash = s.find('-');
    if (dash == std::string::npos) throw usage_error("session must look like 09:30-16:00");
    const auto a = parse_clock(s.substr(0, dash));
    const auto b = parse_clock(s.substr(dash + 1));
    if (!a || !b || !(*b > *a)) throw usage_error("invalid session '" + s + "'");
    return {*a, *b};
  }
};

struct TickFileSpec {
  std::string path;
  std::string time_column = "time";
  std::string price_column = "price";
  std::string date_column;  // empty: no date column
  TimeUnit unit = TimeUnit::s;
  TimeBasis basis = TimeBasis::relative;
  std::optional<Session> session;
  double resolution = 1e-6;  // seconds
  bool log_prices = true;
  DuplicatePolicy duplicates = DuplicatePolicy::last;
};

struct LoadedTicks {
  std::map<std::string, TickSeries> days;  // key "" when there is no date information
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    else if (c == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') cur.push_back(c);
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

inline std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

inline std::string epoch_date(double seconds) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(sys_seconds(std::chrono::seconds(
      static_cast<long long>(std::floor(seconds)))));
  const year_month_day ymd{days};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

struct Row {
  double time;
  double price;
  std::size_t line;
};

inline std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                                const std::string& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw data_error(path + ": column '" + name + "' not found in header");
  return static_cast<std::size_t>(it - header.begin());
}

inline TickSeries collapse_day(std::vector<Row> rows, const TickFileSpec& spec,
                               const std::string& day, std::vector<std::string>& warnings) {
  const bool sorted = std::is_sorted(rows.begin(), rows.end(),
                                     [](const Row& a, const Row& b) { return a.time < b.time; });
  if (!sorted) {
    warnings.push_back(spec.path + (day.empty() ? "" : " [" + day + "]") +
                       ": timestamps not in order; rows sorted");
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.time < b.time; });
  }
  std::vector<double> t, p;
  std::size_t dup = 0;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t k = i;
    while (k < rows.size() && rows[k].time == rows[i].time) ++k;
    double price = rows[k - 1].price;
    if (spec.duplicates == DuplicatePolicy::first) price = rows[i].price;
    if (spec.duplicates == DuplicatePolicy::median) {
      std::vector<double> v;
      for (std::size_t q = i; q < k; ++q) v.push_back(rows[q].price);
      price = median_of(std::move(v));
    }
    dup += k - i - 1;
    t.push_back(rows[i].time);
    p.push_back(spec.log_prices ? std::log(price) : price);
    i = k;
  }
  if (dup)
    warnings.push_back(spec.path + (day.empty() ? "" : " [" + day + "]") + ": " +
                       std::to_string(dup) + " duplicate-timestamp rows collapsed");
  if (t.size() < 2)
    throw data_error(spec.path + (day.empty() ? "" : " [" + day + "]") +
                     ": fewer than two ticks in the session");
  std::optional<double> horizon;
  if (spec.session && spec.basis != TimeBasis::relative)
    horizon = std::max(spec.session->close, t.back());
  return TickSeries(std::move(t), std::move(p), spec.resolution, horizon);
}

}  // namespace detail

inline LoadedTicks load_tick_days(std::istream& in, const TickFileSpec& spec) {
  if (!(spec.resolution > 0.0)) throw usage_error("tick resolution must be positive");
  std::string line;
  if (!std::getline(in, line)) throw data_error(spec.path + ": empty file");
  const auto header = detail::split_csv(line);
  const auto tcol = detail::column_index(header, spec.time_column, spec.path);
  const auto pcol = detail::column_index(header, spec.price_column, spec.path);
  std::optional<std::size_t> dcol;
  if (!spec.date_column.empty()) dcol = detail::column_index(header, spec.date_column, spec.path);
  const double scale = unit_seconds(spec.unit);

  std::map<std::string, std::vector<detail::Row>> by_day;
  std::vector<std::size_t> bad;
  std::size_t off_lattice = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = detail::split_csv(line);
    const std::size_t need = std::max({tcol, pcol, dcol.value_or(0)});
    if (f.size() <= need) {
      bad.push_back(lineno);
      continue;
    }
    const auto price = detail::parse_number(f[pcol]);
    std::optional<double> t = detail::parse_number(f[tcol]);
    bool clock = false;
    if (t) *t *= scale;
    else if ((t = parse_clock(f[tcol]))) clock = true;
    if (!price || !t || (spec.log_prices && !(*price > 0.0))) {
      bad.push_back(lineno);
      continue;
    }
    std::string day = dcol ? f[*dcol] : std::string();
    double tod = *t;
    if (spec.basis == TimeBasis::epoch && !clock) {
      const double d = std::floor(*t / 86400.0);
      if (!dcol) day = detail::epoch_date(*t);
      tod = *t - d * 86400.0;
    }
    const bool has_clock = clock || spec.basis != TimeBasis::relative;
    if (spec.session && has_clock && (tod < spec.session->open || tod > spec.session->close))
      continue;
    const auto k = lattice_index(tod, spec.resolution);
    if (!k) ++off_lattice;
    const double snapped = k ? static_cast<double>(*k) * spec.resolution
                             : std::round(tod / spec.resolution) * spec.resolution;
    by_day[day].push_back({snapped, *price, lineno});
  }
  if (!bad.empty()) {
    std::string msg = spec.path + ": " + std::to_string(bad.size()) + " unparseable row(s) at line(s)";
    for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 10); ++i)
      msg += " " + std::to_string(bad[i]);
    if (bad.size() > 10) msg += " ...";
    throw data_error(msg);
  }
  LoadedTicks out;
  if (off_lattice)
    out.warnings.push_back(spec.path + ": " + std::to_string(off_lattice) +
                           " timestamp(s) rounded to the declared resolution");
  if (by_day.empty()) throw data_error(spec.path + ": no ticks inside the session");
  for (auto& [day, rows] : by_day)
    out.days.emplace(day, detail::collapse_day(std::move(rows), spec, day, out.warnings));
  return out;
}

inline LoadedTicks load_tick_days(const TickFileSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw data_error("cannot open " + spec.path);
  return load_tick_days(in, spec);
}

inline TickSeries load_ticks(const TickFileSpec& spec, std::vector<std::string>* warnings = nullptr) {
  auto loaded = load_tick_days(spec);
  if (loaded.days.size() != 1)
    throw data_error(spec.path + ": holds " + std::to_string(loaded.days.size()) +
                     " trading days; load them with load_tick_days");
  if (warnings) warnings->insert(warnings->end(), loaded.warnings.begin(), loaded.warnings.end());
  return std::move(loaded.days.begin()->second);
}

inline void write_ticks(std::ostream& os, const TickSeries& x) {
  os << "time,price\n";
  char buf[64];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,", x.times()[i]);
    os << buf;
    std::snprintf(buf, sizeof buf, "%.17g\n", x.prices()[i]);
    os << buf;
  }
}

inline void write_ticks(const std::string& path, const TickSeries& x) {
  std::ofstream os(path);
  if (!os) throw data_error("cannot write " + path);
  write_ticks(os, x);
}

inline void write_curve_csv(std::ostream& os, const LeadLagEstimate& e) {
  os << "lag_seconds,value\n";
  char buf[80];
  for (std::size_t i = 0; i < e.lags.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.17g\n", e.lags[i] * e.step, e.curve[i]);
    os << buf;
  }
}

inline void write_curve_csv(std::ostream& os, const CrossCovCurve& c) {
  os << "lag_seconds,value\n";
  char buf[80];
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.17g\n", (c.first_index + static_cast<long>(i)) * c.step,
                  c.values[i]);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Empirical pipeline

struct EmpiricalConfig {
  LagGrid grid = LagGrid::spanning(2e-3, 1e-6);
  std::vector<int> levels{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<Estimator> estimators{Estimator::hry, Estimator::theta_j, Estimator::ds};
  FilterSpec filter{};
  double resolution = 1e-6;
  unsigned threads = 0;
  std::string curve_dir;  // empty: no curve export

  void validate() const {
    grid.validate();
    leadlag::validate(filter);
    if (estimators.empty()) throw usage_error("empirical: no estimators selected");
    if (!(resolution > 0.0)) throw usage_error("empirical: resolution must be positive");
    for (int j : levels)
      if (j < 1 || j > 20) throw usage_error("empirical: levels must lie in 1..20");
  }

  bool wants(Estimator e) const {
    return std::find(estimators.begin(), estimators.end(), e) != estimators.end();
  }
  int top_level() const { return levels.empty() ? 0 : *std::max_element(levels.begin(), levels.end()); }
};

struct DayPair {
  std::string date;
  TickSeries x1, x2;
};

struct DailyEstimates {
  std::string date;
  double T = 0.0;
  std::vector<LeadLagEstimate> estimates;
};

struct EmpiricalSummaryRow {
  Estimator estimator = Estimator::theta_j;
  int level = 0;
  double median_ms = 0.0;
  double mad_ms = 0.0;
  std::size_t days = 0;
};

struct EmpiricalResult {
  std::vector<DailyEstimates> days;
  std::vector<EmpiricalSummaryRow> summary;
  std::vector<std::string> notices;
};

// Days present on both venues; the rest produce notices.
inline std::vector<DayPair> pair_days(const std::map<std::string, TickSeries>& v1,
                                      const std::map<std::string, TickSeries>& v2,
                                      std::vector<std::string>& notices) {
  std::vector<DayPair> out;
  for (const auto& [d, x] : v1) {
    const auto it = v2.find(d);
    if (it == v2.end()) notices.push_back("day " + d + " missing on venue 2; skipped");
    else out.push_back({d, x, it->second});
  }
  for (const auto& [d, x] : v2)
    if (!v1.count(d)) notices.push_back("day " + d + " missing on venue 1; skipped");
  return out;
}

inline std::string curve_file_name(const std::string& date, const LeadLagEstimate& e) {
  std::string name = (date.empty() ? std::string("day") : date) + "_" + to_string(e.estimator);
  if (e.level > 0) name += "_j" + std::to_string(e.level);
  return name + ".csv";
}

// Horizon T is the common window end less the lag margin used by the curve.
inline DailyEstimates estimate_day(const DayPair& day, const EmpiricalConfig& cfg,
                                   const FilterBank* bank) {
  const double step = cfg.grid.step;
  int ext = 0;
  if ((cfg.wants(Estimator::theta_j) || cfg.wants(Estimator::wccf)) && !cfg.levels.empty())
    ext = static_cast<int>(filter_width(cfg.filter.length, cfg.top_level())) - 1;
  const double end = std::min(day.x1.horizon(), day.x2.horizon());
  const double margin = (cfg.grid.max_index + ext) * step;
  const double T = std::floor((end - margin) / step + detail::kTieTolerance) * step;
  const double start = std::max(day.x1.times().front(), day.x2.times().front());
  if (!(T > start))
    throw data_error("day " + day.date + ": session shorter than the lag margin of " +
                     std::to_string(margin) + " s");

  DailyEstimates out;
  out.date = day.date;
  out.T = T;
  if (cfg.wants(Estimator::hry)) out.estimates.push_back(estimate_hry(day.x1, day.x2, cfg.grid, T));
  if (cfg.wants(Estimator::theta_j) && !cfg.levels.empty())
    for (auto& e : estimate_theta_levels(day.x1, day.x2, *bank, cfg.levels, cfg.grid, T))
      out.estimates.push_back(std::move(e));
  if (cfg.wants(Estimator::wccf) && !cfg.levels.empty())
    for (auto& e : estimate_wccf_levels(day.x1, day.x2, *bank, cfg.levels, cfg.grid, T))
      out.estimates.push_back(std::move(e));
  if (cfg.wants(Estimator::ds))
    out.estimates.push_back(estimate_ds(day.x1, day.x2, cfg.grid, cfg.resolution));
  return out;
}

inline std::vector<EmpiricalSummaryRow> summarize_days(const std::vector<DailyEstimates>& days) {
  std::map<std::pair<int, int>, std::vector<double>> groups;
  for (const auto& d : days)
    for (const auto& e : d.estimates)
      groups[{static_cast<int>(e.estimator), e.level}].push_back(e.theta * 1e3);
  std::vector<EmpiricalSummaryRow> out;
  for (const auto& [key, v] : groups) {
    const auto mm = median_mad(v);
    out.push_back({static_cast<Estimator>(key.first), key.second, mm.median, mm.mad, v.size()});
  }
  return out;
}

inline EmpiricalResult run_empirical(const std::vector<DayPair>& days, const EmpiricalConfig& cfg) {
  cfg.validate();
  if (days.empty()) throw data_error("empirical: no trading day is present on both venues");
  std::optional<FilterBank> bank;
  if ((cfg.wants(Estimator::theta_j) || cfg.wants(Estimator::wccf)) && !cfg.levels.empty())
    bank.emplace(cfg.filter, cfg.top_level());

  EmpiricalResult out;
  out.days.resize(days.size());
  parallel_for(days.size(), cfg.threads, [&](std::size_t i) {
    try {
      out.days[i] = estimate_day(days[i], cfg, bank ? &*bank : nullptr);
    } catch (const usage_error&) {
      throw;
    } catch (const invariant_error&) {
      throw;
    } catch (const std::exception& e) {
      throw data_error("day " + days[i].date + ": " + e.what());
    }
  });
  if (!cfg.curve_dir.empty()) {
    std::filesystem::create_directories(cfg.curve_dir);
    for (const auto& d : out.days)
      for (const auto& e : d.estimates) {
        const auto path = std::filesystem::path(cfg.curve_dir) / curve_file_name(d.date, e);
        std::ofstream os(path);
        if (!os) throw data_error("cannot write " + path.string());
        write_curve_csv(os, e);
      }
  }
  out.summary = summarize_days(out.days);
  return out;
}

inline EmpiricalResult run_empirical(const TickFileSpec& venue1, const TickFileSpec& venue2,
                                     const EmpiricalConfig& cfg) {
  auto a = load_tick_days(venue1);
  auto b = load_tick_days(venue2);
  std::vector<std::string> notices = a.warnings;
  notices.insert(notices.end(), b.warnings.begin(), b.warnings.end());
  const auto days = pair_days(a.days, b.days, notices);
  auto res = run_empirical(days, cfg);
  notices.insert(notices.end(), res.notices.begin(), res.notices.end());
  res.notices = std::move(notices);
  return res;
}

inline std::string estimate_label(const LeadLagEstimate& e) {
  if (e.estimator == Estimator::theta_j || e.estimator == Estimator::wccf)
    return (e.estimator == Estimator::wccf ? "WCCF j=" : "j=") + std::to_string(e.level);
  return e.estimator == Estimator::hry ? "HRY" : "DS";
}

inline void write_daily_csv(std::ostream& os, const EmpiricalResult& r) {
  os << "date,estimator,level,theta_ms\n";
  char buf[64];
  for (const auto& d : r.days)
    for (const auto& e : d.estimates) {
      std::snprintf(buf, sizeof buf, "%.6f", e.theta * 1e3);
      os << d.date << ',' << to_string(e.estimator) << ',' << e.level << ',' << buf << '\n';
    }
}

inline void write_summary_csv(std::ostream& os, const EmpiricalResult& r) {
  os << "estimator,level,median_ms,mad_ms\n";
  char buf[96];
  for (const auto& s : r.summary) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", s.median_ms, s.mad_ms);
    os << to_string(s.estimator) << ',' << s.level << ',' << buf << '\n';
  }
}

// Rows HRY, j = 1..J, DS (and WCCF levels when present); median and MAD in ms.
inline void write_summary_table(std::ostream& os, const EmpiricalResult& r) {
  auto order = [](const EmpiricalSummaryRow& s) {
    switch (s.estimator) {
      case Estimator::hry: return 0;
      case Estimator::theta_j: return 1;
      case Estimator::ds: return 2;
      case Estimator::wccf: return 3;
    }
    return 4;
  };
  auto rows = r.summary;
  std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
    return order(a) != order(b) ? order(a) < order(b) : a.level < b.level;
  });
  os << std::left << std::setw(12) << "" << std::right << std::setw(14) << "Median (ms)"
     << std::setw(12) << "MAD (ms)" << std::setw(8) << "days" << '\n';
  for (const auto& s : rows) {
    LeadLagEstimate tag;
    tag.estimator = s.estimator;
    tag.level = s.level;
    os << std::left << std::setw(12) << estimate_label(tag) << std::right << std::fixed
       << std::setprecision(3) << std::setw(14) << s.median_ms << std::setw(12) << s.mad_ms
       << std::setw(8) << s.days << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

}  // namespace leadlag
