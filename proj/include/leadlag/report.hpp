#pragma once

// JSON forms of the estimate, Monte Carlo and empirical reports. Layouts are
// described by the files under schema/.

#include <json.hpp>

#include <string>
#include <vector>

#include "leadlag/estimators.hpp"
#include "leadlag/ingest.hpp"
#include "leadlag/montecarlo.hpp"
#include "leadlag/tick_series.hpp"

namespace leadlag {

using json = nlohmann::ordered_json;

inline constexpr int kReportVersion = 1;

inline json to_json(const LagGrid& g) {
  json ex = json::array();
  for (const auto& [lo, hi] : g.exclusions) ex.push_back({lo, hi});
  return {{"step_seconds", g.step}, {"max_index", g.max_index}, {"exclusions_seconds", ex}};
}

inline json to_json(const LeadLagEstimate& e, bool with_curve) {
  json j = {{"estimator", to_string(e.estimator)},
            {"level", e.level},
            {"theta_seconds", e.theta},
            {"theta_ms", e.theta * 1e3},
            {"lag_index", e.lag_index},
            {"objective", e.objective},
            {"low_signal", e.low_signal}};
  if (with_curve) {
    json lags = json::array();
    for (int l : e.lags) lags.push_back(l * e.step);
    j["curve"] = {{"lag_seconds", lags}, {"values", e.curve}};
  }
  return j;
}

struct SeriesInfo {
  std::string path;
  std::size_t ticks = 0;
  double first_time = 0.0;
  double horizon = 0.0;
};

inline SeriesInfo describe(const std::string& path, const TickSeries& x) {
  return {path, x.size(), x.times().front(), x.horizon()};
}

struct EstimateReport {
  std::vector<SeriesInfo> series;
  LagGrid grid;
  double T = 0.0;
  double resolution = 0.0;
  std::vector<LeadLagEstimate> estimates;
  std::vector<std::string> warnings;
};

inline json to_json(const EstimateReport& r, bool with_curves) {
  json series = json::array();
  for (const auto& s : r.series)
    series.push_back({{"path", s.path},
                      {"ticks", s.ticks},
                      {"first_time_seconds", s.first_time},
                      {"horizon_seconds", s.horizon}});
  json est = json::array();
  for (const auto& e : r.estimates) est.push_back(to_json(e, with_curves));
  return {{"report", "estimate"},
          {"version", kReportVersion},
          {"series", series},
          {"grid", to_json(r.grid)},
          {"resolution_seconds", r.resolution},
          {"T_seconds", r.T},
          {"estimates", est},
          {"warnings", r.warnings}};
}

inline json to_json(const MonteCarloReport& r) {
  const auto& c = r.config;
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"estimator", to_string(row.estimator)},
                    {"level", row.level},
                    {"pi2", row.pi2},
                    {"true", r.truth[static_cast<std::size_t>(row.level - 1)]},
                    {"median", row.median},
                    {"mad", row.mad},
                    {"replications", row.count}});
  return {{"report", "montecarlo"},
          {"version", kReportVersion},
          {"config",
           {{"N", c.N},
            {"n", c.n},
            {"scenario", c.scenario},
            {"pi1", c.pi1},
            {"pi2", c.pi2_values},
            {"L", c.L},
            {"gamma", c.gamma},
            {"levels", c.levels},
            {"replications", c.replications},
            {"seed", c.seed}}},
          {"truth", r.truth},
          {"rows", rows},
          {"seconds", r.seconds}};
}

inline json to_json(const EmpiricalResult& r, const LagGrid& grid) {
  json days = json::array();
  for (const auto& d : r.days) {
    json est = json::array();
    for (const auto& e : d.estimates) est.push_back(to_json(e, false));
    days.push_back({{"date", d.date}, {"T_seconds", d.T}, {"estimates", est}});
  }
  json summary = json::array();
  for (const auto& s : r.summary)
    summary.push_back({{"estimator", to_string(s.estimator)},
                       {"level", s.level},
                       {"median_ms", s.median_ms},
                       {"mad_ms", s.mad_ms},
                       {"days", s.days}});
  return {{"report", "empirical"},
          {"version", kReportVersion},
          {"grid", to_json(grid)},
          {"days", days},
          {"summary", summary},
          {"notices", r.notices}};
}

}  // namespace leadlag
