#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "leadlag/ingest.hpp"

using namespace leadlag;

namespace {

TickFileSpec raw_spec() {
  TickFileSpec s;
  s.path = "mem.csv";
  s.log_prices = false;
  return s;
}

LoadedTicks load(const std::string& text, const TickFileSpec& spec) {
  std::istringstream in(text);
  return load_tick_days(in, spec);
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(Parse, Enums) {
  EXPECT_EQ(parse_time_unit("ms"), TimeUnit::ms);
  EXPECT_THROW(parse_time_unit("ns"), usage_error);
  EXPECT_EQ(parse_time_basis("midnight"), TimeBasis::since_midnight);
  EXPECT_THROW(parse_time_basis("gmt"), usage_error);
  EXPECT_EQ(parse_duplicate_policy("first"), DuplicatePolicy::first);
  EXPECT_THROW(parse_duplicate_policy("mean"), usage_error);
}

TEST(Parse, ClockAndSession) {
  EXPECT_DOUBLE_EQ(*parse_clock("09:30"), 34200.0);
  EXPECT_DOUBLE_EQ(*parse_clock("15:59:59.5"), 57599.5);
  EXPECT_FALSE(parse_clock("9h30").has_value());
  EXPECT_FALSE(parse_clock("10:75").has_value());
  const auto s = Session::parse("09:30-16:00");
  EXPECT_EQ(s.open, 34200.0);
  EXPECT_EQ(s.close, 57600.0);
  EXPECT_THROW(Session::parse("16:00-09:30"), usage_error);
  EXPECT_THROW(Session::parse("0930"), usage_error);
}

TEST(Load, DuplicateTimestampsKeepLastPrice) {
  auto spec = raw_spec();
  const auto r = load("time,price\n1.0,10\n2.0,11\n2.0,12\n2.0,13\n3.0,14\n", spec);
  const auto& x = r.days.at("");
  ASSERT_EQ(x.size(), 3u);
  EXPECT_EQ(x.prices()[1], 13.0);
  EXPECT_TRUE(any_contains(r.warnings, "2 duplicate-timestamp rows collapsed"));
  spec.duplicates = DuplicatePolicy::first;
  EXPECT_EQ(load("time,price\n1,10\n2,11\n2,12\n2,13\n3,14\n", spec).days.at("").prices()[1], 11.0);
  spec.duplicates = DuplicatePolicy::median;
  EXPECT_EQ(load("time,price\n1,10\n2,11\n2,15\n2,13\n3,14\n", spec).days.at("").prices()[1], 13.0);
}

TEST(Load, UnsortedRowsAreSortedWithWarning) {
  const auto r = load("time,price\n3,30\n1,10\n2,20\n", raw_spec());
  const auto& x = r.days.at("");
  EXPECT_EQ(x.times()[0], 1.0);
  EXPECT_EQ(x.prices()[2], 30.0);
  EXPECT_TRUE(any_contains(r.warnings, "not in order"));
}

TEST(Load, UnparseableRowsReportLineNumbers) {
  try {
    load("time,price\n1,10\nabc,11\n3\n4,14\n", raw_spec());
    FAIL();
  } catch (const data_error& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("2 unparseable"), std::string::npos);
    EXPECT_NE(m.find(" 3 4"), std::string::npos);
  }
  auto logspec = raw_spec();
  logspec.log_prices = true;
  EXPECT_THROW(load("time,price\n1,10\n2,-1\n", logspec), data_error);
  EXPECT_THROW(load("t,price\n1,10\n", raw_spec()), data_error);
  EXPECT_THROW(load("", raw_spec()), data_error);
}

TEST(Load, SessionFilterOnClockTimes) {
  auto spec = raw_spec();
  spec.basis = TimeBasis::since_midnight;
  spec.session = Session::parse("09:30-16:00");
  const auto r = load(
      "time,price\n09:29:59.999999,1\n09:30:00,2\n12:00:00.000001,3\n16:00:00,4\n16:00:00.000001,5\n",
      spec);
  const auto& x = r.days.at("");
  ASSERT_EQ(x.size(), 3u);
  EXPECT_EQ(x.prices()[0], 2.0);
  EXPECT_EQ(x.prices()[2], 4.0);
  EXPECT_DOUBLE_EQ(x.times()[1], 43200.000001);
  EXPECT_EQ(x.horizon(), 57600.0);
}

TEST(Load, NumericSecondsSinceMidnightWithUnits) {
  auto spec = raw_spec();
  spec.unit = TimeUnit::ms;
  spec.basis = TimeBasis::since_midnight;
  spec.session = Session::parse("10:00-10:01");
  const auto r = load("time,price\n35999999,1\n36000000.5,2\n36000001,3\n36060001,4\n", spec);
  const auto& x = r.days.at("");
  ASSERT_EQ(x.size(), 2u);
  EXPECT_NEAR(x.times()[0], 36000.0005, 1e-9);
  EXPECT_EQ(x.horizon(), 36060.0);
}

TEST(Load, DateColumnSplitsDays) {
  auto spec = raw_spec();
  spec.date_column = "date";
  const auto r = load("date,time,price\n2024-01-02,1,1\n2024-01-02,2,2\n2024-01-03,1,5\n2024-01-03,4,6\n", spec);
  ASSERT_EQ(r.days.size(), 2u);
  EXPECT_EQ(r.days.at("2024-01-03").prices()[1], 6.0);
}

TEST(Load, EpochTimesGroupByCalendarDay) {
  auto spec = raw_spec();
  spec.basis = TimeBasis::epoch;
  // 2024-01-02 10:00:00 UTC = 1704189600
  const auto r = load("time,price\n1704189600,1\n1704189601,2\n1704276000,3\n1704276002,4\n", spec);
  ASSERT_EQ(r.days.size(), 2u);
  EXPECT_EQ(r.days.at("2024-01-02").times()[0], 36000.0);
  EXPECT_EQ(r.days.at("2024-01-03").times()[1], 36002.0);
}

TEST(Load, LogPricesByDefault) {
  TickFileSpec spec;
  spec.path = "mem.csv";
  const auto r = load("time,price\n1,100\n2,110\n", spec);
  EXPECT_NEAR(r.days.at("").increment(0), std::log(1.1), 1e-15);
}

TEST(Load, OffLatticeTimesRoundedWithWarning) {
  auto spec = raw_spec();
  spec.resolution = 1e-3;
  const auto r = load("time,price\n1.0004,1\n2.0006,2\n", spec);
  EXPECT_DOUBLE_EQ(r.days.at("").times()[0], 1.0);
  EXPECT_DOUBLE_EQ(r.days.at("").times()[1], 2.001);
  EXPECT_TRUE(any_contains(r.warnings, "rounded"));
}

TEST(Load, RoundTripThroughFile) {
  const auto path = std::filesystem::temp_directory_path() / "leadlag_roundtrip.csv";
  const TickSeries x({0.000001, 0.5, 1.25, 7.000003}, {0.1, -0.25, 1.0 / 3.0, 2e-9}, 1e-6);
  write_ticks(path.string(), x);
  auto spec = raw_spec();
  spec.path = path.string();
  const auto y = load_ticks(spec);
  ASSERT_EQ(y.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_DOUBLE_EQ(y.times()[i], x.times()[i]);
    EXPECT_EQ(y.prices()[i], x.prices()[i]);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_ticks(spec), data_error);
}

TEST(Export, CurveCsv) {
  std::ostringstream os;
  write_curve_csv(os, CrossCovCurve{-1, {0.5, 1.0, -2.0}, 1e-6, 1.0});
  EXPECT_EQ(os.str(), "lag_seconds,value\n-1e-06,0.5\n0,1\n1e-06,-2\n");
  LeadLagEstimate e;
  e.step = 1e-3;
  e.lags = {2};
  e.curve = {0.25};
  std::ostringstream o2;
  write_curve_csv(o2, e);
  EXPECT_EQ(o2.str(), "lag_seconds,value\n0.002,0.25\n");
}

TEST(Empirical, MissingDayNotice) {
  std::map<std::string, TickSeries> a, b;
  const TickSeries x({0.0, 1.0}, {0.0, 1.0}, 1.0);
  a.emplace("2024-01-02", x);
  a.emplace("2024-01-03", x);
  b.emplace("2024-01-02", x);
  b.emplace("2024-01-04", x);
  std::vector<std::string> notes;
  const auto days = pair_days(a, b, notes);
  ASSERT_EQ(days.size(), 1u);
  EXPECT_EQ(days[0].date, "2024-01-02");
  EXPECT_TRUE(any_contains(notes, "2024-01-03 missing on venue 2"));
  EXPECT_TRUE(any_contains(notes, "2024-01-04 missing on venue 1"));
  EXPECT_THROW(run_empirical(std::vector<DayPair>{}, EmpiricalConfig{}), data_error);
}

TEST(Empirical, DelayedVenueRecovered) {
  const auto day = fixture::venue_day(7, "2024-01-02", 800, 1L << 19);
  EmpiricalConfig cfg;
  cfg.levels = {1, 2, 3, 4, 5, 6};
  const auto r = run_empirical({day}, cfg);
  ASSERT_EQ(r.days.size(), 1u);
  EXPECT_EQ(r.days[0].estimates.size(), 8u);
  for (const auto& e : r.days[0].estimates) {
    EXPECT_NEAR(e.theta * 1e3, 0.8, 1e-9) << estimate_label(e);
    EXPECT_FALSE(e.low_signal) << estimate_label(e);
  }
  for (const auto& s : r.summary) {
    EXPECT_EQ(s.days, 1u);
    EXPECT_EQ(s.mad_ms, 0.0);
  }
  std::ostringstream tab;
  write_summary_table(tab, r);
  EXPECT_NE(tab.str().find("HRY"), std::string::npos);
  EXPECT_NE(tab.str().find("j=6"), std::string::npos);
  EXPECT_NE(tab.str().find("0.800"), std::string::npos);
}

TEST(Empirical, ExclusionZoneRespected) {
  const auto day = fixture::venue_day(8, "2024-01-02", 50, 1L << 18);
  EmpiricalConfig cfg;
  cfg.levels = {1, 2};
  cfg.grid.exclude(-1e-4, 1e-4);
  const auto r = run_empirical({day}, cfg);
  for (const auto& e : r.days[0].estimates) {
    EXPECT_GT(std::abs(e.theta), 1e-4) << estimate_label(e);
    EXPECT_TRUE(cfg.grid.contains(e.lag_index));
  }
}

TEST(Empirical, DaysAreIndependent) {
  const auto d1 = fixture::venue_day(9, "2024-01-02", 300, 1L << 18);
  const auto d2 = fixture::venue_day(10, "2024-01-03", 500, 1L << 18);
  EmpiricalConfig cfg;
  cfg.levels = {2};
  cfg.threads = 2;
  const auto both = run_empirical({d1, d2}, cfg);
  const auto alone = run_empirical({d2}, cfg);
  ASSERT_EQ(both.days.size(), 2u);
  for (std::size_t i = 0; i < alone.days[0].estimates.size(); ++i) {
    EXPECT_EQ(both.days[1].estimates[i].lag_index, alone.days[0].estimates[i].lag_index);
    EXPECT_EQ(both.days[1].estimates[i].curve, alone.days[0].estimates[i].curve);
  }
  EXPECT_NEAR(both.days[0].estimates[0].theta, 300e-6, 1e-12);
  EXPECT_NEAR(both.days[1].estimates[0].theta, 500e-6, 1e-12);
  for (const auto& s : both.summary) {
    EXPECT_NEAR(s.median_ms, 0.4, 1e-9);
    EXPECT_NEAR(s.mad_ms, 0.1, 1e-9);
  }
  std::ostringstream daily;
  write_daily_csv(daily, both);
  EXPECT_NE(daily.str().find("2024-01-03,ds,0,0.500000"), std::string::npos);
}

TEST(Empirical, ShortSessionRejected) {
  const auto day = fixture::venue_day(11, "2024-01-02", 10, 3000);
  EmpiricalConfig cfg;
  EXPECT_THROW(run_empirical({day}, cfg), data_error);
}

TEST(Empirical, CurveExport) {
  const auto dir = std::filesystem::temp_directory_path() / "leadlag_curves_test";
  std::filesystem::remove_all(dir);
  const auto day = fixture::venue_day(12, "2024-01-02", 100, 1L << 17);
  EmpiricalConfig cfg;
  cfg.levels = {1};
  cfg.estimators = {Estimator::theta_j, Estimator::ds};
  cfg.curve_dir = dir.string();
  run_empirical({day}, cfg);
  EXPECT_TRUE(std::filesystem::exists(dir / "2024-01-02_theta_j1.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "2024-01-02_ds.csv"));
  std::ifstream in(dir / "2024-01-02_ds.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "lag_seconds,value");
  std::filesystem::remove_all(dir);
}
