#include <gtest/gtest.h>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>
#include <rapidjson/schema.h>
#include <rapidjson/stringbuffer.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "leadlag/cli.hpp"
#include "leadlag/ingest.hpp"

using namespace leadlag;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "leadlag");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto p = fs::temp_directory_path() / "leadlag_cli_test";
  fs::create_directories(p);
  return p;
}

// Validates `text` against a schema file of the repository.
std::string schema_errors(const std::string& text, const std::string& schema_file) {
  std::ifstream in(std::string(LEADLAG_SOURCE_DIR) + "/schema/" + schema_file);
  std::stringstream ss;
  ss << in.rdbuf();
  rapidjson::Document sd;
  if (sd.Parse(ss.str().c_str()).HasParseError()) return "schema does not parse";
  rapidjson::SchemaDocument schema(sd);
  rapidjson::Document d;
  if (d.Parse(text.c_str()).HasParseError())
    return std::string("report does not parse: ") + rapidjson::GetParseError_En(d.GetParseError());
  rapidjson::SchemaValidator v(schema);
  if (d.Accept(v)) return "";
  rapidjson::StringBuffer where, kw;
  v.GetInvalidSchemaPointer().StringifyUriFragment(where);
  v.GetInvalidDocumentPointer().StringifyUriFragment(kw);
  return std::string("invalid at ") + kw.GetString() + " (schema " + where.GetString() + ", " +
         v.GetInvalidSchemaKeyword() + ")";
}

}  // namespace

TEST(Cli, NoArgumentsIsUsageError) {
  const auto r = run({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Subcommands"), std::string::npos);
}

TEST(Cli, BinaryExitCodes) {
  const std::string exe = LEADLAG_CLI_PATH;
  EXPECT_EQ(std::system((exe + " > /dev/null 2>&1").c_str()) >> 8, 2);
  EXPECT_EQ(std::system((exe + " filters --length 2 > /dev/null 2>&1").c_str()) >> 8, 0);
  EXPECT_EQ(std::system((exe + " --help > /dev/null 2>&1").c_str()) >> 8, 0);
}

TEST(Cli, UnknownOptionIsUsageError) {
  EXPECT_EQ(run({"filters", "--bogus"}).code, 2);
  EXPECT_EQ(run({"--format", "xml", "filters"}).code, 2);
  EXPECT_EQ(run({"filters", "--length", "7"}).code, 2);
}

TEST(Cli, FiltersHaarCsv) {
  const auto r = run({"filters", "--length", "2", "--levels", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "level,lag,value\n1,-1,-0.5\n1,0,1\n1,1,-0.5\n");
  const auto ep = run({"filters", "--length", "2", "--levels", "1", "--variant", "ep"});
  EXPECT_EQ(ep.out, r.out);
}

TEST(Cli, FiltersJson) {
  const auto r = run({"--format", "json", "filters", "--length", "4", "--levels", "2"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["length"], 4);
  EXPECT_EQ(j["levels"].size(), 2u);
  EXPECT_EQ(j["levels"][1]["width"], 10);
}

TEST(Cli, SimulateThenEstimateJsonMatchesSchema) {
  const auto dir = scratch();
  const auto prefix = (dir / "sim").string();
  const auto s = run({"--seed", "5", "simulate", "--n", "20000", "--pi2", "0.5", "--out-prefix", prefix});
  ASSERT_EQ(s.code, 0) << s.err;
  ASSERT_TRUE(fs::exists(prefix + "_1.csv"));
  const double tau = std::ldexp(1.0, -15);
  const auto e = run({"estimate", "--pair", prefix + "_1.csv", prefix + "_2.csv", "--raw-prices",
                      "--tau", std::to_string(tau), "--gamma", "50", "--levels", "1..3",
                      "--estimators", "theta,hry,ds,wccf", "--curves"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(schema_errors(e.out, "estimate_report.schema.json"), "");
  const auto j = json::parse(e.out);
  EXPECT_EQ(j["report"], "estimate");
  EXPECT_EQ(j["estimates"].size(), 1u + 3u + 3u + 1u);
  for (const auto& est : j["estimates"])
    if (est["estimator"] == "theta" && est["level"].get<int>() <= 2) EXPECT_EQ(est["lag_index"], -1);
  fs::remove_all(dir);
}

TEST(Cli, SeedFromEnvironment) {
  const auto dir = scratch();
  ::setenv("LEADLAG_SEED", "99", 1);
  run({"simulate", "--n", "2000", "--out-prefix", (dir / "env").string()});
  ::unsetenv("LEADLAG_SEED");
  run({"--seed", "99", "simulate", "--n", "2000", "--out-prefix", (dir / "flag").string()});
  run({"--seed", "98", "simulate", "--n", "2000", "--out-prefix", (dir / "other").string()});
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(slurp(dir / "env_1.csv"), slurp(dir / "flag_1.csv"));
  EXPECT_NE(slurp(dir / "env_1.csv"), slurp(dir / "other_1.csv"));
  fs::remove_all(dir);
}

TEST(Cli, MonteCarloJsonAndTable) {
  const auto r = run({"--format", "json", "mc", "--reps", "2", "--n", "4000", "--levels", "3",
                      "--pi2", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(schema_errors(r.out, "montecarlo_report.schema.json"), "");
  const auto t = run({"mc", "--reps", "1", "--n", "4000", "--levels", "2", "--no-wccf"});
  ASSERT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("theta_j"), std::string::npos);
  EXPECT_EQ(t.out.find("WCCF"), std::string::npos);
  EXPECT_EQ(run({"mc", "--levels", "0"}).code, 2);
}

TEST(Cli, EmpiricalOutputs) {
  const auto dir = scratch();
  const auto day = fixture::venue_day(3, "2024-01-02", 400, 1L << 18);
  auto dump = [&](const TickSeries& x, const fs::path& p) {
    std::ofstream os(p);
    os << "date,time,price\n";
    char buf[96];
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "2024-01-02,%.6f,%.10f\n", x.times()[i], std::exp(x.prices()[i]));
      os << buf;
    }
  };
  dump(day.x1, dir / "v1.csv");
  dump(day.x2, dir / "v2.csv");
  const auto r = run({"--format", "json", "empirical", "--venue1", (dir / "v1.csv").string(),
                      "--venue2", (dir / "v2.csv").string(), "--date-col", "date", "--session",
                      "10:00-10:00:00.262144", "--levels", "1..3", "--daily-out",
                      (dir / "daily.csv").string(), "--summary-out", (dir / "summary.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(schema_errors(r.out, "empirical_report.schema.json"), "");
  const auto j = json::parse(r.out);
  for (const auto& s : j["summary"]) EXPECT_NEAR(s["median_ms"].get<double>(), 0.4, 1e-9);
  EXPECT_TRUE(fs::exists(dir / "daily.csv"));
  std::ifstream sum(dir / "summary.csv");
  std::string header;
  std::getline(sum, header);
  EXPECT_EQ(header, "estimator,level,median_ms,mad_ms");
  fs::remove_all(dir);
}

TEST(Cli, DataErrorExitCode) {
  const auto dir = scratch();
  {
    std::ofstream os(dir / "bad.csv");
    os << "time,price\n1,10\nx,11\n";
  }
  const auto r = run({"estimate", "--pair", (dir / "bad.csv").string(), (dir / "bad.csv").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("line(s) 3"), std::string::npos);
  EXPECT_EQ(run({"estimate", "--pair", (dir / "missing.csv").string(), (dir / "bad.csv").string()}).code, 3);
  fs::remove_all(dir);
}

TEST(Cli, ConfigFileRejectsUnknownKeys) {
  const auto dir = scratch();
  {
    std::ofstream os(dir / "good.ini");
    os << "[filters]\nlength=2\nlevels=1\n";
    std::ofstream bad(dir / "bad.ini");
    bad << "[filters]\nlength=2\ncolour=blue\n";
  }
  const auto g = run({"--config", (dir / "good.ini").string(), "filters"});
  EXPECT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(g.out, "level,lag,value\n1,-1,-0.5\n1,0,1\n1,1,-0.5\n");
  EXPECT_EQ(run({"--config", (dir / "bad.ini").string(), "filters"}).code, 2);
  fs::remove_all(dir);
}

TEST(Cli, LevelAndEstimatorLists) {
  EXPECT_EQ(cli::parse_levels("3"), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(cli::parse_levels("2..4"), (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(cli::parse_levels("1,5,9"), (std::vector<int>{1, 5, 9}));
  EXPECT_THROW(cli::parse_levels("4..2"), usage_error);
  EXPECT_THROW(cli::parse_levels("21"), usage_error);
  EXPECT_THROW(cli::parse_levels("x"), usage_error);
  EXPECT_EQ(cli::parse_estimators("ds,hry").size(), 2u);
  EXPECT_THROW(cli::parse_estimators(""), usage_error);
}
