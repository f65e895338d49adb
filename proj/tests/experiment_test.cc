//
// Copyright 2026 The GeoPrivacy Budgeting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "geopriv/experiment.h"

#include <cmath>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

namespace geopriv {
namespace {

std::string TempPath(const std::string& name) {
  return ::testing::TempDir() + "geopriv_" + name;
}

void WriteFile(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const ResultRow* FindRow(const std::vector<ResultRow>& rows, const std::string& mode,
                         const std::string& metric, const std::string& setting = "") {
  for (const ResultRow& r : rows) {
    if (r.mode == mode && r.metric == metric && (setting.empty() || r.setting == setting)) {
      return &r;
    }
  }
  return nullptr;
}

ExperimentConfig SmallRangeConfig() {
  ExperimentConfig cfg;
  cfg.query = QueryKind::kRangeCount;
  cfg.modes = {QueryMode::kBmPoint, QueryMode::kBmDist, QueryMode::kPmPoint,
               QueryMode::kPmDist};
  cfg.n = 200;
  cfg.rho = 0.001;
  cfg.w = 2000;
  cfg.trials = 10;
  cfg.seed = 5;
  cfg.data.lo = 0;
  cfg.data.hi = 10000;
  cfg.settings = {{4, SplitScheme::kEven}, {10, SplitScheme::kDoubling}};
  return cfg;
}

// Data generation.

TEST(GenDataTest, UniformBoxStaysInside) {
  DataSpec spec;
  Rng rng(1);
  const auto pts = GenData(spec, 10, 2, rng);
  ASSERT_EQ(pts.size(), 10u);
  for (const RealVector& x : pts) {
    ASSERT_EQ(x.size(), 2u);
    for (double c : x) {
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
  }
}

TEST(GenDataTest, DeterministicUnderSeed) {
  for (const char* gen : {"uniform_box", "gaussian_mixture", "clustered_ring"}) {
    DataSpec spec;
    spec.generator = gen;
    spec.centers = {{0.0, 0.0}, {5.0, 5.0}};
    spec.stddev = 1.0;
    Rng a(9), b(9);
    EXPECT_EQ(GenData(spec, 50, 2, a), GenData(spec, 50, 2, b)) << gen;
  }
}

TEST(GenDataTest, ZeroVarianceMixtureSitsOnCenters) {
  DataSpec spec;
  spec.generator = "gaussian_mixture";
  spec.centers = {{1.0, 2.0}, {-3.0, 4.5}};
  Rng rng(2);
  for (const RealVector& x : GenData(spec, 100, 2, rng)) {
    EXPECT_TRUE(x == spec.centers[0] || x == spec.centers[1]);
  }
}

TEST(GenDataTest, RejectsUnknownGenerator) {
  DataSpec spec;
  spec.generator = "spiral";
  Rng rng(1);
  EXPECT_THROW(GenData(spec, 5, 2, rng), ConfigError);
}

TEST(ReadPointsCsvTest, ParsesHeaderAndRows) {
  std::istringstream in("x1,x2\r\n1.5,2\r\n-3,4e2\r\n");
  const auto pts = ReadPointsCsv(in);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0], (RealVector{1.5, 2.0}));
  EXPECT_EQ(pts[1], (RealVector{-3.0, 400.0}));
}

TEST(ReadPointsCsvTest, RejectsMalformedInput) {
  for (const char* body : {"", "a,b\n1,2\n", "x1,x3\n1,2\n", "x1,x2\n1\n",
                           "x1,x2\n1,two\n", "id,x1,x2\n0,1,2\n"}) {
    std::istringstream in(body);
    EXPECT_THROW(ReadPointsCsv(in), ConfigError) << body;
  }
  EXPECT_THROW(ReadPointsCsv(std::string("/nonexistent/points.csv")), ConfigError);
}

TEST(ReadPointsCsvTest, ConfigCanLoadCsvData) {
  const std::string path = TempPath("points.csv");
  std::string body = "x1,x2\n";
  for (int i = 0; i < 30; ++i) body += std::to_string(i) + "," + std::to_string(2 * i) + "\n";
  WriteFile(path, body);
  ExperimentConfig cfg;
  cfg.query = QueryKind::kKnn;
  cfg.modes = {QueryMode::kBmPoint};
  cfg.n = 0;
  cfg.rho = 10.0;
  cfg.trials = 3;
  cfg.data.csv_path = path;
  const auto rows = RunExperiment(cfg);
  ASSERT_NE(FindRow(rows, "bm_point", "DistErr"), nullptr);
}

// Metrics.

TEST(MetricsTest, Examples) {
  EXPECT_DOUBLE_EQ(CountErr(100, 110).value, 0.1);
  EXPECT_FALSE(CountErr(0, 3).defined);
  EXPECT_DOUBLE_EQ(L1Err(0.25, 0.5).value, 0.25);
  EXPECT_EQ(DistErr(4.0, 4.0).value, 0.0);
  EXPECT_DOUBLE_EQ(DistErr(4.0, 5.0).value, 0.25);
  const std::map<UserId, double> allot{{0, 2.0}, {1, 2.0}};
  EXPECT_EQ(PrivSav({{0, 0.0}, {1, 0.0}}, allot).value, 1.0);
  EXPECT_EQ(PrivSav({}, allot).value, 1.0);
  EXPECT_EQ(PrivSav({{0, 2.0}, {1, 2.0}}, allot).value, 0.0);
  EXPECT_DOUBLE_EQ(PrivSav({{0, 1.0}, {1, 2.0}}, allot).value, 0.25);
}

TEST(MetricsTest, SummaryPercentiles) {
  const Summary one = Summarize({3.5});
  EXPECT_EQ(one.mean, 3.5);
  EXPECT_EQ(one.p25, 3.5);
  EXPECT_EQ(one.p75, 3.5);
  const Summary s = Summarize({4, 1, 3, 2, 5});
  EXPECT_EQ(s.mean, 3.0);
  EXPECT_EQ(s.p25, 2.0);
  EXPECT_EQ(s.p75, 4.0);
  EXPECT_DOUBLE_EQ(Summarize({0, 1}).p25, 0.25);
  EXPECT_TRUE(std::isnan(Summarize({}).mean));
}

TEST(CsvTest, HeaderQuotingAndSentinel) {
  std::ostringstream out;
  ResultRow row{"kde", "a,b", "c4", "L1\"Err", {0.5, std::nan(""), 1.0, 2}, 9};
  WriteCsv(out, {row});
  EXPECT_EQ(out.str(),
            "query,mode,setting,metric,mean,p25,p75,trials,seed\r\n"
            "kde,\"a,b\",c4,\"L1\"\"Err\",0.5,NA,1,2,9\r\n");
}

// Experiments.

TEST(RunExperimentTest, SingleTrialCollapsesPercentiles) {
  ExperimentConfig cfg = SmallRangeConfig();
  cfg.trials = 1;
  for (const ResultRow& r : RunExperiment(cfg)) {
    if (std::isnan(r.summary.mean)) continue;
    EXPECT_EQ(r.summary.p25, r.summary.mean) << r.mode << " " << r.metric;
    EXPECT_EQ(r.summary.p75, r.summary.mean) << r.mode << " " << r.metric;
  }
}

TEST(RunExperimentTest, RowLayout) {
  const auto rows = RunExperiment(SmallRangeConfig());
  for (const char* bm : {"bm_point", "bm_dist"}) {
    const ResultRow* r = FindRow(rows, bm, "CountErr");
    ASSERT_NE(r, nullptr);
    EXPECT_EQ(r->setting, "baseline");
  }
  for (const char* pm : {"pm_point", "pm_dist"}) {
    for (const char* setting : {"c4", "log-c10"}) {
      EXPECT_NE(FindRow(rows, pm, "CountErr", setting), nullptr);
      EXPECT_NE(FindRow(rows, pm, "PrivSav", setting), nullptr);
    }
  }
  EXPECT_NE(FindRow(rows, "pm_point-vs-bm_point", "CountErrImprovement", "c4"), nullptr);
  EXPECT_NE(FindRow(rows, "pm_dist-vs-bm_dist", "CountErrImprovement", "log-c10"), nullptr);
  for (const ResultRow& r : rows) {
    EXPECT_EQ(r.query, "range_count");
    EXPECT_EQ(r.seed, 5u);
  }
}

TEST(RunExperimentTest, BaselineSavesNothingAndEliminationNeverNegative) {
  for (QueryKind kind : {QueryKind::kRangeCount, QueryKind::kKde, QueryKind::kKnn,
                         QueryKind::kMultiQuery}) {
    ExperimentConfig cfg = SmallRangeConfig();
    cfg.query = kind;
    cfg.m = 3;
    cfg.b = 100;
    cfg.k = 5;
    for (const ResultRow& r : RunExperiment(cfg)) {
      if (r.metric != "PrivSav") continue;
      if (r.setting == "baseline") {
        EXPECT_EQ(r.summary.mean, 0.0) << QueryKindName(kind) << " " << r.mode;
      } else {
        EXPECT_GE(r.summary.p25, 0.0);
        EXPECT_LE(r.summary.p75, 1.0);
      }
    }
  }
}

TEST(RunExperimentTest, SingleQueryMultiRunMatchesRangeCount) {
  ExperimentConfig single = SmallRangeConfig();
  ExperimentConfig multi = single;
  multi.query = QueryKind::kMultiQuery;
  multi.m = 1;
  const auto a = RunExperiment(single);
  const auto b = RunExperiment(multi);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mode, b[i].mode);
    EXPECT_EQ(a[i].metric, b[i].metric);
    EXPECT_EQ(std::isnan(a[i].summary.mean), std::isnan(b[i].summary.mean));
    if (!std::isnan(a[i].summary.mean)) {
      EXPECT_EQ(a[i].summary.mean, b[i].summary.mean);
      EXPECT_EQ(a[i].summary.p25, b[i].summary.p25);
      EXPECT_EQ(a[i].summary.p75, b[i].summary.p75);
    }
  }
}

TEST(RunExperimentTest, CsvIsBitwiseReproducible) {
  for (QueryKind kind : {QueryKind::kRangeCount, QueryKind::kKde, QueryKind::kKnn,
                         QueryKind::kThreshold, QueryKind::kMultiQuery}) {
    ExperimentConfig cfg = SmallRangeConfig();
    cfg.query = kind;
    cfg.m = 2;
    if (kind == QueryKind::kThreshold) {
      cfg.modes = {QueryMode::kBmDist, QueryMode::kPmDist};
      cfg.rho = 0.01;
    }
    std::ostringstream x, y;
    WriteCsv(x, RunExperiment(cfg));
    WriteCsv(y, RunExperiment(cfg));
    EXPECT_EQ(x.str(), y.str()) << QueryKindName(kind);
    ExperimentConfig other = cfg;
    other.seed = 6;
    std::ostringstream z;
    WriteCsv(z, RunExperiment(other));
    EXPECT_NE(x.str(), z.str()) << QueryKindName(kind);
  }
}

TEST(RunExperimentTest, ThresholdReportsCorrectness) {
  ExperimentConfig cfg;
  cfg.query = QueryKind::kThreshold;
  cfg.modes = {QueryMode::kBmDist, QueryMode::kPmDist};
  cfg.n = 1000;
  cfg.rho = 0.5;
  cfg.h_fraction = 0.2;
  cfg.trials = 50;
  const auto rows = RunExperiment(cfg);
  const ResultRow* bm = FindRow(rows, "bm_dist", "Correct");
  const ResultRow* pm = FindRow(rows, "pm_dist", "Correct");
  ASSERT_NE(bm, nullptr);
  ASSERT_NE(pm, nullptr);
  EXPECT_EQ(bm->summary.mean, 1.0);
  EXPECT_EQ(pm->summary.mean, 1.0);
  EXPECT_GT(FindRow(rows, "pm_dist", "PrivSav")->summary.mean, 0.0);
  EXPECT_NE(FindRow(rows, "pm_dist-vs-bm_dist", "CorrectImprovement"), nullptr);
}

// Config parsing.

TEST(ConfigTest, ParsesFullDocument) {
  const auto j = nlohmann::json::parse(R"({
    "query": "multi-query", "modes": ["bm_dist", "pm_dist"], "n": 50, "d": 2,
    "rho": 0.5, "budget": 4, "m": 8,
    "settings": [{"c": 64}, {"c": 10, "split": "doubling"}],
    "w": 3, "center": [1, 2], "shift_threshold": false, "trials": 7, "seed": 99,
    "data": {"generator": "clustered_ring", "radius": 5, "clusters": 3, "stddev": 0.1}
  })");
  const ExperimentConfig cfg = ParseExperimentConfig(j);
  EXPECT_EQ(cfg.query, QueryKind::kMultiQuery);
  EXPECT_EQ(cfg.modes, (std::vector<QueryMode>{QueryMode::kBmDist, QueryMode::kPmDist}));
  EXPECT_EQ(cfg.Budget(), 4.0);
  EXPECT_EQ(cfg.settings.size(), 2u);
  EXPECT_EQ(cfg.settings[0].Name(), "c64");
  EXPECT_EQ(cfg.settings[1].Name(), "log-c10");
  EXPECT_EQ(*cfg.center, (RealVector{1, 2}));
  EXPECT_FALSE(cfg.shift_threshold);
  EXPECT_EQ(cfg.trials, 7u);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.data.generator, "clustered_ring");
  EXPECT_EQ(cfg.data.clusters, 3u);
}

TEST(ConfigTest, RejectsInvalidDocuments) {
  const char* bad[] = {
      R"([1, 2])",
      R"({"query": "histogram"})",
      R"({"modes": ["pm_fancy"]})",
      R"({"modes": []})",
      R"({"rho": 0})",
      R"({"rho": "high"})",
      R"({"beta": 1.5})",
      R"({"trials": 0})",
      R"({"query": "range_count", "d": 3})",
      R"({"query": "range_count", "w": -1})",
      R"({"query": "kde", "b": 0})",
      R"({"query": "knn", "k": 0})",
      R"({"query": "threshold", "q": 1})",
      R"({"query": "threshold", "modes": ["bm_point"]})",
      R"({"query": "threshold", "h_fraction": 2})",
      R"({"settings": [{"c": 0}]})",
      R"({"settings": [{"c": 4, "split": "triangular"}]})",
      R"({"m": 0})",
      R"({"budget": -1})",
  };
  for (const char* doc : bad) {
    EXPECT_THROW(ParseExperimentConfig(nlohmann::json::parse(doc)), ConfigError) << doc;
  }
}

TEST(ConfigTest, SampleConfigsLoad) {
  for (const char* name : {"range_count", "kde", "knn", "threshold", "multi_query"}) {
    EXPECT_NO_THROW(LoadExperimentConfig(std::string(GEOPRIV_SAMPLES_DIR) + "/configs/" +
                                         name + ".json"))
        << name;
  }
}

// Command-line runner.

int RunCli(const std::string& args) {
  const std::string cmd = std::string(GEOPRIV_CLI_PATH) + " " + args + " >" +
                          TempPath("cli_stdout.txt") + " 2>" + TempPath("cli_stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string WriteConfig(const std::string& name, const std::string& body) {
  const std::string path = TempPath(name);
  WriteFile(path, body);
  return path;
}

constexpr const char* kTinyKde =
    R"({"modes": ["bm_dist", "pm_dist"], "n": 40, "rho": 1, "b": 0.1,
        "trials": 3, "seed": 4})";

TEST(CliTest, WritesCsvAndMatchesLibrary) {
  const std::string cfg = WriteConfig("kde.json", kTinyKde);
  const std::string out = TempPath("kde_out.csv");
  ASSERT_EQ(RunCli("kde --config " + cfg + " --out " + out), 0);
  nlohmann::json j = nlohmann::json::parse(kTinyKde);
  j["query"] = "kde";
  std::ostringstream expected;
  WriteCsv(expected, RunExperiment(ParseExperimentConfig(j)));
  EXPECT_EQ(ReadFile(out), expected.str());
}

TEST(CliTest, FlagsOverrideConfig) {
  const std::string cfg = WriteConfig("kde2.json", kTinyKde);
  const std::string out = TempPath("kde_override.csv");
  ASSERT_EQ(RunCli("kde --config " + cfg + " --seed 12 --trials 2 --out " + out), 0);
  const std::string csv = ReadFile(out);
  EXPECT_NE(csv.find(",2,12\r\n"), std::string::npos);
  EXPECT_EQ(csv.find(",3,4\r\n"), std::string::npos);
}

TEST(CliTest, ExitCodes) {
  const std::string good = WriteConfig("good.json", kTinyKde);
  EXPECT_EQ(RunCli("kde --config " + good), 0);
  EXPECT_EQ(RunCli("kde --config /nonexistent/config.json"), 2);
  EXPECT_EQ(RunCli("kde --config " + WriteConfig("bad.json", "{not json")), 2);
  EXPECT_EQ(RunCli("threshold --config " +
                   WriteConfig("mismatch.json", R"({"query": "kde", "b": 1})")),
            2);
  EXPECT_EQ(RunCli("kde --config " + WriteConfig("invalid.json", R"({"b": -1})")), 2);
  EXPECT_EQ(RunCli("kde"), 2);
  EXPECT_EQ(RunCli("histogram --config " + good), 2);
  EXPECT_EQ(RunCli("kde --config " + good + " --out /nonexistent/dir/out.csv"), 1);
}

TEST(CliTest, RunsEverySubcommand) {
  const std::map<std::string, std::string> configs = {
      {"range-count", R"({"n": 50, "rho": 0.01, "w": 0.3, "trials": 2})"},
      {"kde", R"({"n": 50, "rho": 0.01, "b": 0.1, "trials": 2})"},
      {"knn", R"({"n": 50, "rho": 0.01, "k": 3, "trials": 2})"},
      {"threshold", R"({"n": 100, "rho": 0.1, "trials": 2})"},
      {"multi-query", R"({"n": 50, "rho": 0.01, "w": 0.3, "m": 3, "trials": 2})"},
  };
  for (const auto& [cmd, body] : configs) {
    const std::string out = TempPath(cmd + ".csv");
    EXPECT_EQ(RunCli(cmd + " --config " + WriteConfig(cmd + ".json", body) +
                     " --out " + out),
              0)
        << cmd;
    EXPECT_EQ(ReadFile(out).rfind(kCsvHeader, 0), 0u) << cmd;
  }
}

}  // namespace
}  // namespace geopriv
