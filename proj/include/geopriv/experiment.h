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

// Seeded experiment runner: synthetic or CSV data, repeated trials of one
// query family (or a budgeted sequence of range queries), and summary rows.

#ifndef GEOPRIV_EXPERIMENT_H_
#define GEOPRIV_EXPERIMENT_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "geopriv/accountant.h"
#include "geopriv/exact_sum.h"
#include "geopriv/geometry.h"
#include "geopriv/kde.h"
#include "geopriv/knn.h"
#include "geopriv/protocol.h"
#include "geopriv/query_common.h"
#include "geopriv/range_count.h"
#include "geopriv/rng.h"
#include "geopriv/threshold.h"

namespace geopriv {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Data sources.

struct DataSpec {
  std::string generator = "uniform_box";  // uniform_box | gaussian_mixture | clustered_ring
  std::optional<std::string> csv_path;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<RealVector> centers;  // gaussian_mixture
  double stddev = 0.0;
  RealVector center;  // clustered_ring
  double radius = 1.0;
  std::size_t clusters = 4;
};

inline std::vector<RealVector> GenData(const DataSpec& spec, std::size_t n,
                                       std::size_t d, Rng& rng) {
  std::vector<RealVector> points;
  points.reserve(n);
  if (spec.generator == "uniform_box") {
    if (!(spec.lo < spec.hi)) throw ConfigError("uniform_box needs lo < hi");
    for (std::size_t i = 0; i < n; ++i) {
      RealVector x(d);
      for (double& c : x) c = rng.Uniform(spec.lo, spec.hi);
      points.push_back(std::move(x));
    }
  } else if (spec.generator == "gaussian_mixture") {
    if (spec.centers.empty()) throw ConfigError("gaussian_mixture needs centers");
    if (spec.stddev < 0.0) throw ConfigError("stddev must be >= 0");
    for (const RealVector& c : spec.centers) {
      if (c.size() != d) throw ConfigError("mixture center has wrong dimension");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const RealVector& c = spec.centers[rng.UniformInt(0, spec.centers.size() - 1)];
      RealVector x(d);
      for (std::size_t k = 0; k < d; ++k) x[k] = c[k] + spec.stddev * rng.Normal();
      points.push_back(std::move(x));
    }
  } else if (spec.generator == "clustered_ring") {
    if (d != 2) throw ConfigError("clustered_ring is two-dimensional");
    if (spec.clusters < 1) throw ConfigError("clustered_ring needs clusters >= 1");
    const RealVector center = spec.center.empty() ? RealVector{0.0, 0.0} : spec.center;
    if (center.size() != 2) throw ConfigError("ring center must be 2-D");
    const double kTwoPi = 2.0 * std::acos(-1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double angle =
          kTwoPi * static_cast<double>(rng.UniformInt(0, spec.clusters - 1)) /
          static_cast<double>(spec.clusters);
      points.push_back({center[0] + spec.radius * std::cos(angle) + spec.stddev * rng.Normal(),
                        center[1] + spec.radius * std::sin(angle) + spec.stddev * rng.Normal()});
    }
  } else {
    throw ConfigError("unknown generator: " + spec.generator);
  }
  return points;
}

// Header row x1,...,xd, then one point per line.
inline std::vector<RealVector> ReadPointsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty CSV");
  std::size_t d = 0;
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      if (cell != "x" + std::to_string(d + 1)) {
        throw ConfigError("CSV header must be x1,...,xd");
      }
      ++d;
    }
  }
  if (d == 0) throw ConfigError("CSV header must be x1,...,xd");
  std::vector<RealVector> points;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::stringstream cells(line);
    std::string cell;
    RealVector x;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        x.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ConfigError("bad number on CSV row " + std::to_string(row));
      }
    }
    if (x.size() != d) {
      throw ConfigError("CSV row " + std::to_string(row) + " has " +
                        std::to_string(x.size()) + " fields, expected " +
                        std::to_string(d));
    }
    points.push_back(std::move(x));
  }
  return points;
}

inline std::vector<RealVector> ReadPointsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return ReadPointsCsv(in);
}

// ---------------------------------------------------------------------------
// Configuration.

enum class QueryKind { kRangeCount, kKde, kKnn, kThreshold, kMultiQuery };

inline const char* QueryKindName(QueryKind q) {
  switch (q) {
    case QueryKind::kRangeCount: return "range_count";
    case QueryKind::kKde: return "kde";
    case QueryKind::kKnn: return "knn";
    case QueryKind::kThreshold: return "threshold";
    case QueryKind::kMultiQuery: return "multi_query";
  }
  return "?";
}

inline QueryKind ParseQueryKind(const std::string& s) {
  if (s == "range_count" || s == "range-count") return QueryKind::kRangeCount;
  if (s == "kde") return QueryKind::kKde;
  if (s == "knn") return QueryKind::kKnn;
  if (s == "threshold") return QueryKind::kThreshold;
  if (s == "multi_query" || s == "multi-query") return QueryKind::kMultiQuery;
  throw ConfigError("unknown query kind: " + s);
}

// Rounds and split for the elimination modes. Named "c4", "log-c10", ...
struct SplitSetting {
  std::size_t c = 4;
  SplitScheme scheme = SplitScheme::kEven;

  std::string Name() const {
    return (scheme == SplitScheme::kDoubling ? "log-c" : "c") + std::to_string(c);
  }
};

struct ExperimentConfig {
  QueryKind query = QueryKind::kRangeCount;
  std::vector<QueryMode> modes{QueryMode::kBmPoint, QueryMode::kPmPoint};
  std::size_t n = 1000;
  std::size_t d = 2;
  double rho = 1.0;
  std::optional<double> budget;  // B; multi-query defaults to m * rho
  std::size_t m = 1;
  std::vector<SplitSetting> settings{SplitSetting{}};
  double beta = 0.1;
  bool shift_threshold = true;
  bool couple_noise = true;
  // Query geometry.
  double w = 1.0;  // side of the square range
  std::optional<RealVector> center;
  double b = 1.0;   // KDE bandwidth
  std::optional<RealVector> query_point;
  std::size_t k = 3;
  double q = 0.5;
  double h_fraction = 0.25;  // |H| / N for the threshold query
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  DataSpec data;

  double Budget() const {
    return budget ? *budget : rho * static_cast<double>(std::max<std::size_t>(m, 1));
  }
  void Validate() const;
};

inline void ExperimentConfig::Validate() const {
  if (modes.empty()) throw ConfigError("at least one mode is required");
  if (n == 0 && !data.csv_path) throw ConfigError("n must be >= 1");
  if (d == 0) throw ConfigError("d must be >= 1");
  if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
  if (budget && !(*budget > 0.0)) throw ConfigError("budget must be > 0");
  if (m < 1) throw ConfigError("m must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (settings.empty()) throw ConfigError("at least one setting is required");
  for (const SplitSetting& s : settings) {
    if (s.c < 1) throw ConfigError("c must be >= 1");
  }
  switch (query) {
    case QueryKind::kRangeCount:
    case QueryKind::kMultiQuery:
      if (d != 2) throw ConfigError("range queries need d = 2");
      if (!(w > 0.0)) throw ConfigError("w must be > 0");
      break;
    case QueryKind::kKde:
      if (!(b > 0.0)) throw ConfigError("b must be > 0");
      break;
    case QueryKind::kKnn:
      if (k < 1) throw ConfigError("k must be >= 1");
      break;
    case QueryKind::kThreshold:
      if (!(q > 0.0 && q < 1.0)) throw ConfigError("q must lie in (0, 1)");
      if (!(h_fraction >= 0.0 && h_fraction <= 1.0)) {
        throw ConfigError("h_fraction must lie in [0, 1]");
      }
      for (QueryMode mode : modes) {
        if (IsPointMode(mode)) throw ConfigError("threshold supports bm_dist and pm_dist");
      }
      break;
  }
}

namespace internal {

template <typename T>
T Get(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline SplitScheme ParseScheme(const std::string& s) {
  if (s == "even") return SplitScheme::kEven;
  if (s == "doubling" || s == "log") return SplitScheme::kDoubling;
  throw ConfigError("unknown split scheme: " + s);
}

}  // namespace internal

inline ExperimentConfig ParseExperimentConfig(const nlohmann::json& j) {
  using internal::Get;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  if (j.contains("query")) cfg.query = ParseQueryKind(Get<std::string>(j, "query", ""));
  if (j.contains("modes")) {
    cfg.modes.clear();
    for (const std::string& s : Get<std::vector<std::string>>(j, "modes", {})) {
      try {
        cfg.modes.push_back(ParseMode(s));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  } else if (cfg.query == QueryKind::kThreshold) {
    cfg.modes = {QueryMode::kBmDist, QueryMode::kPmDist};
  }
  cfg.n = Get<std::size_t>(j, "n", cfg.n);
  cfg.d = Get<std::size_t>(j, "d", cfg.d);
  cfg.rho = Get<double>(j, "rho", cfg.rho);
  if (j.contains("budget")) cfg.budget = Get<double>(j, "budget", 0.0);
  cfg.m = Get<std::size_t>(j, "m", cfg.m);
  if (j.contains("settings")) {
    cfg.settings.clear();
    for (const auto& s : j.at("settings")) {
      if (!s.is_object()) throw ConfigError("each setting must be an object");
      SplitSetting st;
      st.c = Get<std::size_t>(s, "c", st.c);
      st.scheme = internal::ParseScheme(Get<std::string>(s, "split", "even"));
      cfg.settings.push_back(st);
    }
  }
  cfg.beta = Get<double>(j, "beta", cfg.beta);
  cfg.shift_threshold = Get<bool>(j, "shift_threshold", cfg.shift_threshold);
  cfg.couple_noise = Get<bool>(j, "couple_noise", cfg.couple_noise);
  cfg.w = Get<double>(j, "w", cfg.w);
  if (j.contains("center")) cfg.center = Get<RealVector>(j, "center", {});
  cfg.b = Get<double>(j, "b", cfg.b);
  if (j.contains("query_point")) cfg.query_point = Get<RealVector>(j, "query_point", {});
  cfg.k = Get<std::size_t>(j, "k", cfg.k);
  cfg.q = Get<double>(j, "q", cfg.q);
  cfg.h_fraction = Get<double>(j, "h_fraction", cfg.h_fraction);
  cfg.trials = Get<std::size_t>(j, "trials", cfg.trials);
  cfg.seed = Get<std::uint64_t>(j, "seed", cfg.seed);
  if (j.contains("data")) {
    const nlohmann::json& dj = j.at("data");
    if (!dj.is_object()) throw ConfigError("'data' must be an object");
    DataSpec& ds = cfg.data;
    ds.generator = Get<std::string>(dj, "generator", ds.generator);
    if (dj.contains("csv")) ds.csv_path = Get<std::string>(dj, "csv", "");
    ds.lo = Get<double>(dj, "lo", ds.lo);
    ds.hi = Get<double>(dj, "hi", ds.hi);
    ds.centers = Get<std::vector<RealVector>>(dj, "centers", ds.centers);
    ds.stddev = Get<double>(dj, "stddev", ds.stddev);
    ds.center = Get<RealVector>(dj, "center", ds.center);
    ds.radius = Get<double>(dj, "radius", ds.radius);
    ds.clusters = Get<std::size_t>(dj, "clusters", ds.clusters);
  }
  cfg.Validate();
  return cfg;
}

inline ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return ParseExperimentConfig(j);
}

// ---------------------------------------------------------------------------
// Metrics.

// A per-trial metric; undefined values (e.g. relative error against a zero
// truth) are dropped from the summary.
struct MetricValue {
  std::string name;
  double value = 0.0;
  bool defined = true;
};

inline MetricValue CountErr(double truth, double estimate) {
  if (truth == 0.0) return {"CountErr", std::numeric_limits<double>::quiet_NaN(), false};
  return {"CountErr", std::fabs(estimate - truth) / truth, true};
}

inline MetricValue L1Err(double truth, double estimate) {
  return {"L1Err", std::fabs(estimate - truth), true};
}

inline MetricValue DistErr(double true_dist, double est_dist) {
  if (true_dist == 0.0) return {"DistErr", std::numeric_limits<double>::quiet_NaN(), false};
  return {"DistErr", (est_dist - true_dist) / true_dist, true};
}

// Mean over users of the unspent fraction of the allotted budget.
inline MetricValue PrivSav(const std::map<UserId, double>& spent,
                           const std::map<UserId, double>& allotted) {
  if (allotted.empty()) return {"PrivSav", 0.0, true};
  double sum = 0.0;
  for (const auto& [i, rho] : allotted) {
    auto it = spent.find(i);
    const double used = it == spent.end() ? 0.0 : it->second;
    sum += std::clamp((rho - used) / rho, 0.0, 1.0);
  }
  return {"PrivSav", sum / static_cast<double>(allotted.size()), true};
}

struct Summary {
  double mean = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  std::size_t count = 0;
};

// Linear interpolation between order statistics at position p * (n - 1).
inline double Percentile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

inline Summary Summarize(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = s.p25 = s.p75 = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.p25 = Percentile(values, 0.25);
  s.p75 = Percentile(values, 0.75);
  return s;
}

struct ResultRow {
  std::string query;
  std::string mode;
  std::string setting;
  std::string metric;
  Summary summary;
  std::uint64_t seed = 0;
};

inline std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string FormatNumber(double v) {
  if (std::isnan(v)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline constexpr const char* kCsvHeader = "query,mode,setting,metric,mean,p25,p75,trials,seed";

inline void WriteCsv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << "\r\n";
  for (const ResultRow& r : rows) {
    out << CsvField(r.query) << ',' << CsvField(r.mode) << ','
        << CsvField(r.setting) << ',' << CsvField(r.metric) << ','
        << FormatNumber(r.summary.mean) << ',' << FormatNumber(r.summary.p25)
        << ',' << FormatNumber(r.summary.p75) << ',' << r.summary.count << ','
        << r.seed << "\r\n";
  }
}

// ---------------------------------------------------------------------------
// Trials.

struct TrialOutcome {
  std::vector<MetricValue> metrics;
};

namespace internal {

inline constexpr std::uint64_t kDataStream = 0x100;
inline constexpr std::uint64_t kQueryStream = 0x200;
inline constexpr std::uint64_t kSessionStream = 0x300;

// Checks every user's accepted charges against B from the recorded history.
inline void VerifyLedger(const AnalystSession& session) {
  std::vector<ExactSum> used(session.size());
  for (const auto& round : session.history()) {
    for (UserId i = 0; i < round.size(); ++i) used[i].Add(round[i].cost);
  }
  for (UserId i = 0; i < session.size(); ++i) {
    if (used[i].Compare(session.user(i).filter().budget) > 0) {
      throw std::logic_error("user " + std::to_string(i) + " overspent its budget");
    }
  }
}

inline std::vector<RealVector> LoadData(const ExperimentConfig& cfg, Rng rng) {
  if (cfg.data.csv_path) {
    std::vector<RealVector> pts = ReadPointsCsv(*cfg.data.csv_path);
    if (pts.empty()) throw ConfigError("CSV has no points");
    if (pts.front().size() != cfg.d) throw ConfigError("CSV dimension differs from d");
    if (cfg.n > 0 && cfg.n < pts.size()) pts.resize(cfg.n);
    return pts;
  }
  return GenData(cfg.data, cfg.n, cfg.d, rng);
}

inline RealVector PickPoint(const std::optional<RealVector>& fixed,
                            const std::vector<RealVector>& data, Rng& rng) {
  if (fixed) return *fixed;
  return data[rng.UniformInt(0, data.size() - 1)];
}

inline QueryParams MakeParams(const ExperimentConfig& cfg, QueryMode mode,
                              const SplitSetting& setting) {
  QueryParams p;
  p.mode = mode;
  p.rounds = setting.c;
  p.split = setting.scheme;
  p.beta = cfg.beta;
  p.couple_noise = cfg.couple_noise;
  return p;
}

// A sequence of m range queries under the budget recycling schedule; m = 1
// is a single range counting query with the whole budget.
inline TrialOutcome RangeTrial(const ExperimentConfig& cfg, QueryMode mode,
                               const SplitSetting& setting, std::uint64_t trial_seed) {
  const Rng trial(trial_seed);
  const std::size_t m = cfg.query == QueryKind::kMultiQuery ? cfg.m : 1;
  const double budget = cfg.query == QueryKind::kMultiQuery ? cfg.Budget() : cfg.rho;
  std::vector<std::vector<RealVector>> data(m);
  for (std::size_t l = 0; l < m; ++l) data[l] = LoadData(cfg, trial.Fork(kDataStream + l));
  const std::size_t n = data[0].size();

  AnalystSession session(trial.Fork(kSessionStream).seed());
  for (std::size_t l = 0; l < m; ++l) {
    session.RegisterComponent({static_cast<ComponentId>(l + 1),
                               MetricDescriptor::Euclidean(2)});
  }
  for (std::size_t i = 0; i < n; ++i) {
    DataTuple tuple;
    for (std::size_t l = 0; l < m; ++l) {
      if (data[l].size() != n) throw ConfigError("components have different sizes");
      tuple.Set(static_cast<ComponentId>(l + 1), data[l][i]);
    }
    session.AddUser(std::move(tuple), FilterSpec::Cgp(budget));
  }
  const std::vector<UserId> users = AllUsers(session);

  std::vector<double> errs;
  for (std::size_t l = 1; l <= m; ++l) {
    Rng qrng = trial.Fork(kQueryStream + l);
    const RealVector c = PickPoint(cfg.center, data[l - 1], qrng);
    const Rectangle rect = Rectangle::AxisAligned({c[0], c[1]}, cfg.w, cfg.w);
    Allocation alloc;
    for (UserId i : users) {
      alloc[i] = BudgetScheduleNext(l, m, budget, session.MirrorBudget(i));
    }
    RangeCountOptions opts;
    opts.query = MakeParams(cfg, mode, setting);
    opts.query.component = static_cast<ComponentId>(l);
    opts.shift_threshold = cfg.shift_threshold;
    const RangeCountResult r = RangeCount(session, users, rect, alloc, opts);
    const MetricValue e = CountErr(
        static_cast<double>(TrueRangeCount(data[l - 1], rect)), r.estimate);
    if (e.defined) errs.push_back(e.value);
  }
  VerifyLedger(session);

  TrialOutcome out;
  if (errs.empty()) {
    out.metrics.push_back({"CountErr", std::numeric_limits<double>::quiet_NaN(), false});
  } else {
    double sum = 0.0;
    for (double e : errs) sum += e;
    out.metrics.push_back({"CountErr", sum / static_cast<double>(errs.size()), true});
  }
  std::map<UserId, double> used, allotted;
  for (UserId i : users) {
    allotted[i] = budget;
    used[i] = budget - session.MirrorBudget(i);
  }
  out.metrics.push_back(PrivSav(used, allotted));
  return out;
}

inline TrialOutcome KdeTrial(const ExperimentConfig& cfg, QueryMode mode,
                             const SplitSetting& setting, std::uint64_t trial_seed) {
  const Rng trial(trial_seed);
  const std::vector<RealVector> data = LoadData(cfg, trial.Fork(kDataStream));
  Rng qrng = trial.Fork(kQueryStream + 1);
  const RealVector p = PickPoint(cfg.query_point, data, qrng);
  AnalystSession session = MakePointSession(data, cfg.rho, trial.Fork(kSessionStream).seed());
  const std::vector<UserId> users = AllUsers(session);
  const Allocation alloc = UniformAllocation(users, cfg.rho);
  const KdeResult r = KdeEstimate(session, users, p, cfg.b, alloc,
                                  MakeParams(cfg, mode, setting));
  VerifyLedger(session);
  return {{L1Err(TrueKde(data, p, cfg.b), r.estimate), PrivSav(r.spent, alloc)}};
}

inline TrialOutcome KnnTrial(const ExperimentConfig& cfg, QueryMode mode,
                             const SplitSetting& setting, std::uint64_t trial_seed) {
  const Rng trial(trial_seed);
  const std::vector<RealVector> data = LoadData(cfg, trial.Fork(kDataStream));
  if (cfg.k >= data.size()) throw ConfigError("knn needs k < n");
  Rng qrng = trial.Fork(kQueryStream + 1);
  const RealVector p = PickPoint(cfg.query_point, data, qrng);
  AnalystSession session = MakePointSession(data, cfg.rho, trial.Fork(kSessionStream).seed());
  const std::vector<UserId> users = AllUsers(session);
  const Allocation alloc = UniformAllocation(users, cfg.rho);
  const KnnResult r = KnnQuery(session, users, p, cfg.k, alloc,
                               MakeParams(cfg, mode, setting));
  VerifyLedger(session);
  const double best = KnnDistance(data, TrueKnn(data, p, cfg.k), p);
  return {{DistErr(best, KnnDistance(data, r.neighbors, p)), PrivSav(r.spent, alloc)}};
}

inline TrialOutcome ThresholdTrial(const ExperimentConfig& cfg, QueryMode mode,
                                   const SplitSetting& setting, std::uint64_t trial_seed) {
  const Rng trial(trial_seed);
  const std::size_t h = static_cast<std::size_t>(
      std::llround(cfg.h_fraction * static_cast<double>(cfg.n)));
  // Record value 0 qualifies, 1 does not.
  RecordSeq records(cfg.n, 1);
  std::fill(records.begin(), records.begin() + std::min(h, cfg.n), 0);
  auto qualifies = [](std::uint64_t r) { return r == 0; };
  const ThresholdResult r =
      ThresholdQuery(records, qualifies, cfg.q, cfg.rho, MakeParams(cfg, mode, setting),
                     trial.Fork(kSessionStream).seed());
  const bool truth = static_cast<double>(h) < cfg.q * static_cast<double>(cfg.n);
  return {{{"Correct", r.answer == truth ? 1.0 : 0.0, true},
           PrivSav({{0, r.spent}}, {{0, cfg.rho}})}};
}

}  // namespace internal

inline TrialOutcome RunTrial(const ExperimentConfig& cfg, QueryMode mode,
                             const SplitSetting& setting, std::uint64_t trial_seed) {
  switch (cfg.query) {
    case QueryKind::kRangeCount:
    case QueryKind::kMultiQuery:
      return internal::RangeTrial(cfg, mode, setting, trial_seed);
    case QueryKind::kKde:
      return internal::KdeTrial(cfg, mode, setting, trial_seed);
    case QueryKind::kKnn:
      return internal::KnnTrial(cfg, mode, setting, trial_seed);
    case QueryKind::kThreshold:
      return internal::ThresholdTrial(cfg, mode, setting, trial_seed);
  }
  throw std::logic_error("unreachable");
}

inline std::uint64_t TrialSeed(std::uint64_t seed, std::size_t trial) {
  return DeriveSeed(seed, trial);
}

// One row per (mode, setting, metric). Baseline modes do not depend on the
// split setting and report once under "baseline". Each elimination mode also
// gets improvement rows: baseline error minus its error per trial (for
// "Correct", its accuracy minus the baseline's).
inline std::vector<ResultRow> RunExperiment(const ExperimentConfig& cfg) {
  cfg.Validate();
  using Key = std::pair<std::string, std::string>;  // (mode, setting)
  std::map<Key, std::map<std::string, std::vector<double>>> values;
  std::map<Key, std::map<std::string, std::vector<double>>> per_trial;
  std::vector<Key> order;
  std::vector<std::string> metric_order;
  const std::string kBaseline = "baseline";

  auto keep = [&](const Key& key, const TrialOutcome& t) {
    if (std::find(order.begin(), order.end(), key) == order.end()) order.push_back(key);
    for (const MetricValue& mv : t.metrics) {
      if (std::find(metric_order.begin(), metric_order.end(), mv.name) == metric_order.end()) {
        metric_order.push_back(mv.name);
      }
      per_trial[key][mv.name].push_back(mv.value);
      if (mv.defined) values[key][mv.name].push_back(mv.value);
    }
  };

  for (QueryMode mode : cfg.modes) {
    if (!IsElimination(mode)) {
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        keep({ModeName(mode), kBaseline},
             RunTrial(cfg, mode, cfg.settings.front(), TrialSeed(cfg.seed, t)));
      }
      continue;
    }
    for (const SplitSetting& s : cfg.settings) {
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        keep({ModeName(mode), s.Name()}, RunTrial(cfg, mode, s, TrialSeed(cfg.seed, t)));
      }
    }
  }

  const std::string query = QueryKindName(cfg.query);
  std::vector<ResultRow> rows;
  for (const Key& key : order) {
    for (const std::string& metric : metric_order) {
      auto it = per_trial[key].find(metric);
      if (it == per_trial[key].end()) continue;
      rows.push_back({query, key.first, key.second, metric,
                      Summarize(values[key][metric]), cfg.seed});
    }
  }

  // Improvement of each elimination mode over its baseline counterpart.
  const std::string err_metric = metric_order.empty() ? "" : metric_order.front();
  const bool higher_is_better = err_metric == "Correct";
  for (const Key& key : order) {
    if (key.second == kBaseline) continue;
    const QueryMode pm = ParseMode(key.first);
    const QueryMode bm = IsPointMode(pm) ? QueryMode::kBmPoint : QueryMode::kBmDist;
    const Key base{ModeName(bm), kBaseline};
    if (!per_trial.count(base)) continue;
    const std::vector<double>& a = per_trial[base][err_metric];
    const std::vector<double>& b = per_trial[key][err_metric];
    std::vector<double> delta;
    for (std::size_t t = 0; t < std::min(a.size(), b.size()); ++t) {
      if (std::isnan(a[t]) || std::isnan(b[t])) continue;
      delta.push_back(higher_is_better ? b[t] - a[t] : a[t] - b[t]);
    }
    rows.push_back({query, key.first + "-vs-" + ModeName(bm), key.second,
                    err_metric + "Improvement", Summarize(delta), cfg.seed});
  }
  return rows;
}

}  // namespace geopriv

#endif  // GEOPRIV_EXPERIMENT_H_
