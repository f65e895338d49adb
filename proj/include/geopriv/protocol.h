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

// The local view of a user running a privacy filter, the analyst's global
// view of the interaction, and multi-query budget scheduling.

#ifndef GEOPRIV_PROTOCOL_H_
#define GEOPRIV_PROTOCOL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "geopriv/accountant.h"
#include "geopriv/exact_sum.h"
#include "geopriv/mechanisms.h"
#include "geopriv/metric.h"
#include "geopriv/rng.h"

namespace geopriv {

using UserId = std::size_t;

enum class Flag { kCont, kHalt };

inline const char* FlagName(Flag f) { return f == Flag::kCont ? "CONT" : "HALT"; }

// (b, y) returned by a user for one received mechanism, plus the cost r it
// recorded in its own filter.
struct Response {
  Flag flag = Flag::kCont;
  std::optional<RealVector> output;
  double cost = 0.0;
};

// Local view of user i: holds x_i and a privacy filter.
class UserAgent {
 public:
  UserAgent(UserId id, DataTuple data, FilterSpec filter, std::uint64_t seed)
      : id_(id), data_(std::move(data)), filter_(filter), rng_(seed) {
    filter_.Validate();
  }

  UserId id() const { return id_; }
  const DataTuple& data() const { return data_; }
  const FilterSpec& filter() const { return filter_; }
  const FilterState& state() const { return state_; }
  bool halted() const { return state_.halted(); }
  double budget() const { return filter_.budget; }

  // B - sum of consumed costs, rounded down.
  double Remaining() const {
    ExactSum rest;
    rest.Add(filter_.budget);
    for (double r : state_.consumed()) rest.Add(-r);
    return rest.RoundDown();
  }

  // Handles one mechanism sent at the current time.
  Response Receive(const Mechanism& mech, ComponentId component) {
    if (!data_.Has(component)) {
      throw std::out_of_range("user " + std::to_string(id_) +
                              " has no component " + std::to_string(component));
    }
    if (state_.halted()) return {Flag::kHalt, std::nullopt, 0.0};
    const double cost = AccountingCost(filter_.kind, mech.spec, filter_.lambda);
    if (cost == 0.0) return {Flag::kCont, std::nullopt, 0.0};
    if (FilterCheck(filter_, state_, cost) == FilterDecision::kHalt) {
      state_.Halt();
      return {Flag::kHalt, std::nullopt, 0.0};
    }
    state_.Record(cost);
    return {Flag::kCont, Run(mech, data_.At(component)), cost};
  }

  // Drops cached noise for a finished coupled release.
  void ReleaseStream(std::uint64_t stream) { coupled_.erase(stream); }

 private:
  RealVector Run(const Mechanism& mech, const Point& point) {
    if (!mech.coupling) return ApplyMechanism(mech, point, rng_);
    const NoiseCoupling& link = *mech.coupling;
    if (mech.spec.noise != NoiseFamily::kGaussianCgp) {
      throw std::invalid_argument("noise coupling requires a gaussian mechanism");
    }
    if (!link.split || link.round >= link.split->size() ||
        (*link.split)[link.round] != mech.spec.privacy_param) {
      throw std::invalid_argument("coupled round does not match its split");
    }
    auto it = coupled_.find(link.stream);
    if (it == coupled_.end()) {
      Rng stream_rng = Rng(rng_.seed()).Fork(link.stream);
      it = coupled_
               .emplace(link.stream,
                        CoupledGaussianNoise(*link.split, mech.spec.out_dim,
                                             stream_rng))
               .first;
    }
    RealVector value = mech.statistic ? mech.statistic(point) : AsReal(point);
    if (value.size() != mech.spec.out_dim) {
      throw std::invalid_argument("statistic dimension does not match out_dim");
    }
    const RealVector& noise = it->second[link.round];
    for (std::size_t i = 0; i < value.size(); ++i) {
      value[i] += mech.spec.lipschitz * noise[i];
    }
    if (link.round + 1 == link.split->size()) coupled_.erase(it);
    return value;
  }

  UserId id_;
  DataTuple data_;
  FilterSpec filter_;
  FilterState state_;
  Rng rng_;
  std::unordered_map<std::uint64_t, std::vector<RealVector>> coupled_;
};

struct Assignment {
  UserId user = 0;
  Mechanism mechanism;
};

// M_t for component l, sent to the users in G_t. Each target may receive its
// own mechanism; users outside the target set implicitly receive the null
// mechanism.
struct QueryDirective {
  ComponentId component = 1;
  std::vector<Assignment> assignments;

  static QueryDirective Uniform(ComponentId component, const Mechanism& mech,
                                const std::vector<UserId>& targets) {
    QueryDirective q{component, {}};
    q.assignments.reserve(targets.size());
    for (UserId u : targets) q.assignments.push_back({u, mech});
    return q;
  }
};

// The charge a directive incurs against a user's single dist_inf budget. A
// mechanism that reads only component l costs exactly its component-level
// worst case, however many other components exist.
inline double AccountComponentQuery(const Mechanism& mech, FilterKind kind,
                                    double lambda = kInfinity) {
  return AccountingCost(kind, mech.spec, lambda);
}

// Global view of the interaction (analyst side).
class AnalystSession {
 public:
  explicit AnalystSession(std::uint64_t seed) : seed_(seed), coins_(Rng(seed).Fork(~0ULL)) {}

  void RegisterComponent(const ComponentSpec& spec) { registry_.Register(spec); }
  const ComponentRegistry& registry() const { return registry_; }

  UserId AddUser(DataTuple data, FilterSpec filter) {
    data.Validate(registry_);
    const UserId id = agents_.size();
    agents_.emplace_back(id, std::move(data), filter, DeriveSeed(seed_, id));
    mirror_.emplace_back(filter.budget);
    return id;
  }

  std::size_t size() const { return agents_.size(); }
  std::size_t rounds() const { return history_.size(); }
  bool ended() const { return ended_; }
  const UserAgent& user(UserId i) const { return agents_.at(i); }
  UserAgent& user(UserId i) { return agents_.at(i); }
  const std::vector<std::vector<Response>>& history() const { return history_; }

  // The analyst's own record of B_i, decremented by the worst-case cost of
  // every mechanism the user answered with CONT.
  double MirrorBudget(UserId i) const { return mirror_.at(i).RoundDown(); }

  // Coin tosses W drawn by the analyst.
  Rng& coins() { return coins_; }

  std::uint64_t NewNoiseStream() { return next_stream_++; }

  // One round: sends the directive, collects (b_i, y_i) for every user.
  const std::vector<Response>& Round(const QueryDirective& directive) {
    if (ended_) throw std::logic_error("session has ended");
    if (!registry_.Contains(directive.component)) {
      throw std::out_of_range("component " +
                              std::to_string(directive.component) +
                              " is not registered");
    }
    std::vector<Response> round(agents_.size());
    std::vector<bool> seen(agents_.size(), false);
    for (UserId i = 0; i < agents_.size(); ++i) {
      round[i].flag = agents_[i].halted() ? Flag::kHalt : Flag::kCont;
    }
    for (const Assignment& a : directive.assignments) {
      if (a.user >= agents_.size()) throw std::out_of_range("unknown user");
      if (seen[a.user]) throw std::invalid_argument("user targeted twice");
      seen[a.user] = true;
      UserAgent& agent = agents_[a.user];
      Response r = agent.Receive(a.mechanism, directive.component);
      if (r.flag == Flag::kCont) {
        mirror_[a.user].Add(-AccountComponentQuery(a.mechanism, agent.filter().kind,
                                                   agent.filter().lambda));
      }
      round[a.user] = std::move(r);
    }
    history_.push_back(std::move(round));
    return history_.back();
  }

  // The analyst stops querying; later rounds are rejected.
  void End() { ended_ = true; }

  // One JSON object per (round, user): flag, cost, and a digest of the output
  // (null when no output was released).
  void WriteTranscript(std::ostream& out) const {
    for (std::size_t t = 0; t < history_.size(); ++t) {
      for (UserId i = 0; i < history_[t].size(); ++i) {
        const Response& r = history_[t][i];
        nlohmann::json rec;
        rec["round"] = t + 1;
        rec["user"] = i;
        rec["flag"] = FlagName(r.flag);
        rec["cost"] = r.cost;
        rec["output"] = r.output ? nlohmann::json(OutputDigest(*r.output))
                                 : nlohmann::json(nullptr);
        out << rec.dump() << '\n';
      }
    }
  }

  // FNV-1a over the bit patterns of the released values.
  static std::string OutputDigest(const RealVector& v) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double x : v) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(x));
      std::memcpy(&bits, &x, sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 0x100000001b3ULL;
      }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  struct Mirror {
    explicit Mirror(double b) { sum.Add(b); }
    void Add(double x) { sum.Add(x); }
    double RoundDown() const { return sum.RoundDown(); }
    ExactSum sum;
  };

  std::uint64_t seed_;
  ComponentRegistry registry_;
  std::vector<UserAgent> agents_;
  std::vector<Mirror> mirror_;
  std::vector<std::vector<Response>> history_;
  Rng coins_;
  std::uint64_t next_stream_ = 1;
  bool ended_ = false;
};

enum class SplitScheme { kEven, kDoubling };

// Splits rho into c positive parts whose exact sum is rho up to the last
// part's rounding, and never exceeds rho.
inline std::vector<double> SplitBudget(double rho, std::size_t c,
                                       SplitScheme scheme) {
  if (c < 1) throw std::invalid_argument("split needs at least one part");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");
  std::vector<double> parts(c);
  const double denom = scheme == SplitScheme::kEven
                           ? static_cast<double>(c)
                           : std::ldexp(1.0, static_cast<int>(c)) - 1.0;
  for (std::size_t j = 0; j + 1 < c; ++j) {
    const double weight =
        scheme == SplitScheme::kEven ? 1.0 : std::ldexp(1.0, static_cast<int>(j));
    parts[j] = rho * weight / denom;
  }
  ExactSum residue;
  residue.Add(rho);
  for (std::size_t j = 0; j + 1 < c; ++j) residue.Add(-parts[j]);
  parts[c - 1] = residue.RoundDown();
  return parts;
}

struct ScheduleOptions {
  double start_fraction = 0.75;  // share of savings released at the 1st query
};

// Budget for query l (1-based) of m: gamma_l * (B_i - ((m - (l-1)) / m) B)
// + B / m, with gamma ramping linearly from start_fraction to 1, clamped to
// [0, B_i].
inline double BudgetScheduleNext(std::size_t l, std::size_t m, double budget,
                                 double remaining, ScheduleOptions opts = {}) {
  if (m < 1 || l < 1 || l > m) {
    throw std::invalid_argument("query index must satisfy 1 <= l <= m");
  }
  const double gamma =
      m == 1 ? 1.0
             : static_cast<double>(l - 1) / static_cast<double>(m - 1) *
                       (1.0 - opts.start_fraction) +
                   opts.start_fraction;
  const double planned =
      static_cast<double>(m - (l - 1)) / static_cast<double>(m) * budget;
  const double r = gamma * (remaining - planned) + budget / static_cast<double>(m);
  return std::clamp(r, 0.0, std::max(remaining, 0.0));
}

}  // namespace geopriv

#endif  // GEOPRIV_PROTOCOL_H_
