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

// Pieces shared by the query applications: privatization modes, per-user
// budget allocations, and the one-shot baseline release.

#ifndef GEOPRIV_QUERY_COMMON_H_
#define GEOPRIV_QUERY_COMMON_H_

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geopriv/accountant.h"
#include "geopriv/elimination.h"
#include "geopriv/mechanisms.h"
#include "geopriv/protocol.h"

namespace geopriv {

// BM = baseline, PM = iterative elimination; "point" privatizes the location,
// "dist" privatizes the scalar phi(x).
enum class QueryMode { kBmPoint, kBmDist, kPmPoint, kPmDist };

inline bool IsElimination(QueryMode m) {
  return m == QueryMode::kPmPoint || m == QueryMode::kPmDist;
}
inline bool IsPointMode(QueryMode m) {
  return m == QueryMode::kBmPoint || m == QueryMode::kPmPoint;
}

inline const char* ModeName(QueryMode m) {
  switch (m) {
    case QueryMode::kBmPoint: return "bm_point";
    case QueryMode::kBmDist: return "bm_dist";
    case QueryMode::kPmPoint: return "pm_point";
    case QueryMode::kPmDist: return "pm_dist";
  }
  return "?";
}

inline QueryMode ParseMode(const std::string& s) {
  if (s == "bm_point") return QueryMode::kBmPoint;
  if (s == "bm_dist") return QueryMode::kBmDist;
  if (s == "pm_point") return QueryMode::kPmPoint;
  if (s == "pm_dist") return QueryMode::kPmDist;
  throw std::invalid_argument("unknown mode: " + s);
}

enum class QueryPath { kBaseline, kEarlyExit, kPostprocess };

inline const char* PathName(QueryPath p) {
  switch (p) {
    case QueryPath::kBaseline: return "baseline";
    case QueryPath::kEarlyExit: return "early_exit";
    case QueryPath::kPostprocess: return "postprocess";
  }
  return "?";
}

struct QueryParams {
  QueryMode mode = QueryMode::kBmPoint;
  ComponentId component = 1;
  std::size_t rounds = 4;  // c
  SplitScheme split = SplitScheme::kEven;
  double beta = 0.1;
  double beta0_fraction = 0.25;  // beta_0 = 0.25 beta, beta_1 = 0.75 beta
  bool couple_noise = true;
  std::optional<std::uint64_t> noise_stream;

  double beta0() const { return beta0_fraction * beta; }
};

// rho_i allotted to each participating user for one query.
using Allocation = std::map<UserId, double>;

inline Allocation UniformAllocation(std::span<const UserId> users, double rho) {
  Allocation a;
  for (UserId i : users) a[i] = rho;
  return a;
}

inline std::vector<UserId> AllUsers(const AnalystSession& session) {
  std::vector<UserId> ids(session.size());
  for (UserId i = 0; i < ids.size(); ++i) ids[i] = i;
  return ids;
}

// A session whose users each hold one Euclidean point at `component`, behind
// a CGP filter with budget `budget`.
inline AnalystSession MakePointSession(const std::vector<RealVector>& points,
                                       double budget, std::uint64_t seed,
                                       ComponentId component = 1) {
  AnalystSession session(seed);
  const std::size_t d = points.empty() ? 2 : points.front().size();
  session.RegisterComponent({component, MetricDescriptor::Euclidean(d)});
  for (const RealVector& p : points) {
    session.AddUser(DataTuple(component, p), FilterSpec::Cgp(budget));
  }
  return session;
}

inline double AllocationFor(const Allocation& rho, UserId i) {
  auto it = rho.find(i);
  if (it == rho.end() || !(it->second > 0.0)) {
    throw std::invalid_argument("user " + std::to_string(i) +
                                " needs a positive allocation");
  }
  return it->second;
}

inline std::uint64_t ResolveStream(AnalystSession& session,
                                   const QueryParams& params) {
  return params.noise_stream ? *params.noise_stream : session.NewNoiseStream();
}

// One release per user at its full allocation. With coupling on, the noise
// equals the final weighted-mean noise an elimination run on the same stream
// would produce.
inline std::map<UserId, RealVector> BaselineRelease(
    AnalystSession& session, std::span<const UserId> users,
    const Allocation& rho, const ValidTriple& triple, const QueryParams& params,
    std::map<UserId, double>& spent) {
  const std::uint64_t stream = ResolveStream(session, params);
  QueryDirective directive{params.component, {}};
  for (UserId i : users) {
    const double r = AllocationFor(rho, i);
    Mechanism mech = triple.MechanismFor(r);
    if (params.couple_noise) {
      mech.coupling = NoiseCoupling{
          stream, std::make_shared<const std::vector<double>>(1, r), 0};
    }
    directive.assignments.push_back({i, std::move(mech)});
  }
  const std::vector<Response>& responses = session.Round(directive);
  std::map<UserId, RealVector> outputs;
  for (UserId i : users) {
    spent[i] = responses[i].cost;
    if (responses[i].flag == Flag::kCont && responses[i].output) {
      outputs[i] = *responses[i].output;
    }
  }
  return outputs;
}

inline RoundParams SplitAllocation(std::span<const UserId> users,
                                   const Allocation& rho,
                                   const QueryParams& params) {
  RoundParams out;
  for (UserId i : users) {
    out[i] = SplitBudget(AllocationFor(rho, i), params.rounds, params.split);
  }
  return out;
}

inline EliminationOptions ToEliminationOptions(AnalystSession& session,
                                               const QueryParams& params) {
  EliminationOptions opts;
  opts.component = params.component;
  opts.rounds = params.rounds;
  opts.beta0 = params.beta0();
  opts.couple_noise = params.couple_noise;
  opts.noise_stream = ResolveStream(session, params);
  return opts;
}

}  // namespace geopriv

#endif  // GEOPRIV_QUERY_COMMON_H_
