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

// Iterative elimination templates. Both spend a user's per-query budget in
// c installments and stop charging a user as soon as its confidence interval
// for phi(x_i) settles the question being asked.

#ifndef GEOPRIV_ELIMINATION_H_
#define GEOPRIV_ELIMINATION_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "geopriv/exact_sum.h"
#include "geopriv/mechanisms.h"
#include "geopriv/protocol.h"

namespace geopriv {

// r_{i,[c]} for every participating user.
using RoundParams = std::map<UserId, std::vector<double>>;

struct EliminationOptions {
  ComponentId component = 1;
  std::size_t rounds = 4;  // c
  double beta0 = 0.1;
  // Couple the rounds' noise to a single release at the total parameter. The
  // stream defaults to a fresh one from the session.
  bool couple_noise = true;
  std::optional<std::uint64_t> noise_stream;
};

struct EliminationResultNI {
  std::vector<UserId> s0;         // phi > nu_high
  std::vector<UserId> s1;         // phi < nu_low
  std::vector<UserId> undecided;  // G: survivors plus users whose filter halted
  std::vector<UserId> halted;
  std::map<UserId, NoisyEstimateSeries> transcripts;
  std::map<UserId, double> spent;
  std::size_t rounds_run = 0;  // j-hat
};

struct EliminationResultK {
  std::vector<UserId> survivors;  // G_{j-hat}
  std::vector<UserId> halted;
  std::vector<std::vector<UserId>> history;  // G_0, G_1, ..., G_{j-hat}
  std::map<UserId, NoisyEstimateSeries> transcripts;
  std::map<UserId, double> spent;
  std::size_t rounds_run = 0;
};

namespace internal {

inline std::vector<UserId> SortedUnique(std::span<const UserId> ids) {
  std::vector<UserId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument("duplicate user in initial set");
  }
  return out;
}

struct SplitTable {
  std::map<UserId, std::shared_ptr<const std::vector<double>>> splits;
};

inline SplitTable CheckParams(const std::vector<UserId>& users,
                              const RoundParams& params, std::size_t c) {
  SplitTable table;
  for (UserId i : users) {
    auto it = params.find(i);
    if (it == params.end()) {
      throw std::invalid_argument("no round params for user " + std::to_string(i));
    }
    if (it->second.size() != c) {
      throw std::invalid_argument("user " + std::to_string(i) + " has " +
                                  std::to_string(it->second.size()) +
                                  " round params, expected " + std::to_string(c));
    }
    for (double r : it->second) {
      if (!(r > 0.0)) throw std::invalid_argument("round params must be > 0");
    }
    table.splits[i] = std::make_shared<const std::vector<double>>(it->second);
  }
  return table;
}

// Per-user state after a privatization round.
struct RoundEstimate {
  bool halted = false;
  double estimate = 0.0;
  double width = 0.0;
};

// Sends round j (1-based) to `active` and folds the responses into the
// transcripts.
inline std::vector<RoundEstimate> RunRound(
    AnalystSession& session, const std::vector<UserId>& active,
    const SplitTable& table, const ValidTriple& triple,
    const EliminationOptions& opts, std::uint64_t stream, std::size_t j,
    std::map<UserId, NoisyEstimateSeries>& transcripts,
    std::map<UserId, ExactSum>& spent) {
  QueryDirective directive{opts.component, {}};
  directive.assignments.reserve(active.size());
  for (UserId i : active) {
    const auto& split = table.splits.at(i);
    Mechanism mech = triple.MechanismFor((*split)[j - 1]);
    if (opts.couple_noise) mech.coupling = NoiseCoupling{stream, split, j - 1};
    directive.assignments.push_back({i, std::move(mech)});
  }
  const std::vector<Response>& responses = session.Round(directive);
  const double beta =
      opts.beta0 / (static_cast<double>(opts.rounds) * active.size());
  std::vector<RoundEstimate> out(active.size());
  for (std::size_t a = 0; a < active.size(); ++a) {
    const UserId i = active[a];
    const Response& r = responses[i];
    if (r.flag == Flag::kHalt || !r.output) {
      out[a].halted = true;
      continue;
    }
    const auto& split = *table.splits.at(i);
    NoisyEstimateSeries& series = transcripts[i];
    series.Append(*r.output, split[j - 1]);
    spent[i].Add(r.cost);
    out[a].estimate = triple.estimate(series);
    out[a].width = triple.width(std::span<const double>(split.data(), j), beta);
  }
  return out;
}

// Reported spend: the largest double not above the exact sum of charges.
inline std::map<UserId, double> RoundSpend(const std::map<UserId, ExactSum>& exact) {
  std::map<UserId, double> out;
  for (const auto& [i, sum] : exact) out[i] = sum.RoundDown();
  return out;
}

inline void ReleaseStreams(AnalystSession& session,
                           const std::vector<UserId>& users,
                           std::uint64_t stream) {
  for (UserId i : users) session.user(i).ReleaseStream(stream);
}

}  // namespace internal

// Non-interactive elimination. A user leaves for S1 once its estimate is
// confidently below nu_low, for S0 once confidently above nu_high, and
// otherwise stays for the next installment. Runs at most c rounds and stops
// early when nobody is left.
inline EliminationResultNI PieNi(AnalystSession& session,
                                 std::span<const UserId> initial,
                                 const RoundParams& params,
                                 const ValidTriple& triple, double nu_low,
                                 double nu_high, const EliminationOptions& opts) {
  if (opts.rounds < 1) throw std::invalid_argument("c must be >= 1");
  if (!(nu_low <= nu_high)) throw std::invalid_argument("need nu_low <= nu_high");
  if (!(opts.beta0 > 0.0 && opts.beta0 < 1.0)) {
    throw std::invalid_argument("beta0 must lie in (0, 1)");
  }
  EliminationResultNI result;
  std::vector<UserId> active = internal::SortedUnique(initial);
  if (active.empty()) return result;
  const std::vector<UserId> everyone = active;
  const internal::SplitTable table =
      internal::CheckParams(active, params, opts.rounds);
  const std::uint64_t stream =
      opts.noise_stream ? *opts.noise_stream : session.NewNoiseStream();
  std::map<UserId, ExactSum> charged;
  for (UserId i : active) charged[i];

  for (std::size_t j = 1; j <= opts.rounds && !active.empty(); ++j) {
    const std::vector<internal::RoundEstimate> est = internal::RunRound(
        session, active, table, triple, opts, stream, j, result.transcripts,
        charged);
    std::vector<UserId> next;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const UserId i = active[a];
      if (est[a].halted) {
        result.halted.push_back(i);
      } else if (est[a].estimate < -est[a].width + nu_low) {
        result.s1.push_back(i);
      } else if (est[a].estimate > est[a].width + nu_high) {
        result.s0.push_back(i);
      } else {
        next.push_back(i);
      }
    }
    active = std::move(next);
    result.rounds_run = j;
  }
  result.undecided = active;
  result.undecided.insert(result.undecided.end(), result.halted.begin(),
                          result.halted.end());
  std::sort(result.undecided.begin(), result.undecided.end());
  result.spent = internal::RoundSpend(charged);
  internal::ReleaseStreams(session, everyone, stream);
  return result;
}

// Interactive elimination for the k smallest phi values. Each round keeps the
// k users with the smallest right endpoints phi_bar + h_bar (ties to the lower
// id) plus every user whose interval meets the k-th of them.
inline EliminationResultK PieK(AnalystSession& session,
                               std::span<const UserId> initial, std::size_t k,
                               const RoundParams& params,
                               const ValidTriple& triple,
                               const EliminationOptions& opts) {
  if (opts.rounds < 1) throw std::invalid_argument("c must be >= 1");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(opts.beta0 > 0.0 && opts.beta0 < 1.0)) {
    throw std::invalid_argument("beta0 must lie in (0, 1)");
  }
  EliminationResultK result;
  std::vector<UserId> active = internal::SortedUnique(initial);
  result.history.push_back(active);
  for (UserId i : active) result.spent[i] = 0.0;
  if (active.size() <= k) {
    result.survivors = active;
    return result;
  }
  const std::vector<UserId> everyone = active;
  const internal::SplitTable table =
      internal::CheckParams(active, params, opts.rounds);
  const std::uint64_t stream =
      opts.noise_stream ? *opts.noise_stream : session.NewNoiseStream();

  std::map<UserId, ExactSum> charged;
  for (UserId i : active) charged[i];

  for (std::size_t j = 1; j <= opts.rounds && active.size() > k; ++j) {
    const std::vector<internal::RoundEstimate> est = internal::RunRound(
        session, active, table, triple, opts, stream, j, result.transcripts,
        charged);
    std::vector<std::size_t> order;
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (est[a].halted) {
        result.halted.push_back(active[a]);
      } else {
        order.push_back(a);
      }
    }
    if (order.size() > k) {
      auto right = [&](std::size_t a) { return est[a].estimate + est[a].width; };
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) {
                         return right(x) < right(y);
                       });
      const std::size_t tk = order[k - 1];
      std::vector<UserId> next;
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t a = order[pos];
        const bool selected = pos < k;
        const bool overlaps = std::fabs(est[a].estimate - est[tk].estimate) <=
                              est[a].width + est[tk].width;
        if (selected || overlaps) next.push_back(active[a]);
      }
      std::sort(next.begin(), next.end());
      active = std::move(next);
    } else {
      std::vector<UserId> next;
      for (std::size_t a : order) next.push_back(active[a]);
      active = std::move(next);
    }
    result.rounds_run = j;
    result.history.push_back(active);
  }
  result.survivors = active;
  result.survivors.insert(result.survivors.end(), result.halted.begin(),
                          result.halted.end());
  std::sort(result.survivors.begin(), result.survivors.end());
  result.spent = internal::RoundSpend(charged);
  internal::ReleaseStreams(session, everyone, stream);
  return result;
}

}  // namespace geopriv

#endif  // GEOPRIV_ELIMINATION_H_
