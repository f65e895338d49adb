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

// Range counting over a rectangle: count the users whose point lies in it.

#ifndef GEOPRIV_RANGE_COUNT_H_
#define GEOPRIV_RANGE_COUNT_H_

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "geopriv/elimination.h"
#include "geopriv/geometry.h"
#include "geopriv/mechanisms.h"
#include "geopriv/query_common.h"

namespace geopriv {

struct RangeCountOptions {
  QueryParams query;
  // Use eta(1 / sqrt(2 rho_i)) as the distance threshold; 0 otherwise.
  bool shift_threshold = true;
};

struct RangeCountResult {
  double estimate = 0.0;
  std::map<UserId, double> spent;
  QueryPath path = QueryPath::kBaseline;
  std::size_t rounds_run = 0;
  std::size_t eliminated = 0;  // |S0| + |S1|
};

inline std::size_t TrueRangeCount(std::span<const RealVector> points,
                                  const Rectangle& rect) {
  std::size_t count = 0;
  for (const RealVector& x : points) count += ProjGamma(rect, x) <= 0.0;
  return count;
}

inline ValidTriple RangeCountTriple(const Rectangle& rect, bool point_mode) {
  auto proj = [rect](const RealVector& x) { return ProjGamma(rect, x); };
  if (point_mode) return MakeTriplePoint(proj, 2);
  return MakeTripleScalar(
      [proj](const Point& p) { return proj(AsReal(p)); },
      MetricDescriptor::Euclidean(2));
}

inline double RangeThreshold(const Rectangle& rect, double rho, bool shift) {
  if (!shift) return 0.0;
  return EtaThreshold(1.0 / std::sqrt(2.0 * rho), rect.length(), rect.width());
}

inline RangeCountResult RangeCount(AnalystSession& session,
                                   std::span<const UserId> users,
                                   const Rectangle& rect, const Allocation& rho,
                                   const RangeCountOptions& opts = {}) {
  RangeCountResult result;
  if (users.empty()) return result;
  const QueryParams& params = opts.query;
  const bool point_mode = IsPointMode(params.mode);
  const ValidTriple triple = RangeCountTriple(rect, point_mode);
  auto counts = [&](UserId i, const RealVector& v) {
    if (point_mode) return ProjGamma(rect, v) < 0.0;
    return v[0] < RangeThreshold(rect, AllocationFor(rho, i),
                                 opts.shift_threshold);
  };

  if (!IsElimination(params.mode)) {
    const auto outputs =
        BaselineRelease(session, users, rho, triple, params, result.spent);
    for (const auto& [i, v] : outputs) result.estimate += counts(i, v);
    return result;
  }

  const EliminationResultNI elim =
      PieNi(session, users, SplitAllocation(users, rho, params), triple, 0.0,
            0.0, ToEliminationOptions(session, params));
  result.spent = elim.spent;
  result.rounds_run = elim.rounds_run;
  result.eliminated = elim.s0.size() + elim.s1.size();
  result.estimate = static_cast<double>(elim.s1.size());
  if (elim.undecided.empty()) {
    result.path = QueryPath::kEarlyExit;
    return result;
  }
  result.path = QueryPath::kPostprocess;
  for (UserId i : elim.undecided) {
    auto it = elim.transcripts.find(i);
    if (it == elim.transcripts.end() || it->second.size() == 0) continue;
    result.estimate += counts(i, WeightedMean(it->second));
  }
  return result;
}

}  // namespace geopriv

#endif  // GEOPRIV_RANGE_COUNT_H_
