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

// k nearest neighbors of a query point p among the users' points.

#ifndef GEOPRIV_KNN_H_
#define GEOPRIV_KNN_H_

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "geopriv/elimination.h"
#include "geopriv/kde.h"
#include "geopriv/mechanisms.h"
#include "geopriv/query_common.h"

namespace geopriv {

struct KnnResult {
  std::vector<UserId> neighbors;  // ascending by estimated distance
  std::map<UserId, double> spent;
  QueryPath path = QueryPath::kBaseline;
  std::size_t rounds_run = 0;
  std::vector<UserId> survivors;  // G_j-hat (elimination modes)
};

namespace internal {

// Stable ranking by (score, id); returns the first k ids.
inline std::vector<UserId> TakeSmallest(std::vector<std::pair<double, UserId>> scored,
                                        std::size_t k) {
  std::sort(scored.begin(), scored.end());
  std::vector<UserId> out;
  for (std::size_t s = 0; s < scored.size() && out.size() < k; ++s) {
    out.push_back(scored[s].second);
  }
  return out;
}

}  // namespace internal

// Ids of the true k nearest points, ties to the lower index.
inline std::vector<UserId> TrueKnn(std::span<const RealVector> points,
                                   const RealVector& p, std::size_t k) {
  std::vector<std::pair<double, UserId>> scored;
  for (UserId i = 0; i < points.size(); ++i) {
    scored.emplace_back(EuclideanDistance(points[i], p), i);
  }
  return internal::TakeSmallest(std::move(scored), k);
}

// Sum of distances from p to the chosen points.
// Sum of distances to p, accumulated in sorted order so that equal sets give
// equal sums regardless of how the ids are ordered.
inline double KnnDistance(std::span<const RealVector> points,
                          std::span<const UserId> ids, const RealVector& p) {
  std::vector<double> dist;
  dist.reserve(ids.size());
  for (UserId i : ids) dist.push_back(EuclideanDistance(points[i], p));
  std::sort(dist.begin(), dist.end());
  double sum = 0.0;
  for (double d : dist) sum += d;
  return sum;
}

inline KnnResult KnnQuery(AnalystSession& session, std::span<const UserId> users,
                          const RealVector& p, std::size_t k,
                          const Allocation& rho, const QueryParams& params = {}) {
  if (k < 1 || k >= users.size()) {
    throw std::invalid_argument("need 1 <= k < n");
  }
  KnnResult result;
  const bool point_mode = IsPointMode(params.mode);
  const ValidTriple triple = KdeTriple(p, point_mode);
  auto score = [&](const RealVector& v) {
    return point_mode ? EuclideanDistance(v, p) : v[0];
  };

  if (!IsElimination(params.mode)) {
    const auto outputs =
        BaselineRelease(session, users, rho, triple, params, result.spent);
    std::vector<std::pair<double, UserId>> scored;
    for (const auto& [i, v] : outputs) scored.emplace_back(score(v), i);
    result.neighbors = internal::TakeSmallest(std::move(scored), k);
    return result;
  }

  const EliminationResultK elim =
      PieK(session, users, k, SplitAllocation(users, rho, params), triple,
           ToEliminationOptions(session, params));
  result.spent = elim.spent;
  result.rounds_run = elim.rounds_run;
  result.survivors = elim.survivors;
  std::vector<std::pair<double, UserId>> scored;
  std::vector<UserId> silent;
  for (UserId i : elim.survivors) {
    auto it = elim.transcripts.find(i);
    if (it == elim.transcripts.end() || it->second.size() == 0) {
      silent.push_back(i);
    } else {
      scored.emplace_back(score(WeightedMean(it->second)), i);
    }
  }
  result.path = elim.survivors.size() == k ? QueryPath::kEarlyExit
                                           : QueryPath::kPostprocess;
  result.neighbors = internal::TakeSmallest(std::move(scored), k);
  for (std::size_t s = 0; s < silent.size() && result.neighbors.size() < k; ++s) {
    result.neighbors.push_back(silent[s]);
  }
  return result;
}

}  // namespace geopriv

#endif  // GEOPRIV_KNN_H_
