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

// Gaussian kernel density at a query point p with bandwidth b.

#ifndef GEOPRIV_KDE_H_
#define GEOPRIV_KDE_H_

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "geopriv/elimination.h"
#include "geopriv/mechanisms.h"
#include "geopriv/query_common.h"

namespace geopriv {

// Points at least this many bandwidths away are eliminated.
inline constexpr double kKdeFarMultiple = 6.0;

struct KdeResult {
  double estimate = 0.0;
  std::map<UserId, double> spent;
  QueryPath path = QueryPath::kBaseline;
  std::size_t rounds_run = 0;
  std::size_t eliminated = 0;
  bool bias_term_used = false;
  std::vector<UserId> far;  // S0: eliminated as beyond 6b
};

inline double GaussianKernel(double len, double b) {
  return std::exp(-len * len / (2.0 * b * b));
}

// Per-point contribution bound for points beyond the far threshold.
inline double KdeFarMass() {
  return std::exp(-kKdeFarMultiple * kKdeFarMultiple / 2.0);
}

inline double TrueKde(std::span<const RealVector> points, const RealVector& p,
                      double b) {
  if (!(b > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  if (points.empty()) return 0.0;
  double sum = 0.0;
  for (const RealVector& x : points) sum += GaussianKernel(EuclideanDistance(x, p), b);
  return sum / static_cast<double>(points.size());
}

inline ValidTriple KdeTriple(const RealVector& p, bool point_mode) {
  auto len = [p](const RealVector& x) { return EuclideanDistance(x, p); };
  if (point_mode) return MakeTriplePoint(len, p.size());
  return MakeTripleScalar([len](const Point& u) { return len(AsReal(u)); },
                          MetricDescriptor::Euclidean(p.size()));
}

inline KdeResult KdeEstimate(AnalystSession& session,
                             std::span<const UserId> users, const RealVector& p,
                             double b, const Allocation& rho,
                             const QueryParams& params = {}) {
  if (!(b > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  KdeResult result;
  if (users.empty()) return result;
  const double n = static_cast<double>(users.size());
  const bool point_mode = IsPointMode(params.mode);
  const ValidTriple triple = KdeTriple(p, point_mode);
  auto kernel = [&](const RealVector& v) {
    const double len = point_mode ? EuclideanDistance(v, p) : v[0];
    return GaussianKernel(len, b);
  };

  if (!IsElimination(params.mode)) {
    const auto outputs =
        BaselineRelease(session, users, rho, triple, params, result.spent);
    double sum = 0.0;
    for (const auto& [i, v] : outputs) sum += kernel(v);
    result.estimate = sum / n;
    return result;
  }

  const EliminationResultNI elim = PieNi(
      session, users, SplitAllocation(users, rho, params), triple,
      -std::numeric_limits<double>::infinity(), kKdeFarMultiple * b,
      ToEliminationOptions(session, params));
  result.spent = elim.spent;
  result.rounds_run = elim.rounds_run;
  result.eliminated = elim.s0.size() + elim.s1.size();
  result.far = elim.s0;
  if (elim.undecided.empty()) {
    result.path = QueryPath::kEarlyExit;
    return result;
  }
  result.path = QueryPath::kPostprocess;
  double sum = 0.0;
  for (UserId i : elim.undecided) {
    auto it = elim.transcripts.find(i);
    if (it == elim.transcripts.end() || it->second.size() == 0) continue;
    sum += kernel(WeightedMean(it->second));
  }
  const double survivors = sum / n;
  const double bias = static_cast<double>(elim.s0.size()) * KdeFarMass() / n;
  result.bias_term_used = bias <= survivors;
  result.estimate = result.bias_term_used ? survivors + bias : survivors;
  return result;
}

}  // namespace geopriv

#endif  // GEOPRIV_KDE_H_
