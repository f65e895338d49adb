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

// Central-model threshold query: a single curator holding N records answers
// whether fewer than qN of them qualify.

#ifndef GEOPRIV_THRESHOLD_H_
#define GEOPRIV_THRESHOLD_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "geopriv/elimination.h"
#include "geopriv/mechanisms.h"
#include "geopriv/metric.h"
#include "geopriv/query_common.h"

namespace geopriv {

using RecordPredicate = std::function<bool(std::uint64_t)>;

struct ThresholdResult {
  bool answer = false;  // true means |H| < qN
  double spent = 0.0;
  QueryPath path = QueryPath::kBaseline;
  std::size_t rounds_run = 0;
};

inline std::size_t QualifyingCount(const RecordSeq& records,
                                   const RecordPredicate& qualifies) {
  std::size_t count = 0;
  for (std::uint64_t r : records) count += qualifies(r);
  return count;
}

inline ValidTriple ThresholdTriple(RecordPredicate qualifies) {
  return MakeTripleScalar(
      [qualifies = std::move(qualifies)](const Point& u) {
        return static_cast<double>(QualifyingCount(AsRecords(u), qualifies));
      },
      MetricDescriptor::Hamming());
}

// Runs against an existing session in which `curator` holds a Hamming record
// component. Only kBmDist and kPmDist apply.
inline ThresholdResult ThresholdQuery(AnalystSession& session, UserId curator,
                                      std::size_t n_records,
                                      const RecordPredicate& qualifies, double q,
                                      double rho, const QueryParams& params) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in (0, 1)");
  if (n_records == 0) throw std::invalid_argument("dataset must be nonempty");
  if (IsPointMode(params.mode)) {
    throw std::invalid_argument("threshold query privatizes the count only");
  }
  const double cut = q * static_cast<double>(n_records);
  const ValidTriple triple = ThresholdTriple(qualifies);
  const std::vector<UserId> users{curator};
  const Allocation alloc{{curator, rho}};
  ThresholdResult result;

  if (!IsElimination(params.mode)) {
    std::map<UserId, double> spent;
    const auto outputs = BaselineRelease(session, users, alloc, triple, params, spent);
    result.spent = spent[curator];
    auto it = outputs.find(curator);
    result.answer = it != outputs.end() && it->second[0] < cut;
    return result;
  }

  const EliminationResultNI elim =
      PieNi(session, users, SplitAllocation(users, alloc, params), triple, cut,
            cut, ToEliminationOptions(session, params));
  result.spent = elim.spent.at(curator);
  result.rounds_run = elim.rounds_run;
  if (elim.undecided.empty()) {
    result.path = QueryPath::kEarlyExit;
    result.answer = !elim.s1.empty();
    return result;
  }
  result.path = QueryPath::kPostprocess;
  auto it = elim.transcripts.find(curator);
  result.answer = it != elim.transcripts.end() && it->second.size() > 0 &&
                  WeightedMean(it->second)[0] < cut;
  return result;
}

// Standalone form: builds a one-curator session with budget `budget`
// (defaults to rho) and answers a single query.
inline ThresholdResult ThresholdQuery(const RecordSeq& records,
                                      const RecordPredicate& qualifies, double q,
                                      double rho, const QueryParams& params,
                                      std::uint64_t seed,
                                      std::optional<double> budget = {}) {
  if (records.empty()) throw std::invalid_argument("dataset must be nonempty");
  AnalystSession session(seed);
  session.RegisterComponent({params.component, MetricDescriptor::Hamming()});
  const UserId curator = session.AddUser(
      DataTuple(params.component, records), FilterSpec::Cgp(budget.value_or(rho)));
  return ThresholdQuery(session, curator, records.size(), qualifies, q, rho, params);
}

}  // namespace geopriv

#endif  // GEOPRIV_THRESHOLD_H_
