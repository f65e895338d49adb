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

// Metric spaces over user data and the max-product metric over data tuples.

#ifndef GEOPRIV_METRIC_H_
#define GEOPRIV_METRIC_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace geopriv {

using RealVector = std::vector<double>;
// Opaque record values. Only equality and caller-supplied predicates are used.
using RecordSeq = std::vector<std::uint64_t>;
using Point = std::variant<RealVector, RecordSeq>;
using ComponentId = int;

enum class MetricKind { kEuclidean, kHamming, kDiscrete01 };

struct MetricDescriptor {
  MetricKind kind = MetricKind::kEuclidean;
  std::size_t dimension = 1;  // euclidean only

  static MetricDescriptor Euclidean(std::size_t d) {
    if (d == 0) throw std::invalid_argument("euclidean dimension must be >= 1");
    return {MetricKind::kEuclidean, d};
  }
  static MetricDescriptor Hamming() { return {MetricKind::kHamming, 0}; }
  static MetricDescriptor Discrete01() { return {MetricKind::kDiscrete01, 0}; }
};

struct ComponentSpec {
  ComponentId index = 1;
  MetricDescriptor metric;
};

inline const RealVector& AsReal(const Point& p) {
  if (const auto* v = std::get_if<RealVector>(&p)) return *v;
  throw std::invalid_argument("expected a real-vector point");
}

inline const RecordSeq& AsRecords(const Point& p) {
  if (const auto* v = std::get_if<RecordSeq>(&p)) return *v;
  throw std::invalid_argument("expected a record-sequence point");
}

// Throws if `p` cannot live in the space described by `metric`.
inline void CheckConforms(const MetricDescriptor& metric, const Point& p) {
  switch (metric.kind) {
    case MetricKind::kEuclidean:
      if (AsReal(p).size() != metric.dimension) {
        throw std::invalid_argument(
            "point dimension " + std::to_string(AsReal(p).size()) +
            " does not match metric dimension " +
            std::to_string(metric.dimension));
      }
      return;
    case MetricKind::kHamming:
      AsRecords(p);
      return;
    case MetricKind::kDiscrete01:
      return;
  }
}

inline double EuclideanDistance(const RealVector& a, const RealVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dimension mismatch in euclidean distance");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

inline double Distance(const MetricDescriptor& metric, const Point& a,
                       const Point& b) {
  CheckConforms(metric, a);
  CheckConforms(metric, b);
  switch (metric.kind) {
    case MetricKind::kEuclidean:
      return EuclideanDistance(AsReal(a), AsReal(b));
    case MetricKind::kHamming: {
      // Position-wise disagreements plus records present in only one side.
      const RecordSeq& x = AsRecords(a);
      const RecordSeq& y = AsRecords(b);
      const std::size_t common = std::min(x.size(), y.size());
      std::size_t differing = std::max(x.size(), y.size()) - common;
      for (std::size_t i = 0; i < common; ++i) differing += (x[i] != y[i]);
      return static_cast<double>(differing);
    }
    case MetricKind::kDiscrete01:
      return a == b ? 0.0 : 1.0;
  }
  return 0.0;
}

// Registered component metrics for one session.
class ComponentRegistry {
 public:
  void Register(const ComponentSpec& spec) {
    if (spec.index < 1) {
      throw std::invalid_argument("component index must be positive");
    }
    if (!specs_.emplace(spec.index, spec.metric).second) {
      throw std::invalid_argument("component " + std::to_string(spec.index) +
                                  " registered twice");
    }
  }

  bool Contains(ComponentId l) const { return specs_.count(l) > 0; }

  const MetricDescriptor& Metric(ComponentId l) const {
    auto it = specs_.find(l);
    if (it == specs_.end()) {
      throw std::out_of_range("component " + std::to_string(l) +
                              " is not registered");
    }
    return it->second;
  }

  std::size_t size() const { return specs_.size(); }

 private:
  std::map<ComponentId, MetricDescriptor> specs_;
};

// A user's tuple x_i: one point per component.
class DataTuple {
 public:
  DataTuple() = default;
  DataTuple(ComponentId l, Point p) { Set(l, std::move(p)); }

  void Set(ComponentId l, Point p) { components_[l] = std::move(p); }

  bool Has(ComponentId l) const { return components_.count(l) > 0; }

  const Point& At(ComponentId l) const {
    auto it = components_.find(l);
    if (it == components_.end()) {
      throw std::out_of_range("tuple has no component " + std::to_string(l));
    }
    return it->second;
  }

  const std::map<ComponentId, Point>& components() const {
    return components_;
  }

  void Validate(const ComponentRegistry& registry) const {
    for (const auto& [l, p] : components_) CheckConforms(registry.Metric(l), p);
  }

 private:
  std::map<ComponentId, Point> components_;
};

// dist_inf(x, y) = max over components of the per-component distance.
inline double ProductDistance(const std::vector<ComponentSpec>& specs,
                              const DataTuple& x, const DataTuple& y) {
  if (x.components().size() != y.components().size()) {
    throw std::invalid_argument("tuples define different component sets");
  }
  double result = 0.0;
  for (const auto& [l, px] : x.components()) {
    if (!y.Has(l)) {
      throw std::invalid_argument("tuples define different component sets");
    }
    auto spec = std::find_if(specs.begin(), specs.end(),
                             [l = l](const ComponentSpec& s) {
                               return s.index == l;
                             });
    if (spec == specs.end()) {
      throw std::invalid_argument("no metric for component " +
                                  std::to_string(l));
    }
    result = std::max(result, Distance(spec->metric, px, y.At(l)));
  }
  return result;
}

}  // namespace geopriv

#endif  // GEOPRIV_METRIC_H_
