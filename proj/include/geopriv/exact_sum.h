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

#ifndef GEOPRIV_EXACT_SUM_H_
#define GEOPRIV_EXACT_SUM_H_

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace geopriv {

// Exact running sum of doubles kept as non-overlapping partials (Shewchuk's
// expansion, the same scheme as Python's math.fsum). Budget comparisons made
// through this class are exact over the reals, so a sequence of costs whose
// real sum is at most B is never rejected by accumulated rounding error.
class ExactSum {
 public:
  ExactSum() = default;

  void Add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  // Sign of (exact sum - b): -1, 0 or +1.
  int Compare(double b) const {
    ExactSum tmp = *this;
    tmp.Add(-b);
    return tmp.Sign();
  }

  int Sign() const {
    for (auto it = partials_.rbegin(); it != partials_.rend(); ++it) {
      if (*it > 0.0) return 1;
      if (*it < 0.0) return -1;
    }
    return 0;
  }

  // Nearest-ish double; within one ulp of the exact value.
  double Value() const {
    double acc = 0.0;
    for (double p : partials_) acc += p;
    return acc;
  }

  // Largest double not exceeding the exact sum.
  double RoundDown() const {
    double v = Value();
    while (Compare(v) < 0) {
      v = std::nextafter(v, -std::numeric_limits<double>::infinity());
    }
    for (;;) {
      const double up =
          std::nextafter(v, std::numeric_limits<double>::infinity());
      if (Compare(up) < 0) break;
      v = up;
    }
    return v;
  }

  // Smallest double not below the exact sum.
  double RoundUp() const {
    const double down = RoundDown();
    if (Compare(down) == 0) return down;
    return std::nextafter(down, std::numeric_limits<double>::infinity());
  }

 private:
  std::vector<double> partials_;
};

}  // namespace geopriv

#endif  // GEOPRIV_EXACT_SUM_H_
