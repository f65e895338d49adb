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

// Signed distance to a rectangle boundary and the shifted decision threshold
// for distance-privatized range counting.

#ifndef GEOPRIV_GEOMETRY_H_
#define GEOPRIV_GEOMETRY_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "geopriv/metric.h"

namespace geopriv {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double Dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double Cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double Norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Rectangle with vertices u, v, w, z where uv is parallel to wz and uw is
// parallel to vz (cyclic order u, v, z, w).
class Rectangle {
 public:
  Rectangle(Vec2 u, Vec2 v, Vec2 w, Vec2 z) : u_(u), v_(v), w_(w), z_(z) {
    const Vec2 uv = v - u, wz = z - w, uw = w - u, vz = z - v;
    const double luv = Norm(uv), luw = Norm(uw);
    if (!(luv > 0.0) || !(luw > 0.0) || !(Norm(wz) > 0.0) || !(Norm(vz) > 0.0)) {
      throw std::invalid_argument("degenerate rectangle: zero-length edge");
    }
    constexpr double kTol = 1e-9;
    if (std::fabs(Cross(uv, wz)) > kTol * luv * Norm(wz) ||
        std::fabs(Cross(uw, vz)) > kTol * luw * Norm(vz)) {
      throw std::invalid_argument("degenerate rectangle: edges not parallel");
    }
    if (std::fabs(Dot(uv, uw)) > kTol * luv * luw) {
      throw std::invalid_argument("degenerate rectangle: corner not square");
    }
    if (!(std::fabs(Cross(uv, uw)) > 0.0)) {
      throw std::invalid_argument("degenerate rectangle: zero area");
    }
  }

  // Axis-aligned rectangle centered at `center` with the given side lengths
  // along x and y.
  static Rectangle AxisAligned(Vec2 center, double length, double width) {
    const double hx = length / 2.0, hy = width / 2.0;
    return Rectangle({center.x - hx, center.y - hy}, {center.x + hx, center.y - hy},
                     {center.x - hx, center.y + hy}, {center.x + hx, center.y + hy});
  }

  Vec2 u() const { return u_; }
  Vec2 v() const { return v_; }
  Vec2 w() const { return w_; }
  Vec2 z() const { return z_; }
  double length() const { return Norm(v_ - u_); }
  double width() const { return Norm(w_ - u_); }

  // The four edges as (p, q) pairs: uv, uw, vz, wz.
  std::array<std::array<Vec2, 2>, 4> edges() const {
    return {{{u_, v_}, {u_, w_}, {v_, z_}, {w_, z_}}};
  }

 private:
  Vec2 u_, v_, w_, z_;
};

// argmin_a |a p + (1 - a) q - x|.
inline double ProjectionCoefficient(Vec2 p, Vec2 q, Vec2 x) {
  const Vec2 pq = p - q;
  return Dot(x - q, pq) / Dot(pq, pq);
}

// Signed distance from x to the boundary: negative inside, positive outside.
// 1-Lipschitz in x.
inline double ProjGamma(const Rectangle& rect, Vec2 x) {
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [p, q] : rect.edges()) {
    const double a = ProjectionCoefficient(p, q, x);
    inside = inside && a >= 0.0 && a <= 1.0;
    const double c = std::clamp(a, 0.0, 1.0);
    const Vec2 nearest{c * p.x + (1.0 - c) * q.x, c * p.y + (1.0 - c) * q.y};
    best = std::min(best, Norm(nearest - x));
  }
  return inside ? -best : best;
}

inline double ProjGamma(const Rectangle& rect, const RealVector& x) {
  if (x.size() != 2) throw std::invalid_argument("range queries need 2-D points");
  return ProjGamma(rect, Vec2{x[0], x[1]});
}

// Shift a in [0, 1] that equalizes the inner and outer misclassification
// bands of a rectangle with sides l and w at noise scale gamma.
inline double BandShift(double gamma, double l, double w) {
  if (!(gamma > 0.0 && l > 0.0 && w > 0.0)) {
    throw std::invalid_argument("gamma, l and w must be > 0");
  }
  const double s = l + w;
  if (l > 2.0 * gamma && w > 2.0 * gamma) {
    return (4.0 * gamma * s - 4.0 * gamma * std::sqrt(s * s - 16.0 * gamma * gamma)) /
           (16.0 * gamma * gamma);
  }
  return (8.0 * gamma * gamma + 2.0 * gamma * s -
          2.0 * gamma * std::sqrt(s * s + 4.0 * l * w)) /
         (8.0 * gamma * gamma);
}

// eta(gamma) = -a * gamma.
inline double EtaThreshold(double gamma, double l, double w) {
  return -BandShift(gamma, l, w) * gamma;
}

}  // namespace geopriv

#endif  // GEOPRIV_GEOMETRY_H_
