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

// Worst-case privacy accounting for declared mechanisms, GP/CGP conversions,
// and the stopping rules of the three privacy filters.

#ifndef GEOPRIV_ACCOUNTANT_H_
#define GEOPRIV_ACCOUNTANT_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "geopriv/exact_sum.h"
#include "geopriv/mechanisms.h"

namespace geopriv {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// E_Lambda for laplace_gp, R_Lambda for gaussian_cgp, 0 for the null
// mechanism. Both suprema are attained uniformly over dist <= Lambda, so the
// result does not depend on Lambda.
inline double WorstCaseCost(const MechanismSpec& spec, double /*lambda*/ = kInfinity) {
  spec.Validate();
  switch (spec.noise) {
    case NoiseFamily::kGaussianCgp:
    case NoiseFamily::kLaplaceGp:
      return spec.privacy_param;
    case NoiseFamily::kNull:
      return 0.0;
  }
  return 0.0;
}

// eps^2 / 2, rounded up so that the charged cost never undercuts the exact one.
inline double GpToCgp(double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
  double r = eps * eps / 2.0;
  if (std::isfinite(r) && std::fma(eps, eps, -2.0 * r) > 0.0) {
    r = std::nextafter(r, kInfinity);
  }
  return r;
}

// g_delta(s) = (s / (s - 1)) * 2 * sqrt(log(2 / ((s + 1) * delta))).
inline double GDelta(double s, double delta) {
  if (!(s > 1.0)) throw std::invalid_argument("s must be > 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  const double log_arg = std::log(2.0 / ((s + 1.0) * delta));
  if (log_arg < 0.0) {
    throw std::invalid_argument("(s + 1) * delta exceeds 2");
  }
  return (s / (s - 1.0)) * 2.0 * std::sqrt(log_arg);
}

struct ApproxGpMinimum {
  double value = 0.0;      // min over s > 1 of max(g(s) sqrt(T), s Lambda T)
  double s = 1.0;          // minimizer found by bisection
  double grid_value = 0.0; // best value on the coarse certificate grid
  bool certified = true;   // bisection within 0.1% of the grid minimum
};

// Minimizes s -> max(g_delta(s) sqrt(T), s Lambda T) over s > 1. The first
// branch decreases to 0 at s = 2/delta - 1 and the second increases, so the
// minimum sits at their crossing; it is located by bisection and checked
// against a log-spaced grid over s in (1 + 1e-6, 1e6].
inline ApproxGpMinimum MinimizeApproxGp(double total, double delta,
                                        double lambda) {
  if (!(total >= 0.0)) throw std::invalid_argument("total must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  ApproxGpMinimum result;
  if (total == 0.0) return result;
  if (std::isinf(lambda)) {
    result.value = result.grid_value = kInfinity;
    return result;
  }
  const double root_total = std::sqrt(total);
  const double s_max = 2.0 / delta - 1.0;
  auto first = [&](double s) {
    if (s >= s_max) return 0.0;
    return GDelta(s, delta) * root_total;
  };
  auto second = [&](double s) { return s * lambda * total; };
  auto objective = [&](double s) { return std::max(first(s), second(s)); };

  double lo = 1.0 + 1e-12;
  double hi = s_max;
  if (first(lo) <= second(lo)) {
    hi = lo;
  } else {
    while (hi - lo > 1e-9 * lo) {
      const double mid = 0.5 * (lo + hi);
      if (first(mid) > second(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  const double at_lo = objective(lo);
  const double at_hi = objective(hi);
  result.s = at_lo < at_hi ? lo : hi;
  result.value = std::min(at_lo, at_hi);

  constexpr int kGridPoints = 240;
  double grid_best = kInfinity;
  const double log_lo = std::log(1e-6);
  const double log_hi = std::log(1e6 - 1.0);
  for (int i = 0; i < kGridPoints; ++i) {
    const double s =
        1.0 + std::exp(log_lo + (log_hi - log_lo) * i / (kGridPoints - 1));
    grid_best = std::min(grid_best, objective(s));
  }
  result.grid_value = grid_best;
  result.certified = result.value <= grid_best * (1.0 + 1e-3);
  result.value = std::min(result.value, grid_best);
  return result;
}

// epsilon such that (rho, Lambda)-CGP implies (epsilon, delta, Lambda)-GP. For
// finite Lambda this is the closed form at the particular
// s = 1 + 2 sqrt(rho log(1/delta)) / (rho Lambda). For Lambda = infinity the
// bound is minimized numerically over s, which diverges whenever rho > 0.
inline double CgpToApproxGp(double rho, double delta, double lambda) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
  if (rho == 0.0) return 0.0;
  if (std::isinf(lambda)) return MinimizeApproxGp(rho, delta, lambda).value;
  return rho * lambda + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

enum class FilterKind { kPureGp, kCgp, kApproxGp };

struct FilterSpec {
  FilterKind kind = FilterKind::kCgp;
  double budget = 0.0;
  double delta = 0.0;         // approx_gp only
  double lambda = kInfinity;  // approx_gp arithmetic only

  static FilterSpec PureGp(double b) { return {FilterKind::kPureGp, b, 0.0, kInfinity}; }
  static FilterSpec Cgp(double b) { return {FilterKind::kCgp, b, 0.0, kInfinity}; }
  static FilterSpec ApproxGp(double b, double delta, double lambda) {
    return {FilterKind::kApproxGp, b, delta, lambda};
  }

  void Validate() const {
    if (!(budget >= 0.0)) throw std::invalid_argument("budget must be >= 0");
    if (kind == FilterKind::kApproxGp) {
      if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("delta must lie in (0, 1)");
      }
      if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    }
  }
};

// Per-step cost r_j charged by a filter of the given kind: E_Lambda for pure
// GP filters, R_Lambda for the CGP-based ones. A Gaussian has unbounded
// max-divergence, and an eps-GP Laplace release is (eps^2 / 2)-CGP.
inline double AccountingCost(FilterKind kind, const MechanismSpec& spec,
                             double lambda = kInfinity) {
  const double native = WorstCaseCost(spec, lambda);
  if (spec.noise == NoiseFamily::kNull) return 0.0;
  if (kind == FilterKind::kPureGp) {
    return spec.noise == NoiseFamily::kLaplaceGp ? native : kInfinity;
  }
  return spec.noise == NoiseFamily::kGaussianCgp ? native : GpToCgp(native);
}

enum class FilterDecision { kCont, kHalt };

class FilterState {
 public:
  const std::vector<double>& consumed() const { return consumed_; }
  bool halted() const { return halted_; }
  const ExactSum& total() const { return total_; }

  void Record(double r) {
    if (halted_) throw std::logic_error("halted filter cannot record costs");
    if (!(r >= 0.0) || std::isinf(r)) {
      throw std::invalid_argument("recorded cost must be finite and >= 0");
    }
    consumed_.push_back(r);
    total_.Add(r);
  }

  void Halt() { halted_ = true; }

 private:
  std::vector<double> consumed_;
  ExactSum total_;
  bool halted_ = false;
};

// CONT iff charging `candidate` on top of the consumed costs keeps the filter
// within its budget. Sums are compared exactly.
inline FilterDecision FilterCheck(const FilterSpec& spec,
                                  const FilterState& state, double candidate) {
  if (!(candidate >= 0.0)) {
    throw std::invalid_argument("candidate cost must be >= 0");
  }
  if (std::isinf(candidate)) return FilterDecision::kHalt;
  ExactSum total = state.total();
  total.Add(candidate);
  if (spec.kind != FilterKind::kApproxGp) {
    return total.Compare(spec.budget) <= 0 ? FilterDecision::kCont
                                           : FilterDecision::kHalt;
  }
  const double t = total.RoundUp();
  return MinimizeApproxGp(t, spec.delta, spec.lambda).value <= spec.budget
             ? FilterDecision::kCont
             : FilterDecision::kHalt;
}

}  // namespace geopriv

#endif  // GEOPRIV_ACCOUNTANT_H_
