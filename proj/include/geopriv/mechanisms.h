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

// Noise mechanisms, the Gaussian norm tail bound, variance-weighted averaging
// of repeated noisy releases, and the two valid-triple constructions used by
// the elimination templates.

#ifndef GEOPRIV_MECHANISMS_H_
#define GEOPRIV_MECHANISMS_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geopriv/metric.h"
#include "geopriv/rng.h"

namespace geopriv {

enum class NoiseFamily { kGaussianCgp, kLaplaceGp, kNull };

// Declarative description of one privatization step. For kGaussianCgp the
// privacy parameter is rho, for kLaplaceGp it is epsilon.
struct MechanismSpec {
  NoiseFamily noise = NoiseFamily::kNull;
  double lipschitz = 1.0;
  double privacy_param = 0.0;
  std::size_t out_dim = 1;

  static MechanismSpec Gaussian(double rho, std::size_t d = 1, double k = 1.0) {
    return {NoiseFamily::kGaussianCgp, k, rho, d};
  }
  static MechanismSpec Laplace(double eps, std::size_t d = 1, double k = 1.0) {
    return {NoiseFamily::kLaplaceGp, k, eps, d};
  }
  static MechanismSpec Null() { return {NoiseFamily::kNull, 1.0, 0.0, 1}; }

  void Validate() const {
    if (out_dim == 0) throw std::invalid_argument("out_dim must be >= 1");
    if (noise == NoiseFamily::kNull) {
      if (privacy_param != 0.0) {
        throw std::invalid_argument("null mechanism must have parameter 0");
      }
      return;
    }
    if (!(privacy_param > 0.0) || !std::isfinite(privacy_param)) {
      throw std::invalid_argument("privacy parameter must be finite and > 0");
    }
    if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
      throw std::invalid_argument("lipschitz constant must be finite and > 0");
    }
  }
};

// The K-Lipschitz function a mechanism privatizes.
using Statistic = std::function<RealVector(const Point&)>;

inline Statistic IdentityStatistic() {
  return [](const Point& p) { return AsReal(p); };
}

// Links the rounds of one split release. All rounds with the same stream key
// draw their noise jointly from a dedicated stream: the per-round noises are
// independent N(0, K^2/(2 r_j)) as usual, but they are generated backwards from
// their variance-weighted mean, which uses the same first draws as a single
// release at the total parameter. A split run and an unsplit run on the same
// seed therefore share the final noise realization.
struct NoiseCoupling {
  std::uint64_t stream = 0;
  std::shared_ptr<const std::vector<double>> split;  // r_1..r_c
  std::size_t round = 0;                             // 0-based index
};

struct Mechanism {
  MechanismSpec spec;
  Statistic statistic;
  std::optional<NoiseCoupling> coupling;

  static Mechanism Null() { return {MechanismSpec::Null(), nullptr, {}}; }
};

inline RealVector SampleGaussianMech(const RealVector& value, double k,
                                     double rho, Rng& rng) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");
  const double scale = k / std::sqrt(2.0 * rho);
  RealVector out = value;
  for (double& v : out) v += scale * rng.Normal();
  return out;
}

// Adds K * Z where Z has density proportional to exp(-eps * |z|) in d dims:
// a uniform direction times a Gamma(d, eps) radius.
inline RealVector SampleLaplaceGp(const RealVector& value, double k, double eps,
                                  std::size_t d, Rng& rng) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (value.size() != d) {
    throw std::invalid_argument("value dimension does not match d");
  }
  const double radius = rng.Gamma(static_cast<double>(d), eps);
  RealVector direction;
  if (d == 1) {
    direction = {rng.Bernoulli(0.5) ? 1.0 : -1.0};
  } else {
    direction = rng.UnitDirection(d);
  }
  RealVector out = value;
  for (std::size_t i = 0; i < d; ++i) out[i] += k * radius * direction[i];
  return out;
}

// Unit-scale (K = 1) noise for every round of a split, one vector per round.
// The weighted mean sum_j (r_j / rho) * noise_j equals z0 / sqrt(2 rho), where
// z0 holds the first d standard normals drawn from `rng`.
inline std::vector<RealVector> CoupledGaussianNoise(
    std::span<const double> split, std::size_t d, Rng& rng) {
  const std::size_t c = split.size();
  if (c == 0) throw std::invalid_argument("empty split");
  std::vector<double> cumulative(c);
  double acc = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    if (!(split[j] > 0.0)) throw std::invalid_argument("split parts must be > 0");
    acc += split[j];
    cumulative[j] = acc;
  }
  std::vector<RealVector> noise(c, RealVector(d));
  // Walk S_j = sum_{s<=j} r_s e_s has Var(S_j) = rho_bar_j / 2. Draw the end
  // point first, then bridge backwards.
  std::vector<double> walk(c);
  const RealVector z0 = rng.NormalVector(d);
  for (std::size_t coord = 0; coord < d; ++coord) {
    walk[c - 1] = std::sqrt(cumulative[c - 1] / 2.0) * z0[coord];
    for (std::size_t j = c - 1; j > 0; --j) {
      const double ratio = cumulative[j - 1] / cumulative[j];
      const double mean = walk[j] * ratio;
      const double var = 0.5 * cumulative[j - 1] * (1.0 - ratio);
      walk[j - 1] = mean + std::sqrt(std::max(var, 0.0)) * rng.Normal();
    }
    noise[0][coord] = walk[0] / split[0];
    for (std::size_t j = 1; j < c; ++j) {
      noise[j][coord] = (walk[j] - walk[j - 1]) / split[j];
    }
  }
  return noise;
}

// Runs a non-null mechanism on a point with fresh (uncoupled) noise.
inline RealVector ApplyMechanism(const Mechanism& mech, const Point& point,
                                 Rng& rng) {
  mech.spec.Validate();
  if (mech.spec.noise == NoiseFamily::kNull) {
    throw std::invalid_argument("null mechanism has no output");
  }
  const RealVector value = mech.statistic ? mech.statistic(point) : AsReal(point);
  if (value.size() != mech.spec.out_dim) {
    throw std::invalid_argument("statistic dimension " +
                                std::to_string(value.size()) +
                                " does not match out_dim " +
                                std::to_string(mech.spec.out_dim));
  }
  if (mech.spec.noise == NoiseFamily::kGaussianCgp) {
    return SampleGaussianMech(value, mech.spec.lipschitz,
                              mech.spec.privacy_param, rng);
  }
  return SampleLaplaceGp(value, mech.spec.lipschitz, mech.spec.privacy_param,
                         mech.spec.out_dim, rng);
}

// lambda(d, beta): with probability >= 1 - beta a standard normal vector in d
// dimensions has norm at most this value. Natural log throughout; the d = 2
// case has no factor 2 inside the log, unlike d = 1.
inline double LambdaBound(std::size_t d, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1)");
  }
  if (d == 0) throw std::invalid_argument("d must be >= 1");
  if (d == 1) return std::sqrt(2.0 * std::log(2.0 / beta));
  if (d == 2) return std::sqrt(2.0 * std::log(1.0 / beta));
  const double dd = static_cast<double>(d);
  const double log_inv = std::log(1.0 / beta);
  return std::sqrt(dd + 2.0 * std::sqrt(dd * log_inv) + 2.0 * log_inv);
}

// Per-round outputs of repeated releases of the same quantity together with
// the per-round parameters r_j.
class NoisyEstimateSeries {
 public:
  void Append(RealVector output, double param) {
    if (!(param > 0.0)) throw std::invalid_argument("round param must be > 0");
    if (!outputs_.empty() && output.size() != outputs_.front().size()) {
      throw std::invalid_argument("output dimension changed within a series");
    }
    outputs_.push_back(std::move(output));
    params_.push_back(param);
  }

  std::size_t size() const { return outputs_.size(); }
  bool empty() const { return outputs_.empty(); }
  const std::vector<RealVector>& outputs() const { return outputs_; }
  const std::vector<double>& params() const { return params_; }

  // rho_bar_j for 1-based j.
  double Cumulative(std::size_t j) const {
    CheckRound(j);
    return std::accumulate(params_.begin(), params_.begin() + j, 0.0);
  }

  void CheckRound(std::size_t j) const {
    if (j < 1 || j > size()) {
      throw std::out_of_range("round " + std::to_string(j) +
                              " outside series of length " +
                              std::to_string(size()));
    }
  }

 private:
  std::vector<RealVector> outputs_;
  std::vector<double> params_;
};

// (1 / rho_bar_j) * sum_{s<=j} r_s * v(s), for 1-based j.
inline RealVector WeightedPrefixMean(const NoisyEstimateSeries& series,
                                     std::size_t j) {
  series.CheckRound(j);
  RealVector mean(series.outputs().front().size(), 0.0);
  double total = 0.0;
  for (std::size_t s = 0; s < j; ++s) {
    const double r = series.params()[s];
    total += r;
    const RealVector& v = series.outputs()[s];
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r * v[i];
  }
  for (double& m : mean) m /= total;
  return mean;
}

inline RealVector WeightedMean(const NoisyEstimateSeries& series) {
  return WeightedPrefixMean(series, series.size());
}

// (M, g, h): privatizer, estimator over the full prefix of outputs, and the
// high-probability half-width of the estimator's error.
struct ValidTriple {
  std::size_t out_dim = 1;
  Statistic statistic;
  std::function<double(const NoisyEstimateSeries&)> estimate;
  std::function<double(std::span<const double>, double)> width;

  Mechanism MechanismFor(double r) const {
    return {MechanismSpec::Gaussian(r, out_dim), statistic, {}};
  }

  RealVector Privatize(const Point& u, double r, Rng& rng) const {
    return ApplyMechanism(MechanismFor(r), u, rng);
  }
};

using RealFunction = std::function<double(const RealVector&)>;

// Point privatization: release u + Z / sqrt(2 r) in d dims, estimate phi at the
// weighted prefix mean, width lambda(d, beta) / sqrt(2 rho_bar).
inline ValidTriple MakeTriplePoint(RealFunction phi, std::size_t d) {
  ValidTriple t;
  t.out_dim = d;
  t.statistic = IdentityStatistic();
  t.estimate = [phi = std::move(phi)](const NoisyEstimateSeries& s) {
    return phi(WeightedMean(s));
  };
  t.width = [d](std::span<const double> params, double beta) {
    const double total = std::accumulate(params.begin(), params.end(), 0.0);
    return LambdaBound(d, beta) / std::sqrt(2.0 * total);
  };
  return t;
}

// Scalar privatization: release phi(u) + Z / sqrt(2 r), estimate by the
// weighted prefix mean, width lambda(1, beta) / sqrt(2 rho_bar). The metric
// only needs phi to be 1-Lipschitz; it is not otherwise constrained.
inline ValidTriple MakeTripleScalar(std::function<double(const Point&)> phi,
                                    const MetricDescriptor& /*metric*/) {
  ValidTriple t;
  t.out_dim = 1;
  t.statistic = [phi = std::move(phi)](const Point& p) {
    return RealVector{phi(p)};
  };
  t.estimate = [](const NoisyEstimateSeries& s) { return WeightedMean(s)[0]; };
  t.width = [](std::span<const double> params, double beta) {
    const double total = std::accumulate(params.begin(), params.end(), 0.0);
    return LambdaBound(1, beta) / std::sqrt(2.0 * total);
  };
  return t;
}

}  // namespace geopriv

#endif  // GEOPRIV_MECHANISMS_H_
