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

#ifndef GEOPRIV_RNG_H_
#define GEOPRIV_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace geopriv {

// SplitMix64 finalizer. Used to derive independent child seeds.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  return MixSeed(MixSeed(seed) ^ MixSeed(stream + 0x632be59bd9b4e019ULL));
}

// Seeded random source with stream splitting. A child stream depends only on
// the parent seed and the stream key, never on how much of the parent has been
// consumed, so per-user streams stay stable when the protocol reorders calls.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(MixSeed(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng Fork(std::uint64_t stream) const {
    return Rng(DeriveSeed(seed_, stream));
  }

  double Uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double Uniform(double low, double high) {
    return std::uniform_real_distribution<double>(low, high)(engine_);
  }

  std::uint64_t UniformInt(std::uint64_t low, std::uint64_t high) {
    return std::uniform_int_distribution<std::uint64_t>(low, high)(engine_);
  }

  bool Bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

  double Normal() { return normal_(engine_); }

  std::vector<double> NormalVector(std::size_t d) {
    std::vector<double> z(d);
    for (double& v : z) v = Normal();
    return z;
  }

  // Gamma with the given shape and rate (not scale).
  double Gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }

  // Uniform point on the unit (d-1)-sphere.
  std::vector<double> UnitDirection(std::size_t d) {
    std::vector<double> z;
    double norm = 0.0;
    do {
      z = NormalVector(d);
      norm = 0.0;
      for (double v : z) norm += v * v;
      norm = std::sqrt(norm);
    } while (norm == 0.0);
    for (double& v : z) v /= norm;
    return z;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace geopriv

#endif  // GEOPRIV_RNG_H_
