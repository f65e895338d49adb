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

#include "geopriv/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "geopriv/rng.h"

namespace geopriv {
namespace {

double Variance(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Asymptotic Kolmogorov distribution tail P(K > t).
double KolmogorovTail(double t) {
  if (t < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

template <typename Cdf>
double KsPValue(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - i / n, (i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  return KolmogorovTail((sn + 0.12 + 0.11 / sn) * d);
}

TEST(GaussianMechTest, VanishingNoise) {
  Rng rng(1);
  EXPECT_NEAR(SampleGaussianMech({7.0}, 1.0, 1e12, rng)[0], 7.0, 1e-5);
}

TEST(GaussianMechTest, VarianceIsOneOverTwoRho) {
  Rng rng(2);
  std::vector<double> x;
  for (int i = 0; i < 100000; ++i) x.push_back(SampleGaussianMech({0.0}, 1.0, 0.5, rng)[0]);
  EXPECT_NEAR(Variance(x), 1.0, 0.02);
}

TEST(GaussianMechTest, LipschitzScalesStd) {
  Rng a(3), b(4);
  std::vector<double> x1, x2;
  for (int i = 0; i < 100000; ++i) {
    x1.push_back(SampleGaussianMech({0.0}, 1.0, 0.5, a)[0]);
    x2.push_back(SampleGaussianMech({0.0}, 2.0, 0.5, b)[0]);
  }
  EXPECT_NEAR(std::sqrt(Variance(x2) / Variance(x1)), 2.0, 0.04);
}

TEST(GaussianMechTest, RejectsNonPositiveRho) {
  Rng rng(1);
  EXPECT_THROW(SampleGaussianMech({0.0}, 1.0, 0.0, rng), std::invalid_argument);
  EXPECT_THROW(SampleGaussianMech({0.0}, 1.0, -1.0, rng), std::invalid_argument);
}

TEST(GaussianMechTest, DeterministicUnderSeed) {
  Rng a(99), b(99);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(SampleGaussianMech({1.0, 2.0}, 1.0, 0.3, a),
              SampleGaussianMech({1.0, 2.0}, 1.0, 0.3, b));
  }
}

TEST(LaplaceGpTest, OneDimensionalMeanAbs) {
  Rng rng(5);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += std::fabs(SampleLaplaceGp({0.0}, 1.0, 1.0, 1, rng)[0]);
  EXPECT_NEAR(sum / n, 1.0, 0.03);
}

TEST(LaplaceGpTest, TwoDimensionalMeanRadius) {
  Rng rng(6);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const RealVector z = SampleLaplaceGp({0.0, 0.0}, 1.0, 1.0, 2, rng);
    sum += std::hypot(z[0], z[1]);
  }
  EXPECT_NEAR(sum / n, 2.0, 0.06);
}

TEST(LaplaceGpTest, OffsetMatchesLaplaceByKs) {
  Rng rng(7);
  const double k = 1.5, eps = 2.0, value = 3.0;
  std::vector<double> z;
  for (int i = 0; i < 20000; ++i) {
    z.push_back((SampleLaplaceGp({value}, k, eps, 1, rng)[0] - value));
  }
  // K * Z with Z ~ Laplace(scale 1/eps): scale K/eps.
  const double scale = k / eps;
  auto cdf = [scale](double x) {
    return x < 0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
  };
  EXPECT_GT(KsPValue(z, cdf), 0.01);
}

TEST(LaplaceGpTest, RejectsBadArguments) {
  Rng rng(1);
  EXPECT_THROW(SampleLaplaceGp({0.0}, 1.0, 0.0, 1, rng), std::invalid_argument);
  EXPECT_THROW(SampleLaplaceGp({0.0}, 1.0, 1.0, 2, rng), std::invalid_argument);
}

TEST(LambdaBoundTest, ClosedFormValues) {
  EXPECT_NEAR(LambdaBound(1, 0.05), std::sqrt(2.0 * std::log(40.0)), 1e-12);
  EXPECT_NEAR(LambdaBound(1, 0.05), 2.7162, 1e-3);
  EXPECT_NEAR(LambdaBound(2, 0.05), 2.4478, 1e-3);
  EXPECT_NEAR(LambdaBound(3, 0.05), 3.8713, 1e-3);
}

TEST(LambdaBoundTest, RejectsBetaOutsideUnitInterval) {
  EXPECT_THROW(LambdaBound(1, 0.0), std::invalid_argument);
  EXPECT_THROW(LambdaBound(1, 1.0), std::invalid_argument);
  EXPECT_THROW(LambdaBound(2, -0.1), std::invalid_argument);
}

class TailCoverageTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(TailCoverageTest, EmpiricalTailWithinBeta) {
  const std::size_t d = GetParam();
  Rng rng(100 + d);
  const int n = 100000;
  for (double beta : {0.5, 0.1, 0.01}) {
    const double lam = LambdaBound(d, beta);
    int exceed = 0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double z = rng.Normal();
        s += z * z;
      }
      exceed += std::sqrt(s) > lam;
    }
    const double sigma = std::sqrt(beta * (1 - beta) / n);
    EXPECT_LE(static_cast<double>(exceed) / n, beta + 3 * sigma) << "d=" << d << " beta=" << beta;
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, TailCoverageTest, ::testing::Values(1, 2, 3, 10));

TEST(WeightedPrefixMeanTest, Examples) {
  NoisyEstimateSeries s;
  s.Append({1.0}, 0.5);
  s.Append({3.0}, 0.5);
  EXPECT_DOUBLE_EQ(WeightedPrefixMean(s, 2)[0], 2.0);
  EXPECT_DOUBLE_EQ(WeightedPrefixMean(s, 1)[0], 1.0);

  NoisyEstimateSeries t;
  t.Append({0.0}, 1.0);
  t.Append({4.0}, 3.0);
  EXPECT_DOUBLE_EQ(WeightedMean(t)[0], 3.0);
  EXPECT_DOUBLE_EQ(t.Cumulative(2), 4.0);
}

TEST(WeightedPrefixMeanTest, OutOfRangeThrows) {
  NoisyEstimateSeries s;
  EXPECT_THROW(WeightedPrefixMean(s, 1), std::out_of_range);
  s.Append({1.0}, 1.0);
  EXPECT_THROW(WeightedPrefixMean(s, 0), std::out_of_range);
  EXPECT_THROW(WeightedPrefixMean(s, 2), std::out_of_range);
  EXPECT_THROW(s.Append({1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(s.Append({1.0, 2.0}, 1.0), std::invalid_argument);
}

TEST(WeightedPrefixMeanTest, SixtyFourSplitsVariance) {
  Rng rng(11);
  const std::size_t c = 64;
  std::vector<double> finals;
  for (int t = 0; t < 10000; ++t) {
    NoisyEstimateSeries s;
    for (std::size_t j = 0; j < c; ++j) {
      s.Append(SampleGaussianMech({0.0}, 1.0, 1.0 / c, rng), 1.0 / c);
    }
    finals.push_back(WeightedMean(s)[0]);
  }
  EXPECT_NEAR(Variance(finals), 0.5, 0.015);
}

TEST(CoupledNoiseTest, MarginalsAndIndependence) {
  const std::vector<double> split{0.1, 0.2, 0.7};
  std::vector<std::vector<double>> e(3);
  double cross = 0.0;
  const int n = 50000;
  for (int t = 0; t < n; ++t) {
    Rng rng(DeriveSeed(5, t));
    const auto noise = CoupledGaussianNoise(split, 1, rng);
    for (int j = 0; j < 3; ++j) e[j].push_back(noise[j][0]);
    cross += noise[0][0] * noise[2][0];
  }
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(Variance(e[j]) * 2.0 * split[j], 1.0, 0.03) << "round " << j;
  }
  // Correlation between rounds 1 and 3.
  const double corr = (cross / n) / std::sqrt(Variance(e[0]) * Variance(e[2]));
  EXPECT_NEAR(corr, 0.0, 0.03);
}

TEST(CoupledNoiseTest, WeightedMeanEqualsSingleRelease) {
  const std::vector<double> split{0.25, 0.25, 0.5};
  Rng a(77), b(77);
  const auto noise = CoupledGaussianNoise(split, 2, a);
  const auto single = CoupledGaussianNoise(std::vector<double>{1.0}, 2, b);
  for (std::size_t k = 0; k < 2; ++k) {
    double mean = 0.0;
    for (std::size_t j = 0; j < 3; ++j) mean += split[j] * noise[j][k];
    EXPECT_NEAR(mean, single[0][k], 1e-12);
  }
}

TEST(TripleTest, PointTripleZeroNoise) {
  const ValidTriple t = MakeTriplePoint(
      [](const RealVector& x) { return x[0] + x[1]; }, 2);
  Rng rng(1);
  NoisyEstimateSeries s;
  s.Append(t.Privatize(RealVector{1.0, 2.0}, 1e20, rng), 1e20);
  EXPECT_NEAR(t.estimate(s), 3.0, 1e-8);
}

TEST(TripleTest, WidthScaling) {
  const ValidTriple p = MakeTriplePoint([](const RealVector& x) { return x[0]; }, 2);
  const std::vector<double> one{1.0}, four{4.0};
  EXPECT_NEAR(p.width(four, 0.1), p.width(one, 0.1) / 2.0, 1e-12);
  const ValidTriple s =
      MakeTripleScalar([](const Point& u) { return AsReal(u)[0]; },
                       MetricDescriptor::Euclidean(1));
  const std::vector<double> two{1.0, 1.0};
  EXPECT_NEAR(s.width(two, 0.05), 2.7162 / 2.0, 1e-3);
}

TEST(TripleTest, ScalarTripleZeroNoise) {
  const ValidTriple t =
      MakeTripleScalar([](const Point& u) { return AsReal(u)[0] * 0.5; },
                       MetricDescriptor::Euclidean(1));
  Rng rng(2);
  NoisyEstimateSeries s;
  s.Append(t.Privatize(RealVector{4.0}, 1e20, rng), 1e20);
  EXPECT_NEAR(t.estimate(s), 2.0, 1e-8);
}

TEST(TripleTest, CoverageMonteCarlo) {
  const RealVector u{0.3, -1.2};
  auto phi = [](const RealVector& x) { return std::hypot(x[0] - 1.0, x[1]); };
  const ValidTriple point = MakeTriplePoint(phi, 2);
  const ValidTriple scalar = MakeTripleScalar(
      [phi](const Point& p) { return phi(AsReal(p)); }, MetricDescriptor::Euclidean(2));
  const double beta = 0.1;
  const int n = 10000;
  Rng rng(21);
  int miss_point = 0, miss_scalar = 0;
  for (int t = 0; t < n; ++t) {
    NoisyEstimateSeries sp, ss;
    for (double r : {0.25, 0.75}) {
      sp.Append(point.Privatize(u, r, rng), r);
      ss.Append(scalar.Privatize(u, r, rng), r);
    }
    miss_point += std::fabs(point.estimate(sp) - phi(u)) > point.width(sp.params(), beta);
    miss_scalar += std::fabs(scalar.estimate(ss) - phi(u)) > scalar.width(ss.params(), beta);
  }
  const double slack = 3 * std::sqrt(beta * (1 - beta) / n);
  EXPECT_LE(miss_point / static_cast<double>(n), beta + slack);
  EXPECT_LE(miss_scalar / static_cast<double>(n), beta + slack);
}

TEST(ApplyMechanismTest, DimensionAndNullChecks) {
  Rng rng(1);
  Mechanism m{MechanismSpec::Gaussian(1.0, 3), IdentityStatistic(), {}};
  EXPECT_THROW(ApplyMechanism(m, RealVector{1.0, 2.0}, rng), std::invalid_argument);
  EXPECT_THROW(ApplyMechanism(Mechanism::Null(), RealVector{1.0}, rng), std::invalid_argument);
  EXPECT_THROW(MechanismSpec::Gaussian(0.0).Validate(), std::invalid_argument);
  EXPECT_THROW((MechanismSpec{NoiseFamily::kNull, 1.0, 0.5, 1}).Validate(),
               std::invalid_argument);
}

}  // namespace
}  // namespace geopriv
