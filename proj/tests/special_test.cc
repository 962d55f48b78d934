// Copyright 2026 The VPT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS-IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <gtest/gtest.h>

#include "vpt/special.hpp"

namespace vpt {
namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

TEST(Digamma, KnownValues) {
  EXPECT_NEAR(digamma(1.0), -kEulerGamma, 1e-10);
  EXPECT_NEAR(digamma(0.5), -kEulerGamma - 2.0 * std::numbers::ln2, 1e-10);
  EXPECT_NEAR(digamma(0.5), -1.9635100260214235, 1e-10);
  EXPECT_NEAR(digamma(2.0) - digamma(1.0), 1.0, 1e-12);
}

TEST(Digamma, Recurrence) {
  for (double x : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    EXPECT_NEAR(digamma(x + 1.0), digamma(x) + 1.0 / x, 1e-9) << "x=" << x;
  }
}

TEST(Digamma, MatchesBoostAcrossRange) {
  for (double x = 1e-3; x < 200.0; x *= 1.17) {
    EXPECT_NEAR(digamma(x), boost::math::digamma(x), 1e-10) << "x=" << x;
  }
}

TEST(Trigamma, MatchesBoostAcrossRange) {
  for (double x = 1e-2; x < 200.0; x *= 1.19) {
    const double ref = boost::math::trigamma(x);
    EXPECT_NEAR(trigamma(x), ref, 1e-9 * std::max(1.0, ref)) << "x=" << x;
  }
  EXPECT_NEAR(trigamma(1.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-10);
}

TEST(LogGamma, MatchesBoost) {
  for (double x = 1e-3; x < 500.0; x *= 1.13) {
    EXPECT_NEAR(log_gamma(x), boost::math::lgamma(x), 1e-10 * std::max(1.0, std::abs(x))) << "x=" << x;
  }
  EXPECT_NEAR(log_gamma(1.0), 0.0, 1e-13);
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(std::numbers::pi), 1e-12);
}

TEST(LogBeta, SimpleValues) {
  EXPECT_NEAR(log_beta(1.0, 1.0), 0.0, 1e-12);
  EXPECT_NEAR(log_beta(2.0, 1.0), std::log(0.5), 1e-12);
}

TEST(LogBeta, MatchesQuadrature) {
  // B(3.5, 0.7) = integral of t^2.5 (1-t)^-0.3; the endpoint singularity
  // suits tanh-sinh.
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double b = integrator.integrate(
      [](double t, double tc) { return std::pow(t, 2.5) * std::pow(tc > 0 ? tc : 1.0 - t, -0.3); }, 0.0, 1.0);
  EXPECT_NEAR(log_beta(3.5, 0.7), std::log(b), 1e-10);
}

TEST(SpecialDomain, NonPositiveArgumentsThrow) {
  EXPECT_THROW(digamma(0.0), DomainError);
  EXPECT_THROW(digamma(-1.5), DomainError);
  EXPECT_THROW(trigamma(0.0), DomainError);
  EXPECT_THROW(log_gamma(-2.0), DomainError);
  EXPECT_THROW(log_beta(1.0, 0.0), DomainError);
  EXPECT_THROW(logit(0.0), DomainError);
  EXPECT_THROW(logit(1.0), DomainError);
}

TEST(Softplus, StableBranches) {
  EXPECT_NEAR(softplus(0.0), std::numbers::ln2, 1e-15);
  EXPECT_DOUBLE_EQ(softplus(800.0), 800.0);
  EXPECT_GT(softplus(-800.0), -1.0);
  EXPECT_GE(softplus(-800.0), 0.0);
  for (double x : {-40.0, -31.0, -29.0, -3.0, 0.1, 29.0, 31.0, 40.0}) {
    EXPECT_NEAR(softplus(x), std::log1p(std::exp(x)), 1e-14 * std::max(1.0, x)) << x;
  }
}

TEST(Softplus, InverseRoundTrip) {
  for (double y : {1e-8, 1e-3, 0.5, 1.0, 3.0, 50.0, 1e4}) {
    EXPECT_NEAR(softplus(inverse_softplus(y)), y, 1e-12 * std::max(1.0, y)) << y;
  }
  EXPECT_THROW(inverse_softplus(0.0), DomainError);
}

TEST(Sigmoid, LogSigmoidStable) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(log_sigmoid(-30.0), -30.0 - std::log1p(std::exp(-30.0)), 1e-14);
  EXPECT_TRUE(std::isfinite(log_sigmoid(-1000.0)));
  EXPECT_NEAR(log_sigmoid(-1000.0), -1000.0, 1e-9);
  EXPECT_NEAR(logit(sigmoid(1.7)), 1.7, 1e-12);
}

}  // namespace
}  // namespace vpt
