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

#ifndef VPT_DISTRIBUTIONS_HPP_
#define VPT_DISTRIBUTIONS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vpt/autodiff.hpp"
#include "vpt/errors.hpp"
#include "vpt/special.hpp"

namespace vpt {

using Rng = std::mt19937_64;

inline constexpr double kBetaSampleFloor = 1e-12;

struct BetaDist {
  double alpha = 1.0;
  double beta = 1.0;

  BetaDist() = default;
  BetaDist(double a, double b) : alpha(a), beta(b) {
    if (!(a > 0.0) || !(b > 0.0)) {
      throw DomainError("BetaDist: parameters must be > 0, got (" + std::to_string(a) +
                        ", " + std::to_string(b) + ")");
    }
  }
};

struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> variance;

  DiagGaussian(std::vector<double> mu, std::vector<double> var)
      : mean(std::move(mu)), variance(std::move(var)) {
    if (mean.size() != variance.size()) {
      throw ContractViolation("DiagGaussian: mean and variance lengths differ");
    }
    for (double v : variance) {
      if (!(v > 0.0)) throw DomainError("DiagGaussian: variances must be > 0");
    }
  }

  static DiagGaussian standard(std::size_t dims) {
    return DiagGaussian(std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0));
  }
  std::size_t dims() const { return mean.size(); }
};

struct LogisticDist {
  double location = 0.0;
  double scale = 1.0;

  LogisticDist() = default;
  LogisticDist(double loc, double s) : location(loc), scale(s) {
    if (!(s > 0.0)) throw DomainError("LogisticDist: scale must be > 0");
  }
};

// ---- Beta ----------------------------------------------------------------

inline double beta_log_pdf(const BetaDist& d, double y) {
  if (!(y > 0.0 && y < 1.0)) {
    throw DomainError("beta_log_pdf: y must lie in (0,1), got " + std::to_string(y));
  }
  return (d.alpha - 1.0) * std::log(y) + (d.beta - 1.0) * std::log1p(-y) -
         log_beta(d.alpha, d.beta);
}

inline double beta_mean(const BetaDist& d) { return d.alpha / (d.alpha + d.beta); }

inline double beta_variance(const BetaDist& d) {
  const double s = d.alpha + d.beta;
  return d.alpha * d.beta / (s * s * (s + 1.0));
}

// Gamma(shape, 1) variate. Marsaglia-Tsang squeeze for shape >= 1; smaller
// shapes draw Gamma(shape + 1) and multiply by U^{1/shape}.
inline double gamma_sample(double shape, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (shape < 1.0) {
    double u = unif(rng);
    while (u == 0.0) u = unif(rng);
    return gamma_sample(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = unif(rng);
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

// Beta draw via two gamma variates, clamped to [1e-12, 1 - 1e-12].
inline double beta_sample(const BetaDist& d, Rng& rng) {
  const double x = gamma_sample(d.alpha, rng);
  const double y = gamma_sample(d.beta, rng);
  double r = x / (x + y);
  if (!std::isfinite(r)) r = 0.5;  // both gammas underflowed to zero
  return std::clamp(r, kBetaSampleFloor, 1.0 - kBetaSampleFloor);
}

// KL(p || q) for p = Beta(a, b), q = Beta(c, d).
inline double beta_kl(const BetaDist& p, const BetaDist& q) {
  const double a = p.alpha, b = p.beta;
  const double psi_ab = digamma(a + b);
  return log_beta(q.alpha, q.beta) - log_beta(a, b) +
         (a - q.alpha) * (digamma(a) - psi_ab) + (b - q.beta) * (digamma(b) - psi_ab);
}

// Elementwise Beta KL on the tape; all four operands share one shape (or
// broadcast per the usual rules).
inline ad::Var beta_kl(const ad::Var& a, const ad::Var& b, const ad::Var& c,
                       const ad::Var& d) {
  using namespace ad;
  Var ab = a + b;
  Var psi_ab = digamma(ab);
  Var log_b_q = lgamma(c) + lgamma(d) - lgamma(c + d);
  Var log_b_p = lgamma(a) + lgamma(b) - lgamma(ab);
  return log_b_q - log_b_p + (a - c) * (digamma(a) - psi_ab) +
         (b - d) * (digamma(b) - psi_ab);
}

// ---- Gaussian --------------------------------------------------------------

inline double gaussian_log_pdf(const DiagGaussian& g, std::span<const double> x) {
  if (x.size() != g.dims()) throw ContractViolation("gaussian_log_pdf: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = x[i] - g.mean[i];
    acc += -0.5 * (std::log(2.0 * std::numbers::pi * g.variance[i]) + r * r / g.variance[i]);
  }
  return acc;
}

inline double gaussian_log_pdf(double x) {
  return -0.5 * (std::log(2.0 * std::numbers::pi) + x * x);
}

// Diagonal-covariance KL(N(mu1, S1) || N(mu2, S2)).
inline double gaussian_kl(const DiagGaussian& p, const DiagGaussian& q) {
  if (p.dims() != q.dims()) throw ContractViolation("gaussian_kl: dimension mismatch");
  double acc = -static_cast<double>(p.dims());
  for (std::size_t i = 0; i < p.dims(); ++i) {
    const double r = q.mean[i] - p.mean[i];
    acc += std::log(q.variance[i] / p.variance[i]) + p.variance[i] / q.variance[i] +
           r * r / q.variance[i];
  }
  return 0.5 * acc;
}

// ---- Logistic --------------------------------------------------------------

inline double logistic_log_pdf(const LogisticDist& d, double x) {
  const double u = (x - d.location) / d.scale;
  return -u - 2.0 * softplus(-u) - std::log(d.scale);
}

inline double logistic_sample(const LogisticDist& d, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  while (u == 0.0) u = unif(rng);
  return d.location + d.scale * (std::log(u) - std::log1p(-u));
}

}  // namespace vpt

#endif  // VPT_DISTRIBUTIONS_HPP_
