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

#ifndef VPT_SPECIAL_HPP_
#define VPT_SPECIAL_HPP_

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "vpt/errors.hpp"

namespace vpt {

namespace detail {

inline void require_positive(double x, const char* fn) {
  if (!(x > 0.0)) {
    throw DomainError(std::string(fn) + ": argument must be > 0, got " +
                      std::to_string(x));
  }
}

}  // namespace detail

// ln Gamma(x) for x > 0. Lanczos approximation (g = 7, nine terms) with the
// reflection formula below 1/2.
inline double log_gamma(double x) {
  detail::require_positive(x, "log_gamma");
  static constexpr std::array<double, 9> kLanczos = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kG = 7.0;
  if (x < 0.5) {
    // Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
           log_gamma(1.0 - x);
  }
  const double xm = x - 1.0;
  double series = kLanczos[0];
  for (int i = 1; i < 9; ++i) series += kLanczos[i] / (xm + i);
  const double t = xm + kG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (xm + 0.5) * std::log(t) -
         t + std::log(series);
}

// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).
inline double log_beta(double a, double b) {
  detail::require_positive(a, "log_beta");
  detail::require_positive(b, "log_beta");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

// psi(x) = d/dx ln Gamma(x). Shifts x up to >= 6 with psi(x) = psi(x+1) - 1/x,
// then sums the asymptotic series.
inline double digamma(double x) {
  detail::require_positive(x, "digamma");
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli terms B_{2k} / (2k x^{2k}).
  const double tail =
      inv2 * (1.0 / 12 -
      inv2 * (1.0 / 120 -
      inv2 * (1.0 / 252 -
      inv2 * (1.0 / 240 -
      inv2 * (1.0 / 132 -
      inv2 * (691.0 / 32760 -
      inv2 * (1.0 / 12)))))));
  return acc + std::log(x) - 0.5 * inv - tail;
}

// psi'(x), same shift-then-asymptotic scheme as digamma.
inline double trigamma(double x) {
  detail::require_positive(x, "trigamma");
  double acc = 0.0;
  while (x < 6.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double tail =
      inv * (1.0 +
      inv * (0.5 +
      inv * (1.0 / 6 -
      inv2 * (1.0 / 30 -
      inv2 * (1.0 / 42 -
      inv2 * (1.0 / 30 -
      inv2 * (5.0 / 66 -
      inv2 * (691.0 / 2730 -
      inv2 * (7.0 / 6)))))))));
  return acc + tail;
}

// Numerically stable softplus ln(1 + e^x).
inline double softplus(double x) {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

// Inverse of softplus for y > 0: x = y + ln(1 - e^{-y}).
inline double inverse_softplus(double y) {
  detail::require_positive(y, "inverse_softplus");
  return y + std::log(-std::expm1(-y));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ln sigmoid(x) = x - softplus(x), evaluated without overflow.
inline double log_sigmoid(double x) { return -softplus(-x); }

inline double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("logit: argument must lie in (0,1), got " +
                      std::to_string(p));
  }
  return std::log(p) - std::log1p(-p);
}

}  // namespace vpt

#endif  // VPT_SPECIAL_HPP_
