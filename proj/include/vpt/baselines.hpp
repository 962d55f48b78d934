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

#ifndef VPT_BASELINES_HPP_
#define VPT_BASELINES_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vpt/array.hpp"
#include "vpt/autodiff.hpp"
#include "vpt/distributions.hpp"
#include "vpt/errors.hpp"
#include "vpt/special.hpp"

namespace vpt {

enum class FixedKind { kGaussian, kLogistic };

// Parameter-free factorized base: standard Gaussian or standard logistic in
// every coordinate.
class FixedPrior {
 public:
  FixedPrior() = default;
  FixedPrior(FixedKind kind, std::size_t dims) : kind_(kind), dims_(dims) {}

  FixedKind kind() const { return kind_; }
  std::size_t dims() const { return dims_; }

  double log_density(std::span<const double> z) const {
    if (z.size() != dims_) throw ContractViolation("FixedPrior: dimension mismatch");
    double acc = 0.0;
    for (double v : z) {
      acc += kind_ == FixedKind::kGaussian ? gaussian_log_pdf(v) : logistic_log_pdf(LogisticDist(), v);
    }
    return acc;
  }

  ad::Var log_density(ad::Tape& tape, const ad::Var& z) const {
    if (z.value().rank() != 2 || z.value().cols() != dims_) {
      throw ContractViolation("FixedPrior: dimension mismatch");
    }
    if (kind_ == FixedKind::kGaussian) {
      const double c = -0.5 * std::log(2.0 * std::numbers::pi) * static_cast<double>(dims_);
      return ad::sum_rows(z * z) * -0.5 + c;
    }
    (void)tape;
    return ad::sum_rows(-z - 2.0 * ad::softplus(-z));
  }

  Array sample(Rng& rng, std::size_t n) const {
    Array out = Array::matrix(n, dims_);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out.data()) {
      v = kind_ == FixedKind::kGaussian ? normal(rng) : logistic_sample(LogisticDist(), rng);
    }
    return out;
  }

 private:
  FixedKind kind_ = FixedKind::kGaussian;
  std::size_t dims_ = 1;
};

// Piecewise-constant density with K learnable bins per dimension. Bin
// boundaries start at b_0 = 0 and grow by softplus(raw width); bin
// probabilities are a softmax over raw logits.
class LearnableHistogram {
 public:
  LearnableHistogram() : LearnableHistogram(2, 1) {}

  // Equal widths summing to 1 and equal probabilities: the uniform density.
  LearnableHistogram(std::size_t bins, std::size_t dims)
      : raw_widths_(Array::matrix(dims, bins, inverse_softplus(1.0 / static_cast<double>(bins)))),
        raw_logits_(Array::matrix(dims, bins, 0.0)) {
    if (bins < 1 || dims < 1) throw ContractViolation("LearnableHistogram: bins and dims must be >= 1");
  }

  static LearnableHistogram with_levels(int levels, std::size_t dims) {
    return LearnableHistogram(std::size_t{1} << levels, dims);
  }

  std::size_t bins() const { return raw_widths_.cols(); }
  std::size_t dims() const { return raw_widths_.rows(); }

  Array& raw_widths() { return raw_widths_; }
  const Array& raw_widths() const { return raw_widths_; }
  Array& raw_logits() { return raw_logits_; }
  const Array& raw_logits() const { return raw_logits_; }

  std::size_t parameter_count() const { return raw_widths_.size() + raw_logits_.size(); }
  // Softmax and the rescaling onto the unit interval each leave one
  // redundant degree of freedom per dimension.
  std::size_t free_parameter_count() const { return 2 * (bins() - 1) * dims(); }

  std::vector<double> boundaries(std::size_t dim) const {
    std::vector<double> b(bins() + 1, 0.0);
    for (std::size_t k = 0; k < bins(); ++k) b[k + 1] = b[k] + softplus(raw_widths_.at(dim, k));
    return b;
  }

  std::vector<double> probabilities(std::size_t dim) const {
    const auto row = raw_logits_.row(dim);
    const double m = *std::max_element(row.begin(), row.end());
    std::vector<double> p(bins());
    double s = 0.0;
    for (std::size_t k = 0; k < bins(); ++k) s += (p[k] = std::exp(row[k] - m));
    for (double& v : p) v /= s;
    return p;
  }

  void set_bins(std::size_t dim, std::span<const double> widths, std::span<const double> probs) {
    if (widths.size() != bins() || probs.size() != bins()) {
      throw ContractViolation("LearnableHistogram::set_bins: expected one value per bin");
    }
    for (std::size_t k = 0; k < bins(); ++k) {
      raw_widths_.at(dim, k) = inverse_softplus(widths[k]);
      raw_logits_.at(dim, k) = std::log(probs[k]);
    }
  }

  // Unique k with b_k < x <= b_{k+1}; x == b_0 maps to bin 0.
  std::size_t active_bin(std::size_t dim, double x) const {
    return active_bin_in(boundaries(dim), x);
  }

  static std::size_t active_bin_in(const std::vector<double>& b, double x) {
    if (!(x >= b.front() && x <= b.back())) {
      throw DomainError("LearnableHistogram: x = " + std::to_string(x) + " outside support (" +
                        std::to_string(b.front()) + ", " + std::to_string(b.back()) + "]");
    }
    auto it = std::lower_bound(b.begin() + 1, b.end(), x);
    return static_cast<std::size_t>(it - (b.begin() + 1));
  }

  // Log density in the histogram's own coordinates, support (0, b_K].
  double log_density(std::span<const double> x) const {
    check_dims(x.size());
    double acc = 0.0;
    for (std::size_t d = 0; d < dims(); ++d) {
      const std::vector<double> b = boundaries(d);
      const std::size_t k = active_bin_in(b, x[d]);
      acc += std::log(probabilities(d)[k]) - std::log(b[k + 1] - b[k]);
    }
    return acc;
  }

  // Log density of z in (0,1]^D after the affine map z -> b_0 + z (b_K - b_0).
  double log_density_unit(std::span<const double> z) const {
    check_dims(z.size());
    std::vector<double> x(z.size());
    double log_jac = 0.0;
    for (std::size_t d = 0; d < dims(); ++d) {
      const std::vector<double> b = boundaries(d);
      x[d] = std::min(b.back(), b.front() + z[d] * (b.back() - b.front()));
      log_jac += std::log(b.back() - b.front());
    }
    return log_density(x) + log_jac;
  }

  // Differentiable version of log_density_unit, [N,1].
  ad::Var log_density_unit(ad::Tape& tape, const Array& z_in) const {
    // z_in may live on the tape, whose storage moves as nodes are recorded.
    const Array z = z_in;
    if (z.rank() != 2 || z.cols() != dims()) throw ContractViolation("LearnableHistogram: dimension mismatch");
    const std::size_t n = z.rows(), dims = this->dims(), k = bins();
    ad::Var width = ad::softplus(tape.parameter(raw_widths_));
    ad::Var logits = tape.parameter(raw_logits_);
    Array row_max = Array::matrix(dims, 1);
    for (std::size_t d = 0; d < dims; ++d) {
      const auto row = raw_logits_.row(d);
      row_max[d] = *std::max_element(row.begin(), row.end());
    }
    ad::Var m = tape.constant(std::move(row_max));
    ad::Var log_norm = ad::log(ad::sum_rows(ad::exp(logits - m))) + m;
    ad::Var log_p = logits - log_norm;
    ad::Var log_w = ad::log(width);
    ad::Var log_total = ad::log(ad::sum_rows(width));

    std::vector<std::size_t> cell(n * dims), dim_of(n * dims);
    std::vector<std::vector<double>> b(dims);
    for (std::size_t d = 0; d < dims; ++d) b[d] = boundaries(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double x = std::min(b[d].back(), z.at(i, d) * b[d].back());
        cell[i * dims + d] = d * k + active_bin_in(b[d], x);
        dim_of[i * dims + d] = d;
      }
    }
    ad::Var lp = ad::gather(log_p, cell, Shape{n, dims});
    ad::Var lw = ad::gather(log_w, std::move(cell), Shape{n, dims});
    ad::Var lt = ad::gather(log_total, std::move(dim_of), Shape{n, dims});
    return ad::sum_rows(lp - lw + lt);
  }

  // Points in (0,1]^D on the unit scale.
  Array sample_unit(Rng& rng, std::size_t n) const {
    Array out = Array::matrix(n, dims());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t d = 0; d < dims(); ++d) {
      const std::vector<double> b = boundaries(d);
      const std::vector<double> p = probabilities(d);
      std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = pick(rng);
        double u = unif(rng);
        while (u == 0.0) u = unif(rng);
        out.at(i, d) = std::min(1.0, (b[k] + (b[k + 1] - b[k]) * u) / b.back());
      }
    }
    return out;
  }

  std::vector<Array*> parameter_arrays() { return {&raw_widths_, &raw_logits_}; }

 private:
  void check_dims(std::size_t n) const {
    if (n != dims()) throw ContractViolation("LearnableHistogram: dimension mismatch");
  }

  Array raw_widths_;  // [D, K]
  Array raw_logits_;  // [D, K]
};

}  // namespace vpt

#endif  // VPT_BASELINES_HPP_
