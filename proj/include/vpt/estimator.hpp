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

#ifndef VPT_ESTIMATOR_HPP_
#define VPT_ESTIMATOR_HPP_

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vpt/array.hpp"
#include "vpt/autodiff.hpp"
#include "vpt/baselines.hpp"
#include "vpt/flow.hpp"
#include "vpt/polya_tree.hpp"

namespace vpt {

enum class PriorKind { kVpt, kGaussian, kLogistic, kHistogram };

inline std::string_view to_string(PriorKind k) {
  switch (k) {
    case PriorKind::kVpt: return "vpt";
    case PriorKind::kGaussian: return "gaussian";
    case PriorKind::kLogistic: return "logistic";
    case PriorKind::kHistogram: return "histogram";
  }
  return "vpt";
}

inline PriorKind parse_prior_kind(std::string_view s) {
  if (s == "vpt") return PriorKind::kVpt;
  if (s == "gaussian") return PriorKind::kGaussian;
  if (s == "logistic") return PriorKind::kLogistic;
  if (s == "histogram") return PriorKind::kHistogram;
  throw UsageError("unknown prior '" + std::string(s) +
                   "' (expected vpt, gaussian, logistic or histogram)");
}

// Bases with bounded support sit behind the flow's sigmoid.
inline bool needs_unit_support(PriorKind k) {
  return k == PriorKind::kVpt || k == PriorKind::kHistogram;
}

using Prior = std::variant<PolyaTree, FixedPrior, LearnableHistogram>;

// A flow paired with a base density on its latent space:
// log p(x) = log p_base(f(x)) + log|det J_f(x)|.
class DensityEstimator {
 public:
  DensityEstimator() = default;
  DensityEstimator(FlowModel flow, Prior prior) : flow_(std::move(flow)), prior_(std::move(prior)) {}

  const FlowModel& flow() const { return flow_; }
  FlowModel& flow() { return flow_; }
  const Prior& prior() const { return prior_; }
  Prior& prior() { return prior_; }
  std::size_t dims() const { return flow_.dims(); }

  PriorKind prior_kind() const {
    if (std::holds_alternative<PolyaTree>(prior_)) return PriorKind::kVpt;
    if (std::holds_alternative<LearnableHistogram>(prior_)) return PriorKind::kHistogram;
    return std::get<FixedPrior>(prior_).kind() == FixedKind::kGaussian ? PriorKind::kGaussian
                                                                       : PriorKind::kLogistic;
  }

  const PolyaTree* tree() const { return std::get_if<PolyaTree>(&prior_); }
  PolyaTree* tree() { return std::get_if<PolyaTree>(&prior_); }

  // Per-point log-likelihood [N,1], differentiable in flow and base parameters.
  ad::Var log_likelihood(ad::Tape& tape, const Array& x, bool smooth = false) const {
    FlowOutput out = flow_.forward(tape, tape.constant(x));
    ad::Var z = flow_.has_sigmoid() ? ad::clamp(out.z, kLatentClamp, 1.0 - kLatentClamp) : out.z;
    return base_log_density(tape, z, smooth) + out.log_det;
  }

  ad::Var base_log_density(ad::Tape& tape, const ad::Var& z, bool smooth = false) const {
    if (const auto* t = std::get_if<PolyaTree>(&prior_)) return t->log_density(tape, z, smooth);
    if (const auto* h = std::get_if<LearnableHistogram>(&prior_)) {
      return h->log_density_unit(tape, z.value());
    }
    return std::get<FixedPrior>(prior_).log_density(tape, z);
  }

  std::vector<double> log_likelihood(const Array& x) const {
    constexpr std::size_t kChunk = 4096;
    std::vector<double> out;
    out.reserve(x.rows());
    for (std::size_t start = 0; start < x.rows(); start += kChunk) {
      const std::size_t n = std::min(kChunk, x.rows() - start);
      Array part = Array::matrix(n, x.cols());
      std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(start * x.cols()), n * x.cols(),
                  part.data().begin());
      ad::Tape tape;
      const Array& v = log_likelihood(tape, part).value();
      out.insert(out.end(), v.data().begin(), v.data().end());
    }
    return out;
  }

  double log_likelihood(std::span<const double> x) const {
    return log_likelihood(Array(Shape{1, x.size()}, std::vector<double>(x.begin(), x.end())))[0];
  }

  // Latent draws from the base, clamped like the forward pass when the flow
  // ends in a sigmoid.
  Array sample_latent(Rng& rng, std::size_t n, BranchMode mode = BranchMode::kPosteriorMean) const {
    Array z;
    if (const auto* t = std::get_if<PolyaTree>(&prior_)) {
      z = t->sample(rng, n, mode);
    } else if (const auto* h = std::get_if<LearnableHistogram>(&prior_)) {
      z = h->sample_unit(rng, n);
    } else {
      z = std::get<FixedPrior>(prior_).sample(rng, n);
    }
    if (flow_.has_sigmoid()) {
      for (double& v : z.data()) v = std::clamp(v, kLatentClamp, 1.0 - kLatentClamp);
    }
    return z;
  }

  Array sample(Rng& rng, std::size_t n, BranchMode mode = BranchMode::kPosteriorMean) const {
    return flow_.inverse(sample_latent(rng, n, mode));
  }

  std::vector<Array*> flow_parameters() { return flow_.parameter_arrays(); }

  std::vector<Array*> prior_parameters() {
    if (auto* t = std::get_if<PolyaTree>(&prior_)) return t->parameter_arrays();
    if (auto* h = std::get_if<LearnableHistogram>(&prior_)) return h->parameter_arrays();
    return {};
  }

  std::size_t prior_parameter_count() const {
    if (const auto* t = std::get_if<PolyaTree>(&prior_)) return t->parameter_count();
    if (const auto* h = std::get_if<LearnableHistogram>(&prior_)) return h->parameter_count();
    return 0;
  }

 private:
  FlowModel flow_;
  Prior prior_;
};

inline double model_log_likelihood(const DensityEstimator& model, std::span<const double> x) {
  return model.log_likelihood(x);
}

}  // namespace vpt

#endif  // VPT_ESTIMATOR_HPP_
