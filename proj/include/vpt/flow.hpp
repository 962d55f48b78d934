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

// Invertible backbone from data space to latent space: additive coupling
// layers, an optional diagonal scaling layer and an optional terminal
// sigmoid. forward() maps data x to latent z and accumulates
// ln|det J_f(x)| per point.

#ifndef VPT_FLOW_HPP_
#define VPT_FLOW_HPP_

#include <cmath>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "vpt/array.hpp"
#include "vpt/autodiff.hpp"
#include "vpt/distributions.hpp"
#include "vpt/errors.hpp"
#include "vpt/special.hpp"

namespace vpt {

enum class Activation { kTanh, kRelu };

inline std::string_view to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "relu"; }

inline Activation parse_activation(std::string_view s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw UsageError("unknown activation '" + std::string(s) + "' (expected tanh or relu)");
}

// Sigmoid outputs handed to bases with bounded support are clamped here.
inline constexpr double kLatentClamp = 1e-6;

struct FlowConfig {
  int coupling_layers = 1;
  std::vector<int> hidden{50, 50};
  Activation activation = Activation::kTanh;
  bool scaling = true;
  bool sigmoid = true;
};

// Fully connected network; weights are [in, out], biases [1, out].
class Mlp {
 public:
  Mlp() = default;

  // Glorot-uniform hidden layers; the output layer starts at zero so the
  // network initially outputs 0.
  Mlp(std::size_t in, std::size_t out, const std::vector<int>& hidden, Activation act, Rng& rng)
      : activation_(act) {
    std::vector<std::size_t> widths{in};
    for (int h : hidden) widths.push_back(static_cast<std::size_t>(h));
    widths.push_back(out);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      Array w = Array::matrix(widths[l], widths[l + 1]);
      const bool last = l + 2 == widths.size();
      if (!last) {
        const double bound = std::sqrt(6.0 / static_cast<double>(widths[l] + widths[l + 1]));
        std::uniform_real_distribution<double> unif(-bound, bound);
        for (double& v : w.data()) v = unif(rng);
      }
      weights_.push_back(std::move(w));
      biases_.push_back(Array::matrix(1, widths[l + 1]));
    }
  }

  ad::Var forward(ad::Tape& tape, ad::Var x) const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      x = ad::matmul(x, tape.parameter(weights_[l])) + tape.parameter(biases_[l]);
      if (l + 1 < weights_.size()) x = activation_ == Activation::kTanh ? ad::tanh(x) : ad::relu(x);
    }
    return x;
  }

  Activation activation() const { return activation_; }
  std::vector<Array>& weights() { return weights_; }
  const std::vector<Array>& weights() const { return weights_; }
  std::vector<Array>& biases() { return biases_; }
  const std::vector<Array>& biases() const { return biases_; }

  void collect(std::vector<Array*>& out) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      out.push_back(&weights_[l]);
      out.push_back(&biases_[l]);
    }
  }

 private:
  Activation activation_ = Activation::kTanh;
  std::vector<Array> weights_;
  std::vector<Array> biases_;
};

// z_shift = x_shift + t(x_pass); z_pass = x_pass. Log-det is exactly 0.
class CouplingLayer {
 public:
  CouplingLayer() = default;
  CouplingLayer(std::vector<std::size_t> pass, std::vector<std::size_t> shifted, Mlp net)
      : pass_(std::move(pass)), shifted_(std::move(shifted)), net_(std::move(net)) {}

  // Alternating mask: even parity passes even coordinates through.
  static CouplingLayer alternating(std::size_t dims, int parity, const std::vector<int>& hidden,
                                   Activation act, Rng& rng) {
    if (dims < 2) throw ContractViolation("CouplingLayer: needs at least two dimensions");
    std::vector<std::size_t> pass, shifted;
    for (std::size_t d = 0; d < dims; ++d) {
      (static_cast<int>(d % 2) == parity ? pass : shifted).push_back(d);
    }
    return CouplingLayer(pass, shifted, Mlp(pass.size(), shifted.size(), hidden, act, rng));
  }

  ad::Var forward(ad::Tape& tape, const ad::Var& x) const { return x + shift_term(tape, x, 1.0); }
  ad::Var inverse(ad::Tape& tape, const ad::Var& z) const { return z + shift_term(tape, z, -1.0); }

  const std::vector<std::size_t>& pass() const { return pass_; }
  const std::vector<std::size_t>& shifted() const { return shifted_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

 private:
  ad::Var shift_term(ad::Tape& tape, const ad::Var& x, double sign) const {
    const std::size_t n = x.value().rows(), dims = x.value().cols();
    std::vector<std::size_t> in_idx, out_idx;
    in_idx.reserve(n * pass_.size());
    out_idx.reserve(n * shifted_.size());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p : pass_) in_idx.push_back(i * dims + p);
      for (std::size_t s : shifted_) out_idx.push_back(i * dims + s);
    }
    ad::Var xa = ad::gather(x, std::move(in_idx), Shape{n, pass_.size()});
    ad::Var t = net_.forward(tape, xa);
    if (sign < 0) t = ad::neg(t);
    return ad::scatter(t, std::move(out_idx), Shape{n, dims});
  }

  std::vector<std::size_t> pass_;
  std::vector<std::size_t> shifted_;
  Mlp net_;
};

// z = x * exp(log_scale); log-det = sum(log_scale).
class ScalingLayer {
 public:
  ScalingLayer() = default;
  explicit ScalingLayer(std::size_t dims) : log_scale_(Array::matrix(1, dims)) {}

  Array& log_scale() { return log_scale_; }
  const Array& log_scale() const { return log_scale_; }

 private:
  Array log_scale_;
};

using FlowLayer = std::variant<CouplingLayer, ScalingLayer>;

struct FlowOutput {
  ad::Var z;        // [N, D]
  ad::Var log_det;  // [N, 1]
};

class FlowModel {
 public:
  FlowModel() = default;
  FlowModel(std::size_t dims, std::vector<FlowLayer> layers, bool sigmoid)
      : dims_(dims), layers_(std::move(layers)), sigmoid_(sigmoid) {}

  // Coupling layers with alternating masks (skipped for D = 1), then the
  // scaling layer and the sigmoid as configured.
  static FlowModel build(std::size_t dims, const FlowConfig& config, Rng& rng) {
    std::vector<FlowLayer> layers;
    if (dims >= 2) {
      for (int l = 0; l < config.coupling_layers; ++l) {
        layers.emplace_back(
            CouplingLayer::alternating(dims, l % 2, config.hidden, config.activation, rng));
      }
    }
    if (config.scaling) layers.emplace_back(ScalingLayer(dims));
    return FlowModel(dims, std::move(layers), config.sigmoid);
  }

  std::size_t dims() const { return dims_; }
  bool has_sigmoid() const { return sigmoid_; }
  std::vector<FlowLayer>& layers() { return layers_; }
  const std::vector<FlowLayer>& layers() const { return layers_; }

  FlowOutput forward(ad::Tape& tape, const ad::Var& x) const {
    check_input(x.value());
    const std::size_t n = x.value().rows();
    ad::Var z = x;
    ad::Var log_det = tape.constant(Array::matrix(n, 1));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (const auto* c = std::get_if<CouplingLayer>(&layers_[l])) {
        z = c->forward(tape, z);
      } else {
        const auto& s = std::get<ScalingLayer>(layers_[l]);
        ad::Var ls = tape.parameter(s.log_scale());
        z = z * ad::exp(ls);
        log_det = log_det + ad::sum(ls);
      }
      check_finite(z.value(), l);
    }
    if (sigmoid_) {
      log_det = log_det + ad::sum_rows(ad::log_sigmoid(z) + ad::log_sigmoid(-z));
      z = ad::sigmoid(z);
      check_finite(log_det.value(), layers_.size());
    }
    return FlowOutput{z, log_det};
  }

  // Batch forward without gradients; log_det receives one entry per row.
  Array forward(const Array& x, std::vector<double>* log_det = nullptr) const {
    ad::Tape tape;
    FlowOutput out = forward(tape, tape.constant(x));
    if (log_det != nullptr) *log_det = out.log_det.value().data();
    return out.z.value();
  }

  std::pair<std::vector<double>, double> forward(std::span<const double> x) const {
    std::vector<double> ld;
    Array z = forward(Array(Shape{1, x.size()}, std::vector<double>(x.begin(), x.end())), &ld);
    return {z.data(), ld[0]};
  }

  Array inverse(const Array& z) const {
    check_input(z);
    ad::Tape tape;
    Array u = z;
    if (sigmoid_) {
      for (double& v : u.data()) {
        if (!(v > 0.0 && v < 1.0)) {
          throw DomainError("FlowModel::inverse: sigmoid output must lie in (0,1), got " +
                            std::to_string(v));
        }
        v = logit(v);
      }
    }
    ad::Var x = tape.constant(std::move(u));
    for (std::size_t l = layers_.size(); l-- > 0;) {
      if (const auto* c = std::get_if<CouplingLayer>(&layers_[l])) {
        x = c->inverse(tape, x);
      } else {
        const auto& s = std::get<ScalingLayer>(layers_[l]);
        x = x * ad::exp(-tape.constant(s.log_scale()));
      }
    }
    return x.value();
  }

  std::vector<double> inverse(std::span<const double> z) const {
    return inverse(Array(Shape{1, z.size()}, std::vector<double>(z.begin(), z.end()))).data();
  }

  std::vector<Array*> parameter_arrays() {
    std::vector<Array*> out;
    for (FlowLayer& layer : layers_) {
      if (auto* c = std::get_if<CouplingLayer>(&layer)) {
        c->net().collect(out);
      } else {
        out.push_back(&std::get<ScalingLayer>(layer).log_scale());
      }
    }
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (Array* a : const_cast<FlowModel*>(this)->parameter_arrays()) n += a->size();
    return n;
  }

 private:
  void check_input(const Array& x) const {
    if (x.rank() != 2 || x.cols() != dims_) {
      throw ContractViolation("FlowModel: expected [N," + std::to_string(dims_) +
                              "] input, got " + shape_string(x.shape()));
    }
  }

  static void check_finite(const Array& a, std::size_t layer) {
    for (double v : a.data()) {
      if (!std::isfinite(v)) {
        throw NumericError("FlowModel: non-finite value after layer " + std::to_string(layer));
      }
    }
  }

  std::size_t dims_ = 0;
  std::vector<FlowLayer> layers_;
  bool sigmoid_ = false;
};

}  // namespace vpt

#endif  // VPT_FLOW_HPP_
