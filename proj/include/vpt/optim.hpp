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

#ifndef VPT_OPTIM_HPP_
#define VPT_OPTIM_HPP_

#include <cmath>
#include <vector>

#include "vpt/array.hpp"
#include "vpt/autodiff.hpp"

namespace vpt {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam over a fixed set of externally owned arrays. Gradients are read from
// the tape the arrays were bound to; arrays the tape never saw are skipped.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Array*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
    for (Array* p : params_) {
      first_.emplace_back(p->shape(), 0.0);
      second_.emplace_back(p->shape(), 0.0);
    }
  }

  double learning_rate() const { return config_.learning_rate; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  long steps() const { return step_; }

  void step(const ad::Tape& tape) {
    ++step_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      const Array* g = tape.gradient(*params_[k]);
      if (g == nullptr) continue;
      Array& p = *params_[k];
      Array& m = first_[k];
      Array& v = second_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * (*g)[i];
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * (*g)[i] * (*g)[i];
        p[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
      }
    }
  }

 private:
  std::vector<Array*> params_;
  std::vector<Array> first_;
  std::vector<Array> second_;
  AdamConfig config_;
  long step_ = 0;
};

}  // namespace vpt

#endif  // VPT_OPTIM_HPP_
