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

#ifndef VPT_ARRAY_HPP_
#define VPT_ARRAY_HPP_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vpt/errors.hpp"

namespace vpt {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

// Dense row-major array of doubles.
class Array {
 public:
  Array() : shape_{0} {}
  explicit Array(Shape shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  Array(Shape shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw ContractViolation("Array: data length " +
                              std::to_string(data_.size()) +
                              " does not match shape " + shape_string(shape_));
    }
  }

  static Array scalar(double v) { return Array(Shape{1}, std::vector<double>{v}); }
  static Array matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Array(Shape{rows, cols}, fill);
  }
  static Array vector(std::vector<double> v) {
    const std::size_t n = v.size();
    return Array(Shape{n}, std::move(v));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  // Leading extent for rank >= 1; trailing extent of a rank-2 array.
  std::size_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
  std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols(), cols());
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols(), cols());
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Array reshaped(Shape shape) const {
    if (shape_size(shape) != size()) {
      throw ContractViolation("reshape: " + shape_string(shape_) + " -> " +
                              shape_string(shape));
    }
    return Array(std::move(shape), data_);
  }

  friend bool operator==(const Array&, const Array&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace vpt

#endif  // VPT_ARRAY_HPP_
