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

// Reverse-mode automatic differentiation over dense double arrays.
//
// A Tape records every primitive operation in creation order, so operands
// always precede their consumers and a reverse sweep over the node list is a
// valid topological traversal. Nodes that do not depend on any variable carry
// no backward function and receive no gradient storage.
//
// Elementwise binary operations accept operands of equal shape, a one-element
// operand broadcast against anything, and rank-2 row ([1,n]) or column ([m,1])
// operands broadcast against [m,n].

#ifndef VPT_AUTODIFF_HPP_
#define VPT_AUTODIFF_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vpt/array.hpp"
#include "vpt/errors.hpp"
#include "vpt/special.hpp"

namespace vpt::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape& tape() const { return *tape_; }
  std::size_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

  inline const Array& value() const;
  inline const Array& grad() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  double item() const { return value()[0]; }

 private:
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Array value) { return push(std::move(value), false, nullptr); }

  Var variable(Array value) { return push(std::move(value), true, nullptr); }

  // Leaf bound to an externally owned array; repeated calls with the same
  // array return the same node, and gradient(array) reads its slot.
  Var parameter(const Array& array) {
    auto it = params_.find(&array);
    if (it != params_.end()) return Var(this, it->second);
    Var v = variable(array);
    params_.emplace(&array, v.index());
    return v;
  }

  // Records a derived value. The node requires a gradient iff any input does.
  Var record(Array value, std::initializer_list<Var> inputs, BackwardFn fn) {
    bool needs = false;
    for (const Var& v : inputs) needs = needs || requires_grad(v.index());
    return push(std::move(value), needs, needs ? std::move(fn) : nullptr);
  }
  Var record(Array value, const std::vector<Var>& inputs, BackwardFn fn) {
    bool needs = false;
    for (const Var& v : inputs) needs = needs || requires_grad(v.index());
    return push(std::move(value), needs, needs ? std::move(fn) : nullptr);
  }

  const Array& value(std::size_t i) const { return nodes_[i].value; }
  const Array& grad(std::size_t i) const { return nodes_[i].grad; }
  Array& grad_slot(std::size_t i) { return nodes_[i].grad; }
  bool requires_grad(std::size_t i) const { return nodes_[i].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient accumulated for a parameter array, or nullptr if the array was
  // never bound to this tape.
  const Array* gradient(const Array& array) const {
    auto it = params_.find(&array);
    if (it == params_.end()) return nullptr;
    const Array& g = nodes_[it->second].grad;
    return g.size() == nodes_[it->second].value.size() ? &g : nullptr;
  }

  void backward(Var loss) {
    if (loss.size() != 1) {
      throw ContractViolation("backward: loss must hold exactly one element, got shape " +
                              shape_string(loss.shape()));
    }
    for (Node& n : nodes_) {
      if (n.requires_grad) {
        n.grad = Array(n.value.shape(), 0.0);
      } else {
        n.grad = Array();
      }
    }
    if (!nodes_[loss.index()].requires_grad) return;
    nodes_[loss.index()].grad[0] = 1.0;
    for (std::size_t i = loss.index() + 1; i-- > 0;) {
      if (nodes_[i].backward) nodes_[i].backward(*this, i);
    }
  }

 private:
  struct Node {
    Array value;
    Array grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Array value, bool requires_grad, BackwardFn fn) {
    nodes_.push_back(Node{std::move(value), Array(), requires_grad, std::move(fn)});
    return Var(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Array*, std::size_t> params_;
};

inline const Array& Var::value() const { return tape_->value(index_); }
inline const Array& Var::grad() const { return tape_->grad(index_); }

inline void backward(Var loss) { loss.tape().backward(loss); }

namespace detail {

enum class Bcast { kSame, kScalar, kRow, kCol };

inline std::size_t map_index(Bcast kind, std::size_t i, std::size_t cols) {
  switch (kind) {
    case Bcast::kSame: return i;
    case Bcast::kScalar: return 0;
    case Bcast::kRow: return i % cols;
    case Bcast::kCol: return i / cols;
  }
  return i;
}

inline Bcast classify(const Shape& operand, const Shape& out) {
  if (operand == out) return Bcast::kSame;
  if (shape_size(operand) == 1) return Bcast::kScalar;
  if (out.size() == 2) {
    const std::size_t m = out[0], n = out[1];
    if ((operand.size() == 2 && operand[0] == 1 && operand[1] == n) ||
        (operand.size() == 1 && operand[0] == n)) {
      return Bcast::kRow;
    }
    if (operand.size() == 2 && operand[0] == m && operand[1] == 1) return Bcast::kCol;
  }
  throw ContractViolation("shape mismatch: " + shape_string(operand) +
                          " does not broadcast to " + shape_string(out));
}

inline Shape broadcast_shape(const Shape& a, const Shape& b) {
  if (a == b) return a;
  const std::size_t na = shape_size(a), nb = shape_size(b);
  const Shape& out = na >= nb ? a : b;
  classify(a, out);
  classify(b, out);
  return out;
}

inline void check_same_tape(const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) throw ContractViolation("operands live on different tapes");
}

// Elementwise binary op. df returns (d/da, d/db) at (a, b, result).
template <class F, class DF>
Var binary(const Var& a, const Var& b, F f, DF df) {
  check_same_tape(a, b);
  Tape& tape = a.tape();
  const Array& av = a.value();
  const Array& bv = b.value();
  Shape out_shape = broadcast_shape(av.shape(), bv.shape());
  const Bcast ka = classify(av.shape(), out_shape);
  const Bcast kb = classify(bv.shape(), out_shape);
  const std::size_t cols = out_shape.size() == 2 ? out_shape[1] : 1;
  Array out(out_shape);
  if (ka == Bcast::kSame && kb == Bcast::kSame) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = f(av[map_index(ka, i, cols)], bv[map_index(kb, i, cols)]);
    }
  }
  const std::size_t ai = a.index(), bi = b.index();
  return tape.record(std::move(out), {a, b}, [=](Tape& t, std::size_t self) {
    const Array& x = t.value(ai);
    const Array& y = t.value(bi);
    const Array& z = t.value(self);
    const Array& g = t.grad(self);
    const bool ga = t.requires_grad(ai), gb = t.requires_grad(bi);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const std::size_t ia = map_index(ka, i, cols), ib = map_index(kb, i, cols);
      const auto [da, db] = df(x[ia], y[ib], z[i]);
      if (ga) t.grad_slot(ai)[ia] += g[i] * da;
      if (gb) t.grad_slot(bi)[ib] += g[i] * db;
    }
  });
}

// Elementwise unary op. df returns d/dx at (x, result).
template <class F, class DF>
Var unary(const Var& x, F f, DF df) {
  Tape& tape = x.tape();
  const Array& xv = x.value();
  Array out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  const std::size_t xi = x.index();
  return tape.record(std::move(out), {x}, [=](Tape& t, std::size_t self) {
    const Array& in = t.value(xi);
    const Array& y = t.value(self);
    const Array& g = t.grad(self);
    Array& gx = t.grad_slot(xi);
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] += g[i] * df(in[i], y[i]);
  });
}

struct Pair {
  double first;
  double second;
};

}  // namespace detail

inline Var add(const Var& a, const Var& b) {
  return detail::binary(a, b, [](double x, double y) { return x + y; },
                        [](double, double, double) { return detail::Pair{1.0, 1.0}; });
}

inline Var sub(const Var& a, const Var& b) {
  return detail::binary(a, b, [](double x, double y) { return x - y; },
                        [](double, double, double) { return detail::Pair{1.0, -1.0}; });
}

inline Var mul(const Var& a, const Var& b) {
  return detail::binary(a, b, [](double x, double y) { return x * y; },
                        [](double x, double y, double) { return detail::Pair{y, x}; });
}

inline Var div(const Var& a, const Var& b) {
  return detail::binary(
      a, b, [](double x, double y) { return x / y; },
      [](double, double y, double z) { return detail::Pair{1.0 / y, -z / y}; });
}

inline Var neg(const Var& x) {
  return detail::unary(x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

inline Var scale(const Var& x, double c) {
  return detail::unary(x, [c](double v) { return c * v; },
                       [c](double, double) { return c; });
}

inline Var shift(const Var& x, double c) {
  return detail::unary(x, [c](double v) { return v + c; },
                       [](double, double) { return 1.0; });
}

inline Var exp(const Var& x) {
  return detail::unary(x, [](double v) { return std::exp(v); },
                       [](double, double y) { return y; });
}

inline Var log(const Var& x) {
  for (double v : x.value().data()) {
    if (!(v > 0.0)) throw DomainError("log: non-positive input " + std::to_string(v));
  }
  return detail::unary(x, [](double v) { return std::log(v); },
                       [](double v, double) { return 1.0 / v; });
}

inline Var tanh(const Var& x) {
  return detail::unary(x, [](double v) { return std::tanh(v); },
                       [](double, double y) { return 1.0 - y * y; });
}

inline Var relu(const Var& x) {
  return detail::unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
                       [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

inline Var sigmoid(const Var& x) {
  return detail::unary(x, [](double v) { return vpt::sigmoid(v); },
                       [](double, double y) { return y * (1.0 - y); });
}

inline Var softplus(const Var& x) {
  return detail::unary(x, [](double v) { return vpt::softplus(v); },
                       [](double v, double) { return vpt::sigmoid(v); });
}

inline Var log_sigmoid(const Var& x) {
  return detail::unary(x, [](double v) { return vpt::log_sigmoid(v); },
                       [](double v, double) { return vpt::sigmoid(-v); });
}

// Same value, no gradient.
inline Var detach(const Var& x) { return x.tape().constant(x.value()); }

// Gradient passes where lo <= x <= hi and is zero outside.
inline Var clamp(const Var& x, double lo, double hi) {
  return detail::unary(x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
                       [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

inline Var lgamma(const Var& x) {
  return detail::unary(x, [](double v) { return vpt::log_gamma(v); },
                       [](double v, double) { return vpt::digamma(v); });
}

inline Var digamma(const Var& x) {
  return detail::unary(x, [](double v) { return vpt::digamma(v); },
                       [](double v, double) { return vpt::trigamma(v); });
}

inline Var matmul(const Var& a, const Var& b) {
  detail::check_same_tape(a, b);
  const Array& av = a.value();
  const Array& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    throw ContractViolation("matmul: incompatible shapes " + shape_string(av.shape()) +
                            " x " + shape_string(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Array out = Array::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = &out[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = &bv[p * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape().record(std::move(out), {a, b}, [=](Tape& t, std::size_t self) {
    const Array& g = t.grad(self);
    const Array& x = t.value(ai);
    const Array& y = t.value(bi);
    if (t.requires_grad(ai)) {
      // G * B^T, accumulated row-wise against B^T so the inner loop is a
      // contiguous axpy.
      std::vector<double> yt(n * k);
      for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t j = 0; j < n; ++j) yt[j * k + p] = y[p * n + j];
      }
      Array& gx = t.grad_slot(ai);
      for (std::size_t i = 0; i < m; ++i) {
        double* grow = &gx[i * k];
        for (std::size_t j = 0; j < n; ++j) {
          const double gij = g[i * n + j];
          const double* trow = &yt[j * k];
          for (std::size_t p = 0; p < k; ++p) grow[p] += gij * trow[p];
        }
      }
    }
    if (t.requires_grad(bi)) {
      Array& gy = t.grad_slot(bi);  // A^T * G
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = &g[i * n];
        for (std::size_t p = 0; p < k; ++p) {
          const double xip = x[i * k + p];
          double* yrow = &gy[p * n];
          for (std::size_t j = 0; j < n; ++j) yrow[j] += xip * grow[j];
        }
      }
    }
  });
}

inline Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const std::size_t xi = x.index();
  return x.tape().record(Array::scalar(s), {x}, [xi](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (double& v : t.grad_slot(xi).data()) v += g;
  });
}

inline Var mean(const Var& x) {
  if (x.size() == 0) throw ContractViolation("mean: empty input");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

// [m,n] -> [m,1]
inline Var sum_rows(const Var& x) {
  const Array& xv = x.value();
  if (xv.rank() != 2) throw ContractViolation("sum_rows: rank-2 input required");
  const std::size_t m = xv.rows(), n = xv.cols();
  Array out = Array::matrix(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += xv[i * n + j];
    out[i] = s;
  }
  const std::size_t xi = x.index();
  return x.tape().record(std::move(out), {x}, [=](Tape& t, std::size_t self) {
    const Array& g = t.grad(self);
    Array& gx = t.grad_slot(xi);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += g[i];
    }
  });
}

// out[i] = x.flat[index[i]]; gradients scatter-add back.
inline Var gather(const Var& x, std::vector<std::size_t> index, Shape out_shape) {
  const Array& xv = x.value();
  if (shape_size(out_shape) != index.size()) {
    throw ContractViolation("gather: index count does not match output shape");
  }
  Array out(std::move(out_shape));
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= xv.size()) throw ContractViolation("gather: index out of range");
    out[i] = xv[index[i]];
  }
  const std::size_t xi = x.index();
  return x.tape().record(std::move(out), {x},
                         [xi, idx = std::move(index)](Tape& t, std::size_t self) {
                           const Array& g = t.grad(self);
                           Array& gx = t.grad_slot(xi);
                           for (std::size_t i = 0; i < idx.size(); ++i) gx[idx[i]] += g[i];
                         });
}

// out.flat[index[i]] += x[i] on a zero array of out_shape. Adjoint of gather.
inline Var scatter(const Var& x, std::vector<std::size_t> index, Shape out_shape) {
  const Array& xv = x.value();
  if (xv.size() != index.size()) {
    throw ContractViolation("scatter: index count does not match input size");
  }
  Array out(std::move(out_shape), 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= out.size()) throw ContractViolation("scatter: index out of range");
    out[index[i]] += xv[i];
  }
  const std::size_t xi = x.index();
  return x.tape().record(std::move(out), {x},
                         [xi, idx = std::move(index)](Tape& t, std::size_t self) {
                           const Array& g = t.grad(self);
                           Array& gx = t.grad_slot(xi);
                           for (std::size_t i = 0; i < idx.size(); ++i) gx[i] += g[idx[i]];
                         });
}

// Flattened concatenation.
inline Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractViolation("concat: no inputs");
  std::vector<double> data;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    detail::check_same_tape(parts.front(), p);
    offsets.push_back(data.size());
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  }
  std::vector<std::size_t> ids;
  for (const Var& p : parts) ids.push_back(p.index());
  return parts.front().tape().record(
      Array::vector(std::move(data)), parts, [ids, offsets](Tape& t, std::size_t self) {
        const Array& g = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!t.requires_grad(ids[k])) continue;
          Array& gx = t.grad_slot(ids[k]);
          for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[offsets[k] + i];
        }
      });
}

inline Var reshape(const Var& x, Shape shape) {
  Array out = x.value().reshaped(std::move(shape));
  const std::size_t xi = x.index();
  return x.tape().record(std::move(out), {x}, [xi](Tape& t, std::size_t self) {
    const Array& g = t.grad(self);
    Array& gx = t.grad_slot(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator/(const Var& a, const Var& b) { return div(a, b); }
inline Var operator-(const Var& x) { return neg(x); }
inline Var operator+(const Var& a, double c) { return shift(a, c); }
inline Var operator+(double c, const Var& a) { return shift(a, c); }
inline Var operator-(const Var& a, double c) { return shift(a, -c); }
inline Var operator-(double c, const Var& a) { return shift(neg(a), c); }
inline Var operator*(const Var& a, double c) { return scale(a, c); }
inline Var operator*(double c, const Var& a) { return scale(a, c); }

}  // namespace vpt::ad

#endif  // VPT_AUTODIFF_HPP_
