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

// Variational Polya tree prior on (0,1]^D.
//
// Each dimension owns an independent binary tree of depth L with 2^L - 1
// internal nodes stored breadth-first: the node reached by path bits
// e_1..e_j sits at index 2^j - 1 + binary(e_1..e_j). Node i carries a pair
// of unconstrained reals mapped through softplus to Beta(alpha_left,
// alpha_right); its branch probability Y is the probability of routing to
// the left child. Interval geometry is a separate split proportion beta per
// node: fixed at 1/2 (dyadic), shared per level, or per node, the latter two
// parameterized through a sigmoid.
//
// Intervals are half-open (lower, upper]; a point exactly on a split point
// belongs to the left child.

#ifndef VPT_POLYA_TREE_HPP_
#define VPT_POLYA_TREE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
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

enum class PartitionMode { kDyadic, kPerLevel, kPerNode };

// Learned split logits are read through a clamp so proportions stay strictly
// inside (0,1) in double precision.
inline constexpr double kSplitLogitBound = 20.0;

inline std::string_view to_string(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::kDyadic: return "dyadic";
    case PartitionMode::kPerLevel: return "per-level";
    case PartitionMode::kPerNode: return "per-node";
  }
  return "dyadic";
}

inline PartitionMode parse_partition_mode(std::string_view s) {
  if (s == "dyadic") return PartitionMode::kDyadic;
  if (s == "per-level") return PartitionMode::kPerLevel;
  if (s == "per-node") return PartitionMode::kPerNode;
  throw UsageError("unknown partition mode '" + std::string(s) +
                   "' (expected dyadic, per-level or per-node)");
}

// How branch probabilities are obtained when evaluating or sampling.
enum class BranchMode { kPosteriorMean, kSampled };

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  double length() const { return upper - lower; }
  bool contains(double x) const { return x > lower && x <= upper; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct NodeParams {
  double raw_left = 0.0;
  double raw_right = 0.0;
  BetaDist beta() const { return BetaDist(softplus(raw_left), softplus(raw_right)); }
};

struct LeafAssignment {
  std::uint32_t leaf = 0;          // path bits, first split in the most significant bit
  std::vector<int> bits;           // e_1..e_L
  std::vector<std::size_t> nodes;  // internal node visited at each level
  Interval interval;
};

inline std::size_t tree_node_count(int levels) { return (std::size_t{1} << levels) - 1; }
inline std::size_t tree_leaf_count(int levels) { return std::size_t{1} << levels; }

inline int node_depth(std::size_t node) {
  int depth = 0;
  for (std::size_t n = node + 1; n > 1; n >>= 1) ++depth;
  return depth;
}

// Number of learnable reals: two Beta parameters per internal node per
// dimension, plus the split parameters of the non-dyadic modes.
inline std::size_t param_count(int levels, int dims, PartitionMode mode) {
  if (levels < 1 || dims < 1) throw ContractViolation("param_count: levels and dims must be >= 1");
  const std::size_t nodes = tree_node_count(levels);
  const std::size_t d = static_cast<std::size_t>(dims);
  std::size_t count = nodes * 2 * d;
  if (mode == PartitionMode::kPerLevel) count += static_cast<std::size_t>(levels) * d;
  if (mode == PartitionMode::kPerNode) count += nodes * d;
  return count;
}

// Leaf intervals, left to right, of one dimension's tree. `proportions` holds
// L values (per-level), 2^L - 1 values (per-node, breadth-first) or nothing
// (dyadic).
inline std::vector<Interval> compute_intervals(int levels, PartitionMode mode,
                                               std::span<const double> proportions) {
  if (levels < 1) throw ContractViolation("compute_intervals: levels must be >= 1");
  const std::size_t nodes = tree_node_count(levels);
  const std::size_t expected = mode == PartitionMode::kDyadic     ? 0
                               : mode == PartitionMode::kPerLevel ? static_cast<std::size_t>(levels)
                                                                  : nodes;
  if (proportions.size() != expected) {
    throw ContractViolation("compute_intervals: expected " + std::to_string(expected) +
                            " split proportions, got " + std::to_string(proportions.size()));
  }
  for (double b : proportions) {
    if (!(b > 0.0 && b < 1.0)) {
      throw ContractViolation("compute_intervals: split proportion outside (0,1): " +
                              std::to_string(b));
    }
  }
  std::vector<Interval> cells(nodes + tree_leaf_count(levels));
  cells[0] = Interval{0.0, 1.0};
  for (std::size_t i = 0; i < nodes; ++i) {
    const double b = mode == PartitionMode::kDyadic     ? 0.5
                     : mode == PartitionMode::kPerLevel ? proportions[node_depth(i)]
                                                        : proportions[i];
    const Interval c = cells[i];
    const double split = c.lower + (c.upper - c.lower) * b;
    cells[2 * i + 1] = Interval{c.lower, split};
    cells[2 * i + 2] = Interval{split, c.upper};
  }
  return std::vector<Interval>(cells.begin() + static_cast<std::ptrdiff_t>(nodes), cells.end());
}

class PolyaTree {
 public:
  PolyaTree() : PolyaTree(1, 1) {}

  // All Beta parameters start at 1 (the uniform density); learnable split
  // proportions start at 1/2.
  PolyaTree(int levels, int dims, PartitionMode mode = PartitionMode::kDyadic)
      : levels_(levels), dims_(dims), mode_(mode) {
    if (levels < 1 || dims < 1) throw ContractViolation("PolyaTree: levels and dims must be >= 1");
    if (levels > 24) throw ContractViolation("PolyaTree: levels above 24 are not supported");
    raw_alpha_ = Array(Shape{dim_count(), node_count(), 2}, inverse_softplus(1.0));
    switch (mode_) {
      case PartitionMode::kDyadic: split_raw_ = Array(Shape{dim_count(), 0}); break;
      case PartitionMode::kPerLevel:
        split_raw_ = Array(Shape{dim_count(), static_cast<std::size_t>(levels)}, 0.0);
        break;
      case PartitionMode::kPerNode: split_raw_ = Array(Shape{dim_count(), node_count()}, 0.0); break;
    }
  }

  int levels() const { return levels_; }
  int dims() const { return dims_; }
  PartitionMode mode() const { return mode_; }
  std::size_t node_count() const { return tree_node_count(levels_); }
  std::size_t leaf_count() const { return tree_leaf_count(levels_); }
  std::size_t dim_count() const { return static_cast<std::size_t>(dims_); }
  std::size_t parameter_count() const { return param_count(levels_, dims_, mode_); }

  // Raw storage: [D, nodes, 2] softplus-parameterized Beta parameters and
  // [D, L] / [D, nodes] / [D, 0] sigmoid-parameterized split proportions.
  const Array& raw_alpha() const { return raw_alpha_; }
  Array& raw_alpha() { return raw_alpha_; }
  const Array& split_raw() const { return split_raw_; }
  Array& split_raw() { return split_raw_; }

  NodeParams node(std::size_t dim, std::size_t node) const {
    const std::size_t k = alpha_index(dim, node, 0);
    return NodeParams{raw_alpha_[k], raw_alpha_[k + 1]};
  }
  BetaDist beta(std::size_t dim, std::size_t node) const { return this->node(dim, node).beta(); }

  void set_beta(std::size_t dim, std::size_t node, const BetaDist& b) {
    const std::size_t k = alpha_index(dim, node, 0);
    raw_alpha_[k] = inverse_softplus(b.alpha);
    raw_alpha_[k + 1] = inverse_softplus(b.beta);
  }
  void set_all_betas(const BetaDist& b) {
    for (std::size_t d = 0; d < dim_count(); ++d) {
      for (std::size_t n = 0; n < node_count(); ++n) set_beta(d, n, b);
    }
  }

  // Effective split proportion at `node`.
  double split_proportion(std::size_t dim, std::size_t node) const {
    switch (mode_) {
      case PartitionMode::kDyadic: return 0.5;
      case PartitionMode::kPerLevel:
      case PartitionMode::kPerNode: return sigmoid(split_logit(split_index(dim, node)));
    }
    return 0.5;
  }

  std::vector<double> split_proportions(std::size_t dim) const {
    std::vector<double> out;
    if (mode_ == PartitionMode::kPerLevel) {
      for (int j = 0; j < levels_; ++j) out.push_back(sigmoid(split_logit(dim * split_raw_.cols() + j)));
    } else if (mode_ == PartitionMode::kPerNode) {
      for (std::size_t n = 0; n < node_count(); ++n) out.push_back(split_proportion(dim, n));
    }
    return out;
  }

  void set_split_proportions(std::size_t dim, std::span<const double> props) {
    if (props.size() != split_raw_.cols()) {
      throw ContractViolation("set_split_proportions: wrong number of proportions");
    }
    for (std::size_t i = 0; i < props.size(); ++i) {
      split_raw_[dim * split_raw_.cols() + i] = logit(props[i]);
    }
  }

  std::vector<Interval> intervals(std::size_t dim) const {
    const std::vector<double> props = split_proportions(dim);
    return compute_intervals(levels_, mode_, props);
  }

  LeafAssignment leaf_of(std::size_t dim, double x) const {
    if (!(x > 0.0 && x <= 1.0)) {
      throw DomainError("leaf_of: coordinate must lie in (0,1], got " + std::to_string(x));
    }
    LeafAssignment out;
    out.bits.reserve(levels_);
    out.nodes.reserve(levels_);
    double lo = 0.0, hi = 1.0;
    std::size_t n = 0;
    for (int j = 0; j < levels_; ++j) {
      out.nodes.push_back(n);
      const double split = lo + (hi - lo) * split_proportion(dim, n);
      const int bit = x <= split ? 0 : 1;
      if (bit == 0) {
        hi = split;
      } else {
        lo = split;
      }
      out.bits.push_back(bit);
      out.leaf = (out.leaf << 1) | static_cast<std::uint32_t>(bit);
      n = 2 * n + 1 + static_cast<std::size_t>(bit);
    }
    out.interval = Interval{lo, hi};
    return out;
  }

  // Branch probabilities Y (left) as a [D, nodes] array.
  Array branch_means() const {
    Array y(Shape{dim_count(), node_count()});
    for (std::size_t d = 0; d < dim_count(); ++d) {
      for (std::size_t n = 0; n < node_count(); ++n) y.at(d, n) = beta_mean(beta(d, n));
    }
    return y;
  }

  Array sample_branches(Rng& rng) const {
    Array y(Shape{dim_count(), node_count()});
    for (std::size_t d = 0; d < dim_count(); ++d) {
      for (std::size_t n = 0; n < node_count(); ++n) y.at(d, n) = beta_sample(beta(d, n), rng);
    }
    return y;
  }

  Array branches(BranchMode mode, Rng* rng) const {
    if (mode == BranchMode::kPosteriorMean) return branch_means();
    if (rng == nullptr) throw ContractViolation("sampled branch mode needs a generator");
    return sample_branches(*rng);
  }

  // Posterior-predictive log density at the Beta means.
  double log_density(std::span<const double> x) const {
    return log_density_with(x, log_branch_table_means());
  }

  // Log density with caller-supplied branch probabilities ([D, nodes]).
  double log_density(std::span<const double> x, const Array& branches) const {
    return log_density_with(x, log_branch_table(branches));
  }

  // Batch evaluation; rows of `points` are points in (0,1]^D.
  std::vector<double> log_density_batch(const Array& points) const {
    check_points(points);
    const Array table = log_branch_table_means();
    std::vector<double> out(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) out[i] = log_density_with(points.row(i), table);
    return out;
  }

  // Exact probability of every leaf of dimension `dim` under `branches`.
  std::vector<double> leaf_probabilities(std::size_t dim, const Array& branches) const {
    std::vector<double> mass(node_count() + leaf_count());
    mass[0] = 1.0;
    for (std::size_t n = 0; n < node_count(); ++n) {
      const double y = branches.at(dim, n);
      mass[2 * n + 1] = mass[n] * y;
      mass[2 * n + 2] = mass[n] * (1.0 - y);
    }
    return std::vector<double>(mass.begin() + static_cast<std::ptrdiff_t>(node_count()), mass.end());
  }

  // ---- differentiable evaluation -------------------------------------

  // Per-point log density [N,1] on `tape`, differentiable in raw_alpha and
  // split_raw (bound as tape parameters). Leaf routing uses z's values only.
  // With `smooth`, leaf log densities are linearly interpolated between
  // neighbouring leaf centres, which also makes the result depend on z.
  ad::Var log_density(ad::Tape& tape, const ad::Var& z, bool smooth = false) const {
    check_points(z.value());
    ad::Var log_y = log_branch_probs(tape, nullptr);
    ad::Var leaf_ld = leaf_log_density_from(tape, log_y);
    if (!smooth) return per_point(tape, z, leaf_ld);
    // Split proportions are held fixed in the interpolated term: it is not
    // normalized, and shrinking a leaf would otherwise inflate its neighbours.
    ad::Var step_ld = leaf_log_density_from(tape, log_y, true);
    return per_point(tape, z, leaf_ld, &step_ld);
  }

  // Log of the joint posterior: per-point data terms plus the Beta prior
  // terms sum (a_l - 1) ln Y + (a_r - 1) ln(1 - Y). With `branches` null the
  // posterior-mean Y is used (and differentiated); otherwise the given Y are
  // held fixed. The split-proportion prior is uniform and contributes 0.
  ad::Var log_joint_posterior(ad::Tape& tape, const Array& points,
                              const Array* branches = nullptr) const {
    check_points(points);
    ad::Var log_y = log_branch_probs(tape, branches);
    ad::Var alpha = ad::softplus(tape.parameter(raw_alpha_));
    ad::Var prior_term = ad::sum((alpha - 1.0) * ad::reshape(log_y, raw_alpha_.shape()));
    if (points.rows() == 0) return prior_term;
    ad::Var leaf_ld = leaf_log_density_from(tape, log_y);
    ad::Var z = tape.constant(points);
    return ad::sum(per_point(tape, z, leaf_ld)) + prior_term;
  }

  double log_joint_posterior(const Array& points, const Array* branches = nullptr) const {
    ad::Tape tape;
    return log_joint_posterior(tape, points, branches).item();
  }

  // Sum over nodes of KL(Beta(a_l, a_r) || Beta(1, 1)).
  ad::Var kl_to_uniform(ad::Tape& tape) const {
    ad::Var alpha = ad::softplus(tape.parameter(raw_alpha_));
    const std::size_t m = dim_count() * node_count();
    std::vector<std::size_t> left(m), right(m);
    for (std::size_t i = 0; i < m; ++i) {
      left[i] = 2 * i;
      right[i] = 2 * i + 1;
    }
    ad::Var a = ad::gather(alpha, left, Shape{m});
    ad::Var b = ad::gather(alpha, right, Shape{m});
    ad::Var one = tape.constant(Array::scalar(1.0));
    return ad::sum(beta_kl(a, b, one, one));
  }

  // ---- conjugate updates --------------------------------------------

  // Left/right routing counts per node as a [D, nodes, 2] array.
  Array routing_counts(const Array& points) const {
    check_points(points);
    Array counts(Shape{dim_count(), node_count(), 2}, 0.0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      for (std::size_t d = 0; d < dim_count(); ++d) {
        const LeafAssignment leaf = leaf_of(d, points.at(i, d));
        for (int j = 0; j < levels_; ++j) {
          counts[alpha_index(d, leaf.nodes[j], static_cast<std::size_t>(leaf.bits[j]))] += 1.0;
        }
      }
    }
    return counts;
  }

  // Beta-Binomial posterior: alpha = prior + count_scale * counts.
  PolyaTree conjugate_update(const Array& points, const Array& prior_alphas,
                             double count_scale) const {
    if (points.rows() == 0) throw ContractViolation("conjugate_update: empty batch");
    if (!(count_scale > 0.0)) throw ContractViolation("conjugate_update: count_scale must be > 0");
    if (prior_alphas.shape() != raw_alpha_.shape()) {
      throw ContractViolation("conjugate_update: prior alpha shape mismatch");
    }
    const Array counts = routing_counts(points);
    PolyaTree out = *this;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      out.raw_alpha_[k] = inverse_softplus(prior_alphas[k] + count_scale * counts[k]);
    }
    return out;
  }

  PolyaTree conjugate_update(const Array& points, const BetaDist& prior,
                             double count_scale = 1.0) const {
    return conjugate_update(points, uniform_alphas(prior), count_scale);
  }

  // Effective alphas as a [D, nodes, 2] array.
  Array alphas() const {
    Array out(raw_alpha_.shape());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = softplus(raw_alpha_[k]);
    return out;
  }

  void set_alphas(const Array& alphas) {
    if (alphas.shape() != raw_alpha_.shape()) throw ContractViolation("set_alphas: shape mismatch");
    for (std::size_t k = 0; k < alphas.size(); ++k) raw_alpha_[k] = inverse_softplus(alphas[k]);
  }

  Array uniform_alphas(const BetaDist& prior) const {
    Array out(raw_alpha_.shape());
    for (std::size_t k = 0; k < out.size(); k += 2) {
      out[k] = prior.alpha;
      out[k + 1] = prior.beta;
    }
    return out;
  }

  // ---- sampling and uncertainty -------------------------------------

  // n points in (0,1]^D: descend with Bernoulli(Y) per node, then draw
  // uniformly inside the reached leaf.
  Array sample(Rng& rng, std::size_t n, BranchMode mode = BranchMode::kPosteriorMean) const {
    const Array y = branches(mode, &rng);
    std::vector<std::vector<Interval>> cells(dim_count());
    for (std::size_t d = 0; d < dim_count(); ++d) cells[d] = intervals(d);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Array out = Array::matrix(n, dim_count());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim_count(); ++d) {
        std::size_t node = 0;
        std::size_t leaf = 0;
        for (int j = 0; j < levels_; ++j) {
          const std::size_t bit = unif(rng) < y.at(d, node) ? 0 : 1;
          leaf = (leaf << 1) | bit;
          node = 2 * node + 1 + bit;
        }
        double u = unif(rng);
        while (u == 0.0) u = unif(rng);
        const Interval& c = cells[d][leaf];
        out.at(i, d) = std::min(c.upper, c.lower + c.length() * u);
      }
    }
    return out;
  }

  // Per dimension, the mean Beta variance over the 2^{L-1} nodes that make
  // the final split.
  std::vector<double> variance_map() const {
    std::vector<double> out(dim_count(), 0.0);
    const std::size_t first = tree_node_count(levels_ - 1);
    const std::size_t count = node_count() - first;
    for (std::size_t d = 0; d < dim_count(); ++d) {
      double acc = 0.0;
      for (std::size_t n = first; n < node_count(); ++n) acc += beta_variance(beta(d, n));
      out[d] = acc / static_cast<double>(count);
    }
    return out;
  }

  // ---- flat parameter vector ----------------------------------------

  std::vector<double> parameters() const {
    std::vector<double> out = raw_alpha_.data();
    out.insert(out.end(), split_raw_.data().begin(), split_raw_.data().end());
    return out;
  }

  void set_parameters(std::span<const double> values) {
    if (values.size() != raw_alpha_.size() + split_raw_.size()) {
      throw ContractViolation("PolyaTree::set_parameters: expected " +
                              std::to_string(raw_alpha_.size() + split_raw_.size()) +
                              " values, got " + std::to_string(values.size()));
    }
    std::copy(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(raw_alpha_.size()),
              raw_alpha_.data().begin());
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(raw_alpha_.size()), values.end(),
              split_raw_.data().begin());
  }

  std::vector<Array*> parameter_arrays() {
    std::vector<Array*> out{&raw_alpha_};
    if (split_raw_.size() > 0) out.push_back(&split_raw_);
    return out;
  }

 private:
  std::size_t alpha_index(std::size_t dim, std::size_t node, std::size_t bit) const {
    return (dim * node_count() + node) * 2 + bit;
  }

  double split_logit(std::size_t i) const {
    return std::clamp(split_raw_[i], -kSplitLogitBound, kSplitLogitBound);
  }

  // Flat index into split_raw_ of the proportion used at `node`.
  std::size_t split_index(std::size_t dim, std::size_t node) const {
    return mode_ == PartitionMode::kPerLevel
               ? dim * split_raw_.cols() + static_cast<std::size_t>(node_depth(node))
               : dim * split_raw_.cols() + node;
  }

  void check_points(const Array& points) const {
    if (points.rank() != 2 || points.cols() != dim_count()) {
      if (!(points.rank() == 2 && points.rows() == 0)) {
        throw ContractViolation("PolyaTree: expected [N," + std::to_string(dims_) +
                                "] points, got " + shape_string(points.shape()));
      }
    }
  }

  // [D, nodes, 2] log branch probabilities at the Beta means.
  Array log_branch_table_means() const {
    Array out(raw_alpha_.shape());
    for (std::size_t k = 0; k < out.size(); k += 2) {
      const double a = softplus(raw_alpha_[k]), b = softplus(raw_alpha_[k + 1]);
      const double ls = std::log(a + b);
      out[k] = std::log(a) - ls;
      out[k + 1] = std::log(b) - ls;
    }
    return out;
  }

  Array log_branch_table(const Array& branches) const {
    if (branches.size() != dim_count() * node_count()) {
      throw ContractViolation("PolyaTree: branch table must be [D, nodes]");
    }
    Array out(raw_alpha_.shape());
    for (std::size_t k = 0; k < branches.size(); ++k) {
      const double y = branches[k];
      if (!(y > 0.0 && y < 1.0)) throw DomainError("PolyaTree: branch probability outside (0,1)");
      out[2 * k] = std::log(y);
      out[2 * k + 1] = std::log1p(-y);
    }
    return out;
  }

  double log_split(std::size_t dim, std::size_t node, int bit) const {
    if (mode_ == PartitionMode::kDyadic) return -std::numbers::ln2;
    const double r = split_logit(split_index(dim, node));
    return bit == 0 ? log_sigmoid(r) : log_sigmoid(-r);
  }

  double log_density_with(std::span<const double> x, const Array& log_table) const {
    if (x.size() != dim_count()) throw ContractViolation("log_density: dimension mismatch");
    double acc = 0.0;
    for (std::size_t d = 0; d < dim_count(); ++d) {
      const LeafAssignment leaf = leaf_of(d, x[d]);
      for (int j = 0; j < levels_; ++j) {
        acc += log_table[alpha_index(d, leaf.nodes[j], static_cast<std::size_t>(leaf.bits[j]))];
        acc -= log_split(d, leaf.nodes[j], leaf.bits[j]);
      }
    }
    return acc;
  }

  // Flat [D*nodes*2] log branch probabilities; posterior means when
  // `branches` is null, constants otherwise.
  ad::Var log_branch_probs(ad::Tape& tape, const Array* branches) const {
    if (branches != nullptr) {
      Array t = log_branch_table(*branches);
      return tape.constant(t.reshaped(Shape{t.size()}));
    }
    const std::size_t m = dim_count() * node_count();
    ad::Var alpha = ad::softplus(tape.parameter(raw_alpha_));
    std::vector<std::size_t> left(m), right(m), dup(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
      left[i] = 2 * i;
      right[i] = 2 * i + 1;
      dup[2 * i] = dup[2 * i + 1] = i;
    }
    ad::Var total = ad::gather(alpha, left, Shape{m}) + ad::gather(alpha, right, Shape{m});
    ad::Var log_total = ad::gather(ad::log(total), dup, Shape{2 * m});
    return ad::reshape(ad::log(alpha), Shape{2 * m}) - log_total;
  }

  // Per-leaf sum of log split factors, [D*K]; constant in dyadic mode.
  ad::Var leaf_log_widths(ad::Tape& tape, bool fixed_splits = false) const {
    const std::size_t k = leaf_count();
    const std::size_t total = dim_count() * k;
    if (mode_ == PartitionMode::kDyadic) {
      return tape.constant(Array(Shape{total}, -levels_ * std::numbers::ln2));
    }
    ad::Var raw = ad::clamp(fixed_splits ? tape.constant(split_raw_) : tape.parameter(split_raw_),
                            -kSplitLogitBound, kSplitLogitBound);
    const std::size_t m = split_raw_.size();
    ad::Var table = ad::concat({ad::log_sigmoid(raw), ad::log_sigmoid(-raw)});
    std::vector<std::size_t> idx;
    idx.reserve(total * static_cast<std::size_t>(levels_));
    for (std::size_t d = 0; d < dim_count(); ++d) {
      for (std::size_t leaf = 0; leaf < k; ++leaf) {
        std::size_t node = 0;
        for (int j = 0; j < levels_; ++j) {
          const std::size_t bit = (leaf >> (levels_ - 1 - j)) & 1U;
          idx.push_back(split_index(d, node) + bit * m);
          node = 2 * node + 1 + bit;
        }
      }
    }
    return ad::reshape(
        ad::sum_rows(ad::gather(table, std::move(idx), Shape{total, static_cast<std::size_t>(levels_)})),
        Shape{total});
  }

  ad::Var leaf_log_density_from(ad::Tape& tape, const ad::Var& log_y, bool fixed_splits = false) const {
    const std::size_t k = leaf_count();
    const std::size_t total = dim_count() * k;
    std::vector<std::size_t> idx;
    idx.reserve(total * static_cast<std::size_t>(levels_));
    for (std::size_t d = 0; d < dim_count(); ++d) {
      for (std::size_t leaf = 0; leaf < k; ++leaf) {
        std::size_t node = 0;
        for (int j = 0; j < levels_; ++j) {
          const std::size_t bit = (leaf >> (levels_ - 1 - j)) & 1U;
          idx.push_back(alpha_index(d, node, bit));
          node = 2 * node + 1 + bit;
        }
      }
    }
    ad::Var path = ad::reshape(
        ad::sum_rows(ad::gather(log_y, std::move(idx), Shape{total, static_cast<std::size_t>(levels_)})),
        Shape{total});
    return path - leaf_log_widths(tape, fixed_splits);
  }

  ad::Var leaf_log_density(ad::Tape& tape, const Array* branches) const {
    return leaf_log_density_from(tape, log_branch_probs(tape, branches));
  }

  // `step_ld`, when given, supplies the leaf log densities interpolated
  // across boundaries.
  ad::Var per_point(ad::Tape& tape, const ad::Var& z, const ad::Var& leaf_ld,
                    const ad::Var* step_ld = nullptr) const {
    const bool smooth = step_ld != nullptr;
    const Array& zv = z.value();
    const std::size_t n = zv.rows(), dims = dim_count(), k = leaf_count();
    std::vector<std::vector<Interval>> cells;
    if (smooth) {
      for (std::size_t d = 0; d < dims; ++d) cells.push_back(intervals(d));
    }
    std::vector<std::size_t> own(n * dims), other;
    Array centre, inv_gap;
    if (smooth) {
      other.resize(n * dims);
      centre = Array::matrix(n, dims);
      inv_gap = Array::matrix(n, dims);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double x = zv.at(i, d);
        const std::size_t leaf = leaf_of(d, x).leaf;
        own[i * dims + d] = d * k + leaf;
        if (!smooth) continue;
        const Interval& c = cells[d][leaf];
        const double mid = 0.5 * (c.lower + c.upper);
        std::size_t nb = leaf;
        if (x < mid && leaf > 0) nb = leaf - 1;
        if (x >= mid && leaf + 1 < k) nb = leaf + 1;
        other[i * dims + d] = d * k + nb;
        centre.at(i, d) = mid;
        if (nb != leaf) {
          const Interval& cn = cells[d][nb];
          inv_gap.at(i, d) = 1.0 / (0.5 * (cn.lower + cn.upper) - mid);
        }
      }
    }
    ad::Var ld = ad::gather(leaf_ld, own, Shape{n, dims});
    if (smooth) {
      ad::Var ld_nb = ad::gather(*step_ld, std::move(other), Shape{n, dims});
      ad::Var ld_own = ad::gather(*step_ld, own, Shape{n, dims});
      ad::Var w = (z - tape.constant(std::move(centre))) * tape.constant(std::move(inv_gap));
      ld = ld + w * (ld_nb - ld_own);
    }
    return ad::sum_rows(ld);
  }

  int levels_;
  int dims_;
  PartitionMode mode_;
  Array raw_alpha_;
  Array split_raw_;
};

}  // namespace vpt

#endif  // VPT_POLYA_TREE_HPP_
