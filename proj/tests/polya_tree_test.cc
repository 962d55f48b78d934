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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vpt/polya_tree.hpp"

namespace vpt {
namespace {

using testing::check_gradients;

// Leaf index of x by linear scan over explicit intervals.
std::size_t scan_leaf(const std::vector<Interval>& cells, double x) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (x > cells[k].lower && x <= cells[k].upper) return k;
  }
  return cells.size();
}

// Internal node visited at depth j (0-based) on the way to `leaf`.
std::size_t node_on_path(std::size_t leaf, int levels, int j) {
  return (std::size_t{1} << j) - 1 + (leaf >> (levels - j));
}

void randomize(PolyaTree& tree, std::mt19937_64& rng, double spread = 1.5) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> p = tree.parameters();
  for (double& v : p) v = u(rng);
  tree.set_parameters(p);
}

// Uniform points in (0,1]^D.
Array uniform_points(std::size_t n, std::size_t dims, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Array a = Array::matrix(n, dims);
  for (double& v : a.data()) {
    do v = 1.0 - u(rng); while (!(v > 0.0));
  }
  return a;
}

constexpr PartitionMode kModes[] = {PartitionMode::kDyadic, PartitionMode::kPerLevel, PartitionMode::kPerNode};

TEST(ParamCount, Examples) {
  EXPECT_EQ(param_count(4, 6, PartitionMode::kDyadic), 180u);
  EXPECT_EQ(param_count(6, 8, PartitionMode::kDyadic), 1008u);
  EXPECT_EQ(param_count(1, 1, PartitionMode::kDyadic), 2u);
  EXPECT_EQ(param_count(3, 2, PartitionMode::kPerLevel), 28u + 6u);
  EXPECT_EQ(param_count(3, 2, PartitionMode::kPerNode), 28u + 14u);
  EXPECT_THROW(param_count(0, 2, PartitionMode::kDyadic), ContractViolation);
}

TEST(ParamCount, MatchesSerializedVector) {
  for (PartitionMode m : kModes) {
    for (int levels = 1; levels <= 5; ++levels) {
      for (int dims = 1; dims <= 4; ++dims) {
        const PolyaTree t(levels, dims, m);
        EXPECT_EQ(t.parameters().size(), param_count(levels, dims, m));
      }
    }
  }
}

TEST(Intervals, PerLevelWorkedExample) {
  const std::vector<double> beta{0.6, 0.5};
  const auto c = compute_intervals(2, PartitionMode::kPerLevel, beta);
  ASSERT_EQ(c.size(), 4u);
  const double expect[5] = {0.0, 0.3, 0.6, 0.8, 1.0};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(c[k].lower, expect[k], 1e-15);
    EXPECT_NEAR(c[k].upper, expect[k + 1], 1e-15);
  }
}

TEST(Intervals, DyadicEighths) {
  const auto c = compute_intervals(3, PartitionMode::kDyadic, {});
  ASSERT_EQ(c.size(), 8u);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_DOUBLE_EQ(c[k].lower, k / 8.0);
    EXPECT_DOUBLE_EQ(c[k].upper, (k + 1) / 8.0);
  }
}

TEST(Intervals, PerNodeHandRecursion) {
  const std::vector<double> beta{0.5, 0.2, 0.9};
  const auto c = compute_intervals(2, PartitionMode::kPerNode, beta);
  const double expect[5] = {0.0, 0.1, 0.5, 0.95, 1.0};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(c[k].lower, expect[k], 1e-15);
    EXPECT_NEAR(c[k].upper, expect[k + 1], 1e-15);
  }
}

TEST(Intervals, RejectsBadProportions) {
  EXPECT_THROW(compute_intervals(2, PartitionMode::kPerLevel, std::vector<double>{0.0, 0.5}), ContractViolation);
  EXPECT_THROW(compute_intervals(2, PartitionMode::kPerLevel, std::vector<double>{0.5, 1.0}), ContractViolation);
  EXPECT_THROW(compute_intervals(2, PartitionMode::kPerLevel, std::vector<double>{0.5}), ContractViolation);
}

TEST(Intervals, RandomPartitionProperty) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int rep = 0; rep < 200; ++rep) {
    for (PartitionMode m : kModes) {
      const int levels = 1 + rep % 5;
      const std::size_t count = m == PartitionMode::kDyadic     ? 0
                                : m == PartitionMode::kPerLevel ? static_cast<std::size_t>(levels)
                                                                : tree_node_count(levels);
      std::vector<double> beta(count);
      for (double& b : beta) b = u(rng);
      const auto c = compute_intervals(levels, m, beta);
      ASSERT_EQ(c.size(), tree_leaf_count(levels));
      double total = 0.0;
      EXPECT_EQ(c.front().lower, 0.0);
      EXPECT_EQ(c.back().upper, 1.0);
      for (std::size_t k = 0; k < c.size(); ++k) {
        EXPECT_LT(c[k].lower, c[k].upper);
        if (k > 0) EXPECT_EQ(c[k].lower, c[k - 1].upper);
        total += c[k].length();
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(LeafOf, DyadicExamples) {
  const PolyaTree t(2, 1);
  const LeafAssignment a = t.leaf_of(0, 0.3);
  EXPECT_EQ(a.bits, (std::vector<int>{0, 1}));
  EXPECT_EQ(a.leaf, 1u);
  EXPECT_DOUBLE_EQ(a.interval.lower, 0.25);
  EXPECT_DOUBLE_EQ(a.interval.upper, 0.5);
  EXPECT_EQ(t.leaf_of(0, 0.25).bits, (std::vector<int>{0, 0}));
  EXPECT_EQ(t.leaf_of(0, 1.0).bits, (std::vector<int>{1, 1}));
}

TEST(LeafOf, PerLevelExample) {
  PolyaTree t(2, 1, PartitionMode::kPerLevel);
  t.set_split_proportions(0, std::vector<double>{0.6, 0.5});
  const LeafAssignment a = t.leaf_of(0, 0.7);
  EXPECT_EQ(a.bits, (std::vector<int>{1, 0}));
  EXPECT_NEAR(a.interval.lower, 0.6, 1e-12);
  EXPECT_NEAR(a.interval.upper, 0.8, 1e-12);
  EXPECT_TRUE(a.interval.contains(0.7));
}

TEST(LeafOf, OutOfRangeThrows) {
  const PolyaTree t(3, 1);
  EXPECT_THROW(t.leaf_of(0, 0.0), DomainError);
  EXPECT_THROW(t.leaf_of(0, 1.0000001), DomainError);
  EXPECT_THROW(t.leaf_of(0, -0.5), DomainError);
  const std::vector<double> x{0.5, 1.5};
  EXPECT_THROW(PolyaTree(3, 2).log_density(x), DomainError);
}

TEST(LeafOf, MatchesLinearScanForAllModes) {
  std::mt19937_64 rng(2);
  for (PartitionMode m : kModes) {
    for (int levels = 1; levels <= 4; ++levels) {
      PolyaTree t(levels, 2, m);
      randomize(t, rng);
      const Array pts = uniform_points(300, 2, rng);
      for (std::size_t d = 0; d < 2; ++d) {
        const auto cells = t.intervals(d);
        for (std::size_t i = 0; i < pts.rows(); ++i) {
          const LeafAssignment a = t.leaf_of(d, pts.at(i, d));
          ASSERT_EQ(a.leaf, scan_leaf(cells, pts.at(i, d)));
          for (int j = 0; j < levels; ++j) EXPECT_EQ(a.nodes[j], node_on_path(a.leaf, levels, j));
        }
      }
    }
  }
}

TEST(LogDensity, UniformTreeIsZero) {
  std::mt19937_64 rng(3);
  for (int levels = 1; levels <= 6; ++levels) {
    const PolyaTree t(levels, 3);
    const Array pts = uniform_points(50, 3, rng);
    for (double v : t.log_density_batch(pts)) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(LogDensity, HandComputations) {
  PolyaTree one(1, 1);
  one.set_all_betas(BetaDist(3, 1));
  EXPECT_NEAR(one.log_density(std::vector<double>{0.2}), std::log(1.5), 1e-12);
  PolyaTree two(2, 1);
  two.set_all_betas(BetaDist(3, 1));
  EXPECT_NEAR(two.log_density(std::vector<double>{0.1}), std::log(2.25), 1e-12);
}

TEST(LogDensity, BruteForceLeafEnumeration) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const PartitionMode m = kModes[rep % 3];
    const int levels = 1 + rep % 4;
    PolyaTree t(levels, 2, m);
    randomize(t, rng);
    const Array y = t.branch_means();
    const Array pts = uniform_points(20, 2, rng);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      double expected = 0.0;
      for (std::size_t d = 0; d < 2; ++d) {
        const auto cells = t.intervals(d);
        const auto probs = t.leaf_probabilities(d, y);
        const std::size_t k = scan_leaf(cells, pts.at(i, d));
        expected += std::log(probs[k] / cells[k].length());
      }
      EXPECT_NEAR(t.log_density(pts.row(i)), expected, 1e-10);
    }
  }
}

TEST(LogDensity, NormalizationAcrossModes) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const PartitionMode m = kModes[rep % 3];
    const int levels = 1 + rep % 4;
    PolyaTree t(levels, 1, m);
    randomize(t, rng, 2.0);
    const auto probs = t.leaf_probabilities(0, t.branch_means());
    double s = 0.0;
    for (double p : probs) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
    // Trapezoid-style midpoint rule on a 10^4-point grid.
    const std::size_t n = 10000;
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / n;
      mass += std::exp(t.log_density(std::vector<double>{x})) / n;
    }
    EXPECT_NEAR(mass, 1.0, 1e-3);
  }
}

TEST(LogDensity, SuppliedBranchesOverrideMeans) {
  PolyaTree t(1, 1);
  Array y(Shape{1, 1}, std::vector<double>{0.75});
  EXPECT_NEAR(t.log_density(std::vector<double>{0.3}, y), std::log(1.5), 1e-12);
  EXPECT_NEAR(t.log_density(std::vector<double>{0.8}, y), std::log(0.5), 1e-12);
}

TEST(LogDensity, TapeMatchesPlainEvaluation) {
  std::mt19937_64 rng(6);
  for (PartitionMode m : kModes) {
    PolyaTree t(3, 2, m);
    randomize(t, rng);
    const Array pts = uniform_points(40, 2, rng);
    ad::Tape tape;
    const ad::Var ld = t.log_density(tape, tape.constant(pts));
    const auto plain = t.log_density_batch(pts);
    for (std::size_t i = 0; i < pts.rows(); ++i) EXPECT_NEAR(ld.value()[i], plain[i], 1e-12);
  }
}

TEST(LogDensity, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const PartitionMode m = kModes[rep % 3];
    PolyaTree t(1 + rep % 4, 2, m);
    randomize(t, rng);
    const Array pts = uniform_points(25, 2, rng);
    std::vector<Array*> params = t.parameter_arrays();
    auto loss = [&](ad::Tape& tape) { return -ad::sum(t.log_density(tape, tape.constant(pts))); };
    EXPECT_LT(check_gradients(loss, params).max_rel_error, 1e-4) << "rep " << rep;
  }
}

TEST(LogDensity, SmoothingKeepsCentreValuesAndGivesLatentGradient) {
  PolyaTree t(2, 1);
  t.set_beta(0, 0, BetaDist(3, 1));
  // Leaf centres: the interpolation weight vanishes there.
  Array centres(Shape{4, 1}, std::vector<double>{0.125, 0.375, 0.625, 0.875});
  ad::Tape tape;
  const ad::Var exact = t.log_density(tape, tape.constant(centres));
  const ad::Var smooth = t.log_density(tape, tape.constant(centres), true);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(exact.value()[i], smooth.value()[i], 1e-12);

  // Halfway between the second and third centres the value is the average of
  // the two leaf log densities and the slope is their difference over 1/4.
  Array z(Shape{1, 1}, std::vector<double>{0.49});
  ad::Tape t2;
  ad::Var zv = t2.parameter(z);
  const ad::Var s = t.log_density(t2, zv, true);
  t2.backward(ad::sum(s));
  const double left = std::log(0.75 * 0.5 / 0.25), right = std::log(0.25 * 0.5 / 0.25);
  EXPECT_NEAR((*t2.gradient(z))[0], (right - left) / 0.25, 1e-12);
  EXPECT_NEAR(s.item(), left + (0.49 - 0.375) / 0.25 * (right - left), 1e-12);
}

TEST(JointPosterior, HandComputations) {
  PolyaTree t(1, 1);
  const Array one(Shape{1, 1}, std::vector<double>{0.3});
  Array half(Shape{1, 1}, std::vector<double>{0.5});
  EXPECT_NEAR(t.log_joint_posterior(one, &half), 0.0, 1e-12);
  Array y(Shape{1, 1}, std::vector<double>{0.75});
  EXPECT_NEAR(t.log_joint_posterior(one, &y), std::log(0.75) - std::log(0.5), 1e-12);
}

TEST(JointPosterior, EmptyBatchIsPriorTerm) {
  PolyaTree t(2, 1);
  t.set_all_betas(BetaDist(2.5, 1.5));
  Array y(Shape{1, 3}, std::vector<double>{0.3, 0.6, 0.8});
  double expected = 0.0;
  for (double v : y.data()) expected += 1.5 * std::log(v) + 0.5 * std::log1p(-v);
  EXPECT_NEAR(t.log_joint_posterior(Array::matrix(0, 1), &y), expected, 1e-12);
}

TEST(JointPosterior, UniformParametersCancelPerPoint) {
  std::mt19937_64 rng(8);
  for (int levels = 1; levels <= 4; ++levels) {
    const PolyaTree t(levels, 3);
    const Array pts = uniform_points(64, 3, rng);
    EXPECT_NEAR(t.log_joint_posterior(pts), 0.0, 1e-12);
  }
}

TEST(JointPosterior, DataTermEqualsSumOfLogDensities) {
  std::mt19937_64 rng(9);
  PolyaTree t(3, 2);
  randomize(t, rng);
  const Array y = t.sample_branches(rng);
  const Array pts = uniform_points(50, 2, rng);
  double data = 0.0;
  for (std::size_t i = 0; i < pts.rows(); ++i) data += t.log_density(pts.row(i), y);
  const double prior = t.log_joint_posterior(Array::matrix(0, 2), &y);
  EXPECT_NEAR(t.log_joint_posterior(pts, &y), data + prior, 1e-10);
}

TEST(JointPosterior, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 20; ++rep) {
    PolyaTree t(1 + rep % 4, 2, kModes[rep % 3]);
    randomize(t, rng);
    const Array pts = uniform_points(30, 2, rng);
    auto loss = [&](ad::Tape& tape) { return -t.log_joint_posterior(tape, pts); };
    EXPECT_LT(check_gradients(loss, t.parameter_arrays()).max_rel_error, 1e-4);
  }
}

TEST(KlToUniform, MatchesScalarSumAndIsZeroAtUniform) {
  std::mt19937_64 rng(11);
  PolyaTree t(3, 2);
  ad::Tape t0;
  EXPECT_NEAR(t.kl_to_uniform(t0).item(), 0.0, 1e-12);
  randomize(t, rng);
  double expected = 0.0;
  for (std::size_t d = 0; d < 2; ++d) {
    for (std::size_t n = 0; n < t.node_count(); ++n) expected += beta_kl(t.beta(d, n), BetaDist(1, 1));
  }
  ad::Tape t1;
  EXPECT_NEAR(t.kl_to_uniform(t1).item(), expected, 1e-10);
  auto loss = [&](ad::Tape& tape) { return t.kl_to_uniform(tape); };
  EXPECT_LT(check_gradients(loss, t.parameter_arrays()).max_rel_error, 1e-4);
}

TEST(Conjugate, RootCountsAddToPrior) {
  const PolyaTree t(1, 1);
  Array pts = Array::matrix(10, 1);
  for (std::size_t i = 0; i < 10; ++i) pts[i] = i < 7 ? 0.1 + 0.05 * i : 0.9;
  const PolyaTree post = t.conjugate_update(pts, BetaDist(1, 1));
  EXPECT_NEAR(post.beta(0, 0).alpha, 8.0, 1e-12);
  EXPECT_NEAR(post.beta(0, 0).beta, 4.0, 1e-12);
}

TEST(Conjugate, UnvisitedNodeKeepsPrior) {
  const PolyaTree t(2, 1);
  Array pts(Shape{3, 1}, std::vector<double>{0.1, 0.2, 0.4});
  const PolyaTree post = t.conjugate_update(pts, BetaDist(2.0, 3.0));
  // Node 2 is the right child of the root, never visited.
  EXPECT_NEAR(post.beta(0, 2).alpha, 2.0, 1e-12);
  EXPECT_NEAR(post.beta(0, 2).beta, 3.0, 1e-12);
}

TEST(Conjugate, MatchesBruteForceRouter) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const int levels = 1 + rep % 4;
    PolyaTree t(levels, 2, kModes[rep % 3]);
    randomize(t, rng);
    const Array pts = uniform_points(100 + 37 * rep, 2, rng);
    const double scale = 1.0 + rep * 0.5;
    const PolyaTree post = t.conjugate_update(pts, BetaDist(1.0, 1.0), scale);
    Array counts(Shape{2, t.node_count(), 2}, 0.0);
    for (std::size_t d = 0; d < 2; ++d) {
      const auto cells = t.intervals(d);
      for (std::size_t i = 0; i < pts.rows(); ++i) {
        const std::size_t leaf = scan_leaf(cells, pts.at(i, d));
        for (int j = 0; j < levels; ++j) {
          const std::size_t bit = (leaf >> (levels - 1 - j)) & 1U;
          counts[(d * t.node_count() + node_on_path(leaf, levels, j)) * 2 + bit] += 1.0;
        }
      }
    }
    EXPECT_EQ(t.routing_counts(pts), counts);
    const Array alphas = post.alphas();
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double expected = 1.0 + scale * counts[k];
      EXPECT_NEAR(alphas[k], expected, 1e-12 * expected);
    }
  }
}

TEST(Conjugate, DyadicUniformBalance) {
  std::mt19937_64 rng(13);
  const PolyaTree t(2, 1);
  const Array pts = uniform_points(100, 1, rng);
  const PolyaTree post = t.conjugate_update(pts, BetaDist(1, 1));
  const Array counts = t.routing_counts(pts);
  for (std::size_t n = 0; n < 3; ++n) {
    const double visits = counts[2 * n] + counts[2 * n + 1];
    EXPECT_NEAR(post.beta(0, n).alpha + post.beta(0, n).beta, 2.0 + visits, 1e-10);
  }
  EXPECT_DOUBLE_EQ(counts[0] + counts[1], 100.0);
}

TEST(Conjugate, RejectsBadArguments) {
  const PolyaTree t(2, 1);
  EXPECT_THROW(t.conjugate_update(Array::matrix(0, 1), BetaDist(1, 1)), ContractViolation);
  EXPECT_THROW(t.conjugate_update(Array::matrix(2, 1, 0.5), BetaDist(1, 1), 0.0), ContractViolation);
  EXPECT_THROW(t.conjugate_update(Array::matrix(2, 2, 0.5), BetaDist(1, 1)), ContractViolation);
}

TEST(Sample, UniformTreeKolmogorovSmirnov) {
  Rng rng(14);
  const PolyaTree t(4, 1);
  const Array x = t.sample(rng, 100000);
  std::vector<double> v = x.data();
  std::sort(v.begin(), v.end());
  double ks = 0.0;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    ks = std::max({ks, v[i] - i / n, (i + 1) / n - v[i]});
    ASSERT_GT(v[i], 0.0);
    ASSERT_LE(v[i], 1.0);
  }
  EXPECT_LT(ks, 0.01);
}

TEST(Sample, RootMassFollowsBetaMean) {
  Rng rng(15);
  PolyaTree t(1, 1);
  t.set_beta(0, 0, BetaDist(30, 10));
  const Array x = t.sample(rng, 100000);
  double left = 0.0;
  for (double v : x.data()) left += v <= 0.5 ? 1.0 : 0.0;
  EXPECT_NEAR(left / 100000.0, 0.75, 0.02);
}

TEST(Sample, LeafFrequenciesMatchExactProbabilities) {
  Rng rng(16);
  std::mt19937_64 init(16);
  for (PartitionMode m : kModes) {
    PolyaTree t(3, 1, m);
    randomize(t, init);
    const Array x = t.sample(rng, 100000);
    const auto cells = t.intervals(0);
    const auto probs = t.leaf_probabilities(0, t.branch_means());
    std::vector<double> freq(cells.size(), 0.0);
    for (double v : x.data()) freq[scan_leaf(cells, v)] += 1.0 / 100000.0;
    double tv = 0.0;
    for (std::size_t k = 0; k < cells.size(); ++k) tv += 0.5 * std::abs(freq[k] - probs[k]);
    EXPECT_LT(tv, 0.02);
  }
}

TEST(Sample, SampledBranchModeIsSeeded) {
  PolyaTree t(3, 2);
  Rng a(3), b(3);
  EXPECT_EQ(t.sample(a, 100, BranchMode::kSampled), t.sample(b, 100, BranchMode::kSampled));
}

TEST(VarianceMap, Examples) {
  PolyaTree t(3, 2);
  for (double v : t.variance_map()) EXPECT_NEAR(v, 1.0 / 12.0, 1e-12);
  t.set_all_betas(BetaDist(100, 100));
  for (double v : t.variance_map()) EXPECT_NEAR(v, 1e4 / (4e4 * 201.0), 1e-12);
  EXPECT_NEAR(t.variance_map()[0], 0.00124, 1e-5);
  PolyaTree mixed(3, 2);
  for (std::size_t n = 0; n < mixed.node_count(); ++n) mixed.set_beta(1, n, BetaDist(50, 50));
  const auto v = mixed.variance_map();
  EXPECT_GT(v[0], v[1]);
}

TEST(VarianceMap, UsesFinalSplitNodesOnly) {
  PolyaTree t(2, 1);
  t.set_beta(0, 0, BetaDist(100, 100));  // root does not enter the map
  t.set_beta(0, 1, BetaDist(1, 1));
  t.set_beta(0, 2, BetaDist(2, 2));
  EXPECT_NEAR(t.variance_map()[0], 0.5 * (1.0 / 12.0 + 4.0 / (16.0 * 5.0)), 1e-15);
}

TEST(PartitionMode, ParseRoundTrip) {
  for (PartitionMode m : kModes) EXPECT_EQ(parse_partition_mode(to_string(m)), m);
  EXPECT_THROW(parse_partition_mode("octal"), UsageError);
}

TEST(SplitLogits, SaturatedProportionsStayInsideUnitInterval) {
  PolyaTree t(2, 1, PartitionMode::kPerLevel);
  t.set_parameters(std::vector<double>{0, 0, 0, 0, 0, 0, 80.0, -80.0});
  for (double b : t.split_proportions(0)) {
    EXPECT_GT(b, 0.0);
    EXPECT_LT(b, 1.0);
  }
  EXPECT_NO_THROW(t.intervals(0));
  const double x = 0.5;
  EXPECT_TRUE(std::isfinite(t.log_density(std::vector<double>{x})));
}

}  // namespace
}  // namespace vpt
