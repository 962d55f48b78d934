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

#ifndef VPT_DATA_HPP_
#define VPT_DATA_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vpt/array.hpp"
#include "vpt/distributions.hpp"
#include "vpt/errors.hpp"

namespace vpt {

enum class Split { kAll, kTrain, kValidation, kTest };

inline Split parse_split(std::string_view s) {
  if (s == "all") return Split::kAll;
  if (s == "train") return Split::kTrain;
  if (s == "validation" || s == "val") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw UsageError("unknown split '" + std::string(s) + "' (expected all, train, validation or test)");
}

// Per-column z-scoring fitted on training rows. Columns whose training
// standard deviation is zero are dropped from the model space.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> kept;

  static Standardization identity(std::size_t dims) {
    return Standardization{std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0),
                           std::vector<bool>(dims, true)};
  }

  std::size_t input_dims() const { return mean.size(); }
  std::size_t output_dims() const {
    return static_cast<std::size_t>(std::count(kept.begin(), kept.end(), true));
  }
  bool is_identity() const {
    for (std::size_t d = 0; d < mean.size(); ++d) {
      if (mean[d] != 0.0 || stddev[d] != 1.0 || !kept[d]) return false;
    }
    return true;
  }

  Array apply(const Array& raw) const {
    if (raw.rank() != 2 || raw.cols() != input_dims()) {
      throw ContractViolation("Standardization: expected " + std::to_string(input_dims()) +
                              " columns, got " + shape_string(raw.shape()));
    }
    Array out = Array::matrix(raw.rows(), output_dims());
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      std::size_t c = 0;
      for (std::size_t d = 0; d < input_dims(); ++d) {
        if (!kept[d]) continue;
        out.at(i, c++) = (raw.at(i, d) - mean[d]) / stddev[d];
      }
    }
    return out;
  }

  Array invert(const Array& standardized) const {
    if (standardized.rank() != 2 || standardized.cols() != output_dims()) {
      throw ContractViolation("Standardization: expected " + std::to_string(output_dims()) +
                              " columns, got " + shape_string(standardized.shape()));
    }
    Array out = Array::matrix(standardized.rows(), input_dims());
    for (std::size_t i = 0; i < standardized.rows(); ++i) {
      std::size_t c = 0;
      for (std::size_t d = 0; d < input_dims(); ++d) {
        out.at(i, d) = kept[d] ? standardized.at(i, c++) * stddev[d] + mean[d] : mean[d];
      }
    }
    return out;
  }
};

struct Dataset {
  Array points;  // [N, D], in model space
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  Standardization standardization;
  std::vector<int> labels;  // generator component, when meaningful

  std::size_t size() const { return points.rows(); }
  std::size_t dims() const { return points.cols(); }

  const std::vector<std::size_t>& indices(Split s) const {
    switch (s) {
      case Split::kTrain: return train;
      case Split::kValidation: return validation;
      case Split::kTest: return test;
      case Split::kAll: break;
    }
    throw ContractViolation("Dataset::indices: kAll has no index list");
  }

  Array rows(const std::vector<std::size_t>& idx) const {
    Array out = Array::matrix(idx.size(), dims());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::copy_n(points.row(idx[i]).begin(), dims(), out.row(i).begin());
    }
    return out;
  }

  Array split(Split s) const { return s == Split::kAll ? points : rows(indices(s)); }
};

// Row counts per split: round(f * n) for train and validation, the rest test.
inline void assign_splits(Dataset& ds, std::vector<double> fractions, Rng& rng) {
  if (fractions.size() != 3) throw UsageError("split fractions must have three entries");
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw UsageError("split fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw UsageError("split fractions must sum to 1");
  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = std::min(n, static_cast<std::size_t>(std::llround(fractions[0] * n)));
  const std::size_t n_val =
      std::min(n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * n)));
  ds.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                       order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  ds.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
}

inline const std::vector<double>& default_split_fractions() {
  static const std::vector<double> kFractions{0.8, 0.1, 0.1};
  return kFractions;
}

// ---- synthetic 2D generators -----------------------------------------------

inline constexpr std::string_view kSynthNames[] = {"eight_gaussians", "two_spirals", "checkerboard"};

// Eight isotropic Gaussians (sd 0.2) with means on the radius-2 circle.
inline Array eight_gaussians(std::size_t n, Rng& rng, std::vector<int>* labels = nullptr) {
  Array out = Array::matrix(n, 2);
  std::uniform_int_distribution<int> pick(0, 7);
  std::normal_distribution<double> noise(0.0, 0.2);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = pick(rng);
    const double angle = 2.0 * std::numbers::pi * k / 8.0;
    out.at(i, 0) = 2.0 * std::cos(angle) + noise(rng);
    out.at(i, 1) = 2.0 * std::sin(angle) + noise(rng);
    if (labels) labels->push_back(k);
  }
  return out;
}

// Two Archimedean arms, radius 0 -> 2 over 1.5 turns, the second rotated by
// pi; radial noise sd 0.1. Rows alternate between arms.
inline Array two_spirals(std::size_t n, Rng& rng, std::vector<int>* labels = nullptr) {
  Array out = Array::matrix(n, 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (std::size_t i = 0; i < n; ++i) {
    const int arm = static_cast<int>(i % 2);
    const double t = unif(rng);
    const double angle = 3.0 * std::numbers::pi * t + arm * std::numbers::pi;
    const double r = 2.0 * t + noise(rng);
    out.at(i, 0) = r * std::cos(angle);
    out.at(i, 1) = r * std::sin(angle);
    if (labels) labels->push_back(arm);
  }
  return out;
}

// Uniform on the eight black cells (i + j even) of a 4x4 board on [-2,2]^2.
inline Array checkerboard(std::size_t n, Rng& rng, std::vector<int>* labels = nullptr) {
  Array out = Array::matrix(n, 2);
  std::uniform_int_distribution<int> pick(0, 7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int cell = pick(rng);
    const int row = cell / 2;
    const int col = 2 * (cell % 2) + (row % 2);
    out.at(i, 0) = -2.0 + col + unif(rng);
    out.at(i, 1) = -2.0 + row + unif(rng);
    if (labels) labels->push_back(row * 4 + col);
  }
  return out;
}

inline Dataset synth(std::string_view name, std::size_t n, Rng& rng,
                     const std::vector<double>& fractions = default_split_fractions()) {
  if (n < 1) throw UsageError("synth: n must be >= 1");
  Dataset ds;
  if (name == "eight_gaussians") {
    ds.points = eight_gaussians(n, rng, &ds.labels);
  } else if (name == "two_spirals") {
    ds.points = two_spirals(n, rng, &ds.labels);
  } else if (name == "checkerboard") {
    ds.points = checkerboard(n, rng, &ds.labels);
  } else {
    throw UsageError("unknown synthetic dataset '" + std::string(name) +
                     "' (expected eight_gaussians, two_spirals or checkerboard)");
  }
  ds.standardization = Standardization::identity(2);
  assign_splits(ds, fractions, rng);
  return ds;
}

// ---- delimited text ----------------------------------------------------

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Rows and columns in error messages are 1-based and count the header.
inline Array parse_delimited(std::string_view text, char delimiter, bool has_header) {
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (has_header && line_no == 1) continue;
    if (trim(line).empty()) {
      if (pos > text.size()) break;
      continue;
    }
    std::size_t col = 0, start = 0;
    for (;;) {
      const std::size_t cut = line.find(delimiter, start);
      std::string_view cell = trim(line.substr(start, cut == std::string_view::npos ? cut : cut - start));
      ++col;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError("non-numeric cell '" + std::string(cell) + "'", line_no, col);
      }
      values.push_back(v);
      if (cut == std::string_view::npos) break;
      start = cut + 1;
    }
    if (rows == 0) {
      cols = col;
    } else if (col != cols) {
      throw ParseError("ragged row: expected " + std::to_string(cols) + " columns, found " +
                           std::to_string(col), line_no, col);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("no data rows", line_no, 0);
  return Array(Shape{rows, cols}, std::move(values));
}

inline Array read_delimited(const std::string& path, char delimiter, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_delimited(buf.str(), delimiter, has_header);
}

// Population mean and standard deviation of the training rows.
inline Standardization fit_standardization(const Array& raw, const std::vector<std::size_t>& rows) {
  const std::size_t dims = raw.cols();
  Standardization s{std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0),
                    std::vector<bool>(dims, true)};
  if (rows.empty()) return s;
  const double n = static_cast<double>(rows.size());
  for (std::size_t d = 0; d < dims; ++d) {
    double m = 0.0;
    for (std::size_t r : rows) m += raw.at(r, d);
    m /= n;
    double v = 0.0;
    for (std::size_t r : rows) v += (raw.at(r, d) - m) * (raw.at(r, d) - m);
    const double sd = std::sqrt(v / n);
    s.mean[d] = m;
    s.stddev[d] = sd > 0.0 ? sd : 1.0;
    s.kept[d] = sd > 0.0;
  }
  return s;
}

inline Dataset make_dataset(Array raw, const std::vector<double>& fractions, Rng& rng,
                            bool standardize) {
  Dataset ds;
  ds.points = std::move(raw);
  assign_splits(ds, fractions, rng);
  if (standardize) {
    ds.standardization = fit_standardization(ds.points, ds.train);
    ds.points = ds.standardization.apply(ds.points);
  } else {
    ds.standardization = Standardization::identity(ds.points.cols());
  }
  return ds;
}

inline Dataset load_delimited(const std::string& path, char delimiter, bool has_header,
                              const std::vector<double>& fractions, Rng& rng,
                              bool standardize = true) {
  return make_dataset(read_delimited(path, delimiter, has_header), fractions, rng, standardize);
}

}  // namespace vpt

#endif  // VPT_DATA_HPP_
