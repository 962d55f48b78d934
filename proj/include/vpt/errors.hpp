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

#ifndef VPT_ERRORS_HPP_
#define VPT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace vpt {

// Argument outside the mathematical domain of an operation (log of a
// non-positive value, a point outside (0,1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke a structural precondition: mismatched shapes or dimensions,
// out-of-range proportions, a non-scalar loss.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what + " (row " + std::to_string(row) + ", column " +
                           std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace vpt

#endif  // VPT_ERRORS_HPP_
