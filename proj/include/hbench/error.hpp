// Copyright 2026 The hbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hbench {

// Base of every error raised by the engine. The CLI maps these to exit
// status 1 (domain error); anything else escaping is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape disagreement between operands or against a network layout.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced or supplied (overflow in exp, NaN input, ...).
class NumericRangeError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or infeasible configuration (constraint sets, transforms,
// dynamics parameters, scenario documents).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Document parse failure. line/column are 1-based; zero when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0,
             std::size_t column = 0)
      : Error(line == 0 ? what
                        : what + " (line " + std::to_string(line) +
                              ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Conjoint design could not be made full rank, or a fit was attempted on a
// rank-deficient design.
class DesignError : public Error {
 public:
  using Error::Error;
};

// Power iteration ran out of iterations. Carries the last iterate so the
// caller can inspect or restart from it.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double last_estimate,
                      std::vector<double> last_vector)
      : Error(what),
        last_estimate_(last_estimate),
        last_vector_(std::move(last_vector)) {}

  double last_estimate() const noexcept { return last_estimate_; }
  const std::vector<double>& last_vector() const noexcept {
    return last_vector_;
  }

 private:
  double last_estimate_;
  std::vector<double> last_vector_;
};

// Lookup of an id (stakeholder, metric, model, session, level label) that is
// not known to the object being queried.
class UnknownIdError : public Error {
 public:
  using Error::Error;
};

}  // namespace hbench
