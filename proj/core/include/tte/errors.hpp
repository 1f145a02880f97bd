/*
 * Copyright 2026 The TTE Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TTE_ERRORS_HPP_
#define TTE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tte {

// Every failure raised by the library derives from Error so callers can map
// it to an exit status in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A required column is missing or the schema is internally inconsistent.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A cell could not be parsed as a number.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t row)
      : Error(message), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Empirical positivity fails: no rows, or one treatment arm is empty.
class PositivityError : public Error {
 public:
  using Error::Error;
};

// A probability (propensity, weight) lies outside its admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A Dirichlet arm has no strictly positive concentration.
class DegenerateArmError : public Error {
 public:
  using Error::Error;
};

// An estimand is not defined on an imputed trial (e.g. an empty arm).
class EstimandUndefinedError : public Error {
 public:
  using Error::Error;
};

// Malformed model input: non-finite covariates, schema mismatch.
class InputError : public Error {
 public:
  using Error::Error;
};

// A kernel cannot expose the exact next-step law an exact check needs.
class UnsupportedKernelError : public Error {
 public:
  using Error::Error;
};

// Bad command-line or configuration usage (exit status 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace tte

#endif  // TTE_ERRORS_HPP_
