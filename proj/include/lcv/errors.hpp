// Copyright 2026 The langevin-cv Authors
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

#ifndef LCV_ERRORS_HPP_
#define LCV_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lcv {

// Root of every error raised by the library. The CLI maps the subclasses
// onto process exit codes (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid construction parameter or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Dimension or length mismatch between collaborating objects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Empty or malformed input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// CSV ingestion failure. `row` is the 1-based data row (header excluded),
// or 0 when the failure is not tied to a row.
class IngestionError : public DataError {
 public:
  IngestionError(const std::string& what, std::size_t row)
      : DataError(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Non-finite value where a finite one is required.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, Eigen::VectorXd at = {})
      : Error(what), at_(std::move(at)) {}
  const Eigen::VectorXd& at() const { return at_; }

 private:
  Eigen::VectorXd at_;
};

// A chain produced a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step,
                  std::ptrdiff_t replica = -1)
      : Error(what), step_(step), replica_(replica) {}
  std::size_t step() const { return step_; }
  // -1 when raised outside replica orchestration.
  std::ptrdiff_t replica() const { return replica_; }

 private:
  std::size_t step_;
  std::ptrdiff_t replica_;
};

// Iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate,
                   double gradient_norm)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        gradient_norm_(gradient_norm) {}
  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  Eigen::VectorXd last_iterate_;
  double gradient_norm_;
};

// A file or directory could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Process exit codes used by the command-line front end.
inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const ShapeError*>(&e)) return 3;
  if (dynamic_cast<const DivergenceError*>(&e)) return 4;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  if (dynamic_cast<const ConvergenceError*>(&e)) return 4;
  return 1;
}

}  // namespace lcv

#endif  // LCV_ERRORS_HPP_
