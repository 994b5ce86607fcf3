// Copyright 2025 The fsiv Authors
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

#ifndef FSIV_ERRORS_HPP
#define FSIV_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

/**
 * \file
 * \brief Exception hierarchy shared by all fsiv modules.
 *
 * Every error thrown by the library derives from fsiv::Error, so callers can
 * catch a single base type at API boundaries. The CLI maps subfamilies to
 * distinct process exit codes (config / data / numerical).
 */

namespace fsiv {

/// Base class of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input dimensions do not agree.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A data row has zero sample variance and cannot be standardized.
class ZeroVarianceRow : public Error {
 public:
  explicit ZeroVarianceRow(Eigen::Index row)
      : Error("row " + std::to_string(row) + " has zero sample variance"), row_(row) {}

  [[nodiscard]] Eigen::Index row() const noexcept { return row_; }

 private:
  Eigen::Index row_;
};

/// A matrix required to be positive semidefinite is not.
class NotPsd : public Error {
 public:
  explicit NotPsd(double min_eigenvalue)
      : Error("matrix is not positive semidefinite (min eigenvalue " +
              std::to_string(min_eigenvalue) + ")"),
        min_eigenvalue_(min_eigenvalue) {}

  [[nodiscard]] double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// An iterative solver exhausted its iteration budget.
///
/// Carries the last iterate and its feasibility residuals so callers can
/// inspect (or accept) the partial result.
class NoConvergence : public Error {
 public:
  NoConvergence(int max_iter, Eigen::VectorXd last_iterate, double primal_residual,
                double dual_residual, double min_eigenvalue)
      : Error("no convergence after " + std::to_string(max_iter) + " iterations"),
        max_iter_(max_iter),
        last_iterate_(std::move(last_iterate)),
        primal_residual_(primal_residual),
        dual_residual_(dual_residual),
        min_eigenvalue_(min_eigenvalue) {}

  [[nodiscard]] int max_iter() const noexcept { return max_iter_; }
  [[nodiscard]] const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  [[nodiscard]] double primal_residual() const noexcept { return primal_residual_; }
  [[nodiscard]] double dual_residual() const noexcept { return dual_residual_; }
  [[nodiscard]] double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  int max_iter_;
  Eigen::VectorXd last_iterate_;
  double primal_residual_;
  double dual_residual_;
  double min_eigenvalue_;
};

/// Requested factor rank lies outside [1, p-1].
class RankOutOfRange : public Error {
 public:
  using Error::Error;
};

/// A conditional precision matrix failed to factorize during Gibbs sampling.
class NumericalBreakdown : public Error {
 public:
  explicit NumericalBreakdown(long sweep)
      : Error("factorization failure at sweep " + std::to_string(sweep)), sweep_(sweep) {}

  [[nodiscard]] long sweep() const noexcept { return sweep_; }

 private:
  long sweep_;
};

/// A covariance matrix that must be invertible is singular.
class SingularCovariance : public Error {
 public:
  using Error::Error;
};

/// A derived variance came out non-positive (malformed parameter draw).
class NegativeVariance : public Error {
 public:
  using Error::Error;
};

/// The marginal-likelihood scale b collapsed to a non-positive value.
class NonPositiveB : public Error {
 public:
  using Error::Error;
};

/// Malformed numeric input at a known location.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A required CSV header column is absent.
class MissingColumn : public Error {
 public:
  explicit MissingColumn(const std::string& name) : Error("missing column: " + name), name_(name) {}

  [[nodiscard]] const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// A CSV cell could not be parsed as a number.
class NonNumericCell : public ParseError {
 public:
  NonNumericCell(std::size_t line, std::size_t column, const std::string& cell)
      : ParseError(line, column, "non-numeric cell '" + cell + "'") {}
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fsiv

#endif  // FSIV_ERRORS_HPP
