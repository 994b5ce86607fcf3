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

#ifndef FSIV_FRISCH_HPP
#define FSIV_FRISCH_HPP

#include <Eigen/Core>

#include "fsiv/errors.hpp"

/**
 * \file
 * \brief Minimum-trace factor decomposition of a correlation matrix.
 *
 * Given a symmetric PSD matrix Sigma, the solver finds a nonnegative diagonal
 * D maximizing trace(D) subject to Sigma - D remaining positive semidefinite
 * and 0 <= D_jj <= Sigma_jj. The residual Sigma - D* is the "common" part;
 * its leading eigenvectors form an orthonormal loadings basis used to build
 * the enriched regression design.
 */

namespace fsiv::frisch {

/// Solver knobs for solve_min_trace.
struct SolveOptions {
  /// Max-norm tolerance on successive diagonal iterates.
  double tol = 1e-7;
  /// Allowed negative-eigenvalue slack when declaring feasibility.
  double tol_psd = 1e-8;
  /// Iteration budget. Exceeding it raises NoConvergence.
  int max_iter = 20000;
};

/// Result of the minimum-trace split Sigma = low_rank + diag(d_star).
struct FrischDecomposition {
  Eigen::VectorXd d_star;    ///< Diagonal of D*, entrywise in [0, Sigma_jj].
  Eigen::MatrixXd low_rank;  ///< Sigma - diag(d_star), PSD up to tol_psd.
  Eigen::VectorXd eigvals;   ///< Eigenvalues of low_rank, sorted descending.
  Eigen::MatrixXd eigvecs;   ///< Orthonormal eigenvectors, columns match eigvals.
  int iterations = 0;        ///< Sweeps used by the solver.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double min_eigenvalue = 0.0;  ///< Smallest eigenvalue of low_rank after the final shift.
};

/// How many leading eigenvectors to keep when truncating the loadings.
struct RankRule {
  enum class Kind { kFixed, kThreshold };

  /// Keep exactly k eigenvectors.
  static RankRule fixed(int k) { return {Kind::kFixed, k, 0.0}; }

  /// Keep eigenvalues exceeding the fraction tau of the total positive
  /// spectrum mass of the common part.
  static RankRule threshold(double tau) { return {Kind::kThreshold, 0, tau}; }

  Kind kind = Kind::kThreshold;
  int k = 0;
  double tau = 0.05;
};

/// Orthonormal basis of the leading common-variation directions.
struct LoadingsBasis {
  Eigen::MatrixXd b_tilde;  ///< p x k, orthonormal columns.
  int k = 0;
  /// Largest absolute off-diagonal of Sigma - b_tilde diag(top eigvals) b_tilde^t,
  /// i.e. how far the implied idiosyncratic matrix is from diagonal.
  double residual_offdiag = 0.0;
};

/// Row standardization summary plus the resulting correlation matrix.
struct CorrelationResult {
  Eigen::MatrixXd corr;      ///< p x p, unit diagonal.
  Eigen::VectorXd row_mean;  ///< Per-row means of the input.
  Eigen::VectorXd row_sd;    ///< Per-row standard deviations (n denominator).
};

/// Sample correlation of the rows of Z (p x n), with the standardization
/// parameters needed to map coefficients back to the original scale.
///
/// \throws ZeroVarianceRow if a row of Z is constant.
/// \throws DimensionMismatch if n < 2.
CorrelationResult sample_correlation(const Eigen::MatrixXd& Z);

/// Frobenius-nearest PSD matrix: eigendecompose and clip negative eigenvalues.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& M);

/// Solve max trace(D) s.t. D diagonal, 0 <= D_jj <= Sigma_jj, Sigma - D PSD.
///
/// The splitting scheme alternates a box projection of the diagonal against a
/// projection onto the PSD cone (one eigendecomposition per sweep), with
/// over-relaxation and residual-balancing penalty adaptation. Convergence is
/// declared when successive diagonals move less than opts.tol in max-norm,
/// both splitting residuals are small, and the smallest eigenvalue of
/// Sigma - D is above -opts.tol_psd; any residual negative eigenvalue is then
/// removed by a uniform shift of D. The solver is deterministic.
///
/// \throws NotPsd if sigma itself has an eigenvalue below -opts.tol_psd.
/// \throws NoConvergence carrying the last iterate if the budget is exhausted.
FrischDecomposition solve_min_trace(const Eigen::MatrixXd& sigma, const SolveOptions& opts = {});

/// Keep the leading eigenvectors of the common part per the rank rule.
///
/// \throws RankOutOfRange unless 1 <= k <= p-1.
LoadingsBasis truncate_loadings(const FrischDecomposition& dec, const RankRule& rule);

}  // namespace fsiv::frisch

#endif  // FSIV_FRISCH_HPP
