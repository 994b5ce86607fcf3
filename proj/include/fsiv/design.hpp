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

#ifndef FSIV_DESIGN_HPP
#define FSIV_DESIGN_HPP

#include <Eigen/Core>

#include "fsiv/errors.hpp"
#include "fsiv/frisch.hpp"

/**
 * \file
 * \brief Enriched (over-complete) design built from a loadings basis.
 *
 * The enriched matrix stacks the k factor projections on top of the p
 * residual predictors: Z_tilde = (B_tilde^t Z; (I - B_tilde B_tilde^t) Z).
 * Its rows span the same space as the rows of Z, and the induced prior on
 * the collapsed coefficient vector is standard normal by construction.
 */

namespace fsiv::design {

/// The (p+k) x n augmented design with its projector.
struct EnrichedDesign {
  Eigen::MatrixXd z_tilde;    ///< Rows 1..k: factor projections; rows k+1..k+p: residuals.
  Eigen::MatrixXd b_tilde;    ///< p x k orthonormal basis (possibly k = 0).
  Eigen::MatrixXd projector;  ///< b_tilde b_tilde^t, idempotent.
  Eigen::Index p = 0;
  Eigen::Index k = 0;
  Eigen::Index n = 0;
};

/// Stack factor projections atop residual predictors.
EnrichedDesign enrich(const Eigen::MatrixXd& Z, const frisch::LoadingsBasis& basis);

/// Map an enriched coefficient vector (k factor entries, then p residual
/// entries) back to a p-vector on the original predictors, preserving fits:
/// Z^t delta = z_tilde^t delta_tilde.
Eigen::VectorXd collapse_coefficients(const Eigen::VectorXd& delta_tilde,
                                      const EnrichedDesign& design);

/// Prior covariance induced on the collapsed coefficients by independent
/// standard normals on the enriched ones; identity for any orthonormal basis.
/// Exposed as a test surface.
Eigen::MatrixXd implied_prior_covariance(const EnrichedDesign& design);

}  // namespace fsiv::design

#endif  // FSIV_DESIGN_HPP
