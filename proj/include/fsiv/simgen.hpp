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

#ifndef FSIV_SIMGEN_HPP
#define FSIV_SIMGEN_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "fsiv/errors.hpp"
#include "fsiv/rng.hpp"

/**
 * \file
 * \brief Synthetic data generators for the simulation studies.
 *
 * Instruments follow a k-factor Gaussian model: z ~ N(0, B B^t + Psi^2) with
 * loadings B = A W, where A has standard normal entries and W scales each
 * factor by 1 + |t_5| (sorted so factor strength decreases with index).
 * Idiosyncratic scales are psi_j = |b_j| / u_j with u_j uniform on
 * [1/2, 7/4]. The treatment loads on the factors through theta, inducing the
 * regression coefficients delta = (B B^t + Psi^2)^{-1} B theta on z.
 */

namespace fsiv::simgen {

/// Structural parameters for outcome generation.
struct IvParams {
  double alpha = -0.08;
  double beta = 0.2;
  double xi = 0.2;
};

/// Generator configuration for one simulation regime.
struct RegimeSpec {
  int p = 30;
  int n = 60;
  int k = 3;
  Eigen::VectorXd theta;       ///< Factor weights of the treatment, length k.
  double sigma_resid = 0.2;    ///< Treatment noise scale given the factors.
  std::optional<IvParams> iv;  ///< Present when an outcome equation is generated.
  std::uint64_t seed = 0;

  /// Strong-factor regime: k = 3, treatment on the dominant factor.
  static RegimeSpec regime1();
  /// Weak-factor regime: k = 10, treatment on the least dominant factor.
  static RegimeSpec regime2();
  /// Interval-coverage setting: p = 20, k = 3, with the outcome equation.
  static RegimeSpec coverage();
};

/// One draw of loadings and idiosyncratic variances.
struct FactorParams {
  Eigen::MatrixXd B;     ///< p x k loadings, columns ordered by decreasing scale.
  Eigen::VectorXd psi2;  ///< Idiosyncratic variances, length p.
  Eigen::VectorXd W;     ///< Factor scales w_g = 1 + |t_5|, sorted descending.
};

FactorParams gen_factor_params(const RegimeSpec& spec, Rng& rng);

/// i.i.d. columns z_i ~ N(0, B B^t + Psi^2), generated via the factor form.
Eigen::MatrixXd gen_instruments(const FactorParams& params, int n, Rng& rng);

/// Population regression coefficients delta = (B B^t + Psi^2)^{-1} B theta.
///
/// \throws SingularCovariance if the linear solve is unreliable.
Eigen::VectorXd implied_delta(const FactorParams& params, const Eigen::VectorXd& theta);

/// Best attainable prediction error sqrt(1 - m + sigma_resid^2), where
/// m = theta^t B^t (B B^t + Psi^2)^{-1} B theta is the share of treatment
/// variance recoverable from the instruments.
///
/// \throws NegativeVariance if the argument of the root is non-positive.
double theoretical_sigma(const FactorParams& params, const Eigen::VectorXd& theta,
                         double sigma_resid);

/// Treatment draws x = Z^t delta + N(0, sigma^2).
Eigen::VectorXd gen_response(const Eigen::MatrixXd& Z, const Eigen::VectorXd& delta, double sigma,
                             Rng& rng);

/// Outcome draws y_i = beta x_i + alpha (x_i - z_i^t delta) + N(0, xi^2).
Eigen::VectorXd gen_iv_outcome(const Eigen::VectorXd& x, const Eigen::MatrixXd& Z,
                               const Eigen::VectorXd& delta, double alpha, double beta, double xi,
                               Rng& rng);

}  // namespace fsiv::simgen

#endif  // FSIV_SIMGEN_HPP
