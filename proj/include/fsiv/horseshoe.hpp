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

#ifndef FSIV_HORSESHOE_HPP
#define FSIV_HORSESHOE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fsiv/errors.hpp"
#include "fsiv/rng.hpp"

/**
 * \file
 * \brief Gibbs sampler for linear regression under the horseshoe prior.
 *
 * Model: x | delta, sigma2 ~ N(X^t delta, sigma2 I) with
 *   delta_j | lambda_j, s ~ N(0, s^2 lambda_j^2),
 *   lambda_j ~ C+(0,1),  s ~ C+(0,1),  sigma2 ~ inverse-gamma.
 *
 * Each half-Cauchy scale is augmented with an inverse-gamma auxiliary so that
 * every full conditional is a standard-family draw; the coefficient block is
 * drawn jointly from its Gaussian conditional via a Cholesky factorization of
 * the m x m precision.
 */

namespace fsiv::horseshoe {

/// Sampler configuration.
struct ChainConfig {
  int n_iter = 6000;
  int n_burn = 1000;
  int thin = 1;
  std::uint64_t seed = 0;
  double noise_shape = 0.5;  ///< Inverse-gamma prior shape on the noise variance.
  double noise_scale = 0.5;  ///< Inverse-gamma prior scale on the noise variance.
  /// Hold the noise variance fixed instead of sampling it (test hook).
  std::optional<double> fix_noise_var;
  /// Hold the global scale fixed instead of sampling it (test hook).
  std::optional<double> fix_global_scale;
};

/// Full Gibbs state for one sweep.
struct HorseshoeState {
  Eigen::VectorXd coeffs;        ///< delta, length m.
  Eigen::VectorXd local_scales;  ///< lambda_j > 0.
  double global_scale = 1.0;     ///< s > 0.
  double noise_var = 1.0;        ///< sigma2 > 0.
  Eigen::VectorXd local_aux;     ///< One inverse-gamma auxiliary per lambda_j.
  double global_aux = 1.0;       ///< Auxiliary for s.

  /// All-ones starting state for an m-dimensional regression.
  static HorseshoeState initial(Eigen::Index m);
};

/// Post burn-in, thinned draws plus mixing diagnostics.
struct HorseshoeChain {
  std::vector<Eigen::VectorXd> coeff_draws;
  std::vector<double> noise_draws;
  /// Average over kept sweeps of the conditional posterior mean of the
  /// coefficients; a lower-variance estimate of the posterior mean than the
  /// average of the draws themselves.
  Eigen::VectorXd coeff_mean;
  /// Effective sample size of each coefficient's chain.
  Eigen::VectorXd ess;
};

/// One full sweep over (coeffs, local scales, global scale, noise variance).
///
/// \throws NumericalBreakdown if the coefficient precision fails to factorize.
HorseshoeState gibbs_step(const HorseshoeState& state, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& x, Rng& rng, const ChainConfig& cfg = {});

/// Run a full chain; deterministic given cfg.seed.
HorseshoeChain run_chain(const Eigen::MatrixXd& X, const Eigen::VectorXd& x,
                         const ChainConfig& cfg);

/// Draws of the prior shrinkage factor kappa = 1/(1 + lambda^2), lambda ~ C+(0,1).
std::vector<double> prior_shrinkage_sample(std::size_t n_draws, std::uint64_t seed);

}  // namespace fsiv::horseshoe

#endif  // FSIV_HORSESHOE_HPP
