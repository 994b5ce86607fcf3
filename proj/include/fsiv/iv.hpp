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

#ifndef FSIV_IV_HPP
#define FSIV_IV_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fsiv/errors.hpp"
#include "fsiv/frisch.hpp"
#include "fsiv/horseshoe.hpp"
#include "fsiv/rng.hpp"

/**
 * \file
 * \brief Importance resampler for the structural parameters.
 *
 * Stage 1 samples first-stage coefficient draws delta from the treatment
 * regression alone. Each draw is then reweighted by the outcome marginal
 * likelihood obtained by integrating (alpha, beta, xi^2) out of the
 * augmented regression y ~ x_tilde(delta) under a normal-inverse-gamma
 * prior: w proportional to det(M)^{-1/2} b^{-a/2}. After multinomial
 * resampling, structural parameters are drawn from their conjugate
 * posterior given each surviving delta.
 */

namespace fsiv::iv {

/// Normal-inverse-gamma prior on (alpha, beta, xi^2).
struct NIGPrior {
  double coef_scale = 25.0;    ///< c: prior variance of alpha and beta.
  double sum_sq_offset = 1.0;  ///< s: constant added to the residual sum of squares in b.
  double dof_offset = 1.0;     ///< v: constant added to n in the degrees of freedom a.
};

/// The n x 2 design (x_i, x_i - z_i^t delta) of the augmented outcome regression.
struct AugmentedRegressors {
  Eigen::MatrixXd x_tilde;
};

/// Pieces of one importance weight.
struct WeightComponents {
  Eigen::Matrix2d m_mat;    ///< M = c^{-1} I + x_tilde^t x_tilde.
  double b_scalar = 0.0;    ///< b = s + y^t y - y^t x_tilde M^{-1} x_tilde^t y.
  double a_scalar = 0.0;    ///< a = n + v.
  double log_weight = 0.0;  ///< -log det(M)/2 - (a/2) log b.
};

/// Resampled indices with the weight-degeneracy diagnostics.
struct ResampleResult {
  std::vector<Eigen::Index> indices;
  Eigen::VectorXd weights;  ///< Normalized weights, summing to one.
  double ess = 0.0;         ///< (sum w)^2 / sum w^2.
  bool degenerate = false;  ///< One weight carries more than 99.9% of the mass.
};

/// One structural draw. Coefficient order follows y = beta x + alpha (x - z^t delta).
struct StructuralDraw {
  double alpha = 0.0;
  double beta = 0.0;
  double xi_sq = 0.0;
};

/// Which design stage 1 conditions on.
enum class Stage1Design { kEnriched, kRaw };

/// Pipeline configuration. All randomness derives from chain.seed.
struct RunIvConfig {
  horseshoe::ChainConfig chain;
  NIGPrior prior;
  frisch::RankRule rank_rule = frisch::RankRule::threshold(0.05);
  frisch::SolveOptions solve;
  Stage1Design stage1 = Stage1Design::kEnriched;
};

/// Joint posterior sample of (delta, alpha, beta, xi^2) after resampling.
struct IVPosterior {
  std::vector<Eigen::VectorXd> delta;  ///< Resampled first-stage coefficients (original scale).
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> xi_sq;
  Eigen::VectorXd weights;  ///< Normalized pre-resampling weights.
  double ess = 0.0;
  bool degenerate_weights = false;
  std::uint64_t resample_seed = 0;
};

/// Build the augmented regressors (x_i, x_i - z_i^t delta).
AugmentedRegressors augmented_regressors(const Eigen::VectorXd& x, const Eigen::MatrixXd& Z,
                                         const Eigen::VectorXd& delta);

/// Marginal-likelihood weight of one delta draw, computed in log space.
///
/// \throws NonPositiveB if the quadratic form collapses b to a non-positive value.
WeightComponents log_weight(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& Z, const Eigen::VectorXd& delta,
                            const NIGPrior& prior);

/// Multinomial resampling with replacement after log-sum-exp normalization.
ResampleResult resample(const std::vector<double>& log_weights, Eigen::Index n_out,
                        std::uint64_t seed);

/// Draw (alpha, beta, xi^2) from the conjugate posterior given delta:
/// xi^2 ~ inverse-gamma(a/2, b/2), then (alpha, beta) ~ N(M^{-1} x_tilde^t y, xi^2 M^{-1}).
StructuralDraw draw_structural(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& Z, const Eigen::VectorXd& delta,
                               const NIGPrior& prior, Rng& rng);

/// Full pipeline: standardize Z and center x, decompose, enrich (or not),
/// run the first-stage chain, collapse and de-standardize each delta draw,
/// weight, resample, and draw structural parameters per surviving draw.
IVPosterior run_iv(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& Z,
                   const RunIvConfig& config);

}  // namespace fsiv::iv

#endif  // FSIV_IV_HPP
