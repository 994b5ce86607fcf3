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

#include "fsiv/iv.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "fsiv/design.hpp"
#include "fsiv/stats.hpp"

namespace fsiv::iv {

namespace {

// Cholesky of the 2x2 posterior precision M plus the projected data moments.
struct OutcomeMoments {
  Eigen::Matrix2d m_mat;
  Eigen::LLT<Eigen::Matrix2d> llt;
  Eigen::Vector2d xty;
  double yty = 0.0;
  double b = 0.0;
  double a = 0.0;
};

OutcomeMoments outcome_moments(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& Z, const Eigen::VectorXd& delta,
                               const NIGPrior& prior) {
  const Eigen::MatrixXd xt = augmented_regressors(x, Z, delta).x_tilde;
  OutcomeMoments mo;
  mo.m_mat = xt.transpose() * xt;
  mo.m_mat.diagonal().array() += 1.0 / prior.coef_scale;
  mo.llt.compute(mo.m_mat);
  if (mo.llt.info() != Eigen::Success) {
    throw NonPositiveB("posterior precision failed to factorize");
  }
  mo.xty = xt.transpose() * y;
  mo.yty = y.squaredNorm();
  // Residual form of b: s + y^t (y - x_tilde M^{-1} x_tilde^t y). The direct
  // difference of the two large quadratics cancels catastrophically when the
  // fit is tight.
  const Eigen::Vector2d coef = mo.llt.solve(mo.xty);
  mo.b = prior.sum_sq_offset + mo.yty - mo.xty.dot(coef);
  mo.a = static_cast<double>(y.size()) + prior.dof_offset;
  if (mo.b <= 0.0) throw NonPositiveB("non-positive marginal scale b");
  return mo;
}

}  // namespace

AugmentedRegressors augmented_regressors(const Eigen::VectorXd& x, const Eigen::MatrixXd& Z,
                                         const Eigen::VectorXd& delta) {
  if (Z.cols() != x.size() || Z.rows() != delta.size()) {
    throw DimensionMismatch("augmented regressor dimensions disagree");
  }
  AugmentedRegressors out;
  out.x_tilde.resize(x.size(), 2);
  out.x_tilde.col(0) = x;
  out.x_tilde.col(1) = x - Z.transpose() * delta;
  return out;
}

WeightComponents log_weight(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& Z, const Eigen::VectorXd& delta,
                            const NIGPrior& prior) {
  const OutcomeMoments mo = outcome_moments(x, y, Z, delta, prior);
  WeightComponents w;
  w.m_mat = mo.m_mat;
  w.b_scalar = mo.b;
  w.a_scalar = mo.a;
  const Eigen::Matrix2d l_mat = mo.llt.matrixL();
  const double log_det_m = 2.0 * (std::log(l_mat(0, 0)) + std::log(l_mat(1, 1)));
  w.log_weight = -0.5 * log_det_m - 0.5 * w.a_scalar * std::log(w.b_scalar);
  return w;
}

ResampleResult resample(const std::vector<double>& log_weights, Eigen::Index n_out,
                        std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(log_weights.size());
  if (n < 1) throw DimensionMismatch("no weights to resample");
  for (double lw : log_weights) {
    if (!std::isfinite(lw)) throw DimensionMismatch("non-finite log weight");
  }
  ResampleResult out;
  const double lse = log_sum_exp(log_weights);
  out.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.weights(i) = std::exp(log_weights[i] - lse);
  out.weights /= out.weights.sum();
  out.ess = 1.0 / out.weights.squaredNorm();
  out.degenerate = out.weights.maxCoeff() > 0.999;

  Eigen::VectorXd cum(n);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += out.weights(i);
    cum(i) = acc;
  }
  cum(n - 1) = 1.0;
  Rng rng(seed);
  out.indices.resize(n_out);
  for (Eigen::Index i = 0; i < n_out; ++i) {
    const double u = rng.uniform();
    out.indices[i] = std::lower_bound(cum.data(), cum.data() + n, u) - cum.data();
  }
  return out;
}

StructuralDraw draw_structural(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& Z, const Eigen::VectorXd& delta,
                               const NIGPrior& prior, Rng& rng) {
  const OutcomeMoments mo = outcome_moments(x, y, Z, delta, prior);
  StructuralDraw draw;
  draw.xi_sq = rng.inv_gamma(0.5 * mo.a, 0.5 * mo.b);
  const Eigen::Vector2d mean = mo.llt.solve(mo.xty);
  Eigen::Vector2d eta(rng.normal(), rng.normal());
  const Eigen::Vector2d coef =
      mean + std::sqrt(draw.xi_sq) * mo.llt.matrixU().solve(eta);
  draw.beta = coef(0);
  draw.alpha = coef(1);
  return draw;
}

IVPosterior run_iv(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& Z,
                   const RunIvConfig& config) {
  if (Z.cols() != x.size() || x.size() != y.size()) {
    throw DimensionMismatch("instrument, treatment, and outcome sizes disagree");
  }

  const frisch::CorrelationResult corr = frisch::sample_correlation(Z);
  const Eigen::MatrixXd z_std =
      ((Z.colwise() - corr.row_mean).array().colwise() / corr.row_sd.array()).matrix();
  const Eigen::VectorXd x_centered = x.array() - x.mean();

  horseshoe::ChainConfig chain_cfg = config.chain;
  std::vector<Eigen::VectorXd> delta_draws;
  if (config.stage1 == Stage1Design::kEnriched) {
    const frisch::FrischDecomposition dec = frisch::solve_min_trace(corr.corr, config.solve);
    const frisch::LoadingsBasis basis = frisch::truncate_loadings(dec, config.rank_rule);
    const design::EnrichedDesign enriched = design::enrich(z_std, basis);
    const horseshoe::HorseshoeChain chain =
        horseshoe::run_chain(enriched.z_tilde, x_centered, chain_cfg);
    delta_draws.reserve(chain.coeff_draws.size());
    for (const auto& d : chain.coeff_draws) {
      delta_draws.push_back(design::collapse_coefficients(d, enriched));
    }
  } else {
    const horseshoe::HorseshoeChain chain = horseshoe::run_chain(z_std, x_centered, chain_cfg);
    delta_draws = chain.coeff_draws;
  }
  // De-standardize each draw to original instrument scale.
  for (auto& d : delta_draws) d = (d.array() / corr.row_sd.array()).matrix();

  const auto n_draws = static_cast<Eigen::Index>(delta_draws.size());
  std::vector<double> lw(n_draws);
  for (Eigen::Index i = 0; i < n_draws; ++i) {
    lw[i] = log_weight(x, y, Z, delta_draws[i], config.prior).log_weight;
  }

  IVPosterior post;
  post.resample_seed = mix64(config.chain.seed ^ 0x5248F1A6DDE1B0E3ULL);
  const ResampleResult rs = resample(lw, n_draws, post.resample_seed);
  post.weights = rs.weights;
  post.ess = rs.ess;
  post.degenerate_weights = rs.degenerate;

  Rng rng(mix64(config.chain.seed ^ 0x1B873593C2B2AE35ULL));
  post.delta.reserve(n_draws);
  post.alpha.resize(n_draws);
  post.beta.resize(n_draws);
  post.xi_sq.resize(n_draws);
  for (Eigen::Index i = 0; i < n_draws; ++i) {
    const Eigen::VectorXd& d = delta_draws[rs.indices[i]];
    const StructuralDraw draw = draw_structural(x, y, Z, d, config.prior, rng);
    post.delta.push_back(d);
    post.alpha[i] = draw.alpha;
    post.beta[i] = draw.beta;
    post.xi_sq[i] = draw.xi_sq;
  }
  return post;
}

}  // namespace fsiv::iv
