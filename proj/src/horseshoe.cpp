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

#include "fsiv/horseshoe.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "fsiv/stats.hpp"

namespace fsiv::horseshoe {

namespace {

// One sweep with the Gram matrix and cross-product precomputed.
void sweep(HorseshoeState& st, const Eigen::MatrixXd& XXt, const Eigen::VectorXd& Xy,
           const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Rng& rng, const ChainConfig& cfg,
           long sweep_index, Eigen::VectorXd* conditional_mean) {
  const Eigen::Index m = XXt.rows();
  const auto n = static_cast<double>(y.size());
  const double s2 = st.global_scale * st.global_scale;

  Eigen::MatrixXd A = XXt / st.noise_var;
  for (Eigen::Index j = 0; j < m; ++j) {
    A(j, j) += 1.0 / (s2 * st.local_scales(j) * st.local_scales(j));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw NumericalBreakdown(sweep_index);
  const Eigen::VectorXd mu = llt.solve(Xy / st.noise_var);
  Eigen::VectorXd eta(m);
  for (Eigen::Index j = 0; j < m; ++j) eta(j) = rng.normal();
  st.coeffs = mu + llt.matrixU().solve(eta);
  if (conditional_mean != nullptr) *conditional_mean = mu;

  // lambda_j^2 | . ~ IG(1, 1/nu_j + delta_j^2 / (2 s^2)), then nu_j | . ~ IG(1, 1 + 1/lambda_j^2).
  double scale_sum = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double d2 = st.coeffs(j) * st.coeffs(j);
    const double lam2 = rng.inv_gamma(1.0, 1.0 / st.local_aux(j) + d2 / (2.0 * s2));
    st.local_scales(j) = std::sqrt(lam2);
    st.local_aux(j) = rng.inv_gamma(1.0, 1.0 + 1.0 / lam2);
    scale_sum += d2 / lam2;
  }

  if (cfg.fix_global_scale) {
    st.global_scale = *cfg.fix_global_scale;
  } else {
    const double new_s2 =
        rng.inv_gamma(0.5 * (static_cast<double>(m) + 1.0), 1.0 / st.global_aux + 0.5 * scale_sum);
    st.global_scale = std::sqrt(new_s2);
    st.global_aux = rng.inv_gamma(1.0, 1.0 + 1.0 / new_s2);
  }

  if (cfg.fix_noise_var) {
    st.noise_var = *cfg.fix_noise_var;
  } else {
    const double rss = (y - X.transpose() * st.coeffs).squaredNorm();
    st.noise_var = rng.inv_gamma(cfg.noise_shape + 0.5 * n, cfg.noise_scale + 0.5 * rss);
  }
}

}  // namespace

HorseshoeState HorseshoeState::initial(Eigen::Index m) {
  HorseshoeState st;
  st.coeffs = Eigen::VectorXd::Zero(m);
  st.local_scales = Eigen::VectorXd::Ones(m);
  st.local_aux = Eigen::VectorXd::Ones(m);
  return st;
}

HorseshoeState gibbs_step(const HorseshoeState& state, const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& x, Rng& rng, const ChainConfig& cfg) {
  if (X.cols() != x.size() || X.rows() != state.coeffs.size()) {
    throw DimensionMismatch("design, response, and state dimensions disagree");
  }
  HorseshoeState next = state;
  sweep(next, X * X.transpose(), X * x, X, x, rng, cfg, 0, nullptr);
  return next;
}

HorseshoeChain run_chain(const Eigen::MatrixXd& X, const Eigen::VectorXd& x,
                         const ChainConfig& cfg) {
  if (X.cols() != x.size()) throw DimensionMismatch("design and response lengths disagree");
  if (cfg.n_burn < 0 || cfg.n_iter <= cfg.n_burn || cfg.thin < 1) {
    throw DimensionMismatch("invalid chain configuration");
  }
  const Eigen::Index m = X.rows();
  const Eigen::MatrixXd XXt = X * X.transpose();
  const Eigen::VectorXd Xy = X * x;

  Rng rng(cfg.seed);
  HorseshoeState st = HorseshoeState::initial(m);
  if (cfg.fix_noise_var) st.noise_var = *cfg.fix_noise_var;
  if (cfg.fix_global_scale) st.global_scale = *cfg.fix_global_scale;

  HorseshoeChain chain;
  const int kept = (cfg.n_iter - cfg.n_burn) / cfg.thin;
  chain.coeff_draws.reserve(kept);
  chain.noise_draws.reserve(kept);
  Eigen::VectorXd mu_acc = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd mu(m);
  long n_mu = 0;

  for (int it = 1; it <= cfg.n_iter; ++it) {
    sweep(st, XXt, Xy, X, x, rng, cfg, it, &mu);
    if (it > cfg.n_burn) {
      mu_acc += mu;
      ++n_mu;
      if ((it - cfg.n_burn) % cfg.thin == 0) {
        chain.coeff_draws.push_back(st.coeffs);
        chain.noise_draws.push_back(st.noise_var);
      }
    }
  }
  chain.coeff_mean = mu_acc / static_cast<double>(n_mu);

  chain.ess.resize(m);
  std::vector<double> coord(chain.coeff_draws.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    for (std::size_t t = 0; t < chain.coeff_draws.size(); ++t) coord[t] = chain.coeff_draws[t](j);
    chain.ess(j) = effective_sample_size(coord);
  }
  return chain;
}

std::vector<double> prior_shrinkage_sample(std::size_t n_draws, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> kappa(n_draws);
  for (auto& k : kappa) {
    const double lam = rng.half_cauchy();
    k = 1.0 / (1.0 + lam * lam);
  }
  return kappa;
}

}  // namespace fsiv::horseshoe
