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

#include "fsiv/frisch.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace fsiv::frisch {

namespace {

void require_symmetric(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw DimensionMismatch("matrix is not square");
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) throw DimensionMismatch("matrix is not symmetric");
}

// Eigendecomposition sorted descending.
void eig_desc(const Eigen::MatrixXd& M, Eigen::VectorXd& vals, Eigen::MatrixXd& vecs) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  vals = es.eigenvalues().reverse();
  vecs = es.eigenvectors().rowwise().reverse();
}

}  // namespace

CorrelationResult sample_correlation(const Eigen::MatrixXd& Z) {
  const Eigen::Index p = Z.rows();
  const Eigen::Index n = Z.cols();
  if (n < 2) throw DimensionMismatch("need at least two columns");
  CorrelationResult out;
  out.row_mean = Z.rowwise().mean();
  Eigen::MatrixXd centered = Z.colwise() - out.row_mean;
  out.row_sd = (centered.array().square().rowwise().mean()).sqrt();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (out.row_sd(j) <= 1e-12 * std::max(1.0, std::abs(out.row_mean(j)))) {
      throw ZeroVarianceRow(j);
    }
  }
  centered.array().colwise() /= out.row_sd.array();
  out.corr = centered * centered.transpose() / static_cast<double>(n);
  // Round off the unit diagonal and enforce exact symmetry.
  out.corr = 0.5 * (out.corr + out.corr.transpose()).eval();
  out.corr.diagonal().setOnes();
  return out;
}

Eigen::MatrixXd psd_project(const Eigen::MatrixXd& M) {
  require_symmetric(M);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

FrischDecomposition solve_min_trace(const Eigen::MatrixXd& sigma, const SolveOptions& opts) {
  require_symmetric(sigma);
  const Eigen::Index p = sigma.rows();
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    const double lam_min = es.eigenvalues().minCoeff();
    if (lam_min < -opts.tol_psd) throw NotPsd(lam_min);
  }

  const Eigen::VectorXd sigma_diag = sigma.diagonal();
  const double scale = std::max(1.0, sigma_diag.cwiseAbs().maxCoeff());
  const double resid_tol = 100.0 * opts.tol * scale;
  const double alpha = 1.7;
  double rho = 1.0;

  Eigen::MatrixXd S = psd_project(sigma);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd L = sigma;
  Eigen::MatrixXd LR(p, p);
  Eigen::MatrixXd S_new(p, p);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd d_prev;
  double r_prim = 0.0;
  double r_dual = 0.0;

  for (int it = 1; it <= opts.max_iter; ++it) {
    const Eigen::VectorXd v_diag =
        S.diagonal() - U.diagonal() - Eigen::VectorXd::Constant(p, 1.0 / rho);
    L.diagonal() = v_diag.cwiseMax(0.0).cwiseMin(sigma_diag);
    LR = alpha * L + (1.0 - alpha) * S;
    S_new = psd_project(LR + U);
    U += LR - S_new;
    r_prim = (L - S_new).cwiseAbs().maxCoeff();
    r_dual = rho * (S_new - S).cwiseAbs().maxCoeff();
    S.swap(S_new);
    d = sigma_diag - L.diagonal();

    const double changed =
        d_prev.size() == 0 ? std::numeric_limits<double>::infinity()
                           : (d - d_prev).cwiseAbs().maxCoeff();
    d_prev = d;
    if (changed < opts.tol && r_prim < resid_tol && r_dual < resid_tol) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma - Eigen::MatrixXd(d.asDiagonal()),
                                                        Eigen::EigenvaluesOnly);
      const double lam_min = es.eigenvalues().minCoeff();
      if (lam_min >= -opts.tol_psd) {
        if (lam_min < 0.0) d = (d.array() + lam_min).cwiseMax(0.0).matrix();
        FrischDecomposition dec;
        dec.d_star = d;
        dec.low_rank = sigma - Eigen::MatrixXd(d.asDiagonal());
        eig_desc(dec.low_rank, dec.eigvals, dec.eigvecs);
        dec.iterations = it;
        dec.primal_residual = r_prim;
        dec.dual_residual = r_dual;
        dec.min_eigenvalue = dec.eigvals.minCoeff();
        return dec;
      }
    }
    if (it % 10 == 0) {
      if (r_prim > 10.0 * r_dual && rho < 1e4) {
        rho *= 2.0;
        U /= 2.0;
      } else if (r_dual > 10.0 * r_prim && rho > 1e-4) {
        rho /= 2.0;
        U *= 2.0;
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma - Eigen::MatrixXd(d.asDiagonal()),
                                                    Eigen::EigenvaluesOnly);
  throw NoConvergence(opts.max_iter, d, r_prim, r_dual, es.eigenvalues().minCoeff());
}

LoadingsBasis truncate_loadings(const FrischDecomposition& dec, const RankRule& rule) {
  const Eigen::Index p = dec.eigvals.size();
  Eigen::Index k = 0;
  if (rule.kind == RankRule::Kind::kFixed) {
    k = rule.k;
  } else {
    const double total = dec.eigvals.cwiseMax(0.0).sum();
    for (Eigen::Index i = 0; i < p; ++i) {
      if (dec.eigvals(i) > rule.tau * total) ++k;
    }
    k = std::clamp<Eigen::Index>(k, 1, p - 1);
  }
  if (k < 1 || k >= p) {
    throw RankOutOfRange("rank " + std::to_string(k) + " outside [1, " + std::to_string(p - 1) +
                         "]");
  }
  LoadingsBasis basis;
  basis.k = static_cast<int>(k);
  basis.b_tilde = dec.eigvecs.leftCols(k);
  const Eigen::MatrixXd sigma =
      dec.low_rank + Eigen::MatrixXd(dec.d_star.asDiagonal());
  Eigen::MatrixXd psi2 = sigma - basis.b_tilde * dec.eigvals.head(k).asDiagonal() *
                                     basis.b_tilde.transpose();
  psi2.diagonal().setZero();
  basis.residual_offdiag = psi2.cwiseAbs().maxCoeff();
  return basis;
}

}  // namespace fsiv::frisch
