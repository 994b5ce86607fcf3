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

#include "fsiv/simgen.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace fsiv::simgen {

RegimeSpec RegimeSpec::regime1() {
  RegimeSpec spec;
  spec.p = 30;
  spec.n = 60;
  spec.k = 3;
  spec.theta = Eigen::VectorXd::Zero(3);
  spec.theta(0) = 1.0;
  return spec;
}

RegimeSpec RegimeSpec::regime2() {
  RegimeSpec spec;
  spec.p = 30;
  spec.n = 60;
  spec.k = 10;
  spec.theta = Eigen::VectorXd::Zero(10);
  spec.theta(9) = 1.0;
  return spec;
}

RegimeSpec RegimeSpec::coverage() {
  RegimeSpec spec = regime1();
  spec.p = 20;
  spec.iv = IvParams{};
  return spec;
}

FactorParams gen_factor_params(const RegimeSpec& spec, Rng& rng) {
  const int p = spec.p;
  const int k = spec.k;
  FactorParams params;
  Eigen::MatrixXd A(p, k);
  for (int j = 0; j < p; ++j) {
    for (int g = 0; g < k; ++g) A(j, g) = rng.normal();
  }
  params.W.resize(k);
  for (int g = 0; g < k; ++g) params.W(g) = 1.0 + std::abs(rng.student_t(5.0));
  std::sort(params.W.data(), params.W.data() + k, std::greater<>());
  params.B = A * params.W.asDiagonal();
  params.psi2.resize(p);
  for (int j = 0; j < p; ++j) {
    const double u = rng.uniform(0.5, 1.75);
    const double psi = params.B.row(j).norm() / u;
    params.psi2(j) = psi * psi;
  }
  return params;
}

Eigen::MatrixXd gen_instruments(const FactorParams& params, int n, Rng& rng) {
  const Eigen::Index p = params.B.rows();
  const Eigen::Index k = params.B.cols();
  Eigen::MatrixXd F(k, n);
  for (Eigen::Index g = 0; g < k; ++g) {
    for (int i = 0; i < n; ++i) F(g, i) = rng.normal();
  }
  Eigen::MatrixXd Z = params.B * F;
  const Eigen::VectorXd psi = params.psi2.cwiseSqrt();
  for (Eigen::Index j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) Z(j, i) += psi(j) * rng.normal();
  }
  return Z;
}

Eigen::VectorXd implied_delta(const FactorParams& params, const Eigen::VectorXd& theta) {
  if (theta.size() != params.B.cols()) throw DimensionMismatch("theta length does not match k");
  Eigen::MatrixXd cov = params.B * params.B.transpose();
  cov.diagonal() += params.psi2;
  const Eigen::VectorXd rhs = params.B * theta;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
  if (pivots.minCoeff() <= 1e-12 * pivots.maxCoeff()) {
    throw SingularCovariance("instrument covariance is numerically singular");
  }
  const Eigen::VectorXd delta = ldlt.solve(rhs);
  const double resid = (cov * delta - rhs).norm();
  if (!delta.allFinite() || resid > 1e-8 * (1.0 + rhs.norm())) {
    throw SingularCovariance("instrument covariance is numerically singular");
  }
  return delta;
}

double theoretical_sigma(const FactorParams& params, const Eigen::VectorXd& theta,
                         double sigma_resid) {
  const Eigen::VectorXd delta = implied_delta(params, theta);
  const double m = theta.dot(params.B.transpose() * delta);
  const double var = 1.0 - m + sigma_resid * sigma_resid;
  if (var <= 0.0) throw NegativeVariance("nonpositive best-case prediction variance");
  return std::sqrt(var);
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& Z, const Eigen::VectorXd& delta, double sigma,
                             Rng& rng) {
  if (Z.rows() != delta.size()) throw DimensionMismatch("delta length does not match Z rows");
  Eigen::VectorXd x = Z.transpose() * delta;
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += sigma * rng.normal();
  return x;
}

Eigen::VectorXd gen_iv_outcome(const Eigen::VectorXd& x, const Eigen::MatrixXd& Z,
                               const Eigen::VectorXd& delta, double alpha, double beta, double xi,
                               Rng& rng) {
  if (Z.cols() != x.size() || Z.rows() != delta.size()) {
    throw DimensionMismatch("outcome generator dimensions disagree");
  }
  const Eigen::VectorXd fitted = Z.transpose() * delta;
  Eigen::VectorXd y(x.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y(i) = beta * x(i) + alpha * (x(i) - fitted(i)) + xi * rng.normal();
  }
  return y;
}

}  // namespace fsiv::simgen
