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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "fsiv/simgen.hpp"
#include "fsiv/stats.hpp"
#include "oracles.hpp"

using fsiv::Rng;
namespace simgen = fsiv::simgen;
namespace testing = fsiv::testing;

TEST_CASE("regime presets carry the documented shapes") {
  const auto r1 = simgen::RegimeSpec::regime1();
  CHECK(r1.p == 30);
  CHECK(r1.n == 60);
  CHECK(r1.k == 3);
  CHECK(r1.theta(0) == 1.0);
  CHECK(r1.theta.tail(2).cwiseAbs().maxCoeff() == 0.0);
  const auto r2 = simgen::RegimeSpec::regime2();
  CHECK(r2.k == 10);
  CHECK(r2.theta(9) == 1.0);
  CHECK(r2.theta.head(9).cwiseAbs().maxCoeff() == 0.0);
  const auto cov = simgen::RegimeSpec::coverage();
  CHECK(cov.p == 20);
  CHECK(cov.k == 3);
  CHECK(cov.iv.has_value());
  CHECK(cov.iv->alpha == -0.08);
  CHECK(cov.iv->beta == 0.2);
}

TEST_CASE("a single factor scale is at least one") {
  auto spec = simgen::RegimeSpec::regime1();
  spec.k = 1;
  spec.theta = Eigen::VectorXd::Ones(1);
  Rng rng(1);
  const auto params = simgen::gen_factor_params(spec, rng);
  CHECK(params.W.size() == 1);
  CHECK(params.W(0) >= 1.0);
}

TEST_CASE("factor scales are sorted descending on every draw") {
  const auto spec = simgen::RegimeSpec::regime2();
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const auto params = simgen::gen_factor_params(spec, rng);
    for (int g = 1; g < spec.k; ++g) CHECK(params.W(g - 1) >= params.W(g));
    CHECK(params.W.minCoeff() >= 1.0);
  }
}

TEST_CASE("idiosyncratic scales stay within the stated band of the loadings") {
  const auto spec = simgen::RegimeSpec::regime1();
  Rng rng(3);
  std::vector<double> ratios;
  for (int rep = 0; rep < 340; ++rep) {
    const auto params = simgen::gen_factor_params(spec, rng);
    for (int j = 0; j < spec.p; ++j) {
      const double norm = params.B.row(j).norm();
      const double ratio = std::sqrt(params.psi2(j)) / norm;
      CHECK(ratio >= 4.0 / 7.0 - 1e-12);
      CHECK(ratio <= 2.0 + 1e-12);
      ratios.push_back(ratio);
    }
  }
  // psi_j / |b_j| = 1/u with u uniform on [1/2, 7/4].
  const auto recip_cdf = [](double t) { return (1.75 - 1.0 / t) / 1.25; };
  CHECK(ratios.size() >= 10000);
  CHECK(fsiv::ks_statistic(ratios, recip_cdf) < testing::ks_critical_1pct(ratios.size()));
}

TEST_CASE("instrument draws have the implied population covariance") {
  auto spec = simgen::RegimeSpec::regime1();
  spec.p = 4;
  spec.k = 2;
  spec.theta = Eigen::VectorXd::Unit(2, 0);
  Rng rng(4);
  const auto params = simgen::gen_factor_params(spec, rng);
  const Eigen::MatrixXd cov =
      params.B * params.B.transpose() + Eigen::MatrixXd(params.psi2.asDiagonal());
  const int n = 100000;
  const Eigen::MatrixXd z = simgen::gen_instruments(params, n, rng);
  const Eigen::MatrixXd sample_cov = z * z.transpose() / static_cast<double>(n);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double se =
          std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / static_cast<double>(n));
      CHECK(std::abs(sample_cov(i, j) - cov(i, j)) < 3.0 * se);
    }
}

TEST_CASE("noiseless rank-one instruments are collinear") {
  simgen::FactorParams params;
  params.B = Eigen::MatrixXd(3, 1);
  params.B << 2.0, -1.0, 0.5;
  params.psi2 = Eigen::VectorXd::Zero(3);
  params.W = Eigen::VectorXd::Ones(1);
  Rng rng(5);
  const Eigen::MatrixXd z = simgen::gen_instruments(params, 50, rng);
  for (int i = 0; i < 50; ++i) {
    CHECK(z(1, i) * params.B(0, 0) == doctest::Approx(z(0, i) * params.B(1, 0)).epsilon(1e-10));
    CHECK(z(2, i) * params.B(0, 0) == doctest::Approx(z(0, i) * params.B(2, 0)).epsilon(1e-10));
  }
}

TEST_CASE("generators are deterministic in the seed") {
  const auto spec = simgen::RegimeSpec::regime1();
  Rng a(6), b(6);
  const auto pa = simgen::gen_factor_params(spec, a);
  const auto pb = simgen::gen_factor_params(spec, b);
  CHECK(pa.B == pb.B);
  CHECK(pa.psi2 == pb.psi2);
  const Eigen::MatrixXd za = simgen::gen_instruments(pa, 20, a);
  const Eigen::MatrixXd zb = simgen::gen_instruments(pb, 20, b);
  CHECK(za == zb);
}

TEST_CASE("zero theta induces zero regression coefficients") {
  const auto spec = simgen::RegimeSpec::regime1();
  Rng rng(7);
  const auto params = simgen::gen_factor_params(spec, rng);
  CHECK(simgen::implied_delta(params, Eigen::VectorXd::Zero(3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the scalar model has a closed-form coefficient") {
  simgen::FactorParams params;
  params.B = Eigen::MatrixXd::Constant(1, 1, 0.7);
  params.psi2 = Eigen::VectorXd::Constant(1, 0.3);
  params.W = Eigen::VectorXd::Ones(1);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.4);
  const Eigen::VectorXd delta = simgen::implied_delta(params, theta);
  CHECK(delta(0) == doctest::Approx(1.4 * 0.7 / (0.49 + 0.3)).epsilon(1e-12));
}

TEST_CASE("implied coefficients match a column-wise linear solve") {
  const auto spec = simgen::RegimeSpec::regime2();
  Rng rng(8);
  const auto params = simgen::gen_factor_params(spec, rng);
  const Eigen::VectorXd delta = simgen::implied_delta(params, spec.theta);
  const Eigen::MatrixXd cov =
      params.B * params.B.transpose() + Eigen::MatrixXd(params.psi2.asDiagonal());
  const Eigen::VectorXd oracle =
      Eigen::FullPivLU<Eigen::MatrixXd>(cov).solve(params.B * spec.theta);
  CHECK((delta - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("a singular instrument covariance is rejected") {
  simgen::FactorParams params;
  params.B = Eigen::MatrixXd::Zero(3, 1);
  params.B << 1.0, 1.0, 0.0;
  params.psi2 = Eigen::VectorXd::Zero(3);
  params.W = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(simgen::implied_delta(params, Eigen::VectorXd::Ones(1)),
                  fsiv::SingularCovariance);
}

TEST_CASE("vanishing signal drives the noise floor to its ceiling") {
  const auto spec = simgen::RegimeSpec::regime1();
  Rng rng(9);
  auto params = simgen::gen_factor_params(spec, rng);
  params.psi2 = Eigen::VectorXd::Constant(spec.p, 1e12);
  const double sigma = simgen::theoretical_sigma(params, spec.theta, 0.2);
  CHECK(sigma == doctest::Approx(std::sqrt(1.0 + 0.04)).epsilon(1e-5));
}

TEST_CASE("the recoverable-variance share agrees between solve and inverse") {
  const auto spec = simgen::RegimeSpec::regime2();
  Rng rng(10);
  for (int rep = 0; rep < 20; ++rep) {
    const auto params = simgen::gen_factor_params(spec, rng);
    const double sigma = simgen::theoretical_sigma(params, spec.theta, spec.sigma_resid);
    const Eigen::MatrixXd cov =
        params.B * params.B.transpose() + Eigen::MatrixXd(params.psi2.asDiagonal());
    const Eigen::VectorXd bt = params.B * spec.theta;
    const double m = bt.dot(cov.inverse() * bt);
    const double oracle = std::sqrt(1.0 - m + spec.sigma_resid * spec.sigma_resid);
    CHECK(std::abs(sigma - oracle) < 1e-10);
  }
}

TEST_CASE("the noise floor sits strictly below its no-signal ceiling") {
  const auto spec = simgen::RegimeSpec::regime1();
  const double ceiling = std::sqrt(1.0 + spec.sigma_resid * spec.sigma_resid);
  Rng rng(11);
  double total = 0.0;
  for (int rep = 0; rep < 500; ++rep) {
    const auto params = simgen::gen_factor_params(spec, rng);
    const double sigma = simgen::theoretical_sigma(params, spec.theta, spec.sigma_resid);
    CHECK(sigma < ceiling);
    CHECK(sigma > 0.0);
    total += sigma;
  }
  CHECK(total / 500.0 < ceiling);
}

TEST_CASE("noise-free treatments are exact linear predictions") {
  const auto spec = simgen::RegimeSpec::regime1();
  Rng rng(12);
  const auto params = simgen::gen_factor_params(spec, rng);
  const Eigen::MatrixXd z = simgen::gen_instruments(params, 40, rng);
  const Eigen::VectorXd delta = simgen::implied_delta(params, spec.theta);
  Rng noise_rng(1);
  const Eigen::VectorXd x = simgen::gen_response(z, delta, 0.0, noise_rng);
  CHECK((x - z.transpose() * delta).cwiseAbs().maxCoeff() == 0.0);
  Rng r1(2), r2(2);
  CHECK(simgen::gen_response(z, delta, 0.3, r1) == simgen::gen_response(z, delta, 0.3, r2));
}

TEST_CASE("treatment residual dispersion concentrates at the nominal scale") {
  const auto spec = simgen::RegimeSpec::regime1();
  Rng rng(13);
  const auto params = simgen::gen_factor_params(spec, rng);
  const int n = 100000;
  const Eigen::MatrixXd z = simgen::gen_instruments(params, n, rng);
  const Eigen::VectorXd delta = simgen::implied_delta(params, spec.theta);
  const double sigma = 0.37;
  const Eigen::VectorXd x = simgen::gen_response(z, delta, sigma, rng);
  const Eigen::VectorXd resid = x - z.transpose() * delta;
  const double sd = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
  CHECK(std::abs(sd - sigma) / sigma < 0.02);
}

TEST_CASE("noiseless proportional outcomes reduce to beta x") {
  Rng rng(14);
  Eigen::MatrixXd z(2, 10);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 10; ++j) z(i, j) = rng.normal();
  Eigen::VectorXd delta(2);
  delta << 0.5, -0.2;
  Eigen::VectorXd x(10);
  for (int i = 0; i < 10; ++i) x(i) = rng.normal();
  Rng outcome_rng(3);
  const Eigen::VectorXd y = simgen::gen_iv_outcome(x, z, delta, 0.0, 0.7, 0.0, outcome_rng);
  CHECK((y - 0.7 * x).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("population least squares on the augmented design recovers the truth") {
  auto spec = simgen::RegimeSpec::coverage();
  Rng rng(15);
  const auto params = simgen::gen_factor_params(spec, rng);
  const int n = 100000;
  const Eigen::MatrixXd z = simgen::gen_instruments(params, n, rng);
  const Eigen::VectorXd delta = simgen::implied_delta(params, spec.theta);
  const Eigen::VectorXd x = simgen::gen_response(z, delta, spec.sigma_resid, rng);
  const double alpha = spec.iv->alpha, beta = spec.iv->beta, xi = spec.iv->xi;
  const Eigen::VectorXd y = simgen::gen_iv_outcome(x, z, delta, alpha, beta, xi, rng);

  Eigen::MatrixXd design(n, 2);
  design.col(0) = x;
  design.col(1) = x - z.transpose() * delta;
  const Eigen::Matrix2d gram = design.transpose() * design;
  const Eigen::Vector2d coef = gram.ldlt().solve(design.transpose() * y);
  const Eigen::Matrix2d cov = xi * xi * gram.inverse();
  CHECK(std::abs(coef(0) - beta) < 3.0 * std::sqrt(cov(0, 0)));
  CHECK(std::abs(coef(1) - alpha) < 3.0 * std::sqrt(cov(1, 1)));
}
