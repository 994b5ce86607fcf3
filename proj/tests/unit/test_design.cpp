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

#include <Eigen/Dense>

#include "fsiv/design.hpp"
#include "fsiv/rng.hpp"
#include "oracles.hpp"

using fsiv::Rng;
namespace design = fsiv::design;
namespace testing = fsiv::testing;

namespace {

fsiv::frisch::LoadingsBasis basis_from(const Eigen::MatrixXd& b_tilde) {
  fsiv::frisch::LoadingsBasis basis;
  basis.b_tilde = b_tilde;
  basis.k = static_cast<int>(b_tilde.cols());
  return basis;
}

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("full-rank basis sends all mass to the factor block") {
  Rng rng(1);
  const Eigen::MatrixXd z = random_matrix(3, 8, rng);
  const auto d = design::enrich(z, basis_from(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(d.z_tilde.rows() == 6);
  CHECK((d.z_tilde.topRows(3) - z).cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.z_tilde.bottomRows(3).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("coordinate basis splits the rows coordinate-wise") {
  Rng rng(2);
  const Eigen::MatrixXd z = random_matrix(2, 6, rng);
  const auto d = design::enrich(z, basis_from(Eigen::MatrixXd::Identity(2, 2).leftCols(1)));
  CHECK((d.z_tilde.row(0) - z.row(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.z_tilde.row(1).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((d.z_tilde.row(2) - z.row(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("enrichment preserves the row space") {
  Rng rng(3);
  const Eigen::MatrixXd z = random_matrix(5, 20, rng);
  const auto d = design::enrich(z, basis_from(testing::random_orthonormal(5, 2, rng)));
  Eigen::MatrixXd stacked(20, 5 + 7);
  stacked.leftCols(5) = z.transpose();
  stacked.rightCols(7) = d.z_tilde.transpose();
  CHECK(testing::svd_rank(stacked) == testing::svd_rank(z.transpose()));
  CHECK((d.projector * d.projector - d.projector).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("enrichment rejects mismatched dimensions") {
  Rng rng(4);
  const Eigen::MatrixXd z = random_matrix(4, 9, rng);
  CHECK_THROWS_AS(design::enrich(z, basis_from(testing::random_orthonormal(5, 2, rng))),
                  fsiv::DimensionMismatch);
}

TEST_CASE("collapsing the zero vector gives zero") {
  Rng rng(5);
  const Eigen::MatrixXd z = random_matrix(4, 10, rng);
  const auto d = design::enrich(z, basis_from(testing::random_orthonormal(4, 2, rng)));
  CHECK(design::collapse_coefficients(Eigen::VectorXd::Zero(6), d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a unit factor coefficient collapses to the basis column") {
  Rng rng(6);
  const Eigen::MatrixXd z = random_matrix(4, 10, rng);
  const Eigen::MatrixXd b = testing::random_orthonormal(4, 2, rng);
  const auto d = design::enrich(z, basis_from(b));
  Eigen::VectorXd delta_tilde = Eigen::VectorXd::Zero(6);
  delta_tilde(0) = 1.0;
  const Eigen::VectorXd delta = design::collapse_coefficients(delta_tilde, d);
  CHECK((delta - b.col(0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("collapsed coefficients reproduce the enriched fitted values") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 3 + static_cast<int>(rng.next_u64() % 8);
    const int k = 1 + static_cast<int>(rng.next_u64() % (p - 1));
    const int n = p + 5;
    const Eigen::MatrixXd z = random_matrix(p, n, rng);
    const auto d = design::enrich(z, basis_from(testing::random_orthonormal(p, k, rng)));
    Eigen::VectorXd delta_tilde(p + k);
    for (int i = 0; i < p + k; ++i) delta_tilde(i) = rng.normal();
    const Eigen::VectorXd delta = design::collapse_coefficients(delta_tilde, d);
    const Eigen::VectorXd via_z = z.transpose() * delta;
    const Eigen::VectorXd via_tilde = d.z_tilde.transpose() * delta_tilde;
    CHECK((via_z - via_tilde).cwiseAbs().maxCoeff() <
          1e-10 * std::max(1.0, via_tilde.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("collapse rejects a wrong-length coefficient vector") {
  Rng rng(8);
  const Eigen::MatrixXd z = random_matrix(4, 10, rng);
  const auto d = design::enrich(z, basis_from(testing::random_orthonormal(4, 2, rng)));
  CHECK_THROWS_AS(design::collapse_coefficients(Eigen::VectorXd::Zero(5), d),
                  fsiv::DimensionMismatch);
}

TEST_CASE("any orthonormal basis induces the identity prior covariance") {
  Rng rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 12);
    const int k = 1 + static_cast<int>(rng.next_u64() % (p - 1));
    const Eigen::MatrixXd z = random_matrix(p, p + 4, rng);
    const auto d = design::enrich(z, basis_from(testing::random_orthonormal(p, k, rng)));
    CHECK((design::implied_prior_covariance(d) - Eigen::MatrixXd::Identity(p, p))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
}

TEST_CASE("an empty basis also induces the identity") {
  Rng rng(10);
  const Eigen::MatrixXd z = random_matrix(4, 9, rng);
  const auto d = design::enrich(z, basis_from(Eigen::MatrixXd(4, 0)));
  CHECK(d.z_tilde.rows() == 4);
  CHECK((d.z_tilde - z).cwiseAbs().maxCoeff() == 0.0);
  CHECK((design::implied_prior_covariance(d) - Eigen::MatrixXd::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
}

TEST_CASE("a non-orthonormal basis is detected by the covariance surface") {
  Rng rng(11);
  const Eigen::MatrixXd z = random_matrix(4, 9, rng);
  const Eigen::MatrixXd b = 2.0 * testing::random_orthonormal(4, 2, rng);
  const auto d = design::enrich(z, basis_from(b));
  CHECK((design::implied_prior_covariance(d) - Eigen::MatrixXd::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() > 0.5);
}
