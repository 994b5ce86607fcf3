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

#include "fsiv/design.hpp"

namespace fsiv::design {

EnrichedDesign enrich(const Eigen::MatrixXd& Z, const frisch::LoadingsBasis& basis) {
  const Eigen::Index p = Z.rows();
  const Eigen::Index n = Z.cols();
  const Eigen::Index k = basis.b_tilde.cols();
  if (basis.b_tilde.rows() != p && k > 0) {
    throw DimensionMismatch("basis rows do not match predictor count");
  }
  EnrichedDesign out;
  out.p = p;
  out.k = k;
  out.n = n;
  out.b_tilde = basis.b_tilde;
  out.projector = k > 0 ? Eigen::MatrixXd(basis.b_tilde * basis.b_tilde.transpose())
                        : Eigen::MatrixXd::Zero(p, p);
  out.z_tilde.resize(p + k, n);
  if (k > 0) out.z_tilde.topRows(k) = basis.b_tilde.transpose() * Z;
  out.z_tilde.bottomRows(p) = Z - out.projector * Z;
  return out;
}

Eigen::VectorXd collapse_coefficients(const Eigen::VectorXd& delta_tilde,
                                      const EnrichedDesign& design) {
  if (delta_tilde.size() != design.p + design.k) {
    throw DimensionMismatch("coefficient vector does not match enriched dimension");
  }
  const Eigen::VectorXd delta_f = delta_tilde.head(design.k);
  const Eigen::VectorXd delta_r = delta_tilde.tail(design.p);
  Eigen::VectorXd delta = delta_r - design.projector * delta_r;
  if (design.k > 0) delta += design.b_tilde * delta_f;
  return delta;
}

Eigen::MatrixXd implied_prior_covariance(const EnrichedDesign& design) {
  const Eigen::MatrixXd residual =
      Eigen::MatrixXd::Identity(design.p, design.p) - design.projector;
  return design.projector + residual * residual.transpose();
}

}  // namespace fsiv::design
