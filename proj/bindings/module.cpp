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

#include <optional>
#include <stdexcept>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fsiv/design.hpp"
#include "fsiv/frisch.hpp"
#include "fsiv/harness.hpp"
#include "fsiv/horseshoe.hpp"
#include "fsiv/iv.hpp"
#include "fsiv/simgen.hpp"

namespace py = pybind11;
using namespace fsiv;

namespace {

frisch::RankRule make_rank_rule(std::optional<int> k, std::optional<double> tau) {
  if (k.has_value() == tau.has_value()) {
    throw std::invalid_argument("specify exactly one of k or tau");
  }
  return k ? frisch::RankRule::fixed(*k) : frisch::RankRule::threshold(*tau);
}

Eigen::MatrixXd stack_draws(const std::vector<Eigen::VectorXd>& draws) {
  if (draws.empty()) return {};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(draws.size()), draws.front().size());
  for (std::size_t i = 0; i < draws.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = draws[i];
  return out;
}

horseshoe::ChainConfig make_chain_config(int n_iter, int n_burn, int thin, std::uint64_t seed) {
  horseshoe::ChainConfig cfg;
  cfg.n_iter = n_iter;
  cfg.n_burn = n_burn;
  cfg.thin = thin;
  cfg.seed = seed;
  return cfg;
}

simgen::RegimeSpec spec_by_name(const std::string& name) {
  if (name == "regime1") return simgen::RegimeSpec::regime1();
  if (name == "regime2") return simgen::RegimeSpec::regime2();
  if (name == "coverage") return simgen::RegimeSpec::coverage();
  throw std::invalid_argument("unknown regime: " + name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Factor-shrinkage instrumental-variable regression";

  py::register_exception<Error>(m, "FsivError", PyExc_RuntimeError);

  py::class_<frisch::FrischDecomposition>(m, "FrischDecomposition")
      .def_readonly("d_star", &frisch::FrischDecomposition::d_star)
      .def_readonly("low_rank", &frisch::FrischDecomposition::low_rank)
      .def_readonly("eigvals", &frisch::FrischDecomposition::eigvals)
      .def_readonly("eigvecs", &frisch::FrischDecomposition::eigvecs)
      .def_readonly("iterations", &frisch::FrischDecomposition::iterations)
      .def_readonly("primal_residual", &frisch::FrischDecomposition::primal_residual)
      .def_readonly("dual_residual", &frisch::FrischDecomposition::dual_residual)
      .def_readonly("min_eigenvalue", &frisch::FrischDecomposition::min_eigenvalue);

  py::class_<frisch::LoadingsBasis>(m, "LoadingsBasis")
      .def_readonly("b_tilde", &frisch::LoadingsBasis::b_tilde)
      .def_readonly("k", &frisch::LoadingsBasis::k)
      .def_readonly("residual_offdiag", &frisch::LoadingsBasis::residual_offdiag);

  py::class_<design::EnrichedDesign>(m, "EnrichedDesign")
      .def_readonly("z_tilde", &design::EnrichedDesign::z_tilde)
      .def_readonly("b_tilde", &design::EnrichedDesign::b_tilde)
      .def_readonly("projector", &design::EnrichedDesign::projector)
      .def_readonly("p", &design::EnrichedDesign::p)
      .def_readonly("k", &design::EnrichedDesign::k)
      .def_readonly("n", &design::EnrichedDesign::n);

  py::class_<horseshoe::HorseshoeChain>(m, "HorseshoeChain")
      .def_property_readonly(
          "coeff_draws",
          [](const horseshoe::HorseshoeChain& c) { return stack_draws(c.coeff_draws); })
      .def_property_readonly(
          "noise_draws",
          [](const horseshoe::HorseshoeChain& c) {
            return Eigen::Map<const Eigen::VectorXd>(c.noise_draws.data(),
                                                     static_cast<Eigen::Index>(c.noise_draws.size()));
          })
      .def_readonly("coeff_mean", &horseshoe::HorseshoeChain::coeff_mean)
      .def_readonly("ess", &horseshoe::HorseshoeChain::ess);

  py::class_<iv::IVPosterior>(m, "IVPosterior")
      .def_property_readonly("delta",
                             [](const iv::IVPosterior& p) { return stack_draws(p.delta); })
      .def_readonly("alpha", &iv::IVPosterior::alpha)
      .def_readonly("beta", &iv::IVPosterior::beta)
      .def_readonly("xi_sq", &iv::IVPosterior::xi_sq)
      .def_readonly("weights", &iv::IVPosterior::weights)
      .def_readonly("ess", &iv::IVPosterior::ess)
      .def_readonly("degenerate_weights", &iv::IVPosterior::degenerate_weights);

  m.def(
      "sample_correlation",
      [](const Eigen::MatrixXd& Z) {
        const auto r = frisch::sample_correlation(Z);
        return py::make_tuple(r.corr, r.row_mean, r.row_sd);
      },
      py::arg("Z"), "Row-wise sample correlation; returns (corr, row_mean, row_sd).");

  m.def(
      "solve_min_trace",
      [](const Eigen::MatrixXd& sigma, double tol, double tol_psd, int max_iter) {
        frisch::SolveOptions opts;
        opts.tol = tol;
        opts.tol_psd = tol_psd;
        opts.max_iter = max_iter;
        return frisch::solve_min_trace(sigma, opts);
      },
      py::arg("sigma"), py::arg("tol") = 1e-7, py::arg("tol_psd") = 1e-8,
      py::arg("max_iter") = 20000,
      "Maximal diagonal D with Sigma - D positive semidefinite (trace heuristic).");

  m.def(
      "truncate_loadings",
      [](const frisch::FrischDecomposition& dec, std::optional<int> k, std::optional<double> tau) {
        return frisch::truncate_loadings(dec, make_rank_rule(k, tau));
      },
      py::arg("decomposition"), py::arg("k") = std::nullopt, py::arg("tau") = std::nullopt,
      "Orthonormal basis of the leading factor subspace.");

  m.def("enrich", &design::enrich, py::arg("Z"), py::arg("basis"),
        "Stack factor projections atop projection residuals.");

  m.def("collapse_coefficients", &design::collapse_coefficients, py::arg("delta_tilde"),
        py::arg("design"), "Map enriched-design coefficients back to instrument space.");

  m.def("implied_prior_covariance", &design::implied_prior_covariance, py::arg("design"),
        "Prior covariance induced on instrument-space coefficients.");

  m.def(
      "run_chain",
      [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_iter, int n_burn, int thin,
         std::uint64_t seed) {
        return horseshoe::run_chain(X, y, make_chain_config(n_iter, n_burn, thin, seed));
      },
      py::arg("X"), py::arg("y"), py::arg("n_iter") = 6000, py::arg("n_burn") = 1000,
      py::arg("thin") = 1, py::arg("seed") = 0,
      "Gibbs sampler for the horseshoe regression of y on the rows of X.");

  m.def(
      "run_iv",
      [](const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& Z, int n_iter,
         int n_burn, int thin, std::uint64_t seed, double coef_scale, double sum_sq_offset,
         double dof_offset, std::optional<int> k, std::optional<double> tau, bool enriched) {
        iv::RunIvConfig cfg;
        cfg.chain = make_chain_config(n_iter, n_burn, thin, seed);
        cfg.prior.coef_scale = coef_scale;
        cfg.prior.sum_sq_offset = sum_sq_offset;
        cfg.prior.dof_offset = dof_offset;
        if (k || tau) cfg.rank_rule = make_rank_rule(k, tau);
        cfg.stage1 = enriched ? iv::Stage1Design::kEnriched : iv::Stage1Design::kRaw;
        return iv::run_iv(x, y, Z, cfg);
      },
      py::arg("x"), py::arg("y"), py::arg("Z"), py::arg("n_iter") = 6000, py::arg("n_burn") = 1000,
      py::arg("thin") = 1, py::arg("seed") = 0, py::arg("coef_scale") = 25.0,
      py::arg("sum_sq_offset") = 1.0, py::arg("dof_offset") = 1.0, py::arg("k") = std::nullopt,
      py::arg("tau") = std::nullopt, py::arg("enriched") = true,
      "Importance-resampled posterior for the structural parameters.");

  m.def("scaled_rmse", &harness::scaled_rmse, py::arg("delta_hat"), py::arg("delta_true"),
        py::arg("Z"), py::arg("sigma"),
        "Prediction error over the design, scaled to the attainable floor.");

  m.def(
      "generate",
      [](const std::string& regime, std::uint64_t seed) {
        simgen::RegimeSpec spec = spec_by_name(regime);
        Rng rng(seed);
        const auto params = simgen::gen_factor_params(spec, rng);
        const Eigen::MatrixXd Z = simgen::gen_instruments(params, spec.n, rng);
        const Eigen::VectorXd delta = simgen::implied_delta(params, spec.theta);
        const double sigma = simgen::theoretical_sigma(params, spec.theta, spec.sigma_resid);
        const Eigen::VectorXd x = simgen::gen_response(Z, delta, sigma, rng);
        py::dict out;
        out["B"] = params.B;
        out["psi2"] = params.psi2;
        out["Z"] = Z;
        out["delta"] = delta;
        out["sigma"] = sigma;
        out["x"] = x;
        if (spec.iv) {
          const Eigen::VectorXd y = simgen::gen_iv_outcome(x, Z, delta, spec.iv->alpha,
                                                           spec.iv->beta, spec.iv->xi, rng);
          out["y"] = y;
        }
        return out;
      },
      py::arg("regime"), py::arg("seed") = 0,
      "Synthetic dataset from 'regime1', 'regime2', or 'coverage'.");

  m.def(
      "ingest_csv",
      [](const std::string& path) {
        const auto d = harness::ingest_csv(path);
        return py::make_tuple(d.y, d.x, d.Z);
      },
      py::arg("path"), "Read a y,x,z1..zp dataset; returns (y, x, Z).");

  m.def("export_csv", &harness::export_csv, py::arg("path"), py::arg("y"), py::arg("x"),
        py::arg("Z"), "Write a y,x,z1..zp dataset losslessly.");
}
