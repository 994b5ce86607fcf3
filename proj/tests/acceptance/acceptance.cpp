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

// Release gate. Each numbered check prints one [PASS]/[FAIL] line with the
// measured quantities and the tolerance it was judged against, then exits
// 0 or 1. Checks 5-7 rerun the full replication studies and take minutes.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsiv/design.hpp"
#include "fsiv/frisch.hpp"
#include "fsiv/harness.hpp"
#include "fsiv/horseshoe.hpp"
#include "fsiv/iv.hpp"
#include "fsiv/rng.hpp"
#include "fsiv/simgen.hpp"
#include "fsiv/stats.hpp"
#include "oracles.hpp"

using fsiv::Rng;
namespace design = fsiv::design;
namespace frisch = fsiv::frisch;
namespace harness = fsiv::harness;
namespace horseshoe = fsiv::horseshoe;
namespace iv = fsiv::iv;
namespace simgen = fsiv::simgen;
namespace testing = fsiv::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

Outcome check_min_trace_oracle() {
  Rng rng(4321);
  double max_grid_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Eigen::MatrixXd sigma = testing::random_correlation(3, rng);
    const auto dec = frisch::solve_min_trace(sigma);
    const double oracle = testing::grid_min_trace_3x3(sigma);
    max_grid_err = std::max(max_grid_err, std::abs(dec.d_star.sum() - oracle));
  }
  double max_analytic_err = 0.0;
  for (double rho : {0.9, 0.6, 0.3, 0.0, -0.3, -0.6, -0.95}) {
    Eigen::MatrixXd sigma(2, 2);
    sigma << 1.0, rho, rho, 1.0;
    const auto dec = frisch::solve_min_trace(sigma);
    const double target = 1.0 - std::abs(rho);
    max_analytic_err = std::max(
        {max_analytic_err, std::abs(dec.d_star(0) - target), std::abs(dec.d_star(1) - target)});
  }
  Outcome out;
  out.pass = max_grid_err <= 1e-2 && max_analytic_err <= 1e-6;
  out.detail = "max |trace - grid oracle| " + fmt(max_grid_err) +
               " (tol 1e-2) over 50 random 3x3; max 2x2 analytic error " + fmt(max_analytic_err) +
               " (tol 1e-6)";
  return out;
}

Outcome check_enrichment_identities() {
  Rng rng(777);
  double max_cov_err = 0.0;
  int span_failures = 0;
  for (int i = 0; i < 100; ++i) {
    const int p = 2 + static_cast<int>(rng.uniform() * 29.0);
    const int k_cap = std::min(10, p - 1);
    const int k = 1 + static_cast<int>(rng.uniform() * k_cap);
    const int n = p + 5 + (i % 7);
    frisch::LoadingsBasis basis;
    basis.b_tilde = testing::random_orthonormal(p, k, rng);
    basis.k = k;
    basis.residual_offdiag = 0.0;
    Eigen::MatrixXd z(p, n);
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < n; ++c) z(r, c) = rng.normal();
    const auto enriched = design::enrich(z, basis);
    const Eigen::MatrixXd cov = design::implied_prior_covariance(enriched);
    max_cov_err = std::max(max_cov_err,
                           (cov - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff());
    Eigen::MatrixXd stacked(n, p + enriched.z_tilde.rows());
    stacked.leftCols(p) = z.transpose();
    stacked.rightCols(enriched.z_tilde.rows()) = enriched.z_tilde.transpose();
    if (testing::svd_rank(stacked) != testing::svd_rank(z.transpose())) ++span_failures;
  }
  Outcome out;
  out.pass = max_cov_err <= 1e-10 && span_failures == 0;
  out.detail = "max |implied prior covariance - I| " + fmt(max_cov_err) +
               " (tol 1e-10) and " + std::to_string(span_failures) +
               " span changes (tol 0) over 100 random instances";
  return out;
}

Outcome check_horseshoe_quadrature() {
  const double z_values[] = {0.0, 1.0, 3.0, 10.0};
  const std::uint64_t seeds[] = {31, 32, 33, 34};
  double worst_pull = 0.0;
  for (int i = 0; i < 4; ++i) {
    Eigen::MatrixXd X(1, 1);
    X << 1.0;
    Eigen::VectorXd x(1);
    x << z_values[i];
    horseshoe::ChainConfig cfg;
    cfg.n_iter = 42000;
    cfg.n_burn = 2000;
    cfg.seed = seeds[i];
    cfg.fix_noise_var = true;
    cfg.fix_global_scale = true;
    const auto chain = horseshoe::run_chain(X, x, cfg);
    std::vector<double> draws;
    draws.reserve(chain.coeff_draws.size());
    for (const auto& d : chain.coeff_draws) draws.push_back(d(0));
    const double target = testing::intercept_posterior_mean_quadrature(z_values[i]);
    const double mc_se = fsiv::sample_sd(draws) / std::sqrt(chain.ess(0));
    worst_pull = std::max(worst_pull, std::abs(fsiv::mean(draws) - target) / mc_se);
  }
  const std::vector<double> kappa = horseshoe::prior_shrinkage_sample(100000, 2025);
  const double ks = fsiv::ks_statistic(kappa, testing::beta_half_cdf);
  const double ks_crit = testing::ks_critical_1pct(kappa.size());
  Outcome out;
  out.pass = worst_pull <= 2.0 && ks < ks_crit;
  out.detail = "worst |mean - quadrature| " + fmt(worst_pull) +
               " Monte Carlo s.e. (tol 2) over z in {0,1,3,10}; prior shrinkage KS " + fmt(ks) +
               " (1% critical " + fmt(ks_crit) + ")";
  return out;
}

Outcome check_importance_weights() {
  iv::NIGPrior prior;
  const double deltas[] = {-1.0, 0.3, 2.0};
  double max_err = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng = Rng::substream(4242, inst);
    const int n = 3 + (inst % 3);
    Eigen::MatrixXd z(1, n);
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
      z(0, i) = rng.normal();
      x(i) = 0.8 * z(0, i) + 0.4 * rng.normal();
      y(i) = 0.2 * x(i) + 0.3 * rng.normal();
    }
    double ref_exact = 0.0, ref_quad = 0.0;
    for (int d = 0; d < 3; ++d) {
      const Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, deltas[d]);
      const double exact = iv::log_weight(x, y, z, delta, prior).log_weight;
      const double quad = testing::log_marginal_quadrature(x, y, z, delta, prior);
      if (d == 0) {
        ref_exact = exact;
        ref_quad = quad;
      } else {
        max_err = std::max(max_err, std::abs((exact - ref_exact) - (quad - ref_quad)));
      }
    }
  }
  Outcome out;
  out.pass = max_err <= 1e-3;
  out.detail = "max log-weight difference error vs numeric integration " + fmt(max_err) +
               " (tol 1e-3) over 20 instances, n <= 5, p = 1";
  return out;
}

harness::StudyConfig study_config(harness::StudyKind kind, int reps,
                                  std::vector<harness::Method> methods) {
  harness::StudyConfig cfg;
  cfg.kind = kind;
  cfg.replications = reps;
  cfg.seed = 42;
  cfg.methods = std::move(methods);
  return cfg;
}

Outcome check_strong_factor_rmse() {
  const auto report = harness::run_rmse_study(
      study_config(harness::StudyKind::kRmseRegime1, 200,
                   {harness::Method::kFactorShrinkage, harness::Method::kHorseshoeRaw}));
  const auto& fs = report.per_method[0];
  const auto& raw = report.per_method[1];
  Outcome out;
  out.pass = fs.rmse_mean >= 1.03 && fs.rmse_mean <= 1.15 &&
             raw.rmse_mean >= fs.rmse_mean - fs.rmse_se && report.failures == 0;
  out.detail = "factor shrinkage scaled rmse " + fmt(fs.rmse_mean) + " (se " + fmt(fs.rmse_se) +
               ", band 1.09 +/- 0.06); horseshoe raw " + fmt(raw.rmse_mean) + " >= " +
               fmt(fs.rmse_mean - fs.rmse_se) + "; failures " + std::to_string(report.failures);
  return out;
}

Outcome check_diffuse_factor_rmse() {
  const auto report = harness::run_rmse_study(
      study_config(harness::StudyKind::kRmseRegime2, 200,
                   {harness::Method::kFactorShrinkage, harness::Method::kHorseshoeRaw,
                    harness::Method::kFactorsOnly}));
  const auto& fs = report.per_method[0];
  const auto& raw = report.per_method[1];
  const auto& fac = report.per_method[2];
  const double joint_se = std::hypot(fs.rmse_se, raw.rmse_se);
  const double fac_gap_se = 2.0 * std::hypot(fac.rmse_se, fs.rmse_se);
  Outcome out;
  out.pass = std::abs(fs.rmse_mean - raw.rmse_mean) <= joint_se &&
             std::abs(fs.rmse_mean - 1.17) <= 0.07 + joint_se &&
             std::abs(raw.rmse_mean - 1.17) <= 0.07 + joint_se &&
             fac.rmse_mean - fs.rmse_mean > fac_gap_se && report.failures == 0;
  out.detail = "factor shrinkage " + fmt(fs.rmse_mean) + ", horseshoe raw " + fmt(raw.rmse_mean) +
               " (gap " + fmt(std::abs(fs.rmse_mean - raw.rmse_mean)) + " <= joint se " +
               fmt(joint_se) + "; both within 0.07 + joint se of 1.17); factors only " +
               fmt(fac.rmse_mean) + " worse by " + fmt(fac.rmse_mean - fs.rmse_mean) + " > " +
               fmt(fac_gap_se);
  return out;
}

Outcome check_interval_coverage() {
  const auto report = harness::run_coverage_study(
      study_config(harness::StudyKind::kIvCoverage, 250,
                   {harness::Method::kFactorShrinkage, harness::Method::kHorseshoeRaw}));
  const auto& fs = report.per_method[0];
  const auto& raw = report.per_method[1];
  const double reduction = 1.0 - fs.width95_mean / raw.width95_mean;
  const double narrower = report.comparison.narrower_fraction95;
  const auto in_band = [](double c) { return c >= 0.90 && c <= 0.98; };
  Outcome out;
  out.pass = in_band(fs.coverage95) && in_band(raw.coverage95) && reduction >= 0.0 &&
             reduction <= 0.12 && narrower > 0.55 && report.failures == 0;
  out.detail = "95% coverage of beta: factor shrinkage " + fmt(fs.coverage95) + ", horseshoe raw " +
               fmt(raw.coverage95) + " (band [0.90, 0.98]); width reduction " + fmt(reduction) +
               " (band [0, 0.12]); narrower on " + fmt(narrower) + " of replications (> 0.55)";
  return out;
}

Outcome check_csv_fit_recovery() {
  const auto spec = simgen::RegimeSpec::coverage();
  Rng rng = Rng::substream(8080, 0);
  const auto params = simgen::gen_factor_params(spec, rng);
  const Eigen::MatrixXd z = simgen::gen_instruments(params, spec.n, rng);
  const Eigen::VectorXd delta = simgen::implied_delta(params, spec.theta);
  const Eigen::VectorXd x = simgen::gen_response(z, delta, spec.sigma_resid, rng);
  const Eigen::VectorXd y =
      simgen::gen_iv_outcome(x, z, delta, spec.iv->alpha, spec.iv->beta, spec.iv->xi, rng);
  const auto path = std::filesystem::temp_directory_path() / "fsiv_acceptance_fixture.csv";
  harness::export_csv(path.string(), y, x, z);

  auto cfg = study_config(harness::StudyKind::kFitCsv, 30, {harness::Method::kFactorShrinkage});
  cfg.input_path = path.string();
  const auto report = harness::run_fit_study(cfg);
  const auto& fs = report.per_method[0];
  Outcome out;
  out.pass = std::abs(fs.beta_mean - 0.2) <= 3.0 * fs.beta_sd && fs.degenerate_rate < 0.05 &&
             report.failures == 0;
  out.detail = "posterior mean of beta " + fmt(fs.beta_mean) + " within 3 posterior s.d. (" +
               fmt(3.0 * fs.beta_sd) + ") of 0.2; degenerate-weight rate " +
               fmt(fs.degenerate_rate) + " (tol 0.05)";
  return out;
}

const char* const kLabels[] = {
    "minimum-trace solution matches grid search",
    "enriched design preserves span and implied prior",
    "horseshoe posterior matches quadrature and prior law",
    "importance weights match numeric integration",
    "strong-factor regime scaled rmse",
    "diffuse-factor regime scaled rmse",
    "credible-interval coverage and width",
    "csv fit recovers the synthetic truth",
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <check 1..8>\n", argv[0]);
    return 2;
  }
  const int id = std::atoi(argv[1]);
  if (id < 1 || id > 8) {
    std::fprintf(stderr, "unknown check: %s\n", argv[1]);
    return 2;
  }
  Outcome out;
  try {
    switch (id) {
      case 1: out = check_min_trace_oracle(); break;
      case 2: out = check_enrichment_identities(); break;
      case 3: out = check_horseshoe_quadrature(); break;
      case 4: out = check_importance_weights(); break;
      case 5: out = check_strong_factor_rmse(); break;
      case 6: out = check_diffuse_factor_rmse(); break;
      case 7: out = check_interval_coverage(); break;
      case 8: out = check_csv_fit_recovery(); break;
    }
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  std::printf("[%s] check %d (%s): %s\n", out.pass ? "PASS" : "FAIL", id, kLabels[id - 1],
              out.detail.c_str());
  return out.pass ? 0 : 1;
}
