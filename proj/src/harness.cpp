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

#include "fsiv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fsiv/design.hpp"
#include "fsiv/simgen.hpp"
#include "fsiv/stats.hpp"

namespace fsiv::harness {
namespace {

// Substream tags. Tag 0 seeds data generation; the rest seed the per-method
// chains so methods see independent randomness on shared data.
constexpr std::uint64_t kTagData = 0;
constexpr std::uint64_t kTagFactorShrinkage = 1;
constexpr std::uint64_t kTagHorseshoeRaw = 2;
constexpr std::uint64_t kTagFactorsOnly = 3;

std::uint64_t method_tag(Method m) {
  switch (m) {
    case Method::kFactorShrinkage: return kTagFactorShrinkage;
    case Method::kHorseshoeRaw: return kTagHorseshoeRaw;
    case Method::kFactorsOnly: return kTagFactorsOnly;
  }
  return kTagData;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : fsiv::mean(v);
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return fsiv::standard_error(v);
}

// Runs `body(r)` for r in [0, n) across workers; exceptions escape after join.
void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int r = 0; r < n; ++r) body(r);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto work = [&] {
    for (int r = next.fetch_add(1); r < n; r = next.fetch_add(1)) {
      try {
        body(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct RepFailure {
  int rep = 0;
  std::string what;
};

void log_failures(const std::vector<RepFailure>& failures) {
  for (const auto& f : failures) {
    std::cerr << "replication " << f.rep << " failed: " << f.what << "\n";
  }
}

struct Progress {
  std::atomic<int> done{0};
  int total = 0;
  bool enabled = false;
  std::mutex out_mutex;

  void tick() {
    const int d = done.fetch_add(1) + 1;
    if (!enabled || (d % 25 != 0 && d != total)) return;
    std::lock_guard<std::mutex> lock(out_mutex);
    std::cerr << "completed " << d << "/" << total << " replications\n";
  }
};

simgen::RegimeSpec regime_for(StudyKind kind) {
  switch (kind) {
    case StudyKind::kRmseRegime1: return simgen::RegimeSpec::regime1();
    case StudyKind::kRmseRegime2: return simgen::RegimeSpec::regime2();
    case StudyKind::kIvCoverage: return simgen::RegimeSpec::coverage();
    case StudyKind::kFitCsv: break;
  }
  throw std::invalid_argument("study kind has no simulation regime");
}

struct SimDraw {
  simgen::FactorParams params;
  Eigen::MatrixXd Z;
  Eigen::VectorXd delta;
  double sigma = 0.0;
  Eigen::VectorXd x;
  Rng rng{0};  ///< Live stream after the treatment draw (outcome comes next).
};

// Malformed parameter draws (non-positive residual treatment variance) are
// rejected and redrawn from the next data substream; callers count them.
SimDraw draw_instruments_and_treatment(const simgen::RegimeSpec& spec, std::uint64_t master,
                                       std::uint64_t rep, std::atomic<long>& redraws) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    SimDraw d;
    d.rng = Rng::substream(master, rep, kTagData + 16 * attempt);
    try {
      d.params = simgen::gen_factor_params(spec, d.rng);
      d.Z = simgen::gen_instruments(d.params, spec.n, d.rng);
      d.delta = simgen::implied_delta(d.params, spec.theta);
      d.sigma = simgen::theoretical_sigma(d.params, spec.theta, spec.sigma_resid);
      d.x = simgen::gen_response(d.Z, d.delta, d.sigma, d.rng);
      return d;
    } catch (const NegativeVariance&) {
      redraws.fetch_add(1);
      if (attempt >= 99) throw;
    }
  }
}

double min_ess(const horseshoe::HorseshoeChain& chain) {
  return chain.ess.size() == 0 ? std::numeric_limits<double>::quiet_NaN() : chain.ess.minCoeff();
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool covers(double v) const { return lo <= v && v <= hi; }
};

Interval equal_tailed(const std::vector<double>& draws, double level) {
  const double tail = (1.0 - level) / 2.0;
  return {fsiv::quantile(draws, tail), fsiv::quantile(draws, 1.0 - tail)};
}

}  // namespace

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::kRmseRegime1: return "rmse_regime1";
    case StudyKind::kRmseRegime2: return "rmse_regime2";
    case StudyKind::kIvCoverage: return "iv_coverage";
    case StudyKind::kFitCsv: return "fit_csv";
  }
  return "unknown";
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kFactorShrinkage: return "factor_shrinkage";
    case Method::kHorseshoeRaw: return "horseshoe_raw";
    case Method::kFactorsOnly: return "factors_only";
  }
  return "unknown";
}

void validate(const StudyConfig& config) {
  if (config.replications < 1) throw std::invalid_argument("replication count must be >= 1");
  if (config.methods.empty()) throw std::invalid_argument("method list must be non-empty");
  if (config.chain.n_iter <= config.chain.n_burn) {
    throw std::invalid_argument("chain length must exceed burn-in");
  }
  if (config.kind == StudyKind::kFitCsv) {
    if (config.input_path.empty()) throw std::invalid_argument("fit study requires an input file");
    for (Method m : config.methods) {
      if (m == Method::kFactorsOnly) {
        throw std::invalid_argument("factors_only has no structural-parameter pipeline");
      }
    }
  }
}

double scaled_rmse(const Eigen::VectorXd& delta_hat, const Eigen::VectorXd& delta_true,
                   const Eigen::MatrixXd& Z, double sigma) {
  if (delta_hat.size() != delta_true.size() || Z.rows() != delta_true.size()) {
    throw DimensionMismatch("coefficient and instrument dimensions disagree");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const Eigen::VectorXd gap = Z.transpose() * (delta_true - delta_hat);
  const double mse = gap.squaredNorm() / static_cast<double>(Z.cols());
  return std::sqrt(sigma * sigma + mse) / sigma;
}

StudyReport run_rmse_study(const StudyConfig& config) {
  validate(config);
  if (config.kind != StudyKind::kRmseRegime1 && config.kind != StudyKind::kRmseRegime2) {
    throw std::invalid_argument("run_rmse_study requires an RMSE study kind");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const simgen::RegimeSpec spec = regime_for(config.kind);
  const int R = config.replications;
  const auto n_methods = config.methods.size();

  const bool needs_decomposition =
      std::any_of(config.methods.begin(), config.methods.end(),
                  [](Method m) { return m != Method::kHorseshoeRaw; });

  struct RepResult {
    bool ok = false;
    std::string what;
    std::vector<double> rmse;
    std::vector<double> ess;
  };
  std::vector<RepResult> results(static_cast<std::size_t>(R));
  Progress progress;
  progress.total = R;
  progress.enabled = config.progress;
  std::atomic<long> redraws{0};

  parallel_for(R, config.threads, [&](int r) {
    RepResult& out = results[static_cast<std::size_t>(r)];
    try {
      const SimDraw sim =
          draw_instruments_and_treatment(spec, config.seed, static_cast<std::uint64_t>(r), redraws);
      const Eigen::VectorXd x_centered = sim.x.array() - sim.x.mean();

      const frisch::CorrelationResult corr = frisch::sample_correlation(sim.Z);
      const Eigen::MatrixXd z_std =
          ((sim.Z.colwise() - corr.row_mean).array().colwise() / corr.row_sd.array()).matrix();

      frisch::LoadingsBasis basis;
      design::EnrichedDesign enriched;
      if (needs_decomposition) {
        const frisch::FrischDecomposition dec = frisch::solve_min_trace(corr.corr, config.solve);
        basis = frisch::truncate_loadings(dec, config.rank_rule);
        enriched = design::enrich(z_std, basis);
      }

      for (Method m : config.methods) {
        horseshoe::ChainConfig chain_cfg = config.chain;
        chain_cfg.seed = Rng::derive(config.seed, static_cast<std::uint64_t>(r), method_tag(m));
        Eigen::VectorXd delta_std;
        double ess = std::numeric_limits<double>::quiet_NaN();
        switch (m) {
          case Method::kFactorShrinkage: {
            const auto chain = horseshoe::run_chain(enriched.z_tilde, x_centered, chain_cfg);
            delta_std = design::collapse_coefficients(chain.coeff_mean, enriched);
            ess = min_ess(chain);
            break;
          }
          case Method::kHorseshoeRaw: {
            const auto chain = horseshoe::run_chain(z_std, x_centered, chain_cfg);
            delta_std = chain.coeff_mean;
            ess = min_ess(chain);
            break;
          }
          case Method::kFactorsOnly: {
            const Eigen::MatrixXd factors = basis.b_tilde.transpose() * z_std;
            const auto chain = horseshoe::run_chain(factors, x_centered, chain_cfg);
            delta_std = basis.b_tilde * chain.coeff_mean;
            ess = min_ess(chain);
            break;
          }
        }
        const Eigen::VectorXd delta_hat = (delta_std.array() / corr.row_sd.array()).matrix();
        out.rmse.push_back(scaled_rmse(delta_hat, sim.delta, sim.Z, sim.sigma));
        out.ess.push_back(ess);
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.what = e.what();
    }
    progress.tick();
  });

  StudyReport report;
  report.config = config;
  report.seed = config.seed;
  std::vector<RepFailure> failed;
  std::vector<std::vector<double>> rmse(n_methods), ess(n_methods);
  for (int r = 0; r < R; ++r) {
    const RepResult& res = results[static_cast<std::size_t>(r)];
    if (!res.ok) {
      failed.push_back({r, res.what});
      continue;
    }
    for (std::size_t m = 0; m < n_methods; ++m) {
      rmse[m].push_back(res.rmse[m]);
      ess[m].push_back(res.ess[m]);
    }
  }
  log_failures(failed);
  report.failures = static_cast<int>(failed.size());
  report.parameter_redraws = static_cast<int>(redraws.load());
  for (std::size_t m = 0; m < n_methods; ++m) {
    MethodSummary s;
    s.name = to_string(config.methods[m]);
    s.completed = static_cast<int>(rmse[m].size());
    s.rmse_mean = mean_of(rmse[m]);
    s.rmse_se = se_of(rmse[m]);
    s.ess_mean = mean_of(ess[m]);
    report.per_method.push_back(std::move(s));
  }
  report.input_hash = blob_sha1(render_config_json(config));
  report.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

StudyReport run_coverage_study(const StudyConfig& config) {
  validate(config);
  if (config.kind != StudyKind::kIvCoverage) {
    throw std::invalid_argument("run_coverage_study requires the iv_coverage kind");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const simgen::RegimeSpec spec = regime_for(config.kind);
  const simgen::IvParams iv_params = spec.iv.value();
  const int R = config.replications;
  const auto n_methods = config.methods.size();

  struct RepResult {
    bool ok = false;
    std::string what;
    std::vector<Interval> ci95, ci90;
    std::vector<double> ess;
    std::vector<bool> degenerate;
  };
  std::vector<RepResult> results(static_cast<std::size_t>(R));
  Progress progress;
  progress.total = R;
  progress.enabled = config.progress;
  std::atomic<long> redraws{0};

  parallel_for(R, config.threads, [&](int r) {
    RepResult& out = results[static_cast<std::size_t>(r)];
    try {
      SimDraw sim =
          draw_instruments_and_treatment(spec, config.seed, static_cast<std::uint64_t>(r), redraws);
      const Eigen::VectorXd y = simgen::gen_iv_outcome(sim.x, sim.Z, sim.delta, iv_params.alpha,
                                                       iv_params.beta, iv_params.xi, sim.rng);
      for (Method m : config.methods) {
        if (m == Method::kFactorsOnly) {
          throw std::invalid_argument("factors_only has no structural-parameter pipeline");
        }
        iv::RunIvConfig run_cfg;
        run_cfg.chain = config.chain;
        run_cfg.chain.seed =
            Rng::derive(config.seed, static_cast<std::uint64_t>(r), method_tag(m));
        run_cfg.prior = config.prior;
        run_cfg.rank_rule = config.rank_rule;
        run_cfg.solve = config.solve;
        run_cfg.stage1 = m == Method::kFactorShrinkage ? iv::Stage1Design::kEnriched
                                                       : iv::Stage1Design::kRaw;
        const iv::IVPosterior post = iv::run_iv(sim.x, y, sim.Z, run_cfg);
        out.ci95.push_back(equal_tailed(post.beta, 0.95));
        out.ci90.push_back(equal_tailed(post.beta, 0.90));
        out.ess.push_back(post.ess);
        out.degenerate.push_back(post.degenerate_weights);
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.what = e.what();
    }
    progress.tick();
  });

  StudyReport report;
  report.config = config;
  report.seed = config.seed;
  std::vector<RepFailure> failed;
  std::vector<std::vector<double>> cover95(n_methods), cover90(n_methods);
  std::vector<std::vector<double>> width95(n_methods), width90(n_methods);
  std::vector<std::vector<double>> ess(n_methods), degen(n_methods);
  std::vector<double> ratio95, ratio90, narrower95, narrower90;
  const double beta_true = iv_params.beta;
  for (int r = 0; r < R; ++r) {
    const RepResult& res = results[static_cast<std::size_t>(r)];
    if (!res.ok) {
      failed.push_back({r, res.what});
      continue;
    }
    for (std::size_t m = 0; m < n_methods; ++m) {
      cover95[m].push_back(res.ci95[m].covers(beta_true) ? 1.0 : 0.0);
      cover90[m].push_back(res.ci90[m].covers(beta_true) ? 1.0 : 0.0);
      width95[m].push_back(res.ci95[m].width());
      width90[m].push_back(res.ci90[m].width());
      ess[m].push_back(res.ess[m]);
      degen[m].push_back(res.degenerate[m] ? 1.0 : 0.0);
    }
    if (n_methods >= 2) {
      ratio95.push_back(res.ci95[0].width() / res.ci95[1].width());
      ratio90.push_back(res.ci90[0].width() / res.ci90[1].width());
      narrower95.push_back(res.ci95[0].width() < res.ci95[1].width() ? 1.0 : 0.0);
      narrower90.push_back(res.ci90[0].width() < res.ci90[1].width() ? 1.0 : 0.0);
    }
  }
  log_failures(failed);
  report.failures = static_cast<int>(failed.size());
  report.parameter_redraws = static_cast<int>(redraws.load());
  for (std::size_t m = 0; m < n_methods; ++m) {
    MethodSummary s;
    s.name = to_string(config.methods[m]);
    s.completed = static_cast<int>(cover95[m].size());
    s.coverage95 = mean_of(cover95[m]);
    s.coverage90 = mean_of(cover90[m]);
    s.width95_mean = mean_of(width95[m]);
    s.width90_mean = mean_of(width90[m]);
    s.ess_mean = mean_of(ess[m]);
    s.degenerate_rate = mean_of(degen[m]);
    report.per_method.push_back(std::move(s));
  }
  report.comparison.width_ratio_mean95 = mean_of(ratio95);
  report.comparison.width_ratio_mean90 = mean_of(ratio90);
  report.comparison.narrower_fraction95 = mean_of(narrower95);
  report.comparison.narrower_fraction90 = mean_of(narrower90);
  report.input_hash = blob_sha1(render_config_json(config));
  report.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

StudyReport run_fit_study(const StudyConfig& config) {
  validate(config);
  if (config.kind != StudyKind::kFitCsv) {
    throw std::invalid_argument("run_fit_study requires the fit_csv kind");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = ingest_csv(config.input_path);
  const int R = config.replications;
  const auto n_methods = config.methods.size();

  struct RepResult {
    bool ok = false;
    std::string what;
    std::vector<double> beta_mean, beta_sd, alpha_mean, alpha_sd, ess;
    std::vector<bool> degenerate;
  };
  std::vector<RepResult> results(static_cast<std::size_t>(R));
  Progress progress;
  progress.total = R;
  progress.enabled = config.progress;

  parallel_for(R, config.threads, [&](int r) {
    RepResult& out = results[static_cast<std::size_t>(r)];
    try {
      for (Method m : config.methods) {
        iv::RunIvConfig run_cfg;
        run_cfg.chain = config.chain;
        run_cfg.chain.seed =
            Rng::derive(config.seed, static_cast<std::uint64_t>(r), method_tag(m));
        run_cfg.prior = config.prior;
        run_cfg.rank_rule = config.rank_rule;
        run_cfg.solve = config.solve;
        run_cfg.stage1 = m == Method::kFactorShrinkage ? iv::Stage1Design::kEnriched
                                                       : iv::Stage1Design::kRaw;
        const iv::IVPosterior post = iv::run_iv(data.x, data.y, data.Z, run_cfg);
        out.beta_mean.push_back(fsiv::mean(post.beta));
        out.beta_sd.push_back(fsiv::sample_sd(post.beta));
        out.alpha_mean.push_back(fsiv::mean(post.alpha));
        out.alpha_sd.push_back(fsiv::sample_sd(post.alpha));
        out.ess.push_back(post.ess);
        out.degenerate.push_back(post.degenerate_weights);
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.what = e.what();
    }
    progress.tick();
  });

  StudyReport report;
  report.config = config;
  report.seed = config.seed;
  std::vector<RepFailure> failed;
  std::vector<std::vector<double>> bm(n_methods), bs(n_methods), am(n_methods), as(n_methods),
      ess(n_methods), degen(n_methods);
  for (int r = 0; r < R; ++r) {
    const RepResult& res = results[static_cast<std::size_t>(r)];
    if (!res.ok) {
      failed.push_back({r, res.what});
      continue;
    }
    for (std::size_t m = 0; m < n_methods; ++m) {
      bm[m].push_back(res.beta_mean[m]);
      bs[m].push_back(res.beta_sd[m]);
      am[m].push_back(res.alpha_mean[m]);
      as[m].push_back(res.alpha_sd[m]);
      ess[m].push_back(res.ess[m]);
      degen[m].push_back(res.degenerate[m] ? 1.0 : 0.0);
    }
  }
  log_failures(failed);
  report.failures = static_cast<int>(failed.size());
  for (std::size_t m = 0; m < n_methods; ++m) {
    MethodSummary s;
    s.name = to_string(config.methods[m]);
    s.completed = static_cast<int>(bm[m].size());
    s.beta_mean = mean_of(bm[m]);
    s.beta_sd = mean_of(bs[m]);
    s.alpha_mean = mean_of(am[m]);
    s.alpha_sd = mean_of(as[m]);
    s.ess_mean = mean_of(ess[m]);
    s.degenerate_rate = mean_of(degen[m]);
    report.per_method.push_back(std::move(s));
  }
  report.input_hash = blob_sha1(read_file(config.input_path));
  report.runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

StudyReport run_study(const StudyConfig& config) {
  switch (config.kind) {
    case StudyKind::kRmseRegime1:
    case StudyKind::kRmseRegime2: return run_rmse_study(config);
    case StudyKind::kIvCoverage: return run_coverage_study(config);
    case StudyKind::kFitCsv: return run_fit_study(config);
  }
  throw std::invalid_argument("unknown study kind");
}

}  // namespace fsiv::harness
