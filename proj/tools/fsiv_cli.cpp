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

#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fsiv/harness.hpp"
#include "fsiv/simgen.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

fsiv::harness::Method parse_method(const std::string& name) {
  if (name == "factor_shrinkage") return fsiv::harness::Method::kFactorShrinkage;
  if (name == "horseshoe_raw") return fsiv::harness::Method::kHorseshoeRaw;
  if (name == "factors_only") return fsiv::harness::Method::kFactorsOnly;
  throw std::invalid_argument("unknown method: " + name);
}

fsiv::frisch::RankRule parse_rank_rule(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "fixed") return fsiv::frisch::RankRule::fixed(std::stoi(arg));
    if (kind == "threshold") return fsiv::frisch::RankRule::threshold(std::stod(arg));
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed rank rule: " + text);
  }
  throw std::invalid_argument("rank rule must be fixed:<k> or threshold:<tau>, got " + text);
}

struct CommonFlags {
  std::uint64_t seed = 42;
  int reps = 0;  // 0 keeps the per-subcommand default
  int iters = 0;
  int burn = -1;
  std::string rank_rule;
  std::string out;
  std::string format = "json";
  std::vector<std::string> methods;
  int threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--reps", reps, "Replication count");
    cmd->add_option("--iters", iters, "Chain length including burn-in");
    cmd->add_option("--burn", burn, "Burn-in sweeps");
    cmd->add_option("--rank-rule", rank_rule, "fixed:<k> or threshold:<tau>");
    cmd->add_option("--out", out, "Report file path (default: stdout)");
    cmd->add_option("--format", format, "Report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--methods", methods, "Subset of methods to run")->delimiter(',');
    cmd->add_option("--threads", threads, "Worker threads (0 = hardware)");
  }

  void apply(fsiv::harness::StudyConfig& cfg) const {
    cfg.seed = seed;
    if (reps > 0) cfg.replications = reps;
    if (iters > 0) cfg.chain.n_iter = iters;
    if (burn >= 0) cfg.chain.n_burn = burn;
    if (!rank_rule.empty()) cfg.rank_rule = parse_rank_rule(rank_rule);
    if (!methods.empty()) {
      cfg.methods.clear();
      for (const auto& m : methods) cfg.methods.push_back(parse_method(m));
    }
    cfg.output_path = out;
    cfg.threads = threads;
    cfg.progress = true;
  }
};

int deliver(const fsiv::harness::StudyReport& report, const CommonFlags& flags) {
  if (flags.out.empty()) {
    if (flags.format == "csv") {
      std::cout << fsiv::harness::render_report_csv(report);
    } else {
      std::cout << fsiv::harness::render_report_json(report);
    }
  } else {
    fsiv::harness::emit_report(report, flags.format, flags.out);
    std::cout << "report written to " << flags.out << "\n";
  }
  if (report.failures > 0) {
    std::cerr << report.failures << " replication(s) failed and were excluded\n";
  }
  if (report.failures >= report.config.replications) return kExitNumerical;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-shrinkage instrumental-variable regression toolkit"};
  app.require_subcommand(1);

  CLI::App* rmse = app.add_subcommand("rmse", "Prediction-error replication study");
  int regime = 1;
  rmse->add_option("--regime", regime, "Simulation regime")->check(CLI::IsMember({1, 2}));
  CommonFlags rmse_flags;
  rmse_flags.attach(rmse);

  CLI::App* coverage = app.add_subcommand("coverage", "Interval-coverage replication study");
  CommonFlags coverage_flags;
  coverage_flags.attach(coverage);

  CLI::App* fit = app.add_subcommand("fit", "Fit the model to a CSV dataset");
  std::string input;
  fit->add_option("--input", input, "CSV file with header y,x,z1,...,zp")->required();
  CommonFlags fit_flags;
  fit_flags.attach(fit);

  CLI::App* simulate = app.add_subcommand("simulate", "Export a synthetic dataset as CSV");
  std::uint64_t sim_seed = 42;
  std::string sim_out;
  simulate->add_option("--seed", sim_seed, "Generator seed");
  simulate->add_option("--out", sim_out, "Destination CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    fsiv::harness::StudyConfig cfg;
    if (rmse->parsed()) {
      cfg.kind = regime == 1 ? fsiv::harness::StudyKind::kRmseRegime1
                             : fsiv::harness::StudyKind::kRmseRegime2;
      rmse_flags.apply(cfg);
      return deliver(fsiv::harness::run_rmse_study(cfg), rmse_flags);
    }
    if (coverage->parsed()) {
      cfg.kind = fsiv::harness::StudyKind::kIvCoverage;
      cfg.replications = 250;
      cfg.methods = {fsiv::harness::Method::kFactorShrinkage,
                     fsiv::harness::Method::kHorseshoeRaw};
      coverage_flags.apply(cfg);
      return deliver(fsiv::harness::run_coverage_study(cfg), coverage_flags);
    }
    if (fit->parsed()) {
      cfg.kind = fsiv::harness::StudyKind::kFitCsv;
      cfg.replications = 1;
      cfg.methods = {fsiv::harness::Method::kFactorShrinkage};
      fit_flags.apply(cfg);
      cfg.input_path = input;
      return deliver(fsiv::harness::run_fit_study(cfg), fit_flags);
    }
    if (simulate->parsed()) {
      const fsiv::simgen::RegimeSpec spec = fsiv::simgen::RegimeSpec::coverage();
      const fsiv::simgen::IvParams iv = spec.iv.value();
      fsiv::Rng rng(sim_seed);
      const auto params = fsiv::simgen::gen_factor_params(spec, rng);
      const Eigen::MatrixXd Z = fsiv::simgen::gen_instruments(params, spec.n, rng);
      const Eigen::VectorXd delta = fsiv::simgen::implied_delta(params, spec.theta);
      const double sigma = fsiv::simgen::theoretical_sigma(params, spec.theta, spec.sigma_resid);
      const Eigen::VectorXd x = fsiv::simgen::gen_response(Z, delta, sigma, rng);
      const Eigen::VectorXd y =
          fsiv::simgen::gen_iv_outcome(x, Z, delta, iv.alpha, iv.beta, iv.xi, rng);
      fsiv::harness::export_csv(sim_out, y, x, Z);
      std::cout << "dataset written to " << sim_out << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fsiv::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fsiv::MissingColumn& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fsiv::IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fsiv::DimensionMismatch& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fsiv::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
