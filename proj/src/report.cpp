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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "fsiv/harness.hpp"
#include "json.hpp"

namespace fsiv::harness {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json num_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json config_json(const StudyConfig& c) {
  ordered_json j;
  j["kind"] = to_string(c.kind);
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  ordered_json methods = ordered_json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["chain"] = {{"n_iter", c.chain.n_iter},
                {"n_burn", c.chain.n_burn},
                {"thin", c.chain.thin},
                {"noise_shape", c.chain.noise_shape},
                {"noise_scale", c.chain.noise_scale}};
  j["prior"] = {{"coef_scale", c.prior.coef_scale},
                {"sum_sq_offset", c.prior.sum_sq_offset},
                {"dof_offset", c.prior.dof_offset}};
  if (c.rank_rule.kind == frisch::RankRule::Kind::kFixed) {
    j["rank_rule"] = {{"kind", "fixed"}, {"k", c.rank_rule.k}};
  } else {
    j["rank_rule"] = {{"kind", "threshold"}, {"tau", c.rank_rule.tau}};
  }
  j["solve"] = {{"tol", c.solve.tol},
                {"tol_psd", c.solve.tol_psd},
                {"max_iter", c.solve.max_iter}};
  j["levels"] = {0.90, 0.95};
  j["input"] = c.input_path.empty() ? ordered_json(nullptr) : ordered_json(c.input_path);
  return j;
}

ordered_json method_json(const MethodSummary& s) {
  ordered_json j;
  j["name"] = s.name;
  j["rmse_mean"] = num_or_null(s.rmse_mean);
  j["rmse_se"] = num_or_null(s.rmse_se);
  j["coverage"] = num_or_null(s.coverage95);
  j["width_mean"] = num_or_null(s.width95_mean);
  j["ess_mean"] = num_or_null(s.ess_mean);
  j["coverage90"] = num_or_null(s.coverage90);
  j["width90_mean"] = num_or_null(s.width90_mean);
  j["degenerate_rate"] = num_or_null(s.degenerate_rate);
  j["beta_mean"] = num_or_null(s.beta_mean);
  j["beta_sd"] = num_or_null(s.beta_sd);
  j["alpha_mean"] = num_or_null(s.alpha_mean);
  j["alpha_sd"] = num_or_null(s.alpha_sd);
  j["completed"] = s.completed;
  return j;
}

const char* const kRmseMetrics[] = {"completed", "rmse_mean", "rmse_se", "ess_mean"};
const char* const kCoverageMetrics[] = {"completed",    "coverage",       "coverage90",
                                        "width_mean",   "width90_mean",   "ess_mean",
                                        "degenerate_rate"};
const char* const kFitMetrics[] = {"completed", "beta_mean", "beta_sd",        "alpha_mean",
                                   "alpha_sd",  "ess_mean",  "degenerate_rate"};

}  // namespace

std::string render_config_json(const StudyConfig& config) { return config_json(config).dump(); }

std::string render_report_json(const StudyReport& report) {
  ordered_json j;
  j["config"] = config_json(report.config);
  ordered_json methods = ordered_json::array();
  for (const auto& s : report.per_method) methods.push_back(method_json(s));
  j["per_method"] = methods;
  j["comparison"] = {{"width_ratio_mean", num_or_null(report.comparison.width_ratio_mean95)},
                     {"width_ratio_mean90", num_or_null(report.comparison.width_ratio_mean90)},
                     {"narrower_fraction", num_or_null(report.comparison.narrower_fraction95)},
                     {"narrower_fraction90", num_or_null(report.comparison.narrower_fraction90)}};
  j["failures"] = report.failures;
  j["parameter_redraws"] = report.parameter_redraws;
  j["runtime_sec"] = report.runtime_sec;
  j["seed"] = report.seed;
  j["input_hash"] = report.input_hash;
  return j.dump(2) + "\n";
}

std::string render_report_csv(const StudyReport& report) {
  const ordered_json j = ordered_json::parse(render_report_json(report));
  std::string out = "method,metric,value\n";
  const auto metrics = [&]() -> std::pair<const char* const*, std::size_t> {
    switch (report.config.kind) {
      case StudyKind::kRmseRegime1:
      case StudyKind::kRmseRegime2: return {kRmseMetrics, std::size(kRmseMetrics)};
      case StudyKind::kIvCoverage: return {kCoverageMetrics, std::size(kCoverageMetrics)};
      case StudyKind::kFitCsv: return {kFitMetrics, std::size(kFitMetrics)};
    }
    return {kRmseMetrics, std::size(kRmseMetrics)};
  }();
  char buf[64];
  for (const auto& method : j["per_method"]) {
    for (std::size_t i = 0; i < metrics.second; ++i) {
      const ordered_json& v = method[metrics.first[i]];
      out += method["name"].get<std::string>();
      out += ',';
      out += metrics.first[i];
      out += ',';
      if (v.is_number_integer()) {
        out += std::to_string(v.get<long long>());
      } else if (v.is_number()) {
        std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

void emit_report(const StudyReport& report, const std::string& format, const std::string& path) {
  std::string content;
  if (format == "json") {
    content = render_report_json(report);
  } else if (format == "csv") {
    content = render_report_csv(report);
  } else {
    throw std::invalid_argument("unknown report format: " + format);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out << content;
  if (!out) throw IoError("write failed on " + path);
}

std::string blob_sha1(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw Error("digest computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace fsiv::harness
