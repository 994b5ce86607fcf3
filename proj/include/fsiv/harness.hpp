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

#ifndef FSIV_HARNESS_HPP
#define FSIV_HARNESS_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fsiv/errors.hpp"
#include "fsiv/frisch.hpp"
#include "fsiv/horseshoe.hpp"
#include "fsiv/iv.hpp"

/**
 * \file
 * \brief Replication studies, metrics, CSV ingestion, and report emission.
 *
 * Studies are exactly reproducible from (config, master seed): replication r
 * draws all of its randomness from substreams keyed by (seed, r, tag), so
 * results do not depend on execution order or the number of worker threads.
 * Aggregation runs in replication-index order. Failed replications are
 * logged to stderr, excluded from the aggregates, and counted in the report.
 */

namespace fsiv::harness {

enum class StudyKind { kRmseRegime1, kRmseRegime2, kIvCoverage, kFitCsv };

enum class Method { kFactorShrinkage, kHorseshoeRaw, kFactorsOnly };

std::string to_string(StudyKind kind);
std::string to_string(Method method);

struct StudyConfig {
  StudyKind kind = StudyKind::kRmseRegime1;
  int replications = 200;
  std::uint64_t seed = 42;
  std::vector<Method> methods = {Method::kFactorShrinkage, Method::kHorseshoeRaw,
                                 Method::kFactorsOnly};
  horseshoe::ChainConfig chain;
  iv::NIGPrior prior;
  frisch::RankRule rank_rule = frisch::RankRule::threshold(0.05);
  frisch::SolveOptions solve;
  std::string input_path;   ///< Data file, fit studies only.
  std::string output_path;  ///< Report destination; empty writes nothing.
  int threads = 0;          ///< Worker count; 0 picks the hardware default.
  bool progress = false;    ///< Emit completion ticks on stderr.
};

/// \throws std::invalid_argument on violated invariants (non-positive
/// replication count, empty method list, missing input path, ...).
void validate(const StudyConfig& config);

/// Aggregates for one method. Fields that a study kind does not produce are
/// quiet NaN and serialize as null.
struct MethodSummary {
  std::string name;
  int completed = 0;  ///< Replications contributing after failures.
  double rmse_mean = std::numeric_limits<double>::quiet_NaN();
  double rmse_se = std::numeric_limits<double>::quiet_NaN();
  double coverage95 = std::numeric_limits<double>::quiet_NaN();
  double coverage90 = std::numeric_limits<double>::quiet_NaN();
  double width95_mean = std::numeric_limits<double>::quiet_NaN();
  double width90_mean = std::numeric_limits<double>::quiet_NaN();
  double ess_mean = std::numeric_limits<double>::quiet_NaN();
  double degenerate_rate = std::numeric_limits<double>::quiet_NaN();
  double beta_mean = std::numeric_limits<double>::quiet_NaN();
  double beta_sd = std::numeric_limits<double>::quiet_NaN();
  double alpha_mean = std::numeric_limits<double>::quiet_NaN();
  double alpha_sd = std::numeric_limits<double>::quiet_NaN();
};

/// Per-replication pairing of the first two methods (coverage studies).
struct PairedComparison {
  double width_ratio_mean95 = std::numeric_limits<double>::quiet_NaN();
  double width_ratio_mean90 = std::numeric_limits<double>::quiet_NaN();
  double narrower_fraction95 = std::numeric_limits<double>::quiet_NaN();
  double narrower_fraction90 = std::numeric_limits<double>::quiet_NaN();
};

struct StudyReport {
  StudyConfig config;
  std::vector<MethodSummary> per_method;
  PairedComparison comparison;
  int failures = 0;
  int parameter_redraws = 0;  ///< Simulation draws rejected and replaced.
  double runtime_sec = 0.0;
  std::uint64_t seed = 0;
  std::string input_hash;  ///< Blob hash of the input file (fit) or config.
};

/// Root mean squared prediction error over the observed design, floored by
/// and scaled to the best attainable error:
/// sqrt(sigma^2 + n^{-1} sum_i (z_i^t (delta - delta_hat))^2) / sigma.
double scaled_rmse(const Eigen::VectorXd& delta_hat, const Eigen::VectorXd& delta_true,
                   const Eigen::MatrixXd& Z, double sigma);

StudyReport run_rmse_study(const StudyConfig& config);
StudyReport run_coverage_study(const StudyConfig& config);
StudyReport run_fit_study(const StudyConfig& config);

/// Dispatch on config.kind.
StudyReport run_study(const StudyConfig& config);

struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXd x;
  Eigen::MatrixXd Z;  ///< p x n, one row per instrument.
};

/// Strict reader for the `y,x,z1,...,zp` layout: exact header names, equal
/// row lengths, numeric cells, at least two data rows.
///
/// \throws MissingColumn, ParseError, NonNumericCell, IoError
Dataset ingest_csv(const std::string& path);

/// Writes the same layout at 17 significant digits (lossless round trip).
void export_csv(const std::string& path, const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                const Eigen::MatrixXd& Z);

std::string render_report_json(const StudyReport& report);
std::string render_report_csv(const StudyReport& report);

/// Canonical serialization of a config; embedded in reports and hashed for
/// simulated studies (fit studies hash the input file instead).
std::string render_config_json(const StudyConfig& config);

/// \throws IoError if the file cannot be read.
std::string read_file(const std::string& path);

/// Writes the report to `path` in `format` ("json" or "csv").
///
/// \throws std::invalid_argument on unknown format; IoError on write failure.
void emit_report(const StudyReport& report, const std::string& format, const std::string& path);

/// Hex SHA-1 of `blob <size>\0<content>`, matching `git hash-object`.
std::string blob_sha1(const std::string& content);

}  // namespace fsiv::harness

#endif  // FSIV_HARNESS_HPP
