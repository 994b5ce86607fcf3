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

#ifndef FSIV_STATS_HPP
#define FSIV_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "fsiv/errors.hpp"

/// \file
/// \brief Small numeric helpers: moments, quantiles, log-sum-exp, MCMC
/// effective sample size, and a one-sample Kolmogorov-Smirnov statistic.

namespace fsiv {

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n-1 denominator).
inline double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Monte Carlo standard error of the sample mean.
inline double standard_error(const std::vector<double>& v) {
  return sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
}

/// Linear-interpolation sample quantile (the common "type 7" definition).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw DimensionMismatch("quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// log(sum_i exp(x_i)) computed stably.
inline double log_sum_exp(const std::vector<double>& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

/// Effective sample size of a (possibly autocorrelated) scalar chain using
/// Geyer's initial monotone sequence estimator on paired autocovariances.
inline double effective_sample_size(const std::vector<double>& chain) {
  const std::size_t n = chain.size();
  if (n < 4) return static_cast<double>(n);
  const double m = mean(chain);
  std::vector<double> c(n, 0.0);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (chain[i] - m) * (chain[i + lag] - m);
    c[lag] = s / static_cast<double>(n);
    if (lag > 0 && lag % 2 == 0 && c[lag - 1] + c[lag] <= 0.0) break;
  }
  if (c[0] <= 0.0) return static_cast<double>(n);
  double sum_pairs = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; 2 * k < n; ++k) {
    const double pair = c[2 * k - 1] + c[2 * k];
    if (pair <= 0.0) break;
    const double capped = std::min(pair, prev);
    sum_pairs += capped;
    prev = capped;
  }
  const double var_ratio = 1.0 + 2.0 * sum_pairs / c[0];
  return std::max(1.0, static_cast<double>(n) / var_ratio);
}

/// One-sample KS statistic sup_x |F_n(x) - F(x)| against a given CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

}  // namespace fsiv

#endif  // FSIV_STATS_HPP
