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

#ifndef FSIV_RNG_HPP
#define FSIV_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

/**
 * \file
 * \brief Seeded random number generation with counter-derived substreams.
 *
 * The engine is std::mt19937_64 (bit-exact across standard libraries); all
 * variate transforms are implemented here rather than through
 * std::*_distribution, whose output sequences are implementation-defined.
 * This keeps fixed-seed results identical across toolchains, which the
 * replication harness relies on.
 *
 * Substreams are derived by hashing (master seed, stream, tag) through the
 * SplitMix64 finalizer, so each simulation replication owns an independent
 * stream regardless of scheduling order.
 */

namespace fsiv {

/// SplitMix64 finalizer; a cheap, well-mixed 64-bit hash.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seeded generator with the variate transforms used by the samplers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Seed of the independent stream keyed by (master, stream, tag).
  static constexpr std::uint64_t derive(std::uint64_t master, std::uint64_t stream,
                                        std::uint64_t tag = 0) noexcept {
    return mix64(mix64(master ^ mix64(stream)) ^ mix64(tag ^ 0x6C62272E07BB0142ULL));
  }

  /// Independent stream keyed by (master, stream, tag); order-free derivation.
  static Rng substream(std::uint64_t master, std::uint64_t stream, std::uint64_t tag = 0) {
    return Rng(derive(master, stream, tag));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); rejects exact zero so log/power transforms stay finite.
  double uniform_pos() {
    double u = uniform();
    while (u == 0.0) u = uniform();
    return u;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  /// Gamma(shape, scale 1) via Marsaglia-Tsang, with the power boost for shape < 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      return gamma(shape + 1.0) * std::pow(uniform_pos(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Inverse-gamma(shape, scale): density proportional to y^{-shape-1} exp(-scale/y).
  double inv_gamma(double shape, double scale) { return scale / gamma(shape); }

  double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

  /// Student-t with df degrees of freedom (not standardized to unit variance).
  double student_t(double df) { return normal() / std::sqrt(chi_squared(df) / df); }

  /// Half-Cauchy C+(0,1) via the inverse CDF.
  double half_cauchy() { return std::tan(0.5 * std::numbers::pi * uniform()); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fsiv

#endif  // FSIV_RNG_HPP
