/*
 * Copyright 2026 The TTE Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tte/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "tte/errors.hpp"

namespace tte {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                          std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ tag) + index);
}

Rng make_stream(std::uint64_t master, std::uint64_t tag, std::uint64_t index) {
  return Rng(derive_seed(master, tag, index));
}

double uniform_open01(Rng& rng) {
  // 53 random mantissa bits, shifted by half an ulp off zero.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  return normal(rng);
}

bool bernoulli(Rng& rng, double p) { return uniform_open01(rng) < p; }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return pick(rng);
}

double log_gamma_variate(Rng& rng, double shape) {
  if (shape >= 1.0) {
    boost::random::gamma_distribution<double> gamma(shape, 1.0);
    return std::log(gamma(rng));
  }
  boost::random::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  return std::log(gamma(rng)) + std::log(uniform_open01(rng)) / shape;
}

double gamma_variate(Rng& rng, double shape) {
  return std::exp(log_gamma_variate(rng, shape));
}

std::vector<double> sample_dirichlet(Rng& rng,
                                     std::span<const double> concentration) {
  std::vector<double> log_g(concentration.size(),
                            -std::numeric_limits<double>::infinity());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < concentration.size(); ++i) {
    const double c = concentration[i];
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw DomainError("Dirichlet concentration must be finite and >= 0");
    }
    if (c > 0.0) {
      log_g[i] = log_gamma_variate(rng, c);
      max_log = std::max(max_log, log_g[i]);
    }
  }
  if (!std::isfinite(max_log)) {
    throw DegenerateArmError("Dirichlet draw with all-zero concentrations");
  }
  std::vector<double> w(concentration.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (concentration[i] > 0.0) {
      w[i] = std::exp(log_g[i] - max_log);
      total += w[i];
    }
  }
  for (double& v : w) v /= total;
  return w;
}

namespace {

// Standard normal truncated to (a, inf).
double lower_truncated_standard_normal(Rng& rng, double a) {
  if (a < 0.45) {
    for (;;) {
      const double z = standard_normal(rng);
      if (z > a) return z;
    }
  }
  // Exponential proposal with the optimal rate (Robert, 1995).
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(uniform_open01(rng)) / rate;
    const double d = z - rate;
    if (std::log(uniform_open01(rng)) < -0.5 * d * d) return z;
  }
}

}  // namespace

double truncated_normal_unit(Rng& rng, double mean, bool positive) {
  if (positive) return mean + lower_truncated_standard_normal(rng, -mean);
  return mean - lower_truncated_standard_normal(rng, mean);
}

double inverse_gamma_variate(Rng& rng, double shape, double scale) {
  return scale / gamma_variate(rng, shape);
}

}  // namespace tte
