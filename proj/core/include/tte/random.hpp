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

// Seeded random streams. All randomness in the library flows from a single
// 64-bit master seed; independent streams are derived by hashing
// (master, stream tag, index), so a replicate's draws do not depend on how
// many workers run or in which order replicates are scheduled.

#ifndef TTE_RANDOM_HPP_
#define TTE_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tte {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

// Counter-based seed derivation for stream `index` under `tag`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                          std::uint64_t index);

Rng make_stream(std::uint64_t master, std::uint64_t tag, std::uint64_t index);

// Stream tags. Values are part of the reproducibility contract.
namespace stream {
inline constexpr std::uint64_t kReplicate = 0x7265706cULL;
inline constexpr std::uint64_t kReplicateRetry = 0x72747279ULL;
inline constexpr std::uint64_t kOutcomeFit = 0x6f757466ULL;
inline constexpr std::uint64_t kPropensityFit = 0x70726f70ULL;
inline constexpr std::uint64_t kDirect = 0x64697265ULL;
inline constexpr std::uint64_t kExperiment = 0x65787072ULL;
inline constexpr std::uint64_t kSimulation = 0x73696d75ULL;
}  // namespace stream

// Uniform on the open interval (0, 1).
double uniform_open01(Rng& rng);

double standard_normal(Rng& rng);

bool bernoulli(Rng& rng, double p);

// Uniform index in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

// log of a Gamma(shape, 1) variate. Shapes below one use the boost
// G(a) = G(a + 1) * U^(1/a), evaluated in log space so that tiny shapes
// do not underflow to zero.
double log_gamma_variate(Rng& rng, double shape);

double gamma_variate(Rng& rng, double shape);

// Dirichlet draw by normalising independent gammas. Zero concentrations
// yield exactly zero weight. Throws DegenerateArmError when no entry is
// positive.
std::vector<double> sample_dirichlet(Rng& rng,
                                     std::span<const double> concentration);

// Normal(mean, 1) truncated to (0, inf) when `positive`, else (-inf, 0).
double truncated_normal_unit(Rng& rng, double mean, bool positive);

// Inverse-gamma(shape, scale) variate: scale / Gamma(shape, 1).
double inverse_gamma_variate(Rng& rng, double shape, double scale);

}  // namespace tte

#endif  // TTE_RANDOM_HPP_
