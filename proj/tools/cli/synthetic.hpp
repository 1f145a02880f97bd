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

// Synthetic stand-in for the birthweight study, with the same column layout
// as the public excerpt. Used by `simulate --emit-dataset`, the integration
// tests and the demo configuration.

#ifndef TTE_CLI_SYNTHETIC_HPP_
#define TTE_CLI_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

namespace tte::cli {

struct SyntheticBirthweight {
  double base_effect = 250.0;   // cessation effect at age 27, grams
  double age_slope = 8.0;       // change in effect per year of age
  double noise_sd = 500.0;
};

// CSV text with columns bweight, mbsmoke, mage, medu, mmarried, foreign,
// fage, fedu, fbaby, deadkids, mrace, mhisp. mbsmoke = 1 marks a smoker.
std::string synthetic_birthweight_csv(std::size_t n, std::uint64_t seed,
                                      const SyntheticBirthweight& p = {});

}  // namespace tte::cli

#endif  // TTE_CLI_SYNTHETIC_HPP_
