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

#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tte/random.hpp"

namespace tte::cli {

std::string synthetic_birthweight_csv(std::size_t n, std::uint64_t seed,
                                      const SyntheticBirthweight& p) {
  Rng rng = make_stream(seed, stream::kSimulation, 1);
  auto clamp_round = [](double v, double lo, double hi) {
    return std::clamp(std::round(v), lo, hi);
  };
  std::ostringstream out;
  out << "bweight,mbsmoke,mage,medu,mmarried,foreign,fage,fedu,fbaby,"
         "deadkids,mrace,mhisp\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double mage = clamp_round(26.0 + 5.0 * standard_normal(rng), 15, 45);
    const double medu = clamp_round(12.5 + 2.2 * standard_normal(rng), 0, 17);
    const double married =
        bernoulli(rng, 1.0 / (1.0 + std::exp(-(0.15 * (mage - 22.0) +
                                               0.2 * (medu - 12.0)))))
            ? 1.0
            : 0.0;
    const double foreign = bernoulli(rng, 0.05) ? 1.0 : 0.0;
    const double fage =
        clamp_round(mage + 2.5 + 3.0 * standard_normal(rng), 15, 60);
    const double fedu = clamp_round(medu + 1.8 * standard_normal(rng), 0, 17);
    const double fbaby = bernoulli(rng, 0.44) ? 1.0 : 0.0;
    const double deadkids = fbaby == 1.0 ? 0.0 : (bernoulli(rng, 0.3) ? 1.0 : 0.0);
    const double mrace = bernoulli(rng, 0.86) ? 1.0 : 0.0;
    const double mhisp = bernoulli(rng, 0.04) ? 1.0 : 0.0;
    const double logit = -0.9 - 0.04 * (mage - 26.0) - 0.3 * (medu - 12.0) -
                         0.9 * married - 0.6 * foreign + 0.2 * deadkids;
    const bool smoker = bernoulli(rng, 1.0 / (1.0 + std::exp(-logit)));
    const double cessation_effect = p.base_effect + p.age_slope * (mage - 27.0);
    const double y = 3150.0 + 8.0 * (mage - 26.0) + 15.0 * (medu - 12.0) +
                     90.0 * married - 60.0 * fbaby - 40.0 * foreign +
                     (smoker ? 0.0 : cessation_effect) +
                     p.noise_sd * standard_normal(rng);
    out << std::round(y) << ',' << (smoker ? 1 : 0) << ',' << mage << ','
        << medu << ',' << married << ',' << foreign << ',' << fage << ','
        << fedu << ',' << fbaby << ',' << deadkids << ',' << mrace << ','
        << mhisp << '\n';
  }
  return out.str();
}

}  // namespace tte::cli
