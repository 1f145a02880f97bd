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

// Marginal prediction with inverse probability weighting.
//
// The first-step predictive of Y in trial arm t puts Hajek weight lambda_ti
// on each observed outcome. Predictive resampling then follows a Polya urn
// in which the observed component carries prior mass ess_t; the limit is a
// Dirichlet(ess_t * lambda_t) random measure, available in closed form.

#ifndef TTE_IPW_HPP_
#define TTE_IPW_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "tte/errors.hpp"
#include "tte/random.hpp"

namespace tte {

enum class EssMode { kObservedCount, kImportanceSampling };

std::string_view to_string(EssMode mode);
EssMode parse_ess_mode(std::string_view text);

struct HajekWeightSet {
  std::vector<double> lambda1;
  std::vector<double> lambda0;
  EssMode ess_mode = EssMode::kObservedCount;
  double ess1 = 0.0;
  double ess0 = 0.0;
};

// lambda_1i = (t_i / pi_i) / sum_j (t_j / pi_j), and likewise for arm 0 with
// (1 - t) / (1 - pi). ESS fields are left at zero; see
// effective_sample_size(). Throws PositivityError for a single-arm input and
// DomainError when some pi is not strictly inside (0, 1).
HajekWeightSet hajek_weights(std::span<const int> t,
                             std::span<const double> pi);

struct EffectiveSampleSizes {
  double ess1 = 0.0;
  double ess0 = 0.0;
  double total() const { return ess1 + ess0; }
};

// Observed-count mode: arm sizes. Importance-sampling mode: 1 / sum lambda^2.
EffectiveSampleSizes effective_sample_size(const HajekWeightSet& w,
                                           std::span<const int> t,
                                           EssMode mode);

// Returns `w` with ess_mode/ess1/ess0 filled for `mode`.
HajekWeightSet with_effective_sample_size(HajekWeightSet w,
                                          std::span<const int> t,
                                          EssMode mode);

struct ClippedPropensities {
  std::vector<double> pi;
  std::size_t clipped = 0;
  double lower = 0.0;
  double upper = 1.0;
};

// Clips into [lower, 1 - lower] and counts how many values moved.
ClippedPropensities clip_propensities(std::span<const double> pi,
                                      double lower = 1e-3);

// Finite base measure for prior shrinkage: atoms with weights summing to
// one, and concentration alpha >= 0.
struct ShrinkageBase {
  std::vector<double> atoms;
  std::vector<double> weights;
  double alpha = 0.0;
};

// Equally weighted grid of `points` empirical quantiles of y.
ShrinkageBase quantile_grid_base(std::span<const double> y, std::size_t points,
                                 double alpha);

struct DirichletPosteriorSpec {
  std::vector<double> atoms;
  std::vector<double> concentration1;
  std::vector<double> concentration0;
  std::optional<ShrinkageBase> shrink;

  // atoms = y, concentration_t = ess_t * lambda_t.
  static DirichletPosteriorSpec from_weights(
      std::span<const double> y, const HajekWeightSet& w,
      std::optional<ShrinkageBase> shrink = std::nullopt);

  // Throws DomainError / DegenerateArmError / InputError.
  void validate() const;

  // Same law with the shrinkage base appended as ordinary atoms.
  DirichletPosteriorSpec folded() const;
};

struct ArmMeasure {
  std::vector<double> atoms;
  std::vector<double> weights;
  double mean() const;
};

struct DirichletDraw {
  ArmMeasure arm1;
  ArmMeasure arm0;
  double theta = 0.0;  // mean(arm1) - mean(arm0)
};

DirichletDraw dirichlet_posterior_draw(const DirichletPosteriorSpec& spec,
                                       Rng& rng);

// Posterior mean of theta: sum_i (c1_i / C1 - c0_i / C0) a_i. Without
// shrinkage this is the Hajek estimator.
double posterior_mean_analytic(const DirichletPosteriorSpec& spec);

double arm_posterior_mean(const DirichletPosteriorSpec& spec, int arm);

// Variance of the arm mean under Dirichlet(c):
//   (1 / (C + 1)) * [sum (c_i / C) a_i^2 - (sum (c_i / C) a_i)^2],  C = sum c.
double posterior_variance_analytic(const DirichletPosteriorSpec& spec,
                                   int arm);

// One arm of a Polya urn: a fixed prior component of weighted atoms and a
// unit mass for every observed draw. `Mass` is double for simulation and an
// exact rational type for the martingale checks; the update rule is shared.
template <class Mass>
class PolyaUrnArm {
 public:
  void add_prior_atom(double atom, Mass mass) {
    if (mass == Mass(0)) return;
    prior_.emplace_back(atom, mass);
    prior_mass_ += mass;
    cumulative_.clear();
  }

  void observe(double atom) { observed_.push_back(atom); }

  Mass prior_mass() const { return prior_mass_; }
  std::size_t observed_count() const { return observed_.size(); }
  const std::vector<double>& observed() const { return observed_; }

  Mass total_mass() const {
    return prior_mass_ + Mass(static_cast<long long>(observed_.size()));
  }

  // Normalised next-draw probabilities aggregated by atom value.
  std::map<double, Mass> law() const {
    std::map<double, Mass> out;
    for (const auto& [atom, mass] : prior_) out[atom] += mass;
    for (double atom : observed_) out[atom] += Mass(1);
    const Mass total = total_mass();
    for (auto& [atom, mass] : out) mass /= total;
    return out;
  }

  // Mean of the current predictive.
  Mass predictive_mean() const {
    Mass acc(0);
    for (const auto& [atom, mass] : law()) acc += Mass(atom) * mass;
    return acc;
  }

  double sample(Rng& rng) const
    requires std::is_same_v<Mass, double>
  {
    const double total = total_mass();
    if (!(total > 0.0)) throw DegenerateArmError("urn arm has no mass");
    const double u = uniform_open01(rng) * total;
    if (u < prior_mass_) {
      if (cumulative_.size() != prior_.size()) rebuild_cumulative();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      if (it == cumulative_.end()) --it;
      return prior_[static_cast<std::size_t>(it - cumulative_.begin())].first;
    }
    auto j = static_cast<std::size_t>(u - prior_mass_);
    if (j >= observed_.size()) j = observed_.size() - 1;
    return observed_[j];
  }

 private:
  void rebuild_cumulative() const {
    cumulative_.resize(prior_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < prior_.size(); ++i) {
      acc += prior_[i].second;
      cumulative_[i] = acc;
    }
  }

  std::vector<std::pair<double, Mass>> prior_;
  Mass prior_mass_ = Mass(0);
  std::vector<double> observed_;
  mutable std::vector<double> cumulative_;
};

// Two-arm urn state for the marginal IPW predictive.
struct HajekUrnState {
  PolyaUrnArm<double> arm1;
  PolyaUrnArm<double> arm0;

  PolyaUrnArm<double>& arm(int t) { return t == 1 ? arm1 : arm0; }
  const PolyaUrnArm<double>& arm(int t) const { return t == 1 ? arm1 : arm0; }
};

// Initial urn: observed atoms with mass ess_t * lambda_ti, plus alpha times
// the base weights when shrinking.
HajekUrnState make_hajek_urn(const DirichletPosteriorSpec& spec);

// Draws y from the current arm-t predictive and adds it to that arm.
double polya_urn_step(HajekUrnState& state, int t_new, Rng& rng);

}  // namespace tte

#endif  // TTE_IPW_HPP_
