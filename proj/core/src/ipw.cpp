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

#include "tte/ipw.hpp"

#include <cmath>

#include "tte/stats.hpp"

namespace tte {

std::string_view to_string(EssMode mode) {
  return mode == EssMode::kObservedCount ? "observed-count"
                                         : "importance-sampling";
}

EssMode parse_ess_mode(std::string_view text) {
  if (text == "observed-count" || text == "obs") {
    return EssMode::kObservedCount;
  }
  if (text == "importance-sampling" || text == "is") {
    return EssMode::kImportanceSampling;
  }
  throw UsageError("unknown effective sample size mode '" + std::string(text) +
                   "'");
}

HajekWeightSet hajek_weights(std::span<const int> t,
                             std::span<const double> pi) {
  if (t.size() != pi.size()) {
    throw InputError("treatment and propensity lengths differ");
  }
  HajekWeightSet w;
  w.lambda1.assign(t.size(), 0.0);
  w.lambda0.assign(t.size(), 0.0);
  double s1 = 0.0, s0 = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(pi[i] > 0.0 && pi[i] < 1.0)) {
      throw DomainError("propensity " + std::to_string(pi[i]) + " at index " +
                        std::to_string(i) + " is not inside (0, 1)");
    }
    if (t[i] == 1) {
      w.lambda1[i] = 1.0 / pi[i];
      s1 += w.lambda1[i];
    } else if (t[i] == 0) {
      w.lambda0[i] = 1.0 / (1.0 - pi[i]);
      s0 += w.lambda0[i];
    } else {
      throw DomainError("treatment values must be 0 or 1");
    }
  }
  if (s1 == 0.0 || s0 == 0.0) {
    throw PositivityError("Hajek weights need both treatment arms");
  }
  for (double& v : w.lambda1) v /= s1;
  for (double& v : w.lambda0) v /= s0;
  return w;
}

EffectiveSampleSizes effective_sample_size(const HajekWeightSet& w,
                                           std::span<const int> t,
                                           EssMode mode) {
  EffectiveSampleSizes e;
  if (mode == EssMode::kObservedCount) {
    for (int v : t) (v == 1 ? e.ess1 : e.ess0) += 1.0;
  } else {
    double q1 = 0.0, q0 = 0.0;
    for (double v : w.lambda1) q1 += v * v;
    for (double v : w.lambda0) q0 += v * v;
    e.ess1 = 1.0 / q1;
    e.ess0 = 1.0 / q0;
  }
  return e;
}

HajekWeightSet with_effective_sample_size(HajekWeightSet w,
                                          std::span<const int> t,
                                          EssMode mode) {
  const auto e = effective_sample_size(w, t, mode);
  w.ess_mode = mode;
  w.ess1 = e.ess1;
  w.ess0 = e.ess0;
  return w;
}

ClippedPropensities clip_propensities(std::span<const double> pi,
                                      double lower) {
  ClippedPropensities out;
  out.lower = lower;
  out.upper = 1.0 - lower;
  out.pi.reserve(pi.size());
  for (double p : pi) {
    const double c = std::clamp(p, out.lower, out.upper);
    if (c != p) ++out.clipped;
    out.pi.push_back(c);
  }
  return out;
}

ShrinkageBase quantile_grid_base(std::span<const double> y, std::size_t points,
                                 double alpha) {
  if (points == 0) throw InputError("shrinkage grid needs at least one point");
  ShrinkageBase base;
  base.alpha = alpha;
  for (std::size_t k = 0; k < points; ++k) {
    const double p = (static_cast<double>(k) + 0.5) /
                     static_cast<double>(points);
    base.atoms.push_back(quantile(y, p));
    base.weights.push_back(1.0 / static_cast<double>(points));
  }
  return base;
}

DirichletPosteriorSpec DirichletPosteriorSpec::from_weights(
    std::span<const double> y, const HajekWeightSet& w,
    std::optional<ShrinkageBase> shrink) {
  DirichletPosteriorSpec s;
  s.atoms.assign(y.begin(), y.end());
  s.concentration1.resize(w.lambda1.size());
  s.concentration0.resize(w.lambda0.size());
  for (std::size_t i = 0; i < w.lambda1.size(); ++i) {
    s.concentration1[i] = w.ess1 * w.lambda1[i];
    s.concentration0[i] = w.ess0 * w.lambda0[i];
  }
  s.shrink = std::move(shrink);
  s.validate();
  return s;
}

void DirichletPosteriorSpec::validate() const {
  if (concentration1.size() != atoms.size() ||
      concentration0.size() != atoms.size()) {
    throw InputError("concentration vectors must match the atom count");
  }
  auto check_arm = [&](const std::vector<double>& c, const char* name) {
    bool positive = false;
    for (double v : c) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string("negative or non-finite concentration "
                                      "in arm ") + name);
      }
      positive = positive || v > 0.0;
    }
    const bool base_mass = shrink && shrink->alpha > 0.0;
    if (!positive && !base_mass) {
      throw DegenerateArmError(std::string("arm ") + name +
                               " has no positive concentration");
    }
  };
  check_arm(concentration1, "1");
  check_arm(concentration0, "0");
  if (shrink) {
    if (!(shrink->alpha >= 0.0)) throw DomainError("shrinkage alpha < 0");
    if (shrink->atoms.size() != shrink->weights.size()) {
      throw InputError("shrinkage atoms and weights differ in length");
    }
  }
}

DirichletPosteriorSpec DirichletPosteriorSpec::folded() const {
  DirichletPosteriorSpec s = *this;
  s.shrink.reset();
  if (!shrink) return s;
  for (std::size_t j = 0; j < shrink->atoms.size(); ++j) {
    s.atoms.push_back(shrink->atoms[j]);
    s.concentration1.push_back(shrink->alpha * shrink->weights[j]);
    s.concentration0.push_back(shrink->alpha * shrink->weights[j]);
  }
  return s;
}

double ArmMeasure::mean() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) acc += weights[i] * atoms[i];
  return acc;
}

DirichletDraw dirichlet_posterior_draw(const DirichletPosteriorSpec& spec,
                                       Rng& rng) {
  const DirichletPosteriorSpec f = spec.folded();
  DirichletDraw d;
  d.arm1.atoms = f.atoms;
  d.arm1.weights = sample_dirichlet(rng, f.concentration1);
  d.arm0.atoms = f.atoms;
  d.arm0.weights = sample_dirichlet(rng, f.concentration0);
  d.theta = d.arm1.mean() - d.arm0.mean();
  return d;
}

double arm_posterior_mean(const DirichletPosteriorSpec& spec, int arm) {
  const DirichletPosteriorSpec f = spec.folded();
  const auto& c = arm == 1 ? f.concentration1 : f.concentration0;
  double total = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    total += c[i];
    acc += c[i] * f.atoms[i];
  }
  return acc / total;
}

double posterior_mean_analytic(const DirichletPosteriorSpec& spec) {
  return arm_posterior_mean(spec, 1) - arm_posterior_mean(spec, 0);
}

double posterior_variance_analytic(const DirichletPosteriorSpec& spec,
                                   int arm) {
  const DirichletPosteriorSpec f = spec.folded();
  const auto& c = arm == 1 ? f.concentration1 : f.concentration0;
  double total = 0.0;
  for (double v : c) total += v;
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double w = c[i] / total;
    m1 += w * f.atoms[i];
    m2 += w * f.atoms[i] * f.atoms[i];
  }
  return std::max(0.0, m2 - m1 * m1) / (total + 1.0);
}

HajekUrnState make_hajek_urn(const DirichletPosteriorSpec& spec) {
  spec.validate();
  const DirichletPosteriorSpec f = spec.folded();
  HajekUrnState s;
  for (std::size_t i = 0; i < f.atoms.size(); ++i) {
    s.arm1.add_prior_atom(f.atoms[i], f.concentration1[i]);
    s.arm0.add_prior_atom(f.atoms[i], f.concentration0[i]);
  }
  return s;
}

double polya_urn_step(HajekUrnState& state, int t_new, Rng& rng) {
  auto& arm = state.arm(t_new);
  const double y = arm.sample(rng);
  arm.observe(y);
  return y;
}

}  // namespace tte
