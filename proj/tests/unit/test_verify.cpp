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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tte/random.hpp"
#include "tte/verify.hpp"

namespace tte::verify {
namespace {

// Independent summation of the IPW functional E[T Y / pi] - E[(1 - T) Y /
// (1 - pi)] directly over the joint table.
double ipw_by_enumeration(const DiscreteWorld& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.nx(); ++i) {
    for (int t = 0; t < 2; ++t) {
      const double pt = t ? w.propensity[i] : 1.0 - w.propensity[i];
      for (std::size_t j = 0; j < w.ny(); ++j) {
        const double p = w.px[i] * pt * w.outcome[t][i][j];
        acc += p * w.y_support[j] * (t ? 1.0 / pt : -1.0 / pt);
      }
    }
  }
  return acc;
}

TEST(DiscreteWorld, TwoPointHandValue) {
  const auto w = two_point_world();
  // 0.4 (2.6 - 1.8) + 0.6 (2.0 - 1.2)
  EXPECT_NEAR(gformula_ate(w), 0.8, 1e-15);
  EXPECT_NEAR(trial_ate(w), 0.8, 1e-15);
  EXPECT_NEAR(ipw_by_enumeration(w), 0.8, 1e-15);
  const auto att = att_identification_check(w);
  EXPECT_NEAR(att.identified_att, 0.8, 1e-15);
  EXPECT_LT(att.residual, 1e-15);
}

TEST(DiscreteWorld, RandomWorldsSatisfyIdentities) {
  Rng rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    const auto w = random_world(rng);
    EXPECT_NO_THROW(w.validate());
    EXPECT_NEAR(gformula_ate(w), trial_ate(w), 1e-12);
    EXPECT_NEAR(gformula_ate(w), ipw_by_enumeration(w), 1e-12);
    EXPECT_LT(ipw_identity_check(w), 1e-12);
    EXPECT_LT(att_identification_check(w).residual, 1e-12);
  }
}

TEST(DiscreteWorld, NegativeControlsBreakIdentities) {
  Rng rng(18);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = random_world(rng);
    const auto broken = broken_modularity(w);
    EXPECT_GT(std::abs(gformula_ate(broken) - trial_ate(broken)), 1e-6);
    EXPECT_GT(ipw_identity_check(w, 0.8), 1e-6);
  }
}

TEST(DiscreteWorld, ValidationRejectsBadTables) {
  auto w = two_point_world();
  w.px = {0.5, 0.6};
  EXPECT_ANY_THROW(w.validate());
  w = two_point_world();
  w.propensity = {0.0, 0.5};
  w.natural = w.propensity;
  EXPECT_ANY_THROW(w.validate());
}

TEST(UrnKernel, ExactLawAfterUpdate) {
  UrnKernel k;
  k.add_atom(1.0, Rational(1, 2));
  k.add_atom(2.0, Rational(3, 2));
  k.update(1.0);
  const auto law = k.law();
  EXPECT_EQ(law.at(1.0), Rational(1, 2));
  EXPECT_EQ(law.at(2.0), Rational(1, 2));
}

TEST(CidCheck, BootstrapIsExact) {
  const auto r = cid_exact_check(*bootstrap_kernel({1.0, 2.0, 5.0}), 3);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.worst_residual, 0.0);
  EXPECT_GT(r.checks, 0u);
}

TEST(CidCheck, HajekUrnIsExactWithAndWithoutShrinkage) {
  const std::vector<double> atoms{10.0, 20.0, 30.0};
  const std::vector<Rational> lambda{Rational(1, 3), Rational(2, 3), Rational(0)};
  EXPECT_TRUE(cid_exact_check(*hajek_urn_kernel(atoms, lambda, Rational(9, 5)), 3)
                  .exact);
  EXPECT_TRUE(cid_exact_check(*hajek_urn_kernel(atoms, lambda, Rational(2),
                                                {15.0, 25.0},
                                                {Rational(1, 2), Rational(1, 2)},
                                                Rational(1, 2)),
                              3)
                  .exact);
}

TEST(CidCheck, AnchoredRecencyIsDetected) {
  std::map<double, Rational> init{{0.0, Rational(1, 2)}, {1.0, Rational(1, 2)}};
  AnchoredRecencyKernel k(init, Rational(9, 10));
  const auto r = cid_exact_check(k, 2);
  EXPECT_FALSE(r.exact);
  EXPECT_GT(r.worst_residual, 0.01);
}

TEST(CidCheck, CompositeFactorsAreExact) {
  const auto k = reference_composite_kernel();
  const auto r = cid_exact_check(k, 2);
  EXPECT_TRUE(r.joint.exact);
  EXPECT_TRUE(r.covariate.exact);
  EXPECT_TRUE(r.natural.exact);
  EXPECT_TRUE(r.outcome.exact);
  EXPECT_TRUE(r.exact());
}

TEST(CompositeKernel, JointLawFactorises) {
  const auto k = reference_composite_kernel();
  Rational total(0);
  for (const auto& [z, p] : k.law()) {
    total += p;
    EXPECT_EQ(p, k.covariate_law().at(z.x) *
                     k.natural_law(z.x).at(static_cast<double>(z.t_obs)) *
                     Rational(1, 2) * k.outcome_law(z.t, z.x).at(z.y));
  }
  EXPECT_EQ(total, Rational(1));
}

TEST(Suites, AllRecordsPass) {
  for (const auto& r : oracle_suite(30, 5)) EXPECT_TRUE(r.passed) << r.name;
  for (const auto& r : martingale_suite()) EXPECT_TRUE(r.passed) << r.name;
}

TEST(Contraction, SmallRunHalvesSdPerFourfoldN) {
  const ContinuousDgp dgp;
  const auto r = contraction_experiment(dgp, {250, 1000}, 40,
                                        EssMode::kObservedCount, 3, 2);
  ASSERT_EQ(r.sd_ratios.size(), 1u);
  EXPECT_NEAR(r.sd_ratios[0], 0.5, 0.06);
  EXPECT_NEAR(r.rate_exponent, -0.5, 0.1);
  const auto again = contraction_experiment(dgp, {250, 1000}, 40,
                                            EssMode::kObservedCount, 3, 1);
  EXPECT_EQ(r.to_csv(), again.to_csv());
}

TEST(ContinuousDgp, PropensityBoundsAndTrueEffect) {
  const ContinuousDgp dgp;
  EXPECT_NEAR(dgp.propensity(0.5), 0.1 + 0.8 / (1.0 + std::exp(0.0)), 1e-15);
  Rng rng(4);
  const auto s = dgp.simulate(20000, rng);
  double lo = 1.0, hi = 0.0;
  for (double p : s.pi) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  EXPECT_GE(lo, 0.1);
  EXPECT_LE(hi, 0.9);
}

TEST(Equivalence, SmallRunPasses) {
  const ContinuousDgp dgp;
  EquivalenceSettings s;
  s.imputations = 2000;
  s.replicates = 400;
  const auto r = equivalence_experiment(dgp, s, 11, 4);
  EXPECT_EQ(r.urn_draws.size(), 400u);
  EXPECT_EQ(r.direct_draws.size(), 400u);
  EXPECT_GT(r.p_value, 0.01);
}

}  // namespace
}  // namespace tte::verify
