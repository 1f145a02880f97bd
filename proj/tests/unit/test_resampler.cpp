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
#include <memory>
#include <vector>

#include "tte/data.hpp"
#include "tte/errors.hpp"
#include "tte/ipw.hpp"
#include "tte/random.hpp"
#include "tte/resampler.hpp"
#include "tte/stats.hpp"
#include "tte/trees.hpp"

namespace tte {
namespace {

std::shared_ptr<const Matrix> grid_rows(std::size_t n) {
  auto m = std::make_shared<Matrix>(n, 1);
  for (std::size_t i = 0; i < n; ++i) (*m)(i, 0) = static_cast<double>(i % 3);
  return m;
}

DirichletPosteriorSpec small_spec() {
  const std::vector<int> t{1, 1, 0, 0, 1, 0};
  const std::vector<double> pi{0.6, 0.3, 0.4, 0.5, 0.7, 0.2};
  const std::vector<double> y{3.0, 5.0, 1.0, 2.0, 4.0, 0.0};
  const auto w = with_effective_sample_size(hajek_weights(t, pi), t,
                                            EssMode::kObservedCount);
  return DirichletPosteriorSpec::from_weights(y, w);
}

FactorizedPredictive urn_predictive(std::size_t n) {
  FactorizedPredictive p;
  p.covariates = std::make_unique<BayesianBootstrapKernel>(grid_rows(n));
  p.outcome = std::make_unique<HajekUrnOutcomeKernel>(small_spec());
  return p;
}

// Records every call; checks that each kernel only ever sees its own
// variables and the values drawn for the current row.
struct Log {
  std::vector<std::vector<double>> cov_updates;
  std::vector<std::pair<std::vector<double>, int>> assign_updates;
  std::vector<std::tuple<int, std::vector<double>, double>> outcome_updates;
  std::vector<int> sampled_t;
};

class RecordingCovariates final : public CovariateKernel {
 public:
  explicit RecordingCovariates(Log* log) : log_(log) {}
  std::vector<double> sample(Rng& rng) override {
    return {static_cast<double>(uniform_index(rng, 4))};
  }
  void update(std::span<const double> x) override {
    log_->cov_updates.emplace_back(x.begin(), x.end());
  }
  std::unique_ptr<CovariateKernel> clone() const override {
    return std::make_unique<RecordingCovariates>(*this);
  }

 private:
  Log* log_;
};

class RecordingAssignment final : public AssignmentKernel {
 public:
  explicit RecordingAssignment(Log* log) : log_(log) {}
  // Strongly confounded natural assignment.
  int sample(std::span<const double> x, Rng& rng) override {
    return bernoulli(rng, x[0] >= 2 ? 0.95 : 0.05) ? 1 : 0;
  }
  void update(std::span<const double> x, int t_obs) override {
    log_->assign_updates.emplace_back(std::vector<double>(x.begin(), x.end()),
                                      t_obs);
  }
  std::unique_ptr<AssignmentKernel> clone() const override {
    return std::make_unique<RecordingAssignment>(*this);
  }

 private:
  Log* log_;
};

class RecordingOutcome final : public OutcomeKernel {
 public:
  explicit RecordingOutcome(Log* log) : log_(log) {}
  double sample(int t, std::span<const double> x, Rng&) override {
    log_->sampled_t.push_back(t);
    return 10.0 * t + x[0];
  }
  void update(int t, std::span<const double> x, double y) override {
    log_->outcome_updates.emplace_back(
        t, std::vector<double>(x.begin(), x.end()), y);
  }
  std::unique_ptr<OutcomeKernel> clone() const override {
    return std::make_unique<RecordingOutcome>(*this);
  }

 private:
  Log* log_;
};

TEST(ImputeTrial, KernelsSeeOnlyTheirOwnVariables) {
  Log log;
  FactorizedPredictive p;
  p.covariates = std::make_unique<RecordingCovariates>(&log);
  p.natural_assignment = std::make_unique<RecordingAssignment>(&log);
  p.outcome = std::make_unique<RecordingOutcome>(&log);
  Rng rng(1);
  const auto trial = impute_trial(p, 5, 505, 0, 1, rng);
  ASSERT_EQ(trial.rows.size(), 500u);
  ASSERT_EQ(log.cov_updates.size(), 500u);
  ASSERT_EQ(log.assign_updates.size(), 500u);
  ASSERT_EQ(log.outcome_updates.size(), 500u);
  for (std::size_t k = 0; k < 500; ++k) {
    const auto& r = trial.rows[k];
    EXPECT_EQ(log.cov_updates[k], r.x);
    EXPECT_EQ(log.assign_updates[k].first, r.x);
    EXPECT_EQ(log.assign_updates[k].second, *r.t_obs);
    EXPECT_EQ(std::get<0>(log.outcome_updates[k]), r.t);
    EXPECT_EQ(std::get<1>(log.outcome_updates[k]), r.x);
    EXPECT_EQ(std::get<2>(log.outcome_updates[k]), r.y);
    EXPECT_EQ(log.sampled_t[k], r.t);
  }
}

TEST(ImputeTrial, TreatmentIsFairCoinIndependentOfNaturalAssignment) {
  Log log;
  FactorizedPredictive p;
  p.covariates = std::make_unique<RecordingCovariates>(&log);
  p.natural_assignment = std::make_unique<RecordingAssignment>(&log);
  p.outcome = std::make_unique<RecordingOutcome>(&log);
  Rng rng(2);
  const std::size_t m = 40000;
  const auto trial = impute_trial(p, 0, m, 0, 2, rng);
  double treated = 0, tobs1 = 0, treated_given_tobs1 = 0;
  for (const auto& r : trial.rows) {
    treated += r.t;
    if (*r.t_obs == 1) {
      ++tobs1;
      treated_given_tobs1 += r.t;
    }
  }
  // 5 binomial standard errors.
  EXPECT_NEAR(treated / m, 0.5, 5 * 0.5 / std::sqrt(double(m)));
  EXPECT_NEAR(treated_given_tobs1 / tobs1, 0.5, 5 * 0.5 / std::sqrt(tobs1));
}

TEST(BayesianBootstrap, AbsorbsOnlyItsOwnDraw) {
  BayesianBootstrapKernel k(grid_rows(3));
  const std::vector<double> foreign{7.0};
  EXPECT_THROW(k.update(foreign), InputError);
  Rng rng(3);
  const auto x = k.sample(rng);
  EXPECT_THROW(k.update(foreign), InputError);
  k.update(x);
  const auto probs = k.row_probabilities();
  double total = 0.0;
  for (double v : probs) total += v;
  EXPECT_NEAR(total, 1.0, 1e-15);
  // Drawn row now holds 2 of 4 units of mass.
  const auto drawn = static_cast<std::size_t>(x[0]);
  EXPECT_NEAR(probs[drawn], 0.5, 1e-15);
}

TEST(BayesianBootstrap, DirectWeightsAreFlatDirichlet) {
  Rng rng(4);
  std::vector<double> first;
  for (int b = 0; b < 20000; ++b) {
    first.push_back(BayesianBootstrapKernel::direct_weights(4, rng)[0]);
  }
  // Beta(1, 3): mean 1/4, variance 3/80.
  EXPECT_NEAR(mean(first), 0.25, 0.005);
  EXPECT_NEAR(sample_variance(first), 3.0 / 80.0, 0.002);
}

TEST(HajekUrnOutcome, PredictiveMeanIsArmPosteriorMeanInitially) {
  const auto spec = small_spec();
  HajekUrnOutcomeKernel k(spec);
  EXPECT_NEAR(*k.predictive_mean(1), arm_posterior_mean(spec, 1), 1e-12);
  EXPECT_NEAR(*k.predictive_mean(0), arm_posterior_mean(spec, 0), 1e-12);
  const std::vector<double> x{0.0};
  k.update(1, x, 100.0);
  EXPECT_GT(*k.predictive_mean(1), arm_posterior_mean(spec, 1));
  EXPECT_NEAR(*k.predictive_mean(0), arm_posterior_mean(spec, 0), 1e-12);
}

ImputedTrial fixture_trial() {
  ImputedTrial tr;
  auto row = [](double y, int t, int tobs, double x) {
    return TrialRow{y, t, tobs, {x}};
  };
  tr.rows = {row(1, 1, 1, 20), row(3, 1, 0, 20), row(0, 0, 1, 20),
             row(1, 0, 0, 30), row(0, 1, 1, 30), row(1, 0, 1, 30)};
  return tr;
}

TEST(TrialFunctionals, HandValues) {
  const auto tr = fixture_trial();
  // Treated mean 4/3, control 2/3.
  EXPECT_NEAR(ate_from_trial(tr), 2.0 / 3.0, 1e-15);
  // t_obs = 1 rows: treated {1, 0}, control {0, 1}.
  EXPECT_NEAR(att_from_trial(tr), 0.0, 1e-15);
  const auto cells = cate_by_value(tr, 0, std::vector<double>{20, 30, 40});
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_NEAR(*cells[0].effect, 2.0, 1e-15);
  EXPECT_EQ(cells[0].n1, 2u);
  EXPECT_NEAR(*cells[1].effect, -1.0, 1e-15);
  EXPECT_FALSE(cells[2].effect.has_value());
}

TEST(TrialFunctionals, RiskRatioOnBinaryOutcomes) {
  ImputedTrial tr;
  tr.rows = {{1, 1, std::nullopt, {0}}, {1, 1, std::nullopt, {0}},
             {0, 1, std::nullopt, {0}}, {1, 0, std::nullopt, {0}},
             {0, 0, std::nullopt, {0}}, {0, 0, std::nullopt, {0}}};
  // (2/3) / (1/3)
  EXPECT_NEAR(risk_ratio_from_trial(tr), 2.0, 1e-15);
  tr.rows[3].y = 0;
  EXPECT_THROW(risk_ratio_from_trial(tr), EstimandUndefinedError);
}

TEST(TrialFunctionals, UndefinedCases) {
  ImputedTrial tr;
  tr.rows = {{1, 1, std::nullopt, {0}}};
  EXPECT_THROW(ate_from_trial(tr), EstimandUndefinedError);
  EXPECT_THROW(att_from_trial(tr), EstimandUndefinedError);
  const auto e = cate_estimand(0, 5.0);
  FactorizedPredictive p;
  EXPECT_THROW(e.evaluate(fixture_trial(), p), EstimandUndefinedError);
}

TEST(PredictiveAte, NeedsAKernelWithAPredictiveMean) {
  FactorizedPredictive p;
  p.covariates = std::make_unique<BayesianBootstrapKernel>(grid_rows(3));
  p.outcome = std::make_unique<RecordingOutcome>(nullptr);
  EXPECT_THROW(predictive_ate_estimand().evaluate(fixture_trial(), p),
               UnsupportedKernelError);
  p.outcome = std::make_unique<ConstantOutcomeKernel>(2.0);
  EXPECT_EQ(predictive_ate_estimand().evaluate(fixture_trial(), p), 0.0);
}

TEST(Summaries, QuantilesAndErrors) {
  std::vector<double> d;
  for (int i = 0; i <= 100; ++i) d.push_back(i);
  const auto s = summarize_draws(d, "ate", "m");
  EXPECT_DOUBLE_EQ(s.mean, 50.0);
  EXPECT_DOUBLE_EQ(s.median, 50.0);
  EXPECT_DOUBLE_EQ(s.lo95, 2.5);
  EXPECT_DOUBLE_EQ(s.hi95, 97.5);
  EXPECT_THROW(summarize_draws({1.0}, "ate", "m"), InputError);
  EXPECT_THROW(summarize_draws({1.0, std::nan("")}, "ate", "m"), DomainError);
}

ResamplingOptions opts(std::size_t horizon, std::size_t reps, unsigned threads) {
  ResamplingOptions o;
  o.horizon = horizon;
  o.replicates = reps;
  o.seed = 77;
  o.threads = threads;
  return o;
}

TEST(Resampling, ThreadCountDoesNotChangeDraws) {
  const auto p = urn_predictive(6);
  const auto a = run_predictive_resampling(p, 6, opts(400, 64, 1),
                                           {ate_estimand(), predictive_ate_estimand()});
  const auto b = run_predictive_resampling(p, 6, opts(400, 64, 4),
                                           {ate_estimand(), predictive_ate_estimand()});
  EXPECT_EQ(a.summaries[0].draws, b.summaries[0].draws);
  EXPECT_EQ(a.summaries[1].draws, b.summaries[1].draws);
  EXPECT_EQ(a.imputed_treated, b.imputed_treated);
  EXPECT_EQ(a.imputed_rows, 64u * 394u);
}

TEST(Resampling, ReplicatesAreExchangeable) {
  // Replicate b depends only on (seed, b): a prefix run reproduces it.
  const auto p = urn_predictive(6);
  const auto full = run_predictive_resampling(p, 6, opts(300, 40, 2),
                                              {ate_estimand()});
  const auto part = run_predictive_resampling(p, 6, opts(300, 10, 3),
                                              {ate_estimand()});
  for (std::size_t b = 0; b < 10; ++b) {
    EXPECT_EQ(full.summaries[0].draws[b], part.summaries[0].draws[b]);
  }
}

TEST(Resampling, TruncationIsStableInHorizon) {
  const auto p = urn_predictive(6);
  const auto spec = small_spec();
  const double target = posterior_mean_analytic(spec);
  const auto a = run_predictive_resampling(p, 6, opts(6 + 2000, 1500, 4),
                                           {predictive_ate_estimand()});
  const auto b = run_predictive_resampling(p, 6, opts(6 + 8000, 1500, 4),
                                           {predictive_ate_estimand()});
  const double sd = a.summaries[0].sd;
  EXPECT_NEAR(a.summaries[0].mean, target, 4 * sd / std::sqrt(1500.0));
  EXPECT_NEAR(b.summaries[0].mean, target, 4 * sd / std::sqrt(1500.0));
  EXPECT_NEAR(b.summaries[0].sd / a.summaries[0].sd, 1.0, 0.1);
}

TEST(Resampling, UndefinedReplicateIsRetriedOnce) {
  const auto p = urn_predictive(6);
  const std::uint64_t bad = derive_seed(77, stream::kReplicate, 3);
  Estimand flaky{"flaky", [bad](const ImputedTrial& tr, const FactorizedPredictive&) {
                   if (tr.seed == bad) throw EstimandUndefinedError("empty");
                   return 1.0;
                 }};
  const auto r = run_predictive_resampling(p, 6, opts(20, 8, 2), {flaky});
  EXPECT_EQ(r.retried, std::vector<std::size_t>{3});
  Estimand never{"never", [](const ImputedTrial&, const FactorizedPredictive&) -> double {
                   throw EstimandUndefinedError("empty");
                 }};
  EXPECT_THROW(run_predictive_resampling(p, 6, opts(20, 8, 2), {never}),
               EstimandUndefinedError);
}

TEST(Resampling, ArgumentErrors) {
  const auto p = urn_predictive(6);
  EXPECT_THROW(run_predictive_resampling(p, 6, opts(20, 8, 1), {}), UsageError);
  EXPECT_THROW(run_predictive_resampling(p, 6, opts(6, 8, 1), {ate_estimand()}),
               InputError);
}

TEST(DirectBart, ConstantEffectsAndCateRenormalisation) {
  Matrix e(2, 4);
  const std::vector<double> col{1, 1, 2, 2};
  for (std::size_t d = 0; d < 2; ++d) {
    e(d, 0) = e(d, 1) = 5.0;
    e(d, 2) = e(d, 3) = -1.0;
  }
  const std::vector<double> values{1, 2};
  const auto r = direct_bart_draws(e, 50, 9, 2, col, values);
  for (std::size_t b = 0; b < 50; ++b) {
    EXPECT_NEAR(r.cate[0][b], 5.0, 1e-12);
    EXPECT_NEAR(r.cate[1][b], -1.0, 1e-12);
    EXPECT_GE(r.ate[b], -1.0 - 1e-12);
    EXPECT_LE(r.ate[b], 5.0 + 1e-12);
  }
  EXPECT_NEAR(mean(r.ate), 2.0, 0.5);
  const std::vector<double> missing{3};
  EXPECT_THROW(direct_bart_draws(e, 5, 9, 1, col, missing), InputError);
}

TEST(DirectBart, ReplicateUsesDrawModuloD) {
  Matrix e(3, 2);
  for (std::size_t d = 0; d < 3; ++d) e(d, 0) = e(d, 1) = static_cast<double>(d);
  const auto r = direct_bart_draws(e, 7, 1, 3);
  for (std::size_t b = 0; b < 7; ++b) {
    EXPECT_NEAR(r.ate[b], static_cast<double>(b % 3), 1e-12);
  }
}

TEST(DirectIpw, MeanMatchesAnalytic) {
  const auto spec = small_spec();
  const auto d = direct_ipw_draws(spec, 20000, 3, 4);
  EXPECT_NEAR(mean(d), posterior_mean_analytic(spec),
              5 * sample_sd(d) / std::sqrt(20000.0));
  EXPECT_EQ(d, direct_ipw_draws(spec, 20000, 3, 1));
}


ObservationalDataset linear_dataset(std::size_t n, std::uint64_t seed) {
  CovariateSchema schema;
  schema.outcome_column = "y";
  schema.treatment_column = "t";
  schema.numeric_columns = {"x"};
  Rng rng(seed);
  std::vector<double> y(n);
  std::vector<int> t(n);
  Matrix x(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = uniform_open01(rng);
    t[i] = bernoulli(rng, 0.3 + 0.4 * x(i, 0)) ? 1 : 0;
    y[i] = 2.0 * t[i] + x(i, 0) + 0.1 * standard_normal(rng);
  }
  return ObservationalDataset(schema, y, t, x);
}

TEST(OutcomeRegression, EffectMatrixAndTreeKernel) {
  const auto ds = linear_dataset(200, 12);
  TreePriorConfig prior;
  prior.num_trees = 20;
  McmcSettings mcmc;
  mcmc.burn_in = 200;
  mcmc.draws = 100;
  auto prop = fit_propensity(ds, prior, mcmc, 1);
  auto model = std::make_shared<const OutcomeRegression>(
      fit_outcome_regression(ds, prop, prior, mcmc, 2));
  EXPECT_TRUE(model->uses_clever_covariate());
  EXPECT_EQ(model->draws().feature_names,
            (std::vector<std::string>{"t", "x", "clever_covariate"}));
  const Matrix e = model->effect_matrix(ds.x(), prop.pi_hat(), 2);
  EXPECT_EQ(e.rows(), 100u);
  EXPECT_EQ(e.cols(), 200u);
  EXPECT_NEAR(mean(e.data()), 2.0, 0.15);
  EXPECT_EQ(e, model->effect_matrix(ds.x(), prop.pi_hat(), 1));

  TreeDrawOutcomeKernel k(model, &ds.x());
  k.start_replicate(257);
  EXPECT_EQ(k.draw_index(), 57u);
  // Training rows reuse the fitted propensity.
  Rng rng(0);
  const auto row = ds.x().row(4);
  const double f = model->predict_with_pi(57, 1, row, prop.pi_hat()[4]);
  const double sigma = model->draws().draws[57].sigma;
  double acc = 0.0;
  for (int i = 0; i < 4000; ++i) acc += k.sample(1, row, rng);
  EXPECT_NEAR(acc / 4000, f, 5 * sigma / std::sqrt(4000.0));
}

}  // namespace
}  // namespace tte
