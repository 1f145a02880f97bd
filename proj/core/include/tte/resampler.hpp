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

// Target-trial predictive resampling. The missing trial population
// Z_{n+1:N} is imputed one unit at a time from a factorised predictive:
// covariates, optional natural assignment given covariates, a fair-coin
// trial assignment, and the outcome given assignment and covariates. Each
// kernel is updated only with the variables its factor conditions on.

#ifndef TTE_RESAMPLER_HPP_
#define TTE_RESAMPLER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tte/ipw.hpp"
#include "tte/matrix.hpp"
#include "tte/random.hpp"
#include "tte/trees.hpp"

namespace tte {

struct TrialRow {
  double y = 0.0;
  int t = 0;
  std::optional<int> t_obs;
  std::vector<double> x;
};

// Imputed trial-regime rows k = n+1..N.
struct ImputedTrial {
  std::size_t n_observed = 0;
  std::size_t horizon = 0;
  std::uint64_t replicate_id = 0;
  std::uint64_t seed = 0;
  std::vector<TrialRow> rows;
};

class CovariateKernel {
 public:
  virtual ~CovariateKernel() = default;
  virtual std::vector<double> sample(Rng& rng) = 0;
  virtual void update(std::span<const double> x) = 0;
  virtual std::unique_ptr<CovariateKernel> clone() const = 0;
};

class AssignmentKernel {
 public:
  virtual ~AssignmentKernel() = default;
  virtual int sample(std::span<const double> x, Rng& rng) = 0;
  virtual void update(std::span<const double> x, int t_obs) = 0;
  virtual std::unique_ptr<AssignmentKernel> clone() const = 0;
};

class OutcomeKernel {
 public:
  virtual ~OutcomeKernel() = default;
  // Called on a fresh clone before replicate `replicate` is imputed.
  virtual void start_replicate(std::uint64_t replicate) { (void)replicate; }
  virtual double sample(int t, std::span<const double> x, Rng& rng) = 0;
  virtual void update(int t, std::span<const double> x, double y) = 0;
  // Mean of the current predictive for Y in arm t, when available.
  virtual std::optional<double> predictive_mean(int t) const {
    (void)t;
    return std::nullopt;
  }
  virtual std::unique_ptr<OutcomeKernel> clone() const = 0;
};

// Sequential Bayesian bootstrap: the next covariate row is uniform over all
// rows seen so far, observed and imputed.
class BayesianBootstrapKernel final : public CovariateKernel {
 public:
  explicit BayesianBootstrapKernel(std::shared_ptr<const Matrix> observed);

  std::vector<double> sample(Rng& rng) override;
  // Accepts only the row returned by the preceding sample().
  void update(std::span<const double> x) override;
  std::unique_ptr<CovariateKernel> clone() const override;

  // Direct posterior over the observed rows: Dirichlet(1, ..., 1) weights.
  static std::vector<double> direct_weights(std::size_t n, Rng& rng);

  // Current predictive probability of each observed row (rows repeat).
  std::vector<double> row_probabilities() const;

 private:
  std::shared_ptr<const Matrix> observed_;
  PolyaUrnArm<double> urn_;
  std::optional<std::size_t> pending_;
};

// Marginal outcome predictive from the two-arm Polya urn; ignores x.
class HajekUrnOutcomeKernel final : public OutcomeKernel {
 public:
  explicit HajekUrnOutcomeKernel(const DirichletPosteriorSpec& spec);

  double sample(int t, std::span<const double> x, Rng& rng) override;
  void update(int t, std::span<const double> x, double y) override;
  std::optional<double> predictive_mean(int t) const override;
  std::unique_ptr<OutcomeKernel> clone() const override;

  const HajekUrnState& state() const { return state_; }

 private:
  HajekUrnState state_;
};

class ConstantOutcomeKernel final : public OutcomeKernel {
 public:
  explicit ConstantOutcomeKernel(double value) : value_(value) {}
  double sample(int, std::span<const double>, Rng&) override { return value_; }
  void update(int, std::span<const double>, double) override {}
  std::optional<double> predictive_mean(int) const override { return value_; }
  std::unique_ptr<OutcomeKernel> clone() const override {
    return std::make_unique<ConstantOutcomeKernel>(value_);
  }

 private:
  double value_;
};

// Plug-in tree outcome predictive: replicate b uses posterior draw
// b mod D and imputes f_d(t, x) + sigma_d * noise. Not updated. With a
// clever covariate, rows of `training_x` reuse the fitted training
// propensities; other rows query the propensity model.
class TreeDrawOutcomeKernel final : public OutcomeKernel {
 public:
  explicit TreeDrawOutcomeKernel(std::shared_ptr<const OutcomeRegression> model,
                                 const Matrix* training_x = nullptr);

  void start_replicate(std::uint64_t replicate) override;
  double sample(int t, std::span<const double> x, Rng& rng) override;
  void update(int, std::span<const double>, double) override {}
  std::unique_ptr<OutcomeKernel> clone() const override;

  std::size_t draw_index() const { return draw_; }

 private:
  std::shared_ptr<const OutcomeRegression> model_;
  std::size_t draw_ = 0;
  std::shared_ptr<const std::map<std::vector<double>, double>> known_pi_;
  std::map<std::vector<double>, double> pi_cache_;
};

struct FactorizedPredictive {
  std::unique_ptr<CovariateKernel> covariates;
  std::unique_ptr<AssignmentKernel> natural_assignment;  // optional
  std::unique_ptr<OutcomeKernel> outcome;
  static constexpr double kTreatmentProbability = 0.5;

  FactorizedPredictive clone() const;
};

struct Estimand {
  std::string label;
  std::function<double(const ImputedTrial&, const FactorizedPredictive&)>
      evaluate;
};

// Difference in arm means over the imputed rows.
double ate_from_trial(const ImputedTrial& trial);
// Difference in arm means restricted to rows with t_obs = 1.
double att_from_trial(const ImputedTrial& trial);
// P(Y = 1 | T = 1) / P(Y = 1 | T = 0) over the imputed rows.
double risk_ratio_from_trial(const ImputedTrial& trial);

struct CateCell {
  double value = 0.0;
  std::size_t n1 = 0;
  std::size_t n0 = 0;
  std::optional<double> effect;  // empty when an arm is missing
};

std::vector<CateCell> cate_by_value(const ImputedTrial& trial,
                                    std::size_t column,
                                    std::span<const double> grid);

Estimand ate_estimand();
Estimand att_estimand();
Estimand risk_ratio_estimand();
// theta(P_N): difference of the outcome kernel's predictive means.
Estimand predictive_ate_estimand();
// CATE at one covariate value; undefined when a cell is empty.
Estimand cate_estimand(std::size_t column, double value);

struct PosteriorSummary {
  std::string estimand;
  std::string method;
  std::vector<double> draws;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;

  std::string to_json_text() const;  // without the draws
};

// Requires at least two draws; throws DomainError naming the first
// non-finite replicate.
PosteriorSummary summarize_draws(std::vector<double> draws,
                                 std::string estimand, std::string method);

struct ResamplingOptions {
  std::size_t horizon = 0;  // N; imputes rows n+1..N
  std::size_t replicates = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool retain_trials = false;
  std::string method = "resampling";
};

struct ResamplingResult {
  std::vector<PosteriorSummary> summaries;  // one per estimand
  std::vector<std::uint64_t> retried;       // replicates resampled once
  std::size_t imputed_rows = 0;
  std::size_t imputed_treated = 0;
  std::vector<ImputedTrial> trials;  // only with retain_trials
};

// One replicate of the imputation loop on `pred` (mutated in place).
ImputedTrial impute_trial(FactorizedPredictive& pred, std::size_t n_observed,
                          std::size_t horizon, std::uint64_t replicate,
                          std::uint64_t seed, Rng& rng);

ResamplingResult run_predictive_resampling(
    const FactorizedPredictive& pred, std::size_t n_observed,
    const ResamplingOptions& options, const std::vector<Estimand>& estimands);

// Direct IPW posterior: B closed-form Dirichlet draws of theta.
std::vector<double> direct_ipw_draws(const DirichletPosteriorSpec& spec,
                                     std::size_t replicates, std::uint64_t seed,
                                     unsigned threads);

struct DirectBartResult {
  std::vector<double> ate;
  std::vector<double> cate_values;
  std::vector<std::vector<double>> cate;  // per value, B draws
};

// Plug-in tree posterior with Bayesian-bootstrap covariates. Replicate b
// pairs draw b mod D of `effects` (D x n, f(1, x_i) - f(0, x_i)) with
// Dirichlet(1) weights over the rows. CATE at value v renormalises the
// weights over rows whose `cate_column` equals v.
DirectBartResult direct_bart_draws(const Matrix& effects, std::size_t replicates,
                                   std::uint64_t seed, unsigned threads,
                                   std::span<const double> cate_column = {},
                                   std::span<const double> cate_values = {});

}  // namespace tte

#endif  // TTE_RESAMPLER_HPP_
