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

#include "tte/resampler.hpp"

#include <cmath>

#include "json.hpp"
#include "tte/errors.hpp"
#include "tte/io.hpp"
#include "tte/parallel.hpp"
#include "tte/stats.hpp"

namespace tte {

// ---------------------------------------------------------------------------
// Kernels

BayesianBootstrapKernel::BayesianBootstrapKernel(
    std::shared_ptr<const Matrix> observed)
    : observed_(std::move(observed)) {
  if (!observed_ || observed_->rows() == 0) {
    throw InputError("bootstrap kernel needs at least one observed row");
  }
  for (std::size_t i = 0; i < observed_->rows(); ++i) {
    urn_.add_prior_atom(static_cast<double>(i), 1.0);
  }
}

std::vector<double> BayesianBootstrapKernel::sample(Rng& rng) {
  const auto i = static_cast<std::size_t>(urn_.sample(rng));
  pending_ = i;
  const auto r = observed_->row(i);
  return {r.begin(), r.end()};
}

void BayesianBootstrapKernel::update(std::span<const double> x) {
  if (!pending_) throw InputError("bootstrap kernel update without a draw");
  const auto r = observed_->row(*pending_);
  if (!std::equal(r.begin(), r.end(), x.begin(), x.end())) {
    throw InputError("bootstrap kernel can only absorb its own draws");
  }
  urn_.observe(static_cast<double>(*pending_));
  pending_.reset();
}

std::unique_ptr<CovariateKernel> BayesianBootstrapKernel::clone() const {
  return std::make_unique<BayesianBootstrapKernel>(*this);
}

std::vector<double> BayesianBootstrapKernel::direct_weights(std::size_t n,
                                                            Rng& rng) {
  const std::vector<double> ones(n, 1.0);
  return sample_dirichlet(rng, ones);
}

std::vector<double> BayesianBootstrapKernel::row_probabilities() const {
  std::vector<double> p(observed_->rows(), 0.0);
  for (const auto& [atom, mass] : urn_.law()) {
    p[static_cast<std::size_t>(atom)] = mass;
  }
  return p;
}

HajekUrnOutcomeKernel::HajekUrnOutcomeKernel(const DirichletPosteriorSpec& spec)
    : state_(make_hajek_urn(spec)) {}

double HajekUrnOutcomeKernel::sample(int t, std::span<const double>, Rng& rng) {
  return state_.arm(t).sample(rng);
}

void HajekUrnOutcomeKernel::update(int t, std::span<const double>, double y) {
  state_.arm(t).observe(y);
}

std::optional<double> HajekUrnOutcomeKernel::predictive_mean(int t) const {
  return state_.arm(t).predictive_mean();
}

std::unique_ptr<OutcomeKernel> HajekUrnOutcomeKernel::clone() const {
  return std::make_unique<HajekUrnOutcomeKernel>(*this);
}

TreeDrawOutcomeKernel::TreeDrawOutcomeKernel(
    std::shared_ptr<const OutcomeRegression> model, const Matrix* training_x)
    : model_(std::move(model)) {
  if (!model_ || model_->draws().size() == 0) {
    throw InputError("tree outcome kernel needs at least one posterior draw");
  }
  if (training_x && model_->uses_clever_covariate()) {
    const auto& pi = model_->propensity()->pi_hat();
    if (pi.size() != training_x->rows()) {
      throw InputError("training rows do not match the propensity model");
    }
    auto known = std::make_shared<std::map<std::vector<double>, double>>();
    for (std::size_t i = 0; i < training_x->rows(); ++i) {
      const auto r = training_x->row(i);
      known->emplace(std::vector<double>(r.begin(), r.end()), pi[i]);
    }
    known_pi_ = std::move(known);
  }
}

void TreeDrawOutcomeKernel::start_replicate(std::uint64_t replicate) {
  draw_ = static_cast<std::size_t>(replicate % model_->draws().size());
}

double TreeDrawOutcomeKernel::sample(int t, std::span<const double> x,
                                     Rng& rng) {
  double pi = 0.5;
  if (model_->uses_clever_covariate()) {
    std::vector<double> key(x.begin(), x.end());
    if (known_pi_) {
      const auto k = known_pi_->find(key);
      if (k != known_pi_->end()) {
        return model_->predict_with_pi(draw_, t, x, k->second) +
               model_->draws().draws[draw_].sigma * standard_normal(rng);
      }
    }
    auto it = pi_cache_.find(key);
    if (it == pi_cache_.end()) {
      it = pi_cache_.emplace(std::move(key), model_->propensity()->pi(x)).first;
    }
    pi = it->second;
  }
  return model_->predict_with_pi(draw_, t, x, pi) +
         model_->draws().draws[draw_].sigma * standard_normal(rng);
}

std::unique_ptr<OutcomeKernel> TreeDrawOutcomeKernel::clone() const {
  return std::make_unique<TreeDrawOutcomeKernel>(*this);
}

FactorizedPredictive FactorizedPredictive::clone() const {
  FactorizedPredictive p;
  if (covariates) p.covariates = covariates->clone();
  if (natural_assignment) p.natural_assignment = natural_assignment->clone();
  if (outcome) p.outcome = outcome->clone();
  return p;
}

// ---------------------------------------------------------------------------
// Estimands

namespace {

struct ArmMeans {
  double sum1 = 0.0, sum0 = 0.0;
  std::size_t n1 = 0, n0 = 0;
  void add(const TrialRow& r) {
    if (r.t == 1) {
      sum1 += r.y;
      ++n1;
    } else {
      sum0 += r.y;
      ++n0;
    }
  }
  double difference(const char* what) const {
    if (n1 == 0 || n0 == 0) {
      throw EstimandUndefinedError(std::string(what) +
                                   " undefined: an arm has no rows");
    }
    return sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0);
  }
};

}  // namespace

double ate_from_trial(const ImputedTrial& trial) {
  ArmMeans m;
  for (const auto& r : trial.rows) m.add(r);
  return m.difference("ATE");
}

double att_from_trial(const ImputedTrial& trial) {
  ArmMeans m;
  for (const auto& r : trial.rows) {
    if (!r.t_obs) {
      throw EstimandUndefinedError("ATT needs natural assignments on rows");
    }
    if (*r.t_obs == 1) m.add(r);
  }
  return m.difference("ATT");
}

double risk_ratio_from_trial(const ImputedTrial& trial) {
  ArmMeans m;
  for (const auto& r : trial.rows) {
    if (r.y != 0.0 && r.y != 1.0) {
      throw DomainError("risk ratio needs binary outcomes");
    }
    m.add(r);
  }
  if (m.n1 == 0 || m.n0 == 0) {
    throw EstimandUndefinedError("risk ratio undefined: an arm has no rows");
  }
  if (m.sum0 == 0.0) {
    throw EstimandUndefinedError("risk ratio undefined: no control events");
  }
  return (m.sum1 / static_cast<double>(m.n1)) /
         (m.sum0 / static_cast<double>(m.n0));
}

std::vector<CateCell> cate_by_value(const ImputedTrial& trial,
                                    std::size_t column,
                                    std::span<const double> grid) {
  std::vector<ArmMeans> cells(grid.size());
  for (const auto& r : trial.rows) {
    if (column >= r.x.size()) throw InputError("CATE column out of range");
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (r.x[column] == grid[g]) cells[g].add(r);
    }
  }
  std::vector<CateCell> out;
  out.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CateCell c;
    c.value = grid[g];
    c.n1 = cells[g].n1;
    c.n0 = cells[g].n0;
    if (c.n1 > 0 && c.n0 > 0) c.effect = cells[g].difference("CATE");
    out.push_back(c);
  }
  return out;
}

Estimand ate_estimand() {
  return {"ate", [](const ImputedTrial& tr, const FactorizedPredictive&) {
            return ate_from_trial(tr);
          }};
}

Estimand att_estimand() {
  return {"att", [](const ImputedTrial& tr, const FactorizedPredictive&) {
            return att_from_trial(tr);
          }};
}

Estimand risk_ratio_estimand() {
  return {"risk_ratio",
          [](const ImputedTrial& tr, const FactorizedPredictive&) {
            return risk_ratio_from_trial(tr);
          }};
}

Estimand predictive_ate_estimand() {
  return {"predictive_ate",
          [](const ImputedTrial&, const FactorizedPredictive& p) {
            const auto m1 = p.outcome->predictive_mean(1);
            const auto m0 = p.outcome->predictive_mean(0);
            if (!m1 || !m0) {
              throw UnsupportedKernelError(
                  "outcome kernel does not expose its predictive mean");
            }
            return *m1 - *m0;
          }};
}

Estimand cate_estimand(std::size_t column, double value) {
  return {"cate@" + io::format_number(value),
          [column, value](const ImputedTrial& tr, const FactorizedPredictive&) {
            const double grid[] = {value};
            const auto cells = cate_by_value(tr, column, grid);
            if (!cells[0].effect) {
              throw EstimandUndefinedError("CATE cell has an empty arm");
            }
            return *cells[0].effect;
          }};
}

// ---------------------------------------------------------------------------
// Summaries

std::string PosteriorSummary::to_json_text() const {
  const nlohmann::ordered_json j = {
      {"estimand", estimand}, {"method", method}, {"draws", draws.size()},
      {"mean", mean},         {"median", median}, {"sd", sd},
      {"lo95", lo95},         {"hi95", hi95}};
  return j.dump();
}

PosteriorSummary summarize_draws(std::vector<double> draws,
                                 std::string estimand, std::string method) {
  if (draws.size() < 2) throw InputError("summaries need at least two draws");
  for (std::size_t b = 0; b < draws.size(); ++b) {
    if (!std::isfinite(draws[b])) {
      throw DomainError("non-finite draw at replicate " + std::to_string(b));
    }
  }
  PosteriorSummary s;
  s.estimand = std::move(estimand);
  s.method = std::move(method);
  s.mean = mean(draws);
  s.median = quantile(draws, 0.5);
  s.sd = sample_sd(draws);
  s.lo95 = quantile(draws, 0.025);
  s.hi95 = quantile(draws, 0.975);
  s.draws = std::move(draws);
  return s;
}

// ---------------------------------------------------------------------------
// Imputation loop

ImputedTrial impute_trial(FactorizedPredictive& pred, std::size_t n_observed,
                          std::size_t horizon, std::uint64_t replicate,
                          std::uint64_t seed, Rng& rng) {
  if (!pred.covariates || !pred.outcome) {
    throw InputError("predictive needs covariate and outcome kernels");
  }
  if (horizon <= n_observed) {
    throw InputError("horizon must exceed the observed sample size");
  }
  ImputedTrial trial;
  trial.n_observed = n_observed;
  trial.horizon = horizon;
  trial.replicate_id = replicate;
  trial.seed = seed;
  trial.rows.reserve(horizon - n_observed);
  for (std::size_t k = n_observed; k < horizon; ++k) {
    TrialRow r;
    r.x = pred.covariates->sample(rng);
    if (pred.natural_assignment) {
      r.t_obs = pred.natural_assignment->sample(r.x, rng);
    }
    r.t = bernoulli(rng, FactorizedPredictive::kTreatmentProbability) ? 1 : 0;
    r.y = pred.outcome->sample(r.t, r.x, rng);
    pred.covariates->update(r.x);
    if (pred.natural_assignment) pred.natural_assignment->update(r.x, *r.t_obs);
    pred.outcome->update(r.t, r.x, r.y);
    trial.rows.push_back(std::move(r));
  }
  return trial;
}

ResamplingResult run_predictive_resampling(
    const FactorizedPredictive& pred, std::size_t n_observed,
    const ResamplingOptions& options, const std::vector<Estimand>& estimands) {
  if (options.replicates == 0) throw InputError("replicates must be positive");
  if (estimands.empty()) throw UsageError("no estimands requested");
  if (options.horizon <= n_observed) {
    throw InputError("horizon must exceed the observed sample size");
  }
  const std::size_t B = options.replicates;
  std::vector<std::vector<double>> values(estimands.size(),
                                          std::vector<double>(B));
  std::vector<char> retried(B, 0);
  std::vector<std::size_t> treated(B, 0);
  std::vector<ImputedTrial> trials(options.retain_trials ? B : 0);

  parallel_for(B, options.threads, [&](std::size_t b) {
    for (int attempt = 0;; ++attempt) {
      const std::uint64_t tag =
          attempt == 0 ? stream::kReplicate : stream::kReplicateRetry;
      const std::uint64_t seed = derive_seed(options.seed, tag, b);
      Rng rng(seed);
      FactorizedPredictive p = pred.clone();
      p.outcome->start_replicate(b);
      ImputedTrial trial = impute_trial(p, n_observed, options.horizon, b,
                                        seed, rng);
      try {
        for (std::size_t e = 0; e < estimands.size(); ++e) {
          values[e][b] = estimands[e].evaluate(trial, p);
        }
      } catch (const EstimandUndefinedError& err) {
        if (attempt == 0) {
          retried[b] = 1;
          continue;
        }
        throw EstimandUndefinedError("replicate " + std::to_string(b) +
                                     " undefined after resampling: " +
                                     err.what());
      }
      for (const auto& r : trial.rows) treated[b] += static_cast<std::size_t>(r.t);
      if (options.retain_trials) trials[b] = std::move(trial);
      return;
    }
  });

  ResamplingResult out;
  for (std::size_t e = 0; e < estimands.size(); ++e) {
    out.summaries.push_back(summarize_draws(std::move(values[e]),
                                            estimands[e].label,
                                            options.method));
  }
  for (std::size_t b = 0; b < B; ++b) {
    if (retried[b]) out.retried.push_back(b);
    out.imputed_treated += treated[b];
  }
  out.imputed_rows = B * (options.horizon - n_observed);
  out.trials = std::move(trials);
  return out;
}

// ---------------------------------------------------------------------------
// Direct posteriors

std::vector<double> direct_ipw_draws(const DirichletPosteriorSpec& spec,
                                     std::size_t replicates, std::uint64_t seed,
                                     unsigned threads) {
  spec.validate();
  std::vector<double> out(replicates);
  parallel_for(replicates, threads, [&](std::size_t b) {
    Rng rng = make_stream(seed, stream::kDirect, b);
    out[b] = dirichlet_posterior_draw(spec, rng).theta;
  });
  return out;
}

DirectBartResult direct_bart_draws(const Matrix& effects, std::size_t replicates,
                                   std::uint64_t seed, unsigned threads,
                                   std::span<const double> cate_column,
                                   std::span<const double> cate_values) {
  const std::size_t D = effects.rows();
  const std::size_t n = effects.cols();
  if (D == 0 || n == 0) throw InputError("effect matrix is empty");
  if (!cate_values.empty() && cate_column.size() != n) {
    throw InputError("CATE column length does not match the effect matrix");
  }
  DirectBartResult out;
  out.ate.resize(replicates);
  out.cate_values.assign(cate_values.begin(), cate_values.end());
  out.cate.assign(cate_values.size(), std::vector<double>(replicates));
  std::vector<std::vector<std::size_t>> members(cate_values.size());
  for (std::size_t g = 0; g < cate_values.size(); ++g) {
    for (std::size_t i = 0; i < n; ++i) {
      if (cate_column[i] == cate_values[g]) members[g].push_back(i);
    }
    if (members[g].empty()) {
      throw InputError("no rows with CATE value " +
                       io::format_number(cate_values[g]));
    }
  }
  parallel_for(replicates, threads, [&](std::size_t b) {
    Rng rng = make_stream(seed, stream::kDirect, b);
    const auto w = BayesianBootstrapKernel::direct_weights(n, rng);
    const auto e = effects.row(b % D);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * e[i];
    out.ate[b] = acc;
    for (std::size_t g = 0; g < members.size(); ++g) {
      double num = 0.0, den = 0.0;
      for (std::size_t i : members[g]) {
        num += w[i] * e[i];
        den += w[i];
      }
      out.cate[g][b] = num / den;
    }
  });
  return out;
}

}  // namespace tte
