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

// Bayesian additive regression trees: continuous outcome with Gaussian
// errors and a probit link for binary treatment. Posterior exploration is
// Gibbs backfitting with grow/prune/change Metropolis moves per tree and
// conjugate leaf and variance updates.

#ifndef TTE_TREES_HPP_
#define TTE_TREES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tte/data.hpp"
#include "tte/ipw.hpp"
#include "tte/matrix.hpp"
#include "tte/random.hpp"
#include "tte/tree.hpp"

namespace tte {

struct TreePriorConfig {
  std::size_t num_trees = 50;
  double alpha = 0.95;  // split probability alpha * (1 + depth)^-beta
  double beta = 2.0;
  double k = 2.0;       // leaf prior: k sd of the tree sum span the range
  double nu = 3.0;      // sigma^2 ~ IG(nu / 2, nu * lambda / 2)
  double q = 0.9;       // prior quantile placed at the sample sd
  double sigma_floor = 1e-6;
  double prob_grow = 2.5 / 9.0;
  double prob_prune = 2.5 / 9.0;  // change takes the remainder

  void validate() const;
};

struct McmcSettings {
  std::size_t burn_in = 1000;
  std::size_t draws = 1000;
  std::size_t thin = 1;

  void validate() const;
};

// Internal response scale: y_int = (y - center) / range.
struct OutcomeScaling {
  double center = 0.0;
  double range = 1.0;
  double to_internal(double y) const { return (y - center) / range; }
  double to_external(double v) const { return v * range + center; }
};

// One posterior state: K trees and the residual sd (external units).
struct TreeEnsembleModel {
  std::vector<DecisionTree> trees;
  double sigma = 1.0;

  // Sum of tree evaluations on the internal scale.
  double evaluate_internal(std::span<const double> x) const;
};

enum class Link { kIdentity, kProbit };

// Retained posterior draws plus everything needed to replay predictions.
struct EnsembleDraws {
  Link link = Link::kIdentity;
  std::vector<std::string> feature_names;
  TreePriorConfig prior;
  McmcSettings mcmc;
  std::uint64_t seed = 0;
  OutcomeScaling scaling;  // identity link
  double offset = 0.0;     // probit link: latent mean offset
  double sigma_mu = 0.0;
  double lambda = 0.0;
  std::vector<TreeEnsembleModel> draws;
  std::vector<double> sigma_trace;  // every iteration, burn-in included
  std::vector<std::string> warnings;

  std::size_t size() const { return draws.size(); }
  std::size_t num_features() const { return feature_names.size(); }

  // Regression function of draw d: de-scaled mean for the identity link,
  // latent probit index for the probit link.
  double predict(std::size_t d, std::span<const double> x) const;
  std::vector<double> predict_draws(std::span<const double> x) const;
  // Posterior mean of predict() (identity) or of Phi(predict()) (probit).
  double posterior_mean(std::span<const double> x) const;

  std::string to_json_text() const;
  static EnsembleDraws from_json_text(const std::string& text);
  // Per retained draw: sigma, total split count, per-feature split counts.
  std::string diagnostics_csv() const;
};

// Gibbs backfitting sampler on a fixed feature matrix. The response is on
// the internal scale. Exposed so single conditional updates can be tested.
class GibbsSampler {
 public:
  GibbsSampler(const Matrix& features, std::vector<double> response,
               TreePriorConfig prior, double sigma_mu, double lambda,
               bool fixed_sigma, double initial_sigma);

  std::size_t num_trees() const { return trees_.size(); }
  const DecisionTree& tree(std::size_t k) const { return trees_[k]; }
  // Replaces tree k and refreshes the cached fits.
  void set_tree(std::size_t k, DecisionTree tree);

  double sigma() const { return sigma_; }
  void set_sigma(double sigma) { sigma_ = sigma; }
  double sigma_mu() const { return sigma_mu_; }
  double lambda() const { return lambda_; }

  void set_response(std::vector<double> response);
  std::span<const double> response() const { return response_; }
  // Current sum-of-trees fit at each training row.
  std::span<const double> fit() const { return fit_; }

  // One Metropolis structure move for tree k on its partial residual.
  void update_structure(std::size_t k, Rng& rng);
  // Conjugate normal update of every leaf of tree k.
  void draw_leaves(std::size_t k, Rng& rng);
  // Conjugate inverse-gamma update of sigma^2 given all trees.
  void draw_sigma(Rng& rng);
  // Full sweep: structure and leaves for every tree, then sigma unless fixed.
  void sweep(Rng& rng);

  std::size_t accepted(int move) const { return accepted_[move]; }
  std::size_t proposed(int move) const { return proposed_[move]; }

 private:
  struct LeafStats {
    std::size_t n = 0;
    double sum = 0.0;
  };

  void partial_residual(std::size_t k);
  void assign_rows(std::size_t k);
  double log_leaf_likelihood(const LeafStats& s) const;
  double split_prior(int depth) const;
  // Rows routed to a leaf, or to either child of a singly-internal node.
  std::vector<std::size_t> rows_at(std::size_t k, int id) const;
  // Unique values of column var over `rows`, largest dropped.
  std::vector<double> cut_candidates(const std::vector<std::size_t>& rows,
                                     int var) const;
  std::vector<int> splittable_vars(const std::vector<std::size_t>& rows) const;
  void move_structure(std::size_t k, Rng& rng);
  void move_leaves(std::size_t k, Rng& rng);
  void grow(std::size_t k, Rng& rng);
  void prune(std::size_t k, Rng& rng);
  void change(std::size_t k, Rng& rng);
  void refresh_tree_fit(std::size_t k);

  const Matrix& x_;
  std::vector<double> response_;
  TreePriorConfig prior_;
  double sigma_mu_;
  double lambda_;
  bool fixed_sigma_;
  double sigma_;
  std::vector<DecisionTree> trees_;
  std::vector<std::vector<int>> leaf_of_;      // per tree, per row
  std::vector<std::vector<double>> tree_fit_;  // per tree, per row
  std::vector<double> fit_;
  std::vector<double> residual_;
  std::size_t accepted_[3] = {0, 0, 0};
  std::size_t proposed_[3] = {0, 0, 0};
};

EnsembleDraws fit_continuous(const Matrix& features, std::span<const double> y,
                             std::vector<std::string> feature_names,
                             const TreePriorConfig& prior,
                             const McmcSettings& mcmc, std::uint64_t seed);

struct ProbitFit {
  EnsembleDraws draws;
  std::vector<double> pi_hat;  // posterior mean of P(T = 1 | x_i)
};

ProbitFit fit_probit(const Matrix& x, std::span<const int> t,
                     std::vector<std::string> feature_names,
                     const TreePriorConfig& prior, const McmcSettings& mcmc,
                     std::uint64_t seed);

struct CleverCovariate {
  std::vector<double> h;
  std::string pi_source;
};

// h_i = t_i / pi_i - (1 - t_i) / (1 - pi_i).
CleverCovariate clever_covariate(std::span<const int> t,
                                 std::span<const double> pi,
                                 std::string pi_source = "");
double clever_value(int t, double pi);

struct InclusionReport {
  std::vector<std::string> feature_names;
  std::vector<double> proportions;
  std::vector<std::size_t> counts;
  std::size_t total_splits = 0;
  bool empty() const { return total_splits == 0; }
};

InclusionReport inclusion_proportions(const EnsembleDraws& draws);

// Probit propensity model with training-row estimates cached.
class PropensityModel {
 public:
  PropensityModel(EnsembleDraws draws, std::vector<double> pi_hat,
                  double clip_lower = 1e-3);

  const EnsembleDraws& draws() const { return draws_; }
  // Clipped posterior-mean propensities at the training rows.
  const std::vector<double>& pi_hat() const { return pi_hat_; }
  std::size_t clipped() const { return clipped_; }
  // Clipped posterior-mean propensity at a new covariate row.
  double pi(std::span<const double> x) const;

 private:
  EnsembleDraws draws_;
  std::vector<double> pi_hat_;
  double clip_lower_;
  std::size_t clipped_ = 0;
};

PropensityModel fit_propensity(const ObservationalDataset& ds,
                               const TreePriorConfig& prior,
                               const McmcSettings& mcmc, std::uint64_t seed);

// Outcome regression on features [T, X..., (h)]. With a propensity model the
// clever covariate is recomputed from it at every (t, x) predicted.
class OutcomeRegression {
 public:
  OutcomeRegression(EnsembleDraws draws, std::size_t num_covariates,
                    std::optional<PropensityModel> propensity);

  const EnsembleDraws& draws() const { return draws_; }
  bool uses_clever_covariate() const { return propensity_.has_value(); }
  const std::optional<PropensityModel>& propensity() const {
    return propensity_;
  }

  std::vector<double> features(int t, std::span<const double> x,
                               double pi) const;
  // f_d(t, x), recomputing pi from the propensity model when present.
  double predict(std::size_t d, int t, std::span<const double> x) const;
  double predict_with_pi(std::size_t d, int t, std::span<const double> x,
                         double pi) const;
  std::vector<double> predict_draws(int t, std::span<const double> x) const;
  // f_d + sigma_d * N(0, 1).
  double sample(std::size_t d, int t, std::span<const double> x,
                Rng& rng) const;

  // D x n matrix of f_d(1, x_i) - f_d(0, x_i); pi[i] supplies the
  // propensity at row i when a clever covariate is used.
  Matrix effect_matrix(const Matrix& x, std::span<const double> pi,
                       unsigned threads) const;

 private:
  void check_width(std::span<const double> x) const;

  EnsembleDraws draws_;
  std::size_t num_covariates_;
  std::optional<PropensityModel> propensity_;
};

OutcomeRegression fit_outcome_regression(
    const ObservationalDataset& ds,
    const std::optional<PropensityModel>& propensity,
    const TreePriorConfig& prior, const McmcSettings& mcmc,
    std::uint64_t seed);

}  // namespace tte

#endif  // TTE_TREES_HPP_
