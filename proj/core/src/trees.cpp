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

#include "tte/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "json.hpp"
#include "tte/errors.hpp"
#include "tte/io.hpp"
#include "tte/parallel.hpp"
#include "tte/stats.hpp"

namespace tte {
namespace {

using nlohmann::json;

constexpr int kGrow = 0;
constexpr int kPrune = 1;
constexpr int kChange = 2;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void require_finite(const Matrix& x, const char* what) {
  for (double v : x.data()) {
    if (!std::isfinite(v)) {
      throw InputError(std::string("non-finite value in ") + what);
    }
  }
}

json tree_to_json(const DecisionTree& t, int id) {
  const auto& n = t.node(id);
  if (t.is_leaf(id)) return json{{"value", n.value}};
  return json{{"var", n.var},
              {"cut", n.cut},
              {"left", tree_to_json(t, n.left)},
              {"right", tree_to_json(t, n.right)}};
}

void tree_from_json(DecisionTree& t, int id, const json& j) {
  if (j.contains("value")) {
    t.set_value(id, j.at("value").get<double>());
    return;
  }
  const auto [l, r] =
      t.grow(id, j.at("var").get<int>(), j.at("cut").get<double>(), 0.0, 0.0);
  tree_from_json(t, l, j.at("left"));
  tree_from_json(t, r, j.at("right"));
}

}  // namespace

void TreePriorConfig::validate() const {
  if (num_trees == 0) throw InputError("tree count must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha not in (0, 1)");
  if (!(beta >= 0.0)) throw DomainError("beta must be non-negative");
  if (!(k > 0.0)) throw DomainError("k must be positive");
  if (!(nu > 0.0)) throw DomainError("nu must be positive");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q not in (0, 1)");
  if (!(sigma_floor > 0.0)) throw DomainError("sigma floor must be positive");
  if (!(prob_grow > 0.0 && prob_prune > 0.0 && prob_grow + prob_prune <= 1.0)) {
    throw DomainError("invalid move probabilities");
  }
}

void McmcSettings::validate() const {
  if (draws == 0) throw InputError("mcmc draws must be at least one");
  if (thin == 0) throw InputError("mcmc thin must be at least one");
}

double TreeEnsembleModel::evaluate_internal(std::span<const double> x) const {
  double acc = 0.0;
  for (const auto& t : trees) acc += t.evaluate(x);
  return acc;
}

double EnsembleDraws::predict(std::size_t d, std::span<const double> x) const {
  const double f = draws[d].evaluate_internal(x);
  return link == Link::kProbit ? offset + f : scaling.to_external(f);
}

std::vector<double> EnsembleDraws::predict_draws(
    std::span<const double> x) const {
  std::vector<double> out(draws.size());
  for (std::size_t d = 0; d < draws.size(); ++d) out[d] = predict(d, x);
  return out;
}

double EnsembleDraws::posterior_mean(std::span<const double> x) const {
  double acc = 0.0;
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const double f = predict(d, x);
    acc += link == Link::kProbit ? normal_cdf(f) : f;
  }
  return acc / static_cast<double>(draws.size());
}

std::string EnsembleDraws::to_json_text() const {
  json j;
  j["link"] = link == Link::kProbit ? "probit" : "identity";
  j["feature_names"] = feature_names;
  j["prior"] = {{"num_trees", prior.num_trees}, {"alpha", prior.alpha},
                {"beta", prior.beta},           {"k", prior.k},
                {"nu", prior.nu},               {"q", prior.q},
                {"sigma_floor", prior.sigma_floor},
                {"prob_grow", prior.prob_grow},
                {"prob_prune", prior.prob_prune}};
  j["mcmc"] = {{"burn_in", mcmc.burn_in},
               {"draws", mcmc.draws},
               {"thin", mcmc.thin}};
  j["seed"] = seed;
  j["scaling"] = {{"center", scaling.center}, {"range", scaling.range}};
  j["offset"] = offset;
  j["sigma_mu"] = sigma_mu;
  j["lambda"] = lambda;
  j["sigma_trace"] = sigma_trace;
  j["warnings"] = warnings;
  json ds = json::array();
  for (const auto& m : draws) {
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t, t.root()));
    ds.push_back({{"sigma", m.sigma}, {"trees", std::move(trees)}});
  }
  j["draws"] = std::move(ds);
  return j.dump();
}

EnsembleDraws EnsembleDraws::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid model JSON: ") + e.what());
  }
  try {
    EnsembleDraws e;
    e.link = j.at("link").get<std::string>() == "probit" ? Link::kProbit
                                                          : Link::kIdentity;
    e.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& p = j.at("prior");
    e.prior.num_trees = p.at("num_trees").get<std::size_t>();
    e.prior.alpha = p.at("alpha").get<double>();
    e.prior.beta = p.at("beta").get<double>();
    e.prior.k = p.at("k").get<double>();
    e.prior.nu = p.at("nu").get<double>();
    e.prior.q = p.at("q").get<double>();
    e.prior.sigma_floor = p.at("sigma_floor").get<double>();
    e.prior.prob_grow = p.at("prob_grow").get<double>();
    e.prior.prob_prune = p.at("prob_prune").get<double>();
    const auto& m = j.at("mcmc");
    e.mcmc.burn_in = m.at("burn_in").get<std::size_t>();
    e.mcmc.draws = m.at("draws").get<std::size_t>();
    e.mcmc.thin = m.at("thin").get<std::size_t>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.scaling.center = j.at("scaling").at("center").get<double>();
    e.scaling.range = j.at("scaling").at("range").get<double>();
    e.offset = j.at("offset").get<double>();
    e.sigma_mu = j.at("sigma_mu").get<double>();
    e.lambda = j.at("lambda").get<double>();
    e.sigma_trace = j.at("sigma_trace").get<std::vector<double>>();
    e.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& dj : j.at("draws")) {
      TreeEnsembleModel model;
      model.sigma = dj.at("sigma").get<double>();
      for (const auto& tj : dj.at("trees")) {
        DecisionTree t;
        tree_from_json(t, t.root(), tj);
        model.trees.push_back(std::move(t));
      }
      e.draws.push_back(std::move(model));
    }
    return e;
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed model JSON: ") + ex.what());
  }
}

std::string EnsembleDraws::diagnostics_csv() const {
  std::ostringstream out;
  out << "draw,sigma,splits";
  for (const auto& name : feature_names) out << ",splits_" << name;
  out << '\n';
  for (std::size_t d = 0; d < draws.size(); ++d) {
    std::vector<std::size_t> counts(feature_names.size(), 0);
    for (const auto& t : draws[d].trees) t.count_split_vars(counts);
    std::size_t total = 0;
    for (auto c : counts) total += c;
    out << d << ',' << io::format_number(draws[d].sigma) << ',' << total;
    for (std::size_t c = 0; c < feature_names.size(); ++c) {
      out << ',' << counts[c];
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Gibbs sampler

GibbsSampler::GibbsSampler(const Matrix& features, std::vector<double> response,
                           TreePriorConfig prior, double sigma_mu,
                           double lambda, bool fixed_sigma,
                           double initial_sigma)
    : x_(features),
      response_(std::move(response)),
      prior_(prior),
      sigma_mu_(sigma_mu),
      lambda_(lambda),
      fixed_sigma_(fixed_sigma),
      sigma_(initial_sigma),
      trees_(prior.num_trees),
      leaf_of_(prior.num_trees, std::vector<int>(response_.size(), 0)),
      tree_fit_(prior.num_trees, std::vector<double>(response_.size(), 0.0)),
      fit_(response_.size(), 0.0),
      residual_(response_.size(), 0.0) {
  prior_.validate();
  if (features.rows() != response_.size()) {
    throw InputError("feature rows and response length differ");
  }
}

void GibbsSampler::set_response(std::vector<double> response) {
  if (response.size() != response_.size()) {
    throw InputError("response length changed");
  }
  response_ = std::move(response);
}

void GibbsSampler::set_tree(std::size_t k, DecisionTree tree) {
  trees_[k] = std::move(tree);
  assign_rows(k);
  refresh_tree_fit(k);
}

void GibbsSampler::assign_rows(std::size_t k) {
  for (std::size_t i = 0; i < response_.size(); ++i) {
    leaf_of_[k][i] = trees_[k].find_leaf(x_.row(i));
  }
}

void GibbsSampler::refresh_tree_fit(std::size_t k) {
  const auto& t = trees_[k];
  auto& tf = tree_fit_[k];
  for (std::size_t i = 0; i < response_.size(); ++i) {
    const double v = t.node(leaf_of_[k][i]).value;
    fit_[i] += v - tf[i];
    tf[i] = v;
  }
}

void GibbsSampler::partial_residual(std::size_t k) {
  for (std::size_t i = 0; i < response_.size(); ++i) {
    residual_[i] = response_[i] - fit_[i] + tree_fit_[k][i];
  }
}

std::vector<std::size_t> GibbsSampler::rows_at(std::size_t k, int id) const {
  const DecisionTree& t = trees_[k];
  const int l = t.is_leaf(id) ? id : t.node(id).left;
  const int r = t.is_leaf(id) ? id : t.node(id).right;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < response_.size(); ++i) {
    const int leaf = leaf_of_[k][i];
    if (leaf == l || leaf == r) rows.push_back(i);
  }
  return rows;
}

double GibbsSampler::log_leaf_likelihood(const LeafStats& s) const {
  const double s2 = sigma_ * sigma_;
  const double m2 = sigma_mu_ * sigma_mu_;
  const double denom = s2 + static_cast<double>(s.n) * m2;
  return 0.5 * std::log(s2 / denom) + m2 * s.sum * s.sum / (2.0 * s2 * denom);
}

double GibbsSampler::split_prior(int depth) const {
  return prior_.alpha * std::pow(1.0 + depth, -prior_.beta);
}

std::vector<double> GibbsSampler::cut_candidates(
    const std::vector<std::size_t>& rows, int var) const {
  std::vector<double> values;
  values.reserve(rows.size());
  const auto c = static_cast<std::size_t>(var);
  for (std::size_t i : rows) values.push_back(x_(i, c));
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (!values.empty()) values.pop_back();
  return values;
}

std::vector<int> GibbsSampler::splittable_vars(
    const std::vector<std::size_t>& rows) const {
  std::vector<int> out;
  if (rows.empty()) return out;
  for (std::size_t c = 0; c < x_.cols(); ++c) {
    const double first = x_(rows.front(), c);
    for (std::size_t i : rows) {
      if (x_(i, c) != first) {
        out.push_back(static_cast<int>(c));
        break;
      }
    }
  }
  return out;
}

void GibbsSampler::grow(std::size_t k, Rng& rng) {
  ++proposed_[kGrow];
  DecisionTree& t = trees_[k];
  const auto leaves = t.leaves();
  const int leaf = leaves[uniform_index(rng, leaves.size())];
  const auto rows = rows_at(k, leaf);
  const auto vars = splittable_vars(rows);
  if (vars.empty()) return;
  const int var = vars[uniform_index(rng, vars.size())];
  const auto cuts = cut_candidates(rows, var);
  const double cut = cuts[uniform_index(rng, cuts.size())];

  LeafStats left, right;
  const auto c = static_cast<std::size_t>(var);
  for (std::size_t i : rows) {
    LeafStats& s = x_(i, c) <= cut ? left : right;
    ++s.n;
    s.sum += residual_[i];
  }
  const LeafStats parent{left.n + right.n, left.sum + right.sum};

  const int d = t.depth(leaf);
  const int par = t.node(leaf).parent;
  const bool parent_was_nog =
      par != DecisionTree::kNone &&
      t.is_leaf(t.node(par).left) && t.is_leaf(t.node(par).right);
  const double w2_after = static_cast<double>(
      t.singly_internal_nodes().size() + 1 - (parent_was_nog ? 1 : 0));
  const double b = static_cast<double>(leaves.size());
  const double p_grow = t.is_stump() ? 1.0 : prior_.prob_grow;

  const double ps = split_prior(d);
  const double ps_child = split_prior(d + 1);
  const double log_ratio =
      std::log(prior_.prob_prune / w2_after) - std::log(p_grow / b) +
      std::log(ps) + 2.0 * std::log1p(-ps_child) - std::log1p(-ps) +
      log_leaf_likelihood(left) + log_leaf_likelihood(right) -
      log_leaf_likelihood(parent);
  if (std::log(uniform_open01(rng)) < log_ratio) {
    ++accepted_[kGrow];
    const auto [l, r] = t.grow(leaf, var, cut, 0.0, 0.0);
    for (std::size_t i : rows) leaf_of_[k][i] = x_(i, c) <= cut ? l : r;
  }
}

void GibbsSampler::prune(std::size_t k, Rng& rng) {
  ++proposed_[kPrune];
  DecisionTree& t = trees_[k];
  const auto nogs = t.singly_internal_nodes();
  const int id = nogs[uniform_index(rng, nogs.size())];
  const int l = t.node(id).left;
  const int r = t.node(id).right;
  LeafStats left, right;
  for (std::size_t i = 0; i < response_.size(); ++i) {
    const int leaf = leaf_of_[k][i];
    if (leaf == l) {
      ++left.n;
      left.sum += residual_[i];
    } else if (leaf == r) {
      ++right.n;
      right.sum += residual_[i];
    }
  }
  const LeafStats parent{left.n + right.n, left.sum + right.sum};

  const int d = t.depth(id);
  const double w2 = static_cast<double>(nogs.size());
  const double b_after = static_cast<double>(t.leaf_count() - 1);
  const double p_grow_after = id == t.root() ? 1.0 : prior_.prob_grow;
  const double ps = split_prior(d);
  const double ps_child = split_prior(d + 1);
  const double log_ratio =
      std::log(p_grow_after / b_after) - std::log(prior_.prob_prune / w2) +
      std::log1p(-ps) - std::log(ps) - 2.0 * std::log1p(-ps_child) +
      log_leaf_likelihood(parent) - log_leaf_likelihood(left) -
      log_leaf_likelihood(right);
  if (std::log(uniform_open01(rng)) < log_ratio) {
    ++accepted_[kPrune];
    t.prune(id, 0.0);
    for (auto& leaf : leaf_of_[k]) {
      if (leaf == l || leaf == r) leaf = id;
    }
  }
}

void GibbsSampler::change(std::size_t k, Rng& rng) {
  ++proposed_[kChange];
  DecisionTree& t = trees_[k];
  const auto nogs = t.singly_internal_nodes();
  const int id = nogs[uniform_index(rng, nogs.size())];
  const auto rows = rows_at(k, id);
  const auto vars = splittable_vars(rows);
  if (vars.empty()) return;
  const int var = vars[uniform_index(rng, vars.size())];
  const auto cuts = cut_candidates(rows, var);
  const double cut = cuts[uniform_index(rng, cuts.size())];

  const int l = t.node(id).left;
  const int r = t.node(id).right;
  const auto c = static_cast<std::size_t>(var);
  LeafStats old_l, old_r, new_l, new_r;
  for (std::size_t i : rows) {
    const int leaf = leaf_of_[k][i];
    LeafStats& o = leaf == l ? old_l : old_r;
    ++o.n;
    o.sum += residual_[i];
    LeafStats& s = x_(i, c) <= cut ? new_l : new_r;
    ++s.n;
    s.sum += residual_[i];
  }
  if (new_l.n == 0 || new_r.n == 0) return;
  const double log_ratio = log_leaf_likelihood(new_l) +
                           log_leaf_likelihood(new_r) -
                           log_leaf_likelihood(old_l) -
                           log_leaf_likelihood(old_r);
  if (std::log(uniform_open01(rng)) < log_ratio) {
    ++accepted_[kChange];
    t.set_rule(id, var, cut);
    for (std::size_t i : rows) leaf_of_[k][i] = x_(i, c) <= cut ? l : r;
  }
}

void GibbsSampler::update_structure(std::size_t k, Rng& rng) {
  partial_residual(k);
  move_structure(k, rng);
}

void GibbsSampler::draw_leaves(std::size_t k, Rng& rng) {
  partial_residual(k);
  move_leaves(k, rng);
}

void GibbsSampler::move_structure(std::size_t k, Rng& rng) {
  if (trees_[k].is_stump()) {
    grow(k, rng);
    return;
  }
  const double u = uniform_open01(rng);
  if (u < prior_.prob_grow) {
    grow(k, rng);
  } else if (u < prior_.prob_grow + prior_.prob_prune) {
    prune(k, rng);
  } else {
    change(k, rng);
  }
}

void GibbsSampler::move_leaves(std::size_t k, Rng& rng) {
  DecisionTree& t = trees_[k];
  std::vector<LeafStats> stats(t.capacity());
  for (std::size_t i = 0; i < response_.size(); ++i) {
    auto& s = stats[static_cast<std::size_t>(leaf_of_[k][i])];
    ++s.n;
    s.sum += residual_[i];
  }
  const double s2 = sigma_ * sigma_;
  const double m2 = sigma_mu_ * sigma_mu_;
  for (int leaf : t.leaves()) {
    const auto& s = stats[static_cast<std::size_t>(leaf)];
    const double var = 1.0 / (static_cast<double>(s.n) / s2 + 1.0 / m2);
    const double mean = var * s.sum / s2;
    t.set_value(leaf, mean + std::sqrt(var) * standard_normal(rng));
  }
  refresh_tree_fit(k);
}

void GibbsSampler::draw_sigma(Rng& rng) {
  double sse = 0.0;
  for (std::size_t i = 0; i < response_.size(); ++i) {
    const double e = response_[i] - fit_[i];
    sse += e * e;
  }
  const double n = static_cast<double>(response_.size());
  const double shape = 0.5 * (prior_.nu + n);
  const double scale = 0.5 * (prior_.nu * lambda_ + sse);
  sigma_ = std::sqrt(inverse_gamma_variate(rng, shape, scale));
}

void GibbsSampler::sweep(Rng& rng) {
  for (std::size_t k = 0; k < trees_.size(); ++k) {
    partial_residual(k);
    move_structure(k, rng);
    move_leaves(k, rng);
  }
  if (!fixed_sigma_) draw_sigma(rng);
}

// ---------------------------------------------------------------------------
// Fitting

EnsembleDraws fit_continuous(const Matrix& features, std::span<const double> y,
                             std::vector<std::string> feature_names,
                             const TreePriorConfig& prior,
                             const McmcSettings& mcmc, std::uint64_t seed) {
  prior.validate();
  mcmc.validate();
  const std::size_t n = y.size();
  if (features.rows() != n) throw InputError("feature rows and y differ");
  if (feature_names.size() != features.cols()) {
    throw InputError("feature name count does not match columns");
  }
  if (n < 10) throw InputError("tree regression needs at least 10 rows");
  require_finite(features, "tree features");
  for (double v : y) {
    if (!std::isfinite(v)) throw InputError("non-finite outcome value");
  }

  EnsembleDraws out;
  out.link = Link::kIdentity;
  out.feature_names = std::move(feature_names);
  out.prior = prior;
  out.mcmc = mcmc;
  out.seed = seed;

  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*hi > *lo) {
    out.scaling.center = 0.5 * (*lo + *hi);
    out.scaling.range = *hi - *lo;
  } else {
    out.scaling.center = *lo;
    out.scaling.range = 1.0;
    out.warnings.push_back("outcome is constant; predictions collapse to it");
  }
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = out.scaling.to_internal(y[i]);

  const double sigma_hat = std::max(sample_sd(ys), prior.sigma_floor);
  const boost::math::chi_squared chi(prior.nu);
  out.lambda = sigma_hat * sigma_hat *
               boost::math::quantile(chi, 1.0 - prior.q) / prior.nu;
  out.sigma_mu =
      0.5 / (prior.k * std::sqrt(static_cast<double>(prior.num_trees)));

  Rng rng(seed);
  GibbsSampler sampler(features, ys, prior, out.sigma_mu, out.lambda, false,
                       sigma_hat);
  const std::size_t total = mcmc.burn_in + mcmc.draws * mcmc.thin;
  out.sigma_trace.reserve(total);
  out.draws.reserve(mcmc.draws);
  for (std::size_t it = 0; it < total; ++it) {
    sampler.sweep(rng);
    const double sigma_ext = sampler.sigma() * out.scaling.range;
    out.sigma_trace.push_back(sigma_ext);
    if (it >= mcmc.burn_in && (it - mcmc.burn_in + 1) % mcmc.thin == 0) {
      TreeEnsembleModel m;
      m.sigma = sigma_ext;
      m.trees.reserve(sampler.num_trees());
      for (std::size_t k = 0; k < sampler.num_trees(); ++k) {
        m.trees.push_back(sampler.tree(k));
      }
      out.draws.push_back(std::move(m));
    }
  }
  return out;
}

ProbitFit fit_probit(const Matrix& x, std::span<const int> t,
                     std::vector<std::string> feature_names,
                     const TreePriorConfig& prior, const McmcSettings& mcmc,
                     std::uint64_t seed) {
  prior.validate();
  mcmc.validate();
  const std::size_t n = t.size();
  if (x.rows() != n) throw InputError("covariate rows and t differ");
  if (feature_names.size() != x.cols()) {
    throw InputError("feature name count does not match columns");
  }
  require_finite(x, "propensity covariates");
  std::size_t treated = 0;
  for (int v : t) {
    if (v != 0 && v != 1) throw DomainError("treatment must be 0 or 1");
    treated += static_cast<std::size_t>(v);
  }
  if (treated == 0 || treated == n) {
    throw PositivityError("probit model needs both treatment classes");
  }

  ProbitFit out;
  EnsembleDraws& e = out.draws;
  e.link = Link::kProbit;
  e.feature_names = std::move(feature_names);
  e.prior = prior;
  e.mcmc = mcmc;
  e.seed = seed;
  const boost::math::normal std_normal;
  e.offset = boost::math::quantile(
      std_normal, static_cast<double>(treated) / static_cast<double>(n));
  e.sigma_mu =
      3.0 / (prior.k * std::sqrt(static_cast<double>(prior.num_trees)));

  Rng rng(seed);
  GibbsSampler sampler(x, std::vector<double>(n, 0.0), prior, e.sigma_mu, 0.0,
                       true, 1.0);
  std::vector<double> latent(n);
  std::vector<double> pi_sum(n, 0.0);
  const std::size_t total = mcmc.burn_in + mcmc.draws * mcmc.thin;
  e.draws.reserve(mcmc.draws);
  for (std::size_t it = 0; it < total; ++it) {
    const auto fit = sampler.fit();
    for (std::size_t i = 0; i < n; ++i) {
      latent[i] = truncated_normal_unit(rng, e.offset + fit[i], t[i] == 1) -
                  e.offset;
    }
    sampler.set_response(latent);
    sampler.sweep(rng);
    e.sigma_trace.push_back(1.0);
    if (it >= mcmc.burn_in && (it - mcmc.burn_in + 1) % mcmc.thin == 0) {
      TreeEnsembleModel m;
      m.sigma = 1.0;
      for (std::size_t k = 0; k < sampler.num_trees(); ++k) {
        m.trees.push_back(sampler.tree(k));
      }
      e.draws.push_back(std::move(m));
      const auto f = sampler.fit();
      for (std::size_t i = 0; i < n; ++i) {
        pi_sum[i] += normal_cdf(e.offset + f[i]);
      }
    }
  }
  out.pi_hat.resize(n);
  const double d = static_cast<double>(e.draws.size());
  for (std::size_t i = 0; i < n; ++i) out.pi_hat[i] = pi_sum[i] / d;
  return out;
}

double clever_value(int t, double pi) {
  if (!(pi > 0.0 && pi < 1.0)) {
    throw DomainError("clever covariate needs a propensity inside (0, 1)");
  }
  return t == 1 ? 1.0 / pi : -1.0 / (1.0 - pi);
}

CleverCovariate clever_covariate(std::span<const int> t,
                                 std::span<const double> pi,
                                 std::string pi_source) {
  if (t.size() != pi.size()) {
    throw InputError("treatment and propensity lengths differ");
  }
  CleverCovariate out;
  out.pi_source = std::move(pi_source);
  out.h.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.h.push_back(clever_value(t[i], pi[i]));
  }
  return out;
}

InclusionReport inclusion_proportions(const EnsembleDraws& draws) {
  InclusionReport r;
  r.feature_names = draws.feature_names;
  r.counts.assign(draws.feature_names.size(), 0);
  for (const auto& m : draws.draws) {
    for (const auto& t : m.trees) t.count_split_vars(r.counts);
  }
  r.counts.resize(draws.feature_names.size());
  for (auto c : r.counts) r.total_splits += c;
  r.proportions.assign(r.counts.size(), 0.0);
  if (r.total_splits > 0) {
    for (std::size_t c = 0; c < r.counts.size(); ++c) {
      r.proportions[c] = static_cast<double>(r.counts[c]) /
                         static_cast<double>(r.total_splits);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Models bound to a dataset

PropensityModel::PropensityModel(EnsembleDraws draws, std::vector<double> pi_hat,
                                 double clip_lower)
    : draws_(std::move(draws)), clip_lower_(clip_lower) {
  if (!(clip_lower > 0.0 && clip_lower < 0.5)) {
    throw DomainError("propensity clip must lie in (0, 0.5)");
  }
  const auto clipped = clip_propensities(pi_hat, clip_lower);
  pi_hat_ = clipped.pi;
  clipped_ = clipped.clipped;
}

double PropensityModel::pi(std::span<const double> x) const {
  if (x.size() != draws_.num_features()) {
    throw InputError("propensity input has the wrong number of columns");
  }
  return std::clamp(draws_.posterior_mean(x), clip_lower_, 1.0 - clip_lower_);
}

PropensityModel fit_propensity(const ObservationalDataset& ds,
                               const TreePriorConfig& prior,
                               const McmcSettings& mcmc, std::uint64_t seed) {
  auto fit = fit_probit(ds.x(), ds.t(), ds.schema().covariate_columns(), prior,
                        mcmc, seed);
  return PropensityModel(std::move(fit.draws), std::move(fit.pi_hat));
}

OutcomeRegression::OutcomeRegression(EnsembleDraws draws,
                                     std::size_t num_covariates,
                                     std::optional<PropensityModel> propensity)
    : draws_(std::move(draws)),
      num_covariates_(num_covariates),
      propensity_(std::move(propensity)) {
  const std::size_t expected = 1 + num_covariates_ + (propensity_ ? 1 : 0);
  if (draws_.num_features() != expected) {
    throw InputError("outcome model feature count does not match layout");
  }
}

void OutcomeRegression::check_width(std::span<const double> x) const {
  if (x.size() != num_covariates_) {
    throw InputError("covariate row has " + std::to_string(x.size()) +
                     " columns, model expects " +
                     std::to_string(num_covariates_));
  }
}

std::vector<double> OutcomeRegression::features(int t,
                                                std::span<const double> x,
                                                double pi) const {
  check_width(x);
  std::vector<double> f;
  f.reserve(num_covariates_ + 2);
  f.push_back(static_cast<double>(t));
  f.insert(f.end(), x.begin(), x.end());
  if (propensity_) f.push_back(clever_value(t, pi));
  return f;
}

double OutcomeRegression::predict_with_pi(std::size_t d, int t,
                                          std::span<const double> x,
                                          double pi) const {
  return draws_.predict(d, features(t, x, pi));
}

double OutcomeRegression::predict(std::size_t d, int t,
                                  std::span<const double> x) const {
  const double pi = propensity_ ? propensity_->pi(x) : 0.5;
  return predict_with_pi(d, t, x, pi);
}

std::vector<double> OutcomeRegression::predict_draws(
    int t, std::span<const double> x) const {
  const double pi = propensity_ ? propensity_->pi(x) : 0.5;
  return draws_.predict_draws(features(t, x, pi));
}

double OutcomeRegression::sample(std::size_t d, int t,
                                 std::span<const double> x, Rng& rng) const {
  return predict(d, t, x) + draws_.draws[d].sigma * standard_normal(rng);
}

Matrix OutcomeRegression::effect_matrix(const Matrix& x,
                                        std::span<const double> pi,
                                        unsigned threads) const {
  const std::size_t n = x.rows();
  if (propensity_ && pi.size() != n) {
    throw InputError("propensity vector length does not match rows");
  }
  Matrix f1, f0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = propensity_ ? pi[i] : 0.5;
    f1.append_row(features(1, x.row(i), p));
    f0.append_row(features(0, x.row(i), p));
  }
  Matrix out(draws_.size(), n);
  parallel_for(draws_.size(), threads, [&](std::size_t d) {
    for (std::size_t i = 0; i < n; ++i) {
      out(d, i) = draws_.predict(d, f1.row(i)) - draws_.predict(d, f0.row(i));
    }
  });
  return out;
}

OutcomeRegression fit_outcome_regression(
    const ObservationalDataset& ds,
    const std::optional<PropensityModel>& propensity,
    const TreePriorConfig& prior, const McmcSettings& mcmc,
    std::uint64_t seed) {
  std::vector<std::string> names{ds.schema().treatment_column};
  for (const auto& c : ds.schema().covariate_columns()) names.push_back(c);
  if (propensity) names.push_back("clever_covariate");
  Matrix features;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    std::vector<double> row{static_cast<double>(ds.t()[i])};
    const auto xr = ds.x().row(i);
    row.insert(row.end(), xr.begin(), xr.end());
    if (propensity) {
      row.push_back(clever_value(ds.t()[i], propensity->pi_hat()[i]));
    }
    features.append_row(row);
  }
  auto draws =
      fit_continuous(features, ds.y(), std::move(names), prior, mcmc, seed);
  return OutcomeRegression(std::move(draws), ds.p(), propensity);
}

}  // namespace tte
