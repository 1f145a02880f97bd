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

// Acceptance runner. Prints one PASS/FAIL line per criterion.
//
//   tte_acceptance core         criteria 4-8 and 11
//   tte_acceptance application  criteria 1-3, 9, 10 on the birthweight
//                               excerpt; exits 77 when it is absent

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "run_config.hpp"
#include "synthetic.hpp"
#include "tte/data.hpp"
#include "tte/io.hpp"
#include "tte/ipw.hpp"
#include "tte/parallel.hpp"
#include "tte/random.hpp"
#include "tte/resampler.hpp"
#include "tte/stats.hpp"
#include "tte/verify.hpp"

namespace {

namespace fs = std::filesystem;
using namespace tte;

// Tolerances.
constexpr double kBartMean = 257.98, kBartCcMean = 262.64;
constexpr double kMargObsMean = 267.32, kMargIsMean = 266.49;
constexpr double kBartSd = 25.64, kBartCcSd = 27.82;
constexpr double kMargObsSd = 23.98, kMargIsSd = 32.05;
constexpr double kBartMeanTol = 20.0, kMargMeanTol = 15.0;
constexpr double kSdRelTol = 0.40;
constexpr double kEssTarget = 3303.0, kEssTol = 150.0;
constexpr std::size_t kEligibleN = 3754;
constexpr double kFileMean = 3416.0, kFileMeanTol = 1.0;
constexpr double kKsAlpha = 0.01;
constexpr int kKsSeeds = 5, kKsRequired = 4;
constexpr double kEquivalenceSeconds = 120.0;
constexpr double kIdentityTol = 1e-12;
constexpr double kRatioLo = 0.40, kRatioHi = 0.62;
constexpr double kContractionSeconds = 300.0;
constexpr double kHajekTol = 1e-12, kVarianceRelTol = 0.05;
constexpr double kSpearmanMin = 0.3;
constexpr double kAgeLo = 20, kAgeHi = 38;
constexpr double kInclusionLo = 0.02, kInclusionHi = 0.20, kInclusionRef = 0.07;

int failures = 0;

void report(int id, bool pass, const std::string& title,
            const std::string& detail) {
  failures += pass ? 0 : 1;
  std::cout << "criterion " << id << (pass ? " PASS " : " FAIL ") << title
            << ": " << detail << std::endl;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------------------
// core group

void criterion4(unsigned threads) {
  const verify::ContinuousDgp dgp;
  const verify::EquivalenceSettings settings;  // n 100, N - n 1e4, B 2000
  const auto t0 = std::chrono::steady_clock::now();
  int passed = 0;
  std::string ps;
  for (int s = 0; s < kKsSeeds; ++s) {
    const auto r = verify::equivalence_experiment(dgp, settings, 1000 + s,
                                                  threads);
    passed += r.p_value > kKsAlpha ? 1 : 0;
    ps += (s ? "," : "") + num(r.p_value);
  }
  const double secs = seconds_since(t0);
  report(4, passed >= kKsRequired && secs < kEquivalenceSeconds,
         "closed-form equivalence",
         std::to_string(passed) + "/" + std::to_string(kKsSeeds) +
             " seeds with KS p > 0.01 (p = " + ps + "), " + num(secs) + " s");
}

void criterion5() {
  bool ok = true;
  std::string detail;
  for (const auto& r : verify::martingale_suite()) {
    ok = ok && r.passed;
    if (!r.expect_failure && r.residual != 0.0) ok = false;
    detail += r.name + "=" + num(r.residual) + (r.expect_failure ? "(neg)" : "") +
              " ";
  }
  report(5, ok, "exact martingale suite", detail);
}

void criterion6() {
  bool ok = true;
  std::size_t negatives = 0;
  std::string detail;
  for (const auto& r : verify::oracle_suite(100, 20240601)) {
    ok = ok && r.passed;
    if (!r.expect_failure && !(r.residual <= kIdentityTol)) ok = false;
    if (r.expect_failure && r.passed && r.name.find("broken_modularity") !=
                                            std::string::npos) {
      ++negatives;
    }
    detail += r.name + "=" + num(r.residual) + " ";
  }
  ok = ok && negatives == 2;
  report(6, ok, "identification oracles", detail);
}

void criterion7(unsigned threads) {
  const verify::ContinuousDgp dgp;
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (EssMode mode : {EssMode::kObservedCount, EssMode::kImportanceSampling}) {
    const auto r = verify::contraction_experiment(dgp, {250, 1000, 4000}, 200,
                                                  mode, 20240601, threads);
    detail += std::string(to_string(mode)) + " ratios";
    for (double x : r.sd_ratios) {
      ok = ok && x >= kRatioLo && x <= kRatioHi;
      detail += " " + num(x);
    }
    detail += "; ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kContractionSeconds;
  report(7, ok, "contraction", detail + num(secs) + " s");
}

// Written out here independently of the library.
double dirichlet_mean_variance(const std::vector<double>& a,
                               const std::vector<double>& c) {
  double C = 0.0, m = 0.0, m2 = 0.0;
  for (double v : c) C += v;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m += c[i] / C * a[i];
    m2 += c[i] / C * a[i] * a[i];
  }
  return (m2 - m * m) / (C + 1.0);
}

void criterion8() {
  Rng rng(8);
  double worst_mean = 0.0, worst_var_formula = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 4 + uniform_index(rng, 80);
    std::vector<int> t(n);
    std::vector<double> pi(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = i < 2 ? static_cast<int>(i) : bernoulli(rng, 0.5);
      pi[i] = 0.02 + 0.96 * uniform_open01(rng);
      y[i] = 3000.0 + 500.0 * standard_normal(rng);
    }
    const EssMode mode = rep % 2 ? EssMode::kImportanceSampling
                                 : EssMode::kObservedCount;
    const auto w = with_effective_sample_size(hajek_weights(t, pi), t, mode);
    const auto spec = DirichletPosteriorSpec::from_weights(y, w);
    double s1 = 0, d1 = 0, s0 = 0, d0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (t[i]) {
        s1 += y[i] / pi[i];
        d1 += 1 / pi[i];
      } else {
        s0 += y[i] / (1 - pi[i]);
        d0 += 1 / (1 - pi[i]);
      }
    }
    const double hajek = s1 / d1 - s0 / d0;
    // Relative to the arm means: theta is a difference of two such sums.
    const double scale =
        std::max({1.0, std::abs(s1 / d1), std::abs(s0 / d0)});
    worst_mean = std::max(
        worst_mean, std::abs(posterior_mean_analytic(spec) - hajek) / scale);
    const double v = dirichlet_mean_variance(y, spec.concentration1);
    worst_var_formula = std::max(
        worst_var_formula,
        std::abs(posterior_variance_analytic(spec, 1) - v) / std::max(v, 1e-300));
  }

  // Monte Carlo against the formula on one fixture.
  std::vector<int> t(60);
  std::vector<double> pi(60), y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    t[i] = i % 2;
    pi[i] = 0.2 + 0.6 * uniform_open01(rng);
    y[i] = 10.0 * standard_normal(rng);
  }
  const auto w = with_effective_sample_size(hajek_weights(t, pi), t,
                                            EssMode::kImportanceSampling);
  const auto spec = DirichletPosteriorSpec::from_weights(y, w);
  std::vector<double> m1;
  for (int b = 0; b < 50000; ++b) {
    m1.push_back(dirichlet_posterior_draw(spec, rng).arm1.mean());
  }
  const double formula = dirichlet_mean_variance(y, spec.concentration1);
  const double mc_rel = std::abs(sample_variance(m1) / formula - 1.0);
  report(8,
         worst_mean <= kHajekTol && worst_var_formula <= 1e-10 &&
             mc_rel <= kVarianceRelTol,
         "Hajek mean identity",
         "max |mean - Hajek| / arm-mean scale " + num(worst_mean) +
             " over 1000 fixtures; variance formula rel diff " +
             num(worst_var_formula) + "; Monte Carlo rel diff " + num(mc_rel));
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    out[e.path().filename().string()] = io::read_file(e.path());
  }
  return out;
}

void criterion11() {
  const fs::path work = fs::temp_directory_path() / "tte_acceptance_c11";
  fs::remove_all(work);
  fs::create_directories(work);
  io::write_file_atomic(work / "data.csv",
                        cli::synthetic_birthweight_csv(800, 31));
  cli::RunConfig c;
  c.input = (work / "data.csv").string();
  c.schema = TTE_SOURCE_DIR "/config/cattaneo2_schema.json";
  c.seed = 31;
  c.replicates = 200;
  c.mcmc.burn_in = 100;
  c.mcmc.draws = 100;
  c.num_trees = 20;
  c.cate_values = {25, 30};
  std::ostringstream sink;
  std::vector<std::map<std::string, std::string>> runs;
  for (unsigned threads : {1u, 2u, 4u, 4u}) {
    c.threads = threads;
    c.out = work / ("analyze_" + std::to_string(runs.size()));
    cli::cmd_analyze(c, sink);
    runs.push_back(dir_contents(c.out));
  }
  bool ok = std::all_of(runs.begin(), runs.end(),
                        [&](const auto& r) { return r == runs[0]; });
  const std::size_t files = runs[0].size();
  std::vector<std::map<std::string, std::string>> sims;
  for (unsigned threads : {1u, 3u, 3u}) {
    cli::SimulateOptions s;
    s.seed = 31;
    s.reps = 30;
    s.grid = {200, 800};
    s.threads = threads;
    s.out = work / ("simulate_" + std::to_string(sims.size()));
    cli::cmd_simulate(s, sink);
    sims.push_back(dir_contents(s.out));
  }
  ok = ok && std::all_of(sims.begin(), sims.end(),
                         [&](const auto& r) { return r == sims[0]; });
  fs::remove_all(work);
  report(11, ok, "determinism",
         "analyze (" + std::to_string(files) +
             " artifacts) at 1/2/4/4 threads and simulate at 1/3/3 threads " +
             (ok ? "byte-identical" : "DIFFER"));
}

// ---------------------------------------------------------------------------
// application group

std::optional<fs::path> locate_dataset() {
  if (const char* env = std::getenv("TTE_BIRTHWEIGHT_CSV"); env && *env) {
    if (fs::exists(env)) return fs::path(env);
  }
  const fs::path local = fs::path(TTE_SOURCE_DIR) / "data" / "cattaneo2.csv";
  if (fs::exists(local)) return local;
  return std::nullopt;
}

double whole_file_mean(const fs::path& csv, const std::string& column) {
  const auto table = io::read_csv(csv);
  const auto it = std::find(table.header.begin(), table.header.end(), column);
  const auto c = static_cast<std::size_t>(it - table.header.begin());
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& row : table.rows) {
    acc += std::stod(row.at(c));
    ++n;
  }
  return acc / static_cast<double>(n);
}

const cli::MethodResult* find(const cli::AnalysisOutput& out,
                              const std::string& m) {
  for (const auto& r : out.methods) {
    if (r.method == m) return &r;
  }
  return nullptr;
}

int run_application(unsigned threads) {
  const auto path = locate_dataset();
  if (!path) {
    for (int id : {1, 2, 3, 9, 10}) {
      std::cout << "criterion " << id
                << " UNVERIFIED birthweight excerpt not found (set "
                   "TTE_BIRTHWEIGHT_CSV or place data/cattaneo2.csv)"
                << std::endl;
    }
    return 77;
  }
  const auto schema =
      CovariateSchema::load(TTE_SOURCE_DIR "/config/cattaneo2_schema.json");
  const auto ds = ingest_csv(*path, schema);
  cli::RunConfig c;
  c.input = path->string();
  c.schema = TTE_SOURCE_DIR "/config/cattaneo2_schema.json";
  c.threads = threads;
  const auto out = cli::run_analysis(c, ds);

  struct Row {
    const char* method;
    double mean, mean_tol, sd;
  };
  const Row rows[] = {{"bart", kBartMean, kBartMeanTol, kBartSd},
                      {"bart-cc", kBartCcMean, kBartMeanTol, kBartCcSd},
                      {"marg-obs", kMargObsMean, kMargMeanTol, kMargObsSd},
                      {"marg-is", kMargIsMean, kMargMeanTol, kMargIsSd}};
  bool ok1 = true;
  std::string d1;
  for (const auto& r : rows) {
    const auto* m = find(out, r.method);
    const bool mean_ok = std::abs(m->ate.mean - r.mean) <= r.mean_tol;
    const bool sd_ok = std::abs(m->ate.sd / r.sd - 1.0) <= kSdRelTol;
    ok1 = ok1 && mean_ok && sd_ok;
    d1 += std::string(r.method) + " mean " + num(m->ate.mean) + " (ref " +
          num(r.mean) + ") sd " + num(m->ate.sd) + " (ref " + num(r.sd) + "); ";
  }
  report(1, ok1, "ATE posterior summaries", d1);

  const double ess = out.ess_importance->total();
  report(2, std::abs(ess - kEssTarget) <= kEssTol && ds.n() == kEligibleN,
         "effective sample size",
         "importance-sampling ESS " + num(ess) + " (ref 3303), n " +
             std::to_string(ds.n()));

  const double fm = whole_file_mean(*path, schema.outcome_column);
  report(3, std::abs(fm - kFileMean) <= kFileMeanTol && ds.n() == kEligibleN,
         "data sanity",
         "whole-file mean " + num(fm) + " g (ref 3416), eligible mean " +
             num(out.dataset.mean_outcome) + " g, eligible n " +
             std::to_string(ds.n()) + " (ref 3754)");

  bool ok9 = true;
  std::string d9;
  for (const char* m : {"bart", "bart-cc"}) {
    std::vector<double> ages, effects;
    for (const auto& row : find(out, m)->cate) {
      if (row.value < kAgeLo || row.value > kAgeHi) continue;
      ages.push_back(row.value);
      effects.push_back(row.summary.mean);
    }
    const double rho = spearman_correlation(ages, effects);
    ok9 = ok9 && rho > kSpearmanMin;
    d9 += std::string(m) + " Spearman " + num(rho) + " over " +
          std::to_string(ages.size()) + " ages; ";
  }
  report(9, ok9, "CATE trend in mother's age", d9);

  const auto& inc = *find(out, "bart-cc")->inclusion;
  double prop = -1.0;
  for (std::size_t f = 0; f < inc.feature_names.size(); ++f) {
    if (inc.feature_names[f] == "clever_covariate") prop = inc.proportions[f];
  }
  report(10, prop >= kInclusionLo && prop <= kInclusionHi,
         "clever covariate inclusion",
         "proportion " + num(prop) + " (reference point " + num(kInclusionRef) +
             ")");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string group = argc > 1 ? argv[1] : "core";
  const unsigned threads = tte::default_threads();
  if (group == "application") return run_application(threads);
  if (group != "core") {
    std::cerr << "usage: tte_acceptance [core|application]\n";
    return 2;
  }
  criterion4(threads);
  criterion5();
  criterion6();
  criterion7(threads);
  criterion8();
  criterion11();
  return failures == 0 ? 0 : 1;
}
