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

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "tte/ipw.hpp"
#include "tte/random.hpp"
#include "tte/resampler.hpp"
#include "tte/trees.hpp"
#include "tte/verify.hpp"

namespace {

using namespace tte;

struct Fixture {
  std::vector<int> t;
  std::vector<double> pi, y;
  Matrix x;
};

Fixture make_fixture(std::size_t n) {
  Fixture f;
  Rng rng(1);
  f.x = Matrix(n, 8);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 8; ++j) f.x(i, j) = uniform_open01(rng);
    f.pi.push_back(0.1 + 0.8 * f.x(i, 0));
    f.t.push_back(bernoulli(rng, f.pi.back()) ? 1 : 0);
    f.y.push_back(3000 + 250 * f.t.back() + 400 * f.x(i, 1) +
                  500 * standard_normal(rng));
  }
  return f;
}

DirichletPosteriorSpec spec_for(const Fixture& f) {
  const auto w = with_effective_sample_size(hajek_weights(f.t, f.pi), f.t,
                                            EssMode::kImportanceSampling);
  return DirichletPosteriorSpec::from_weights(f.y, w);
}

void BM_HajekWeights(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hajek_weights(f.t, f.pi));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HajekWeights)->Arg(1000)->Arg(4000);

void BM_DirichletDraw(benchmark::State& state) {
  const auto spec = spec_for(make_fixture(static_cast<std::size_t>(state.range(0))));
  Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dirichlet_posterior_draw(spec, rng).theta);
  }
}
BENCHMARK(BM_DirichletDraw)->Arg(1000)->Arg(4000);

void BM_UrnImputation(benchmark::State& state) {
  const auto f = make_fixture(100);
  FactorizedPredictive p;
  p.covariates = std::make_unique<BayesianBootstrapKernel>(
      std::make_shared<const Matrix>(f.x));
  p.outcome = std::make_unique<HajekUrnOutcomeKernel>(spec_for(f));
  const auto horizon = 100 + static_cast<std::size_t>(state.range(0));
  std::uint64_t b = 0;
  for (auto _ : state) {
    auto clone = p.clone();
    Rng rng(b);
    benchmark::DoNotOptimize(impute_trial(clone, 100, horizon, b, b, rng));
    ++b;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UrnImputation)->Arg(10000);

void BM_GibbsSweep(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)));
  TreePriorConfig prior;
  GibbsSampler g(f.x, std::vector<double>(f.y.begin(), f.y.end()), prior,
                 0.5 / (2.0 * std::sqrt(50.0)), 0.01, false, 1.0);
  Rng rng(3);
  for (auto _ : state) g.sweep(rng);
}
BENCHMARK(BM_GibbsSweep)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_ExactCid(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        verify::cid_exact_check(verify::reference_composite_kernel(), 2));
  }
}
BENCHMARK(BM_ExactCid)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
