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
#include <filesystem>
#include <numeric>
#include <vector>

#include "tte/errors.hpp"
#include "tte/io.hpp"
#include "tte/parallel.hpp"
#include "tte/random.hpp"
#include "tte/stats.hpp"

namespace tte {
namespace {

TEST(Stats, QuantileInterpolatesOrderStatistics) {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
}

TEST(Stats, MomentsAndCorrelations) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{5, 6, 7, 8, 7};
  EXPECT_DOUBLE_EQ(mean(a), 3.0);
  EXPECT_DOUBLE_EQ(sample_variance(a), 2.5);
  EXPECT_EQ(average_ranks(b), (std::vector<double>{1, 2, 3.5, 5, 3.5}));
  // Frozen reference value for average-rank Spearman with one tie.
  EXPECT_NEAR(spearman_correlation(a, b), 0.8207826816681233, 1e-14);
  EXPECT_NEAR(pearson_correlation(a, a), 1.0, 1e-15);
  const std::vector<double> y{1, 3, 5, 7, 9};
  EXPECT_NEAR(ols_slope(a, y), 2.0, 1e-14);
}

TEST(Stats, KolmogorovSurvivalReferenceValues) {
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.26999967167735456, 1e-14);
  EXPECT_NEAR(kolmogorov_survival(0.5), 0.9639452436648751, 1e-14);
  EXPECT_NEAR(kolmogorov_survival(1.36), 0.049485876755377876, 1e-14);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(Stats, KsTwoSample) {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  EXPECT_DOUBLE_EQ(ks_two_sample(a, b).statistic, 1.0);
  EXPECT_DOUBLE_EQ(ks_two_sample(a, a).statistic, 0.0);
  const std::vector<double> c{1, 2, 3, 4}, d{2.5, 3.5, 4.5, 5.5};
  // ECDF gap is largest at x = 2: F_c = 1/2, F_d = 0.
  EXPECT_DOUBLE_EQ(ks_two_sample(c, d).statistic, 0.5);
  Rng rng(1);
  std::vector<double> u(2000), v(2000), w(2000);
  for (auto& x : u) x = standard_normal(rng);
  for (auto& x : v) x = standard_normal(rng);
  for (auto& x : w) x = standard_normal(rng) + 0.3;
  EXPECT_GT(ks_two_sample(u, v).p_value, 0.01);
  EXPECT_LT(ks_two_sample(u, w).p_value, 1e-6);
}

TEST(Random, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(1, stream::kReplicate, 0),
            derive_seed(1, stream::kReplicate, 0));
  EXPECT_NE(derive_seed(1, stream::kReplicate, 0),
            derive_seed(1, stream::kReplicate, 1));
  EXPECT_NE(derive_seed(1, stream::kReplicate, 0),
            derive_seed(1, stream::kDirect, 0));
  EXPECT_NE(derive_seed(1, stream::kReplicate, 0),
            derive_seed(2, stream::kReplicate, 0));
  Rng a = make_stream(3, stream::kDirect, 4);
  Rng b = make_stream(3, stream::kDirect, 4);
  EXPECT_EQ(a(), b());
}

TEST(Random, DirichletZeroConcentrationGetsZeroWeight) {
  Rng rng(2);
  const std::vector<double> c{0.0, 1.0, 2.0};
  const auto w = sample_dirichlet(rng, c);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-15);
  EXPECT_THROW(sample_dirichlet(rng, std::vector<double>{0.0, 0.0}),
               DegenerateArmError);
}

TEST(Random, TinyGammaShapesStayFinite) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double lg = log_gamma_variate(rng, 1e-4);
    EXPECT_TRUE(std::isfinite(lg));
  }
  std::vector<double> g;
  for (int i = 0; i < 40000; ++i) g.push_back(gamma_variate(rng, 2.5));
  EXPECT_NEAR(mean(g), 2.5, 0.05);
  EXPECT_NEAR(sample_variance(g), 2.5, 0.1);
}

TEST(Random, TruncatedNormalRespectsSign) {
  Rng rng(4);
  std::vector<double> pos;
  for (int i = 0; i < 20000; ++i) {
    const double p = truncated_normal_unit(rng, 0.0, true);
    const double n = truncated_normal_unit(rng, 3.0, false);
    ASSERT_GT(p, 0.0);
    ASSERT_LT(n, 0.0);
    pos.push_back(p);
  }
  // Half-normal mean sqrt(2 / pi).
  EXPECT_NEAR(mean(pos), std::sqrt(2.0 / M_PI), 0.02);
}

TEST(Io, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 3416.0, -2.5e-300, 267.32}) {
    EXPECT_EQ(std::stod(io::format_number(v)), v);
  }
  EXPECT_EQ(io::format_number(3416.0), "3416");
}

TEST(Io, CsvQuotedFields) {
  const auto t = io::parse_csv("a,b\n\"x,1\",2\n\"he said \"\"hi\"\"\",3\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x,1");
  EXPECT_EQ(t.rows[1][0], "he said \"hi\"");
  EXPECT_THROW(io::parse_csv("a\n\"open\n"), InputError);
}

TEST(Io, AtomicWriteReplacesFile) {
  const auto dir = std::filesystem::temp_directory_path() / "tte_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "f.txt";
  io::write_file_atomic(path, "one");
  io::write_file_atomic(path, "two");
  EXPECT_EQ(io::read_file(path), "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) {
    ++files;
  }
  EXPECT_EQ(files, 1u);
  std::filesystem::remove_all(dir);
}

TEST(Parallel, ResultsIndependentOfThreadCount) {
  std::vector<double> a(1000), b(1000);
  parallel_for(1000, 1, [&](std::size_t i) { a[i] = std::sqrt(double(i)); });
  parallel_for(1000, 7, [&](std::size_t i) { b[i] = std::sqrt(double(i)); });
  EXPECT_EQ(a, b);
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 50) throw DomainError("boom");
                            }),
               DomainError);
}

}  // namespace
}  // namespace tte
