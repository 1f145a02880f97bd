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

#ifndef TTE_STATS_HPP_
#define TTE_STATS_HPP_

#include <span>
#include <vector>

namespace tte {

double mean(std::span<const double> v);

// Unbiased (n - 1) sample variance; zero for fewer than two values.
double sample_variance(std::span<const double> v);

double sample_sd(std::span<const double> v);

// Quantile with linear interpolation between order statistics (the
// "type 7" rule): position (n - 1) * p in the sorted sample.
double quantile(std::span<const double> v, double p);

// Ranks with ties replaced by their average rank (1-based).
std::vector<double> average_ranks(std::span<const double> v);

double pearson_correlation(std::span<const double> a,
                           std::span<const double> b);

double spearman_correlation(std::span<const double> a,
                            std::span<const double> b);

// Survival function of the Kolmogorov distribution,
// Q(lambda) = 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2).
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;  // sup |F1 - F2|
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value and the
// Stephens small-sample correction on the effective size n1 n2 / (n1 + n2).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace tte

#endif  // TTE_STATS_HPP_
