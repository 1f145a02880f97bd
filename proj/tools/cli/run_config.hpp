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

#ifndef TTE_CLI_RUN_CONFIG_HPP_
#define TTE_CLI_RUN_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tte/trees.hpp"

namespace tte::cli {

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m{"bart", "bart-cc", "marg-obs",
                                          "marg-is"};
  return m;
}

struct RunConfig {
  std::string input;
  std::string schema;
  std::vector<std::string> methods = known_methods();
  std::uint64_t seed = 20240601;
  std::size_t replicates = 2000;
  std::size_t horizon = 0;  // N; 0 means n + 10000
  std::string mode = "direct";  // direct | sequential
  McmcSettings mcmc;
  std::size_t num_trees = 50;
  std::vector<std::string> estimands{"ate", "cate"};
  std::string cate_column = "mage";
  std::vector<double> cate_values;  // empty: every observed value
  double shrink_alpha = 0.0;
  std::size_t shrink_points = 0;
  double propensity_clip = 1e-3;
  double positivity_eps = 0.01;
  bool export_models = false;
  bool dump_trials = false;

  // Not part of the embedded config: results do not depend on them.
  std::filesystem::path base_dir;
  std::filesystem::path out = "out";
  unsigned threads = 1;

  static RunConfig from_json_text(const std::string& text,
                                  std::filesystem::path base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  // Canonical JSON of every field that affects results.
  std::string to_json_text() const;
  // Throws UsageError.
  void validate() const;
  std::filesystem::path resolve(const std::string& path) const;
  TreePriorConfig prior() const;
  std::size_t method_index(const std::string& method) const;
};

}  // namespace tte::cli

#endif  // TTE_CLI_RUN_CONFIG_HPP_
