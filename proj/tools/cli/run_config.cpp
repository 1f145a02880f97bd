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

#include "run_config.hpp"

#include <algorithm>

#include "json.hpp"
#include "tte/errors.hpp"
#include "tte/io.hpp"

namespace tte::cli {

using nlohmann::json;
using nlohmann::ordered_json;

RunConfig RunConfig::from_json_text(const std::string& text,
                                    std::filesystem::path base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  static const std::vector<std::string> allowed{
      "input",       "schema",          "methods",        "seed",
      "replicates",  "horizon",         "mode",           "mcmc",
      "num_trees",   "estimands",       "cate",           "shrinkage",
      "propensity_clip", "positivity_eps", "export_models", "dump_trials"};
  RunConfig c;
  c.base_dir = std::move(base_dir);
  try {
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw UsageError("unknown config key '" + key + "'");
      }
    }
    if (j.contains("input")) c.input = j["input"].get<std::string>();
    if (j.contains("schema")) c.schema = j["schema"].get<std::string>();
    if (j.contains("methods")) {
      c.methods = j["methods"].get<std::vector<std::string>>();
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("replicates")) c.replicates = j["replicates"].get<std::size_t>();
    if (j.contains("horizon")) c.horizon = j["horizon"].get<std::size_t>();
    if (j.contains("mode")) c.mode = j["mode"].get<std::string>();
    if (j.contains("mcmc")) {
      const auto& m = j["mcmc"];
      c.mcmc.burn_in = m.value("burn_in", c.mcmc.burn_in);
      c.mcmc.draws = m.value("draws", c.mcmc.draws);
      c.mcmc.thin = m.value("thin", c.mcmc.thin);
    }
    if (j.contains("num_trees")) c.num_trees = j["num_trees"].get<std::size_t>();
    if (j.contains("estimands")) {
      c.estimands = j["estimands"].get<std::vector<std::string>>();
    }
    if (j.contains("cate")) {
      c.cate_column = j["cate"].value("column", c.cate_column);
      c.cate_values = j["cate"].value("values", c.cate_values);
    }
    if (j.contains("shrinkage")) {
      c.shrink_alpha = j["shrinkage"].value("alpha", c.shrink_alpha);
      c.shrink_points = j["shrinkage"].value("points", c.shrink_points);
    }
    if (j.contains("propensity_clip")) {
      c.propensity_clip = j["propensity_clip"].get<double>();
    }
    if (j.contains("positivity_eps")) {
      c.positivity_eps = j["positivity_eps"].get<double>();
    }
    if (j.contains("export_models")) c.export_models = j["export_models"].get<bool>();
    if (j.contains("dump_trials")) c.dump_trials = j["dump_trials"].get<bool>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    throw UsageError(std::string("cannot read config: ") + e.what());
  }
  return from_json_text(text, path.parent_path());
}

std::string RunConfig::to_json_text() const {
  ordered_json j;
  j["input"] = input;
  j["schema"] = schema;
  j["methods"] = methods;
  j["seed"] = seed;
  j["replicates"] = replicates;
  j["horizon"] = horizon;
  j["mode"] = mode;
  j["mcmc"] = {{"burn_in", mcmc.burn_in}, {"draws", mcmc.draws}, {"thin", mcmc.thin}};
  j["num_trees"] = num_trees;
  j["estimands"] = estimands;
  j["cate"] = {{"column", cate_column}, {"values", cate_values}};
  j["shrinkage"] = {{"alpha", shrink_alpha}, {"points", shrink_points}};
  j["propensity_clip"] = propensity_clip;
  j["positivity_eps"] = positivity_eps;
  j["export_models"] = export_models;
  j["dump_trials"] = dump_trials;
  return j.dump();
}

void RunConfig::validate() const {
  if (input.empty()) throw UsageError("config needs an input path");
  if (schema.empty()) throw UsageError("config needs a schema path");
  if (methods.empty()) throw UsageError("no methods requested");
  for (const auto& m : methods) {
    const auto& k = known_methods();
    if (std::find(k.begin(), k.end(), m) == k.end()) {
      throw UsageError("unknown method '" + m +
                       "' (expected bart, bart-cc, marg-obs or marg-is)");
    }
  }
  if (seed == 0) throw UsageError("seed must be positive");
  if (replicates < 2) throw UsageError("replicates must be at least 2");
  if (mode != "direct" && mode != "sequential") {
    throw UsageError("mode must be 'direct' or 'sequential'");
  }
  if (mcmc.draws == 0 || mcmc.thin == 0) {
    throw UsageError("mcmc draws and thin must be positive");
  }
  if (num_trees == 0) throw UsageError("num_trees must be positive");
  if (estimands.empty()) throw UsageError("estimand list is empty");
  for (const auto& e : estimands) {
    if (e != "ate" && e != "cate") {
      throw UsageError("unknown estimand '" + e + "' (expected ate or cate)");
    }
  }
  if (std::find(estimands.begin(), estimands.end(), "ate") == estimands.end()) {
    throw UsageError("the ate estimand is required");
  }
  if (!(shrink_alpha >= 0.0)) throw UsageError("shrinkage alpha must be >= 0");
  if (!(propensity_clip > 0.0 && propensity_clip < 0.5)) {
    throw UsageError("propensity_clip must lie in (0, 0.5)");
  }
  if (!(positivity_eps > 0.0 && positivity_eps < 0.5)) {
    throw UsageError("positivity_eps must lie in (0, 0.5)");
  }
  if (threads == 0) throw UsageError("threads must be positive");
}

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

TreePriorConfig RunConfig::prior() const {
  TreePriorConfig p;
  p.num_trees = num_trees;
  return p;
}

std::size_t RunConfig::method_index(const std::string& method) const {
  const auto& k = known_methods();
  return static_cast<std::size_t>(std::find(k.begin(), k.end(), method) -
                                  k.begin());
}

}  // namespace tte::cli
