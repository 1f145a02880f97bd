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

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "run_config.hpp"
#include "tte/errors.hpp"
#include "tte/parallel.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tte::cli;
  CLI::App app{"Target trial emulation with martingale posteriors"};
  app.require_subcommand(1);
  app.fallthrough();

  unsigned threads = tte::default_threads();
  app.add_option("--threads", threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Fit, resample and report");
  std::string config_path, input, schema, methods, mode, out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t replicates = 0, horizon = 0;
  bool export_models = false, dump_trials = false;
  analyze->add_option("--config", config_path, "Run configuration JSON");
  analyze->add_option("--input", input, "Observational CSV");
  analyze->add_option("--schema", schema, "Covariate schema JSON");
  analyze->add_option("--method", methods,
                      "Comma list of bart, bart-cc, marg-obs, marg-is");
  analyze->add_option("--seed", seed, "Master seed");
  analyze->add_option("--replicates", replicates, "Posterior replicates B");
  analyze->add_option("--horizon", horizon, "Trial horizon N (sequential)");
  analyze->add_option("--mode", mode, "direct or sequential");
  analyze->add_option("--out", out_dir, "Output directory");
  analyze->add_flag("--export-models", export_models, "Write model JSON");
  analyze->add_flag("--dump-trials", dump_trials, "Write imputed trials");

  // check
  auto* check = app.add_subcommand("check", "Run a verification suite");
  CheckOptions check_opt;
  std::string check_out;
  check->add_option("--suite", check_opt.suite,
                    "oracles, martingale, contraction or equivalence")
      ->required();
  check->add_option("--seed", check_opt.seed, "Master seed");
  check->add_option("--reps", check_opt.reps, "Replicates per sample size");
  check->add_option("--worlds", check_opt.worlds, "Random discrete worlds");
  check->add_option("--out", check_out, "Directory for the JUnit report");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Contraction experiment");
  SimulateOptions sim_opt;
  simulate->add_option("--seed", sim_opt.seed, "Master seed");
  simulate->add_option("--reps", sim_opt.reps, "Replicates per sample size");
  simulate->add_option("--grid", sim_opt.grid, "Sample sizes");
  simulate->add_option("--out", sim_opt.out, "Output directory");
  simulate->add_option("--emit-dataset", sim_opt.emit_dataset,
                       "Also write a synthetic birthweight CSV with this many "
                       "rows");

  // summarize
  auto* summarize = app.add_subcommand("summarize", "Ingest and describe data");
  SummarizeOptions sum_opt;
  bool no_filter = false;
  summarize->add_option("--input", sum_opt.input, "Observational CSV")
      ->required();
  summarize->add_option("--schema", sum_opt.schema, "Covariate schema JSON")
      ->required();
  summarize->add_option("--out", sum_opt.out, "Output directory");
  summarize->add_flag("--no-filter", no_filter, "Skip eligibility filters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (analyze->parsed()) {
      RunConfig config;
      if (!config_path.empty()) config = RunConfig::load(config_path);
      if (!input.empty()) config.input = input;
      if (!schema.empty()) config.schema = schema;
      if (!methods.empty()) config.methods = split_list(methods);
      if (analyze->count("--seed") > 0) config.seed = seed;
      if (analyze->count("--replicates") > 0) config.replicates = replicates;
      if (analyze->count("--horizon") > 0) config.horizon = horizon;
      if (!mode.empty()) config.mode = mode;
      if (export_models) config.export_models = true;
      if (dump_trials) config.dump_trials = true;
      if (config.input.empty() || config.schema.empty()) {
        throw tte::UsageError("analyze needs --config or --input and --schema");
      }
      config.out = out_dir;
      config.threads = threads;
      return cmd_analyze(config, std::cout);
    }
    if (check->parsed()) {
      check_opt.threads = threads;
      check_opt.out = check_out;
      return cmd_check(check_opt, std::cout);
    }
    if (simulate->parsed()) {
      sim_opt.threads = threads;
      return cmd_simulate(sim_opt, std::cout);
    }
    if (summarize->parsed()) {
      sum_opt.apply_eligibility = !no_filter;
      return cmd_summarize(sum_opt, std::cout);
    }
  } catch (const tte::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const tte::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
