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

#ifndef TTE_CLI_COMMANDS_HPP_
#define TTE_CLI_COMMANDS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "tte/data.hpp"
#include "tte/ipw.hpp"
#include "tte/resampler.hpp"
#include "tte/trees.hpp"
#include "tte/verify.hpp"

namespace tte::cli {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct CateRow {
  double value = 0.0;
  std::size_t rows = 0;
  PosteriorSummary summary;
};

struct MethodResult {
  std::string method;
  PosteriorSummary ate;
  std::optional<double> analytic_mean;  // marginal methods
  std::optional<EssMode> ess_mode;      // marginal methods
  std::vector<CateRow> cate;            // tree methods
  std::optional<InclusionReport> inclusion;
};

struct AnalysisOutput {
  DatasetSummary dataset;
  IngestReport ingest;
  std::optional<std::vector<double>> pi_hat;
  std::size_t clipped = 0;
  std::optional<PositivityReport> positivity;
  std::optional<HajekWeightSet> weights;
  std::optional<EffectiveSampleSizes> ess_observed;
  std::optional<EffectiveSampleSizes> ess_importance;
  std::vector<MethodResult> methods;
  std::vector<std::string> warnings;
  // Extra files (model exports, diagnostics, trial dumps) by file name.
  std::map<std::string, std::string> extra_files;
};

// Fits and resamples per the config on an already ingested dataset.
AnalysisOutput run_analysis(const RunConfig& config,
                            const ObservationalDataset& ds);

// File name -> content for every artifact of an analysis.
std::map<std::string, std::string> render_artifacts(
    const RunConfig& config, const ObservationalDataset& ds,
    const AnalysisOutput& out);

// Ingest, analyse, write artifacts atomically into config.out.
int cmd_analyze(const RunConfig& config, std::ostream& console);

struct CheckOptions {
  std::string suite;
  std::uint64_t seed = 20240601;
  std::filesystem::path out;  // report directory; empty for none
  unsigned threads = 1;
  std::size_t worlds = 100;
  std::size_t reps = 200;
};

std::vector<verify::CheckRecord> run_check_suite(const CheckOptions& options);
std::string junit_report(const std::string& suite,
                         const std::vector<verify::CheckRecord>& records);
int cmd_check(const CheckOptions& options, std::ostream& console);

struct SimulateOptions {
  std::uint64_t seed = 20240601;
  std::filesystem::path out = "out";
  unsigned threads = 1;
  std::size_t reps = 200;
  std::vector<std::size_t> grid{250, 1000, 4000};
  std::size_t emit_dataset = 0;  // rows of synthetic data; 0 for none
};

int cmd_simulate(const SimulateOptions& options, std::ostream& console);

struct SummarizeOptions {
  std::filesystem::path input;
  std::filesystem::path schema;
  std::filesystem::path out;  // empty: print only
  bool apply_eligibility = true;
};

int cmd_summarize(const SummarizeOptions& options, std::ostream& console);

}  // namespace tte::cli

#endif  // TTE_CLI_COMMANDS_HPP_
