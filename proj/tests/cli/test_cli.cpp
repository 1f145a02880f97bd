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

#include <sstream>

#include "commands.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "synthetic.hpp"
#include "tte/data.hpp"
#include "tte/errors.hpp"

namespace tte::cli {
namespace {

CovariateSchema birthweight_schema() {
  return CovariateSchema::load(TTE_SOURCE_DIR "/config/cattaneo2_schema.json");
}

TEST(RunConfig, DefaultsValidateAndRoundTrip) {
  RunConfig c;
  c.input = "a.csv";
  c.schema = "s.json";
  EXPECT_NO_THROW(c.validate());
  const auto back = RunConfig::from_json_text(c.to_json_text());
  EXPECT_EQ(back.to_json_text(), c.to_json_text());
  EXPECT_EQ(c.methods, known_methods());
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(RunConfig::from_json_text("{\"inptu\": \"a\"}"), UsageError);
  EXPECT_THROW(RunConfig::from_json_text("{\"seed\": \"x\"}"), UsageError);
  EXPECT_THROW(RunConfig::from_json_text("not json"), UsageError);
  RunConfig c;
  c.input = "a.csv";
  c.schema = "s.json";
  auto bad = c;
  bad.methods = {"bart", "ols"};
  EXPECT_THROW(bad.validate(), UsageError);
  bad = c;
  bad.estimands = {};
  EXPECT_THROW(bad.validate(), UsageError);
  bad = c;
  bad.estimands = {"cate"};
  EXPECT_THROW(bad.validate(), UsageError);
  bad = c;
  bad.seed = 0;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = c;
  bad.replicates = 1;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = c;
  bad.mode = "batch";
  EXPECT_THROW(bad.validate(), UsageError);
}

TEST(RunConfig, RelativePathsResolveAgainstConfigDirectory) {
  const auto c = RunConfig::from_json_text("{\"input\": \"d/x.csv\"}", "/cfg");
  EXPECT_EQ(c.resolve(c.input), std::filesystem::path("/cfg/d/x.csv"));
  EXPECT_EQ(c.resolve("/abs.csv"), std::filesystem::path("/abs.csv"));
  EXPECT_EQ(c.method_index("marg-is"), 3u);
}

TEST(Synthetic, DeterministicAndIngestible) {
  const auto a = synthetic_birthweight_csv(300, 5);
  EXPECT_EQ(a, synthetic_birthweight_csv(300, 5));
  EXPECT_NE(a, synthetic_birthweight_csv(300, 6));
  const auto ds = ingest_csv_text(a, birthweight_schema());
  EXPECT_EQ(ds.report().rows_read, 300u);
  EXPECT_LT(ds.n(), 300u);
  EXPECT_GT(ds.n_treated(), 0u);
  EXPECT_GT(ds.n_control(), 0u);
}

RunConfig marginal_config() {
  RunConfig c;
  c.input = "unused.csv";
  c.schema = "unused.json";
  c.methods = {"marg-obs", "marg-is"};
  c.estimands = {"ate"};
  c.replicates = 200;
  c.seed = 3;
  c.mcmc.burn_in = 100;
  c.mcmc.draws = 100;
  c.num_trees = 20;
  return c;
}

TEST(Analysis, MarginalMethodsShareFitAndMatchAnalyticMean) {
  const auto ds = ingest_csv_text(synthetic_birthweight_csv(600, 9),
                                  birthweight_schema());
  const auto c = marginal_config();
  const auto out = run_analysis(c, ds);
  ASSERT_EQ(out.methods.size(), 2u);
  ASSERT_TRUE(out.pi_hat.has_value());
  EXPECT_EQ(out.pi_hat->size(), ds.n());
  EXPECT_DOUBLE_EQ(out.ess_observed->total(), static_cast<double>(ds.n()));
  EXPECT_LE(out.ess_importance->total(), out.ess_observed->total());
  // Both ESS modes share the Hajek mean.
  EXPECT_NEAR(*out.methods[0].analytic_mean, *out.methods[1].analytic_mean,
              1e-9);
  for (const auto& m : out.methods) {
    EXPECT_EQ(m.ate.draws.size(), 200u);
    EXPECT_NEAR(m.ate.mean, *m.analytic_mean, 4 * m.ate.sd / std::sqrt(200.0));
  }
  // The importance-sampling posterior is wider.
  EXPECT_GT(out.methods[1].ate.sd, out.methods[0].ate.sd);
}

TEST(Analysis, ArtifactsAreDeterministicAcrossThreads) {
  const auto ds = ingest_csv_text(synthetic_birthweight_csv(400, 2),
                                  birthweight_schema());
  auto c = marginal_config();
  c.methods = {"bart", "marg-obs"};
  c.estimands = {"ate", "cate"};
  c.cate_values = {25, 30};
  c.threads = 1;
  const auto a = render_artifacts(c, ds, run_analysis(c, ds));
  c.threads = 4;
  const auto b = render_artifacts(c, ds, run_analysis(c, ds));
  EXPECT_EQ(a, b);
  for (const char* f : {"summary.json", "ate_summary.csv", "ate_draws.csv",
                        "cate.csv", "inclusion.csv", "weights.csv", "run.log"}) {
    EXPECT_TRUE(a.count(f)) << f;
  }
  const auto j = nlohmann::json::parse(a.at("summary.json"));
  EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 3u);
  EXPECT_EQ(j.at("config").dump(), nlohmann::json::parse(c.to_json_text()).dump());
  EXPECT_NE(a.at("run.log").find("seed=3"), std::string::npos);
}

TEST(Analysis, SequentialModeRunsBothFamilies) {
  const auto ds = ingest_csv_text(synthetic_birthweight_csv(300, 4),
                                  birthweight_schema());
  auto c = marginal_config();
  c.methods = {"bart-cc", "marg-obs"};
  c.mode = "sequential";
  c.horizon = ds.n() + 300;
  c.replicates = 20;
  c.dump_trials = true;
  const auto out = run_analysis(c, ds);
  EXPECT_EQ(out.methods[0].ate.draws.size(), 20u);
  EXPECT_TRUE(out.extra_files.count("trials_marg-obs.csv"));
  c.horizon = ds.n();
  EXPECT_THROW(run_analysis(c, ds), UsageError);
}

TEST(Check, SuitesAndJunit) {
  CheckOptions o;
  o.suite = "martingale";
  std::ostringstream console;
  EXPECT_EQ(cmd_check(o, console), kExitOk);
  EXPECT_NE(console.str().find("expected-fail: ok"), std::string::npos);
  const auto xml = junit_report("martingale", run_check_suite(o));
  EXPECT_NE(xml.find("failures=\"0\""), std::string::npos);
  o.suite = "bogus";
  EXPECT_THROW(run_check_suite(o), UsageError);
}

TEST(Check, FailedRecordIsReportedAsFailure) {
  verify::CheckRecord r;
  r.name = "x<y";
  r.passed = false;
  const auto xml = junit_report("s", {r});
  EXPECT_NE(xml.find("failures=\"1\""), std::string::npos);
  EXPECT_NE(xml.find("x&lt;y"), std::string::npos);
}

}  // namespace
}  // namespace tte::cli
