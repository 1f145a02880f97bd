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

// Observational study ingestion: schema, eligibility filtering, treatment
// recoding and the empirical positivity checks every downstream model
// relies on.

#ifndef TTE_DATA_HPP_
#define TTE_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tte/matrix.hpp"

namespace tte {

struct EligibilityFilter {
  std::string column;
  std::vector<double> allowed;
};

enum class TreatmentRecode { kNone, kInvert };

struct CovariateSchema {
  std::vector<std::string> numeric_columns;
  std::vector<std::string> binary_columns;
  std::string treatment_column;
  std::string outcome_column;
  std::string outcome_units;
  std::vector<EligibilityFilter> eligibility_filters;
  TreatmentRecode treatment_recode = TreatmentRecode::kNone;
  // Optional text labels per column (e.g. "smoker" -> 1) for files exported
  // with value labels instead of numeric codes.
  std::map<std::string, std::map<std::string, double>> value_labels;

  // Numeric columns followed by binary columns; this is the column order of
  // ObservationalDataset::x().
  std::vector<std::string> covariate_columns() const;

  // Throws SchemaError if treatment/outcome overlap the covariates or a
  // column is listed twice.
  void validate() const;

  static CovariateSchema from_json_text(const std::string& text);
  static CovariateSchema load(const std::filesystem::path& path);
  std::string to_json_text() const;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_ineligible = 0;
  std::size_t rows_missing = 0;  // dropped for a missing required field
};

class ObservationalDataset {
 public:
  // Validates every invariant; throws PositivityError / DomainError /
  // SchemaError on violation.
  ObservationalDataset(CovariateSchema schema, std::vector<double> y,
                       std::vector<int> t, Matrix x,
                       Matrix filter_values = {}, IngestReport report = {});

  std::size_t n() const { return y_.size(); }
  std::size_t p() const { return x_.cols(); }
  std::span<const double> y() const { return y_; }
  std::span<const int> t() const { return t_; }
  const Matrix& x() const { return x_; }
  const CovariateSchema& schema() const { return schema_; }
  const IngestReport& report() const { return report_; }
  // Values of the eligibility-filter columns for surviving rows, in filter
  // order; kept so canonical re-emission round-trips.
  const Matrix& filter_values() const { return filter_values_; }

  std::size_t n_treated() const;
  std::size_t n_control() const { return n() - n_treated(); }

  // Index of a covariate column in x(); throws SchemaError if absent.
  std::size_t covariate_index(const std::string& name) const;

  // Equality of schema and data; the ingest report is provenance only.
  friend bool operator==(const ObservationalDataset& a,
                         const ObservationalDataset& b);

 private:
  CovariateSchema schema_;
  std::vector<double> y_;
  std::vector<int> t_;
  Matrix x_;
  Matrix filter_values_;
  IngestReport report_;
};

struct IngestOptions {
  bool apply_eligibility = true;
};

ObservationalDataset ingest_csv(const std::filesystem::path& path,
                                const CovariateSchema& schema,
                                IngestOptions options = {});

ObservationalDataset ingest_csv_text(const std::string& text,
                                     const CovariateSchema& schema,
                                     IngestOptions options = {});

// Canonical CSV: outcome, raw treatment, covariates, filter columns. Numbers
// are written in shortest round-trip form, so ingesting the output with the
// same schema reproduces the dataset exactly.
std::string canonical_csv(const ObservationalDataset& ds);

struct DatasetSummary {
  std::size_t n = 0;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  double mean_outcome = 0.0;
  double mean_outcome_treated = 0.0;
  double mean_outcome_control = 0.0;
  std::vector<std::pair<std::string, double>> covariate_means;

  std::string to_json_text() const;
};

DatasetSummary summarize(const ObservationalDataset& ds);

struct PositivityReport {
  double eps = 0.0;
  double min_pi = 0.0;
  double max_pi = 0.0;
  std::size_t below_eps = 0;          // pi < eps
  std::size_t above_one_minus_eps = 0;  // pi > 1 - eps
  std::size_t violations() const { return below_eps + above_one_minus_eps; }
};

// Throws DomainError if any pi lies outside (0, 1) and InputError on a
// length mismatch.
PositivityReport positivity_report(const ObservationalDataset& ds,
                                   std::span<const double> pi_hat,
                                   double eps);

}  // namespace tte

#endif  // TTE_DATA_HPP_
