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

#include "tte/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tte/errors.hpp"
#include "tte/io.hpp"

namespace tte {

using nlohmann::json;

std::vector<std::string> CovariateSchema::covariate_columns() const {
  std::vector<std::string> cols = numeric_columns;
  cols.insert(cols.end(), binary_columns.begin(), binary_columns.end());
  return cols;
}

void CovariateSchema::validate() const {
  if (outcome_column.empty()) throw SchemaError("schema has no outcome column");
  if (treatment_column.empty()) {
    throw SchemaError("schema has no treatment column");
  }
  if (outcome_column == treatment_column) {
    throw SchemaError("outcome and treatment columns must differ");
  }
  std::set<std::string> seen;
  for (const auto& c : covariate_columns()) {
    if (c == outcome_column || c == treatment_column) {
      throw SchemaError("column '" + c +
                        "' is both a covariate and the outcome/treatment");
    }
    if (!seen.insert(c).second) {
      throw SchemaError("covariate column '" + c + "' listed twice");
    }
  }
}

CovariateSchema CovariateSchema::from_json_text(const std::string& text) {
  CovariateSchema s;
  try {
    const json j = json::parse(text);
    s.outcome_column = j.at("outcome_column").get<std::string>();
    s.treatment_column = j.at("treatment_column").get<std::string>();
    s.outcome_units = j.value("outcome_units", std::string{});
    s.numeric_columns =
        j.value("numeric_columns", std::vector<std::string>{});
    s.binary_columns = j.value("binary_columns", std::vector<std::string>{});
    const std::string recode = j.value("treatment_recode", std::string{"none"});
    if (recode == "invert") {
      s.treatment_recode = TreatmentRecode::kInvert;
    } else if (recode == "none") {
      s.treatment_recode = TreatmentRecode::kNone;
    } else {
      throw SchemaError("unknown treatment_recode '" + recode + "'");
    }
    if (j.contains("eligibility_filters")) {
      for (const auto& f : j.at("eligibility_filters")) {
        s.eligibility_filters.push_back(
            {f.at("column").get<std::string>(),
             f.at("allowed").get<std::vector<double>>()});
      }
    }
    if (j.contains("value_labels")) {
      s.value_labels = j.at("value_labels")
                           .get<std::map<std::string,
                                         std::map<std::string, double>>>();
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
  s.validate();
  return s;
}

CovariateSchema CovariateSchema::load(const std::filesystem::path& path) {
  return from_json_text(io::read_file(path));
}

std::string CovariateSchema::to_json_text() const {
  json j;
  j["outcome_column"] = outcome_column;
  j["outcome_units"] = outcome_units;
  j["treatment_column"] = treatment_column;
  j["treatment_recode"] =
      treatment_recode == TreatmentRecode::kInvert ? "invert" : "none";
  j["numeric_columns"] = numeric_columns;
  j["binary_columns"] = binary_columns;
  json filters = json::array();
  for (const auto& f : eligibility_filters) {
    filters.push_back({{"column", f.column}, {"allowed", f.allowed}});
  }
  j["eligibility_filters"] = filters;
  j["value_labels"] = value_labels;
  return j.dump(2);
}

ObservationalDataset::ObservationalDataset(CovariateSchema schema,
                                           std::vector<double> y,
                                           std::vector<int> t, Matrix x,
                                           Matrix filter_values,
                                           IngestReport report)
    : schema_(std::move(schema)),
      y_(std::move(y)),
      t_(std::move(t)),
      x_(std::move(x)),
      filter_values_(std::move(filter_values)),
      report_(report) {
  schema_.validate();
  if (y_.empty()) throw PositivityError("dataset has no eligible units");
  if (t_.size() != y_.size() || x_.rows() != y_.size()) {
    throw InputError("outcome, treatment and covariate row counts differ");
  }
  if (x_.cols() != schema_.covariate_columns().size()) {
    throw SchemaError("covariate matrix width does not match the schema");
  }
  for (double v : y_) {
    if (!std::isfinite(v)) throw InputError("non-finite outcome value");
  }
  for (double v : x_.data()) {
    if (!std::isfinite(v)) throw InputError("non-finite covariate value");
  }
  for (int v : t_) {
    if (v != 0 && v != 1) throw DomainError("treatment values must be 0 or 1");
  }
  const std::size_t first_binary = schema_.numeric_columns.size();
  for (std::size_t c = first_binary; c < x_.cols(); ++c) {
    for (std::size_t r = 0; r < x_.rows(); ++r) {
      const double v = x_(r, c);
      if (v != 0.0 && v != 1.0) {
        throw SchemaError("binary column '" +
                          schema_.binary_columns[c - first_binary] +
                          "' contains a value other than 0/1");
      }
    }
  }
  const std::size_t treated = n_treated();
  if (treated == 0 || treated == n()) {
    throw PositivityError(
        "empirical positivity fails: one treatment arm is empty");
  }
}

std::size_t ObservationalDataset::n_treated() const {
  return static_cast<std::size_t>(std::count(t_.begin(), t_.end(), 1));
}

bool operator==(const ObservationalDataset& a, const ObservationalDataset& b) {
  return a.schema_.to_json_text() == b.schema_.to_json_text() &&
         a.y_ == b.y_ && a.t_ == b.t_ && a.x_ == b.x_ &&
         a.filter_values_ == b.filter_values_;
}

std::size_t ObservationalDataset::covariate_index(
    const std::string& name) const {
  const auto cols = schema_.covariate_columns();
  const auto it = std::find(cols.begin(), cols.end(), name);
  if (it == cols.end()) {
    throw SchemaError("unknown covariate column '" + name + "'");
  }
  return static_cast<std::size_t>(it - cols.begin());
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_missing_token(const std::string& s) {
  if (s.empty() || s == "." || s == "NA") return true;
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return lower == "nan" || lower == "na";
}

// nullopt for a missing cell; ParseError for text that is not a number or a
// declared label.
std::optional<double> parse_cell(const std::string& raw,
                                 const std::string& column,
                                 const CovariateSchema& schema,
                                 std::size_t row) {
  const std::string cell = trim(raw);
  if (is_missing_token(cell)) return std::nullopt;
  if (const auto lab = schema.value_labels.find(column);
      lab != schema.value_labels.end()) {
    if (const auto hit = lab->second.find(cell); hit != lab->second.end()) {
      return hit->second;
    }
  }
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                         "': cannot parse '" + cell + "' as a number",
                     row);
  }
  return value;
}

}  // namespace

ObservationalDataset ingest_csv_text(const std::string& text,
                                     const CovariateSchema& schema,
                                     IngestOptions options) {
  schema.validate();
  const io::CsvTable table = io::parse_csv(text);

  auto find_column = [&](const std::string& name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      throw SchemaError("column '" + name + "' not found in input header");
    }
    return static_cast<std::size_t>(it - table.header.begin());
  };

  const std::size_t y_col = find_column(schema.outcome_column);
  const std::size_t t_col = find_column(schema.treatment_column);
  const auto cov_names = schema.covariate_columns();
  std::vector<std::size_t> cov_cols;
  for (const auto& c : cov_names) cov_cols.push_back(find_column(c));
  std::vector<std::size_t> filter_cols;
  for (const auto& f : schema.eligibility_filters) {
    filter_cols.push_back(find_column(f.column));
  }

  IngestReport report;
  std::vector<double> y;
  std::vector<int> t;
  Matrix x(0, cov_names.size());
  Matrix fvals(0, filter_cols.size());
  std::vector<double> cov_row(cov_names.size());
  std::vector<double> filter_row(filter_cols.size());

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& rec = table.rows[r];
    const std::size_t row_no = r + 1;
    ++report.rows_read;
    if (rec.size() != table.header.size()) {
      throw ParseError("row " + std::to_string(row_no) + " has " +
                           std::to_string(rec.size()) + " fields, header has " +
                           std::to_string(table.header.size()),
                       row_no);
    }

    bool missing = false;
    bool eligible = true;
    for (std::size_t f = 0; f < filter_cols.size(); ++f) {
      const auto& filt = schema.eligibility_filters[f];
      const auto v = parse_cell(rec[filter_cols[f]], filt.column, schema,
                                row_no);
      if (!v) {
        missing = true;
        continue;
      }
      filter_row[f] = *v;
      if (options.apply_eligibility &&
          std::find(filt.allowed.begin(), filt.allowed.end(), *v) ==
              filt.allowed.end()) {
        eligible = false;
      }
    }
    if (!eligible) {
      ++report.rows_ineligible;
      continue;
    }

    const auto yv = parse_cell(rec[y_col], schema.outcome_column, schema,
                               row_no);
    const auto tv = parse_cell(rec[t_col], schema.treatment_column, schema,
                               row_no);
    missing = missing || !yv || !tv;
    for (std::size_t c = 0; c < cov_cols.size(); ++c) {
      const auto v = parse_cell(rec[cov_cols[c]], cov_names[c], schema,
                                row_no);
      if (!v) {
        missing = true;
      } else {
        cov_row[c] = *v;
      }
    }
    if (missing) {
      ++report.rows_missing;
      continue;
    }

    double traw = *tv;
    if (traw != 0.0 && traw != 1.0) {
      throw DomainError("row " + std::to_string(row_no) +
                        ": treatment must be coded 0/1");
    }
    if (schema.treatment_recode == TreatmentRecode::kInvert) {
      traw = 1.0 - traw;
    }
    y.push_back(*yv);
    t.push_back(static_cast<int>(traw));
    x.append_row(cov_row);
    fvals.append_row(filter_row);
  }

  if (y.empty()) {
    throw PositivityError("no eligible rows with complete data (read " +
                          std::to_string(report.rows_read) + ")");
  }
  return ObservationalDataset(schema, std::move(y), std::move(t), std::move(x),
                              std::move(fvals), report);
}

ObservationalDataset ingest_csv(const std::filesystem::path& path,
                                const CovariateSchema& schema,
                                IngestOptions options) {
  return ingest_csv_text(io::read_file(path), schema, options);
}

std::string canonical_csv(const ObservationalDataset& ds) {
  const auto& s = ds.schema();
  std::ostringstream out;
  out << s.outcome_column << ',' << s.treatment_column;
  for (const auto& c : s.covariate_columns()) out << ',' << c;
  for (const auto& f : s.eligibility_filters) out << ',' << f.column;
  out << '\n';
  const bool invert = s.treatment_recode == TreatmentRecode::kInvert;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    out << io::format_number(ds.y()[i]) << ','
        << (invert ? 1 - ds.t()[i] : ds.t()[i]);
    for (double v : ds.x().row(i)) out << ',' << io::format_number(v);
    if (ds.filter_values().cols() > 0) {
      for (double v : ds.filter_values().row(i)) {
        out << ',' << io::format_number(v);
      }
    }
    out << '\n';
  }
  return out.str();
}

DatasetSummary summarize(const ObservationalDataset& ds) {
  DatasetSummary s;
  s.n = ds.n();
  double sum = 0.0, sum1 = 0.0, sum0 = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double y = ds.y()[i];
    sum += y;
    if (ds.t()[i] == 1) {
      sum1 += y;
      ++s.n_treated;
    } else {
      sum0 += y;
      ++s.n_control;
    }
  }
  s.mean_outcome = sum / static_cast<double>(s.n);
  s.mean_outcome_treated = sum1 / static_cast<double>(s.n_treated);
  s.mean_outcome_control = sum0 / static_cast<double>(s.n_control);
  const auto names = ds.schema().covariate_columns();
  for (std::size_t c = 0; c < names.size(); ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) acc += ds.x()(i, c);
    s.covariate_means.emplace_back(names[c], acc / static_cast<double>(s.n));
  }
  return s;
}

std::string DatasetSummary::to_json_text() const {
  json j;
  j["n"] = n;
  j["n_treated"] = n_treated;
  j["n_control"] = n_control;
  j["mean_outcome"] = mean_outcome;
  j["mean_outcome_treated"] = mean_outcome_treated;
  j["mean_outcome_control"] = mean_outcome_control;
  json cov = json::object();
  for (const auto& [name, value] : covariate_means) cov[name] = value;
  j["covariate_means"] = cov;
  return j.dump(2);
}

PositivityReport positivity_report(const ObservationalDataset& ds,
                                   std::span<const double> pi_hat,
                                   double eps) {
  if (pi_hat.size() != ds.n()) {
    throw InputError("propensity vector length differs from dataset size");
  }
  PositivityReport r;
  r.eps = eps;
  r.min_pi = 1.0;
  r.max_pi = 0.0;
  for (double p : pi_hat) {
    if (!(p > 0.0 && p < 1.0)) {
      throw DomainError("propensity outside the open interval (0, 1)");
    }
    r.min_pi = std::min(r.min_pi, p);
    r.max_pi = std::max(r.max_pi, p);
    if (p < eps) ++r.below_eps;
    if (p > 1.0 - eps) ++r.above_one_minus_eps;
  }
  return r;
}

}  // namespace tte
