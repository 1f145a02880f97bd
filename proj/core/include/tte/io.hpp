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

// Small text-format helpers shared by the data, export and CLI layers.

#ifndef TTE_IO_HPP_
#define TTE_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tte::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated UTF-8 file with a header row. Double-quoted
// fields may contain commas and doubled quotes. A leading BOM and CR line
// endings are tolerated.
CsvTable read_csv(const std::filesystem::path& path);

CsvTable parse_csv(std::string_view text);

// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`, so readers never
// see a partial artifact.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace tte::io

#endif  // TTE_IO_HPP_
