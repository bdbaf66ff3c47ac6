/*
 * Copyright 2026 The rehabeval Authors.
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

// Small CSV helpers. Numbers are written in shortest round-trip form so that
// files are byte-stable and re-read bit-exactly.

#ifndef REHAB_CSV_HPP_
#define REHAB_CSV_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rehab::csv {

std::vector<std::string> split(std::string_view line, char delimiter = ',');

std::string_view trim(std::string_view s);

// Strict parse: the whole (trimmed) cell must be a finite number.
std::optional<double> parse_double(std::string_view cell);
std::optional<long long> parse_int(std::string_view cell);

std::string format_double(double value);

std::string join(const std::vector<std::string>& cells, char delimiter = ',');

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

// Reads a header + rows file. Blank lines are skipped; rows are not
// width-checked here.
Table read_table(const std::filesystem::path& path, char delimiter = ',');

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: creates parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace rehab::csv

#endif  // REHAB_CSV_HPP_
