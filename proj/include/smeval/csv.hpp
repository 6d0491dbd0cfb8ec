/*
 * Copyright 2026 The smeval Authors.
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

#ifndef SMEVAL_CSV_HPP_
#define SMEVAL_CSV_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smeval {

struct CsvRow {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

// RFC 4180 style: quoted fields may contain the delimiter, doubled quotes
// and newlines. A UTF-8 BOM on the first line is dropped. Blank lines are
// skipped. Throws ConfigError on an unterminated quote or missing header.
CsvTable parse_csv(std::string_view text, char delimiter = ',');
CsvTable read_csv(const std::filesystem::path& path, char delimiter = ',');

// Quotes the field when it contains the delimiter, a quote or a newline.
std::string csv_field(std::string_view value, char delimiter = ',');
std::string csv_line(const std::vector<std::string>& fields,
                     char delimiter = ',');

}  // namespace smeval

#endif  // SMEVAL_CSV_HPP_
