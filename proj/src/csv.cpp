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

#include "smeval/csv.hpp"

#include "smeval/error.hpp"
#include "smeval/json_io.hpp"

namespace smeval {

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable parse_csv(std::string_view text, char delimiter) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<CsvRow> rows;
  CsvRow current;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) rows.push_back(std::move(current));
    current = CsvRow{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    if (ch == '"' && field.empty() && !field_quoted) {
      in_quotes = true;
      field_quoted = true;
    } else if (ch == delimiter) {
      end_field();
    } else if (ch == '\r') {
      // swallowed; \r\n handled by the \n branch
    } else if (ch == '\n') {
      ++line;
      end_row();
    } else {
      field += ch;
    }
  }
  if (in_quotes) {
    throw ConfigError("unterminated quoted field starting near line " +
                      std::to_string(current.line));
  }
  if (!field.empty() || !current.fields.empty() || field_quoted) end_row();

  if (rows.empty()) throw ConfigError("CSV input has no header row");
  CsvTable table;
  table.header = std::move(rows.front().fields);
  table.rows.assign(std::make_move_iterator(rows.begin() + 1),
                    std::make_move_iterator(rows.end()));
  return table;
}

CsvTable read_csv(const std::filesystem::path& path, char delimiter) {
  try {
    return parse_csv(read_text_file(path), delimiter);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string csv_field(std::string_view value, char delimiter) {
  bool quote = value.find_first_of(std::string{'"', '\n', '\r', delimiter}) !=
               std::string_view::npos;
  if (!quote) return std::string(value);
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields, char delimiter) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += delimiter;
    out += csv_field(fields[i], delimiter);
  }
  out += '\n';
  return out;
}

}  // namespace smeval
