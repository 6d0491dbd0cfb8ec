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

// JSON encodings of the domain types. Enums use their canonical strings;
// doubles are written with round-trip precision.

#ifndef SMEVAL_JSON_IO_HPP_
#define SMEVAL_JSON_IO_HPP_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "smeval/design.hpp"

namespace smeval {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const DesignCoordinates& c);
void from_json(const Json& j, DesignCoordinates& c);
void to_json(Json& j, const RatingRecord& r);
void from_json(const Json& j, RatingRecord& r);
void to_json(Json& j, const CellKey& k);
void from_json(const Json& j, CellKey& k);
void to_json(Json& j, const MeansTable& t);
void from_json(const Json& j, MeansTable& t);
void to_json(Json& j, const EffectSpec& s);
void from_json(const Json& j, EffectSpec& s);
void to_json(Json& j, const EffectEstimate& e);
void from_json(const Json& j, EffectEstimate& e);

// File helpers. Parse errors and missing files raise ConfigError with the
// path in the message.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);
std::string read_text_file(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace smeval

#endif  // SMEVAL_JSON_IO_HPP_
