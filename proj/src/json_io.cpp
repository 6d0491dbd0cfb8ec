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

#include "smeval/json_io.hpp"

#include <fstream>
#include <sstream>

#include "smeval/error.hpp"

namespace smeval {

void to_json(Json& j, const DesignCoordinates& c) {
  j = Json{{"scenario", c.scenario},
           {"context", to_string(c.context)},
           {"form", to_string(c.form)},
           {"attribute", to_string(c.attribute)}};
}

void from_json(const Json& j, DesignCoordinates& c) {
  c.scenario = j.at("scenario").get<std::string>();
  c.context = parse_context(j.at("context").get<std::string>());
  c.form = parse_form(j.at("form").get<std::string>());
  c.attribute = parse_attribute(j.at("attribute").get<std::string>());
}

void to_json(Json& j, const RatingRecord& r) {
  j = Json{{"rater_id", r.rater_id},
           {"scenario", r.coords.scenario},
           {"context", to_string(r.coords.context)},
           {"form", to_string(r.coords.form)},
           {"attribute", to_string(r.coords.attribute)},
           {"rating", r.rating},
           {"source", to_string(r.source)}};
}

void from_json(const Json& j, RatingRecord& r) {
  r.rater_id = j.at("rater_id").get<std::string>();
  from_json(j, r.coords);
  r.rating = j.at("rating").get<int>();
  r.source = parse_source(j.at("source").get<std::string>());
}

void to_json(Json& j, const CellKey& k) {
  j = Json{{"attribute", to_string(k.attribute)},
           {"context", to_string(k.context)},
           {"form", to_string(k.form)}};
}

void from_json(const Json& j, CellKey& k) {
  k.attribute = parse_attribute(j.at("attribute").get<std::string>());
  k.context = parse_context(j.at("context").get<std::string>());
  k.form = parse_form(j.at("form").get<std::string>());
}

void to_json(Json& j, const MeansTable& t) {
  Json cells = Json::array();
  for (const auto& [key, stat] : t.cells) {
    Json c = key;
    c["mean"] = stat.mean;
    c["count"] = stat.count;
    cells.push_back(std::move(c));
  }
  j = Json{{"cells", std::move(cells)}, {"invalid_cells", t.invalid_cells}};
}

void from_json(const Json& j, MeansTable& t) {
  t = MeansTable{};
  for (const auto& c : j.at("cells")) {
    CellKey key = c.get<CellKey>();
    t.cells[key] = CellStat{c.at("mean").get<double>(),
                            c.value("count", std::size_t{0})};
  }
  if (j.contains("invalid_cells")) {
    t.invalid_cells = j.at("invalid_cells").get<std::vector<CellKey>>();
  }
}

void to_json(Json& j, const EffectSpec& s) {
  j = Json{{"kind", to_string(s.kind)},
           {"attribute", to_string(s.attribute)},
           {"expected_sign", s.expected_sign}};
}

void from_json(const Json& j, EffectSpec& s) {
  s.kind = parse_effect_kind(j.at("kind").get<std::string>());
  s.attribute = parse_attribute(j.at("attribute").get<std::string>());
  s.expected_sign = j.at("expected_sign").get<int>();
  if (s.expected_sign != 1 && s.expected_sign != -1) {
    throw ConfigError("expected_sign must be +1 or -1");
  }
}

void to_json(Json& j, const EffectEstimate& e) {
  j = e.spec;
  j["delta"] = e.delta;
  if (e.per_context_deltas) {
    j["delta_hp"] = e.per_context_deltas->first;
    j["delta_lp"] = e.per_context_deltas->second;
  }
}

void from_json(const Json& j, EffectEstimate& e) {
  e.spec = j.get<EffectSpec>();
  e.delta = j.at("delta").get<double>();
  if (j.contains("delta_hp")) {
    e.per_context_deltas = std::make_pair(j.at("delta_hp").get<double>(),
                                          j.at("delta_lp").get<double>());
  } else {
    e.per_context_deltas.reset();
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace smeval
