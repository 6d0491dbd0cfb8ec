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

#include "smeval/promptgen.hpp"

#include <algorithm>
#include <cctype>

#include "smeval/error.hpp"
#include "smeval/hash.hpp"

namespace smeval {

namespace {

std::string substitute(std::string_view tmpl, std::string_view slot,
                       std::string_view value) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = tmpl.find(slot, pos);
    if (hit == std::string_view::npos) break;
    out.append(tmpl.substr(pos, hit - pos));
    out.append(value);
    pos = hit + slot.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::string required_string(const Json& j, const char* key,
                            std::string_view where) {
  if (!j.contains(key) || !j.at(key).is_string() ||
      j.at(key).get<std::string>().empty()) {
    throw ConfigError(std::string(where) + ": missing field '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

ContextSetup setup_from_json(const Json& j, std::string_view where) {
  return ContextSetup{required_string(j, "asker", where),
                      required_string(j, "description", where),
                      required_string(j, "question", where)};
}

std::string quote(std::string_view label, std::string_view utterance) {
  std::string out(label);
  out += ": \"";
  out += utterance;
  out += '"';
  return out;
}

std::string situation_block(const PromptTemplates& t,
                            const ScenarioDefinition& s,
                            const DesignCoordinates& c) {
  const ContextSetup& setup = s.setup(c.context);
  return t.situation_header + "\n" + setup.description + "\n" +
         quote(setup.asker, setup.question) + "\n" +
         quote(s.speaker_name, s.answer(c.form));
}

std::string scale_block(const PromptTemplates& t, const AttributeQuestion& q) {
  return t.scale_intro + "\n1 = " + q.low_anchor + "\n7 = " + q.high_anchor;
}

std::string task_block(const PromptTemplates& t, const ScenarioDefinition& s,
                       const AttributeQuestion& q, bool knowledge_motives) {
  std::string out = t.task_header + "\n" +
                    substitute(q.question_template, "{speaker}",
                               s.speaker_name) +
                    "\n\n";
  if (knowledge_motives) {
    out += t.kma_instructions + "\n\n";
    out += substitute(q.turn_template, "{speaker}", s.speaker_name) + "\n\n";
  }
  out += scale_block(t, q) + "\n\n" + t.answer_instruction;
  return out;
}

}  // namespace

std::string_view to_string(PromptCondition c) {
  switch (c) {
    case PromptCondition::kMIN: return "MIN";
    case PromptCondition::kALT: return "ALT";
    case PromptCondition::kKMA: return "KMA";
    case PromptCondition::kCOM: return "COM";
  }
  return "?";
}

PromptCondition parse_condition(std::string_view s) {
  std::string upper(s);
  for (char& ch : upper) {
    ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  }
  for (PromptCondition c : kAllConditions) {
    if (to_string(c) == upper) return c;
  }
  throw ConfigError("unknown prompting condition '" + std::string(s) + "'");
}

void validate_scenario(const ScenarioDefinition& s) {
  const std::string where = "scenario '" + s.id + "'";
  if (s.id.empty()) throw ConfigError("scenario without id");
  if (s.speaker_name.empty() || s.approximator.empty() ||
      s.answer_precise.empty() || s.answer_approximate.empty()) {
    throw ConfigError(where + ": empty required field");
  }
  const std::string insert = s.approximator + " ";
  auto pos = s.answer_approximate.find(insert);
  bool ok = pos != std::string::npos &&
            s.answer_approximate.substr(0, pos) +
                    s.answer_approximate.substr(pos + insert.size()) ==
                s.answer_precise;
  if (!ok) {
    throw ConfigError(where +
                      ": approximate answer must equal the precise answer "
                      "with '" + s.approximator + "' inserted");
  }
}

ScenarioDefinition scenario_from_json(const Json& j) {
  const std::string id = j.value("id", std::string{});
  const std::string where = "scenario '" + id + "'";
  if (!j.contains("hp") || !j.contains("lp")) {
    throw ConfigError(where + ": needs 'hp' and 'lp' blocks");
  }
  ScenarioDefinition s;
  s.id = required_string(j, "id", where);
  s.speaker_name = required_string(j, "speaker_name", where);
  s.approximator = required_string(j, "approximator", where);
  s.hp = setup_from_json(j.at("hp"), where + " hp");
  s.lp = setup_from_json(j.at("lp"), where + " lp");
  s.answer_precise = required_string(j, "answer_precise", where);
  s.answer_approximate = required_string(j, "answer_approximate", where);
  validate_scenario(s);
  return s;
}

void to_json(Json& j, const PromptInstance& p) {
  j = Json{{"scenario", p.coords.scenario},
           {"context", to_string(p.coords.context)},
           {"form", to_string(p.coords.form)},
           {"attribute", to_string(p.coords.attribute)},
           {"condition", to_string(p.condition)},
           {"template_version", p.template_version},
           {"text", p.text}};
}

void from_json(const Json& j, PromptInstance& p) {
  p.coords = j.get<DesignCoordinates>();
  p.condition = parse_condition(j.at("condition").get<std::string>());
  p.template_version = j.at("template_version").get<std::string>();
  p.text = j.at("text").get<std::string>();
}

PromptInstance render_prompt(const PromptTemplates& templates,
                             const ScenarioDefinition& scenario,
                             const DesignCoordinates& coords,
                             PromptCondition condition,
                             const AttributeQuestion& attr_q,
                             std::string_view template_version) {
  if (scenario.id != coords.scenario) {
    throw ConfigError("scenario '" + scenario.id +
                      "' does not match coordinates " + to_string(coords));
  }
  if (attr_q.attribute != coords.attribute) {
    throw ConfigError("attribute question for '" +
                      std::string(to_string(attr_q.attribute)) +
                      "' does not match coordinates " + to_string(coords));
  }
  const bool exemplar = condition == PromptCondition::kALT ||
                        condition == PromptCondition::kCOM;
  const bool knowledge_motives = condition == PromptCondition::kKMA ||
                                 condition == PromptCondition::kCOM;

  std::string text = templates.task_description + "\n\n";
  if (exemplar) text += templates.alt_exemplar + "\n\n";
  text += situation_block(templates, scenario, coords) + "\n\n";
  text += task_block(templates, scenario, attr_q, knowledge_motives);

  return PromptInstance{coords, condition, std::move(text),
                        std::string(template_version)};
}

std::vector<std::string> PromptSet::scenario_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, s] : scenarios) ids.push_back(id);
  return ids;
}

std::string hash_template_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::vector<std::string> rel;
  for (const auto& f : files) {
    rel.push_back(std::filesystem::relative(f, dir).generic_string());
  }
  std::sort(rel.begin(), rel.end());
  std::string material;
  for (const auto& r : rel) {
    std::string content = read_text_file(dir / r);
    material += r;
    material += '\0';
    material += std::to_string(content.size());
    material += '\0';
    material += content;
  }
  return sha256_hex(material).substr(0, 16);
}

PromptSet load_prompt_set(const std::filesystem::path& dir) {
  PromptSet set;
  try {
    const Json t = read_json_file(dir / "templates.json");
    const std::string where = (dir / "templates.json").string();
    set.templates.task_description =
        required_string(t, "task_description", where);
    set.templates.situation_header =
        required_string(t, "situation_header", where);
    set.templates.task_header = required_string(t, "task_header", where);
    set.templates.scale_intro = required_string(t, "scale_intro", where);
    set.templates.answer_instruction =
        required_string(t, "answer_instruction", where);
    set.templates.alt_exemplar = required_string(t, "alt_exemplar", where);
    set.templates.kma_instructions =
        required_string(t, "kma_instructions", where);

    const Json a = read_json_file(dir / "attributes.json");
    for (const auto& q : a.at("attributes")) {
      AttributeQuestion aq;
      aq.attribute = parse_attribute(q.at("attribute").get<std::string>());
      const std::string w = "attribute '" +
                            std::string(to_string(aq.attribute)) + "'";
      aq.question_template = required_string(q, "question_template", w);
      aq.turn_template = required_string(q, "turn_template", w);
      aq.low_anchor = required_string(q, "low_anchor", w);
      aq.high_anchor = required_string(q, "high_anchor", w);
      const std::string adj(adjective(aq.attribute));
      if (aq.low_anchor.find(adj) == std::string::npos ||
          aq.high_anchor.find(adj) == std::string::npos) {
        throw ConfigError(w + ": scale anchors must contain '" + adj + "'");
      }
      if (!set.attributes.emplace(aq.attribute, aq).second) {
        throw ConfigError(w + " defined twice");
      }
    }

    const auto scenario_dir = dir / "scenarios";
    if (std::filesystem::is_directory(scenario_dir)) {
      for (const auto& entry :
           std::filesystem::directory_iterator(scenario_dir)) {
        if (entry.path().extension() != ".json") continue;
        ScenarioDefinition s = scenario_from_json(read_json_file(entry.path()));
        if (set.scenarios.contains(s.id)) {
          throw ConfigError("scenario '" + s.id + "' defined twice");
        }
        set.scenarios.emplace(s.id, std::move(s));
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(dir.string() + ": " + e.what());
  }
  if (set.scenarios.empty()) {
    throw ConfigError(dir.string() + ": no scenario files under scenarios/");
  }
  set.template_version = hash_template_files(dir);
  return set;
}

std::vector<PromptInstance> build_plan(
    const PromptSet& set, std::span<const std::string> scenario_ids,
    std::span<const PromptCondition> conditions) {
  if (conditions.empty()) throw ConfigError("no prompting conditions selected");
  std::string missing;
  for (const auto& id : scenario_ids) {
    if (!set.scenarios.contains(id)) missing += " scenario '" + id + "'";
  }
  for (Attribute a : kAllAttributes) {
    if (!set.attributes.contains(a)) {
      missing += " attribute '" + std::string(to_string(a)) + "'";
    }
  }
  if (!missing.empty()) throw ConfigError("missing definitions:" + missing);

  std::vector<PromptInstance> plan;
  plan.reserve(scenario_ids.size() * 24 * conditions.size());
  for (const auto& coords : full_design(scenario_ids)) {
    const auto& scenario = set.scenarios.at(coords.scenario);
    const auto& q = set.attributes.at(coords.attribute);
    for (PromptCondition c : conditions) {
      plan.push_back(render_prompt(set.templates, scenario, coords, c, q,
                                   set.template_version));
    }
  }
  return plan;
}

std::string to_jsonl(std::span<const PromptInstance> plan) {
  std::string out;
  for (const auto& p : plan) {
    out += Json(p).dump();
    out += '\n';
  }
  return out;
}

std::vector<PromptInstance> plan_from_jsonl(std::string_view text) {
  std::vector<PromptInstance> plan;
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (row.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      plan.push_back(Json::parse(row).get<PromptInstance>());
    } catch (const Json::exception& e) {
      throw ConfigError("plan line " + std::to_string(line) + ": " + e.what());
    }
  }
  return plan;
}

}  // namespace smeval
