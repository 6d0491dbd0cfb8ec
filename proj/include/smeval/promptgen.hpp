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

// Prompt rendering for the four prompting conditions.
//
//   MIN  task description | task situation | task
//   ALT  task description | worked exemplar | task situation | task
//   KMA  task description | task situation | task with knowledge/motives
//        instructions
//   COM  ALT's exemplar and KMA's task block together
//
// All wording comes from data files (templates.json, attributes.json,
// scenarios/*.json); see data/prompts/README.md for the schema.

#ifndef SMEVAL_PROMPTGEN_HPP_
#define SMEVAL_PROMPTGEN_HPP_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smeval/design.hpp"
#include "smeval/json_io.hpp"

namespace smeval {

enum class PromptCondition { kMIN, kALT, kKMA, kCOM };

inline constexpr std::array<PromptCondition, 4> kAllConditions = {
    PromptCondition::kMIN, PromptCondition::kALT, PromptCondition::kKMA,
    PromptCondition::kCOM};

std::string_view to_string(PromptCondition c);  // "MIN", "ALT", ...
PromptCondition parse_condition(std::string_view s);  // case-insensitive

struct ContextSetup {
  std::string asker;        // label of the first speaker
  std::string description;  // situation text
  std::string question;     // first speaker's utterance
};

struct ScenarioDefinition {
  std::string id;
  std::string speaker_name;
  std::string approximator;  // e.g. "about"
  ContextSetup hp;
  ContextSetup lp;
  std::string answer_precise;
  std::string answer_approximate;

  const ContextSetup& setup(Context c) const {
    return c == Context::kHP ? hp : lp;
  }
  const std::string& answer(Form f) const {
    return f == Form::kPrecise ? answer_precise : answer_approximate;
  }
};

// Throws ConfigError when a field is empty or the two answers differ by
// more than the approximator.
void validate_scenario(const ScenarioDefinition& s);
ScenarioDefinition scenario_from_json(const Json& j);

// Slots: {speaker}.
struct AttributeQuestion {
  Attribute attribute = Attribute::kCompetent;
  std::string question_template;  // "Based on what {speaker} says, ..."
  std::string turn_template;      // "Now it's your turn: How ... ?"
  std::string low_anchor;         // "not at all competent"
  std::string high_anchor;        // "very competent"
};

// Fixed blocks shared by every scenario and attribute.
struct PromptTemplates {
  std::string task_description;
  std::string situation_header;
  std::string task_header;
  std::string scale_intro;
  std::string answer_instruction;
  std::string alt_exemplar;
  std::string kma_instructions;
};

struct PromptInstance {
  DesignCoordinates coords;
  PromptCondition condition = PromptCondition::kMIN;
  std::string text;
  std::string template_version;

  bool operator==(const PromptInstance&) const = default;
};

void to_json(Json& j, const PromptInstance& p);
void from_json(const Json& j, PromptInstance& p);

PromptInstance render_prompt(const PromptTemplates& templates,
                             const ScenarioDefinition& scenario,
                             const DesignCoordinates& coords,
                             PromptCondition condition,
                             const AttributeQuestion& attr_q,
                             std::string_view template_version);

// Everything under a prompt data directory.
struct PromptSet {
  PromptTemplates templates;
  std::map<Attribute, AttributeQuestion> attributes;
  std::map<std::string, ScenarioDefinition> scenarios;
  // Truncated SHA-256 over every template file (path + content).
  std::string template_version;

  std::vector<std::string> scenario_ids() const;
};

PromptSet load_prompt_set(const std::filesystem::path& dir);
std::string hash_template_files(const std::filesystem::path& dir);

// Cross product in (scenario, context, form, attribute, condition) order;
// scenarios follow `scenario_ids`. Throws ConfigError naming any scenario
// or attribute question that is not defined.
std::vector<PromptInstance> build_plan(
    const PromptSet& set, std::span<const std::string> scenario_ids,
    std::span<const PromptCondition> conditions);

std::string to_jsonl(std::span<const PromptInstance> plan);
std::vector<PromptInstance> plan_from_jsonl(std::string_view text);

}  // namespace smeval

#endif  // SMEVAL_PROMPTGEN_HPP_
