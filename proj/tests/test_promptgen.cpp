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

#include <gtest/gtest.h>

#include <set>

#include "prompt_text.hpp"
#include "smeval/error.hpp"
#include "smeval/promptgen.hpp"
#include "test_support.hpp"

namespace smeval {
namespace {

using testing::TempDir;

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

const PromptSet& shipped() {
  static const PromptSet set =
      load_prompt_set(std::filesystem::path(SMEVAL_DATA_DIR) / "prompts");
  return set;
}

PromptInstance render(Context c, Form f, Attribute a, PromptCondition cond) {
  const auto& set = shipped();
  return render_prompt(set.templates, set.scenarios.at("bicycle"),
                       DesignCoordinates{"bicycle", c, f, a}, cond,
                       set.attributes.at(a), set.template_version);
}

TEST(Promptgen, MinimalPromptIsExact) {
  auto p = render(Context::kHP, Form::kApproximate, Attribute::kCompetent,
                  PromptCondition::kMIN);
  EXPECT_EQ(p.text, testing::kMinimalCompetentPrompt);
}

TEST(Promptgen, PreciseFormUsesThePreciseUtterance) {
  auto p = render(Context::kHP, Form::kPrecise, Attribute::kCompetent,
                  PromptCondition::kMIN);
  EXPECT_NE(p.text.find("Jamie: \"The bicycle cost $500.\""),
            std::string::npos);
  EXPECT_EQ(p.text.find("about $500"), std::string::npos);
}

TEST(Promptgen, AltInsertsTheExemplarOnceBeforeTheSituation) {
  auto p = render(Context::kHP, Form::kApproximate, Attribute::kCompetent,
                  PromptCondition::kALT);
  EXPECT_EQ(count_of(p.text, testing::kAltExemplar), 1u);
  EXPECT_EQ(count_of(p.text, "**Example answer:** 6"), 1u);
  EXPECT_LT(p.text.find("**Task description:**"),
            p.text.find("**Example situation:**"));
  EXPECT_LT(p.text.find("**Now the actual task**"),
            p.text.find("**Task situation:**"));
  EXPECT_EQ(p.text.find("Before you answer"), std::string::npos);
}

TEST(Promptgen, KmaReplacesTheTaskBlock) {
  auto p = render(Context::kHP, Form::kApproximate, Attribute::kCompetent,
                  PromptCondition::kKMA);
  EXPECT_TRUE(p.text.ends_with(testing::kKmaCompetentTaskBlock));
  EXPECT_EQ(p.text.find("**Example situation:**"), std::string::npos);
}

TEST(Promptgen, ComCombinesBothBlocks) {
  auto p = render(Context::kHP, Form::kApproximate, Attribute::kCompetent,
                  PromptCondition::kCOM);
  EXPECT_EQ(count_of(p.text, testing::kAltExemplar), 1u);
  EXPECT_TRUE(p.text.ends_with(testing::kKmaCompetentTaskBlock));
}

TEST(Promptgen, QuestionUsesTheAttributeAdjective) {
  for (auto a : kAllAttributes) {
    auto p = render(Context::kLP, Form::kPrecise, a, PromptCondition::kMIN);
    const std::string adj(adjective(a));
    EXPECT_NE(p.text.find("how " + adj + " does Jamie sound?"),
              std::string::npos);
    EXPECT_NE(p.text.find("1 = not at all " + adj + "\n7 = very " + adj),
              std::string::npos);
  }
}

TEST(Promptgen, ContextsDifferInTheSituationOnly) {
  auto hp = render(Context::kHP, Form::kPrecise, Attribute::kHelpful,
                   PromptCondition::kMIN);
  auto lp = render(Context::kLP, Form::kPrecise, Attribute::kHelpful,
                   PromptCondition::kMIN);
  EXPECT_NE(hp.text, lp.text);
  EXPECT_NE(hp.text.find("Insurance agent:"), std::string::npos);
  EXPECT_EQ(lp.text.find("Insurance agent:"), std::string::npos);
}

TEST(Promptgen, MismatchedInputsAreRejected) {
  const auto& set = shipped();
  EXPECT_THROW(render_prompt(set.templates, set.scenarios.at("bicycle"),
                             {"other", Context::kHP, Form::kPrecise,
                              Attribute::kCompetent},
                             PromptCondition::kMIN,
                             set.attributes.at(Attribute::kCompetent), "v"),
               ConfigError);
  EXPECT_THROW(render_prompt(set.templates, set.scenarios.at("bicycle"),
                             {"bicycle", Context::kHP, Form::kPrecise,
                              Attribute::kHelpful},
                             PromptCondition::kMIN,
                             set.attributes.at(Attribute::kCompetent), "v"),
               ConfigError);
}

TEST(Promptgen, ScenarioApproximatorMustBeInserted) {
  ScenarioDefinition s = shipped().scenarios.at("bicycle");
  s.answer_approximate = "The bike cost about $500.";
  EXPECT_THROW(validate_scenario(s), ConfigError);
}

TEST(Promptgen, PlanCountsAndOrder) {
  std::vector<std::string> one = {"bicycle"};
  std::vector<PromptCondition> min = {PromptCondition::kMIN};
  auto p1 = build_plan(shipped(), one, min);
  EXPECT_EQ(p1.size(), 24u);

  TempDir tmp;
  auto set6 = load_prompt_set(testing::prompt_dir_with_scenarios(tmp, 6));
  auto ids = testing::scenario_ids(6);
  auto plan = build_plan(set6, ids, kAllConditions);
  ASSERT_EQ(plan.size(), 576u);
  std::set<std::pair<DesignCoordinates, PromptCondition>> seen;
  for (const auto& p : plan) seen.insert({p.coords, p.condition});
  EXPECT_EQ(seen.size(), 576u);
  EXPECT_EQ(plan[0].condition, PromptCondition::kMIN);
  EXPECT_EQ(plan[1].condition, PromptCondition::kALT);
  EXPECT_EQ(plan[0].coords, plan[3].coords);
  EXPECT_EQ(plan[96].coords.scenario, ids[1]);
}

TEST(Promptgen, UnknownScenarioIsNamed) {
  std::vector<std::string> ids = {"bicycle", "missing_one"};
  std::vector<PromptCondition> min = {PromptCondition::kMIN};
  try {
    build_plan(shipped(), ids, min);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("missing_one"), std::string::npos);
  }
}

TEST(Promptgen, JsonlRoundTrip) {
  std::vector<std::string> one = {"bicycle"};
  auto plan = build_plan(shipped(), one, kAllConditions);
  EXPECT_EQ(plan_from_jsonl(to_jsonl(plan)), plan);
}

TEST(Promptgen, TemplateVersionTracksFileContent) {
  TempDir tmp;
  auto dir = testing::prompt_dir_with_scenarios(tmp, 1);
  const auto v1 = hash_template_files(dir);
  EXPECT_EQ(v1, shipped().template_version);
  Json t = read_json_file(dir / "templates.json");
  t["scale_intro"] = "Use a seven-point scale:";
  write_json_file(dir / "templates.json", t);
  EXPECT_NE(hash_template_files(dir), v1);
}

TEST(Promptgen, AnchorsMustNameTheAttribute) {
  TempDir tmp;
  auto dir = testing::prompt_dir_with_scenarios(tmp, 1);
  Json a = read_json_file(dir / "attributes.json");
  a["attributes"][0]["high_anchor"] = "very confident";
  write_json_file(dir / "attributes.json", a);
  EXPECT_THROW(load_prompt_set(dir), ConfigError);
}

TEST(Promptgen, ConditionParsing) {
  EXPECT_EQ(parse_condition("kma"), PromptCondition::kKMA);
  EXPECT_EQ(to_string(PromptCondition::kCOM), "COM");
  EXPECT_THROW(parse_condition("XYZ"), ConfigError);
}

}  // namespace
}  // namespace smeval
