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

#include <map>
#include <random>
#include <set>

#include "smeval/csv.hpp"
#include "smeval/design.hpp"
#include "smeval/error.hpp"
#include "smeval/ingest.hpp"
#include "smeval/json_io.hpp"
#include "test_support.hpp"

namespace smeval {
namespace {

using testing::cell_centre;
using testing::synthetic_human;
using testing::TempDir;
using testing::to_canonical_csv;

// ---- design ----------------------------------------------------------------

TEST(Design, FullDesignSizesAndOrder) {
  std::vector<std::string> one = {"bicycle"};
  auto d1 = full_design(one);
  ASSERT_EQ(d1.size(), 24u);
  EXPECT_EQ(d1.front(), (DesignCoordinates{"bicycle", Context::kHP,
                                           Form::kPrecise,
                                           Attribute::kCompetent}));
  EXPECT_TRUE(std::find(d1.begin(), d1.end(),
                        DesignCoordinates{"bicycle", Context::kHP,
                                          Form::kApproximate,
                                          Attribute::kCompetent}) != d1.end());
  auto d6 = full_design(testing::scenario_ids(6));
  EXPECT_EQ(d6.size(), 144u);
  EXPECT_EQ(std::set<DesignCoordinates>(d6.begin(), d6.end()).size(), 144u);
  EXPECT_TRUE(std::is_sorted(d6.begin(), d6.end(), [&](auto& a, auto& b) {
    auto pos = [&](const std::string& s) {
      auto ids = testing::scenario_ids(6);
      return std::find(ids.begin(), ids.end(), s) - ids.begin();
    };
    return std::tuple(pos(a.scenario), a.context, a.form, a.attribute) <
           std::tuple(pos(b.scenario), b.context, b.form, b.attribute);
  }));
}

TEST(Design, FullDesignRejectsBadIds) {
  std::vector<std::string> none;
  EXPECT_THROW(full_design(none), ConfigError);
  std::vector<std::string> dup = {"a", "a"};
  EXPECT_THROW(full_design(dup), ConfigError);
}

TEST(Design, EnumRoundTrip) {
  for (auto a : kAllAttributes) EXPECT_EQ(parse_attribute(to_string(a)), a);
  for (auto c : kAllContexts) EXPECT_EQ(parse_context(to_string(c)), c);
  for (auto f : kAllForms) EXPECT_EQ(parse_form(to_string(f)), f);
  EXPECT_EQ(adjective(Attribute::kWellPrepared), "well-prepared");
  EXPECT_THROW(parse_attribute("confident"), ConfigError);
}

TEST(Design, BenchmarkEffectSet) {
  const auto& b = benchmark_effects();
  ASSERT_EQ(b.size(), 10u);
  std::set<Attribute> main, inter;
  for (const auto& s : b) {
    EXPECT_EQ(s.expected_sign, 1);
    (s.kind == EffectKind::kMainEffect ? main : inter).insert(s.attribute);
  }
  EXPECT_EQ(main, (std::set<Attribute>{Attribute::kCompetent,
                                       Attribute::kKnowledgeable,
                                       Attribute::kWellPrepared,
                                       Attribute::kHelpful,
                                       Attribute::kPedantic}));
  EXPECT_EQ(inter, (std::set<Attribute>{Attribute::kCompetent,
                                        Attribute::kKnowledgeable,
                                        Attribute::kWellPrepared,
                                        Attribute::kHelpful,
                                        Attribute::kLikeable}));
  EXPECT_EQ(supplementary_effects().size(), 2u);
}

TEST(Design, AllCellsIsTheTwentyFourCellGrid) {
  auto cells = all_cells();
  EXPECT_EQ(cells.size(), 24u);
  EXPECT_EQ(std::set<CellKey>(cells.begin(), cells.end()).size(), 24u);
}

TEST(Design, JsonRoundTrip) {
  RatingRecord r{"p1", {"bicycle", Context::kLP, Form::kApproximate,
                        Attribute::kWellPrepared},
                 6, Source::kHuman};
  EXPECT_EQ(Json(r).get<RatingRecord>(), r);
  MeansTable t;
  t.cells[CellKey{Attribute::kHelpful, Context::kHP, Form::kPrecise}] = {4.25,
                                                                         8};
  t.invalid_cells.push_back(
      CellKey{Attribute::kPedantic, Context::kLP, Form::kPrecise});
  EXPECT_EQ(Json(t).get<MeansTable>(), t);
}

// ---- csv -------------------------------------------------------------------

TEST(Csv, QuotesNewlinesAndBom) {
  auto t = parse_csv("\xEF\xBB\xBF" "a,b\n1,\"x, \"\"y\"\"\"\n\n2,\"multi\nline\"\n");
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].fields[1], "x, \"y\"");
  EXPECT_EQ(t.rows[1].fields[1], "multi\nline");
  EXPECT_EQ(t.rows[0].line, 2u);
  EXPECT_EQ(t.rows[1].line, 4u);
}

TEST(Csv, CrLfAndDelimiter) {
  auto t = parse_csv("a;b\r\n1;2\r\n", ';');
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].fields, (std::vector<std::string>{"1", "2"}));
}

TEST(Csv, UnterminatedQuote) {
  EXPECT_THROW(parse_csv("a\n\"oops\n"), ConfigError);
}

TEST(Csv, FieldRoundTrip) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "ab,\"\n x";
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> fields(1 + rng() % 4);
    for (auto& f : fields) {
      std::size_t len = 1 + rng() % 6;
      for (std::size_t i = 0; i < len; ++i) f += alphabet[rng() % alphabet.size()];
    }
    std::vector<std::string> header(fields.size(), "h");
    auto t = parse_csv(csv_line(header) + csv_line(fields));
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].fields, fields);
  }
}

// ---- loading ---------------------------------------------------------------

TEST(Ingest, CanonicalLongFormat) {
  auto recs = synthetic_human();
  auto res = load_ratings_text(to_canonical_csv(recs), canonical_column_map());
  EXPECT_EQ(res.records, recs);
  EXPECT_EQ(res.data_rows, recs.size());
  EXPECT_TRUE(res.rejected.empty());
  EXPECT_EQ(res.distinct_raters(), 40u);
}

TEST(Ingest, ValueMapsAndRenamedColumns) {
  const std::string text =
      "pid,item,ctx,utt,trait,resp\n"
      "1,Bicycle,High,Exact,Competent,6\n"
      "1,Bicycle,Low,Round,well prepared,5.0\n";
  Json j = {{"columns",
             {{"rater_id", "pid"},
              {"scenario", "item"},
              {"context", "ctx"},
              {"form", "utt"},
              {"attribute", "trait"},
              {"rating", "resp"}}},
            {"value_maps",
             {{"context", {{"High", "hp"}, {"Low", "lp"}}},
              {"form", {{"Exact", "precise"}, {"Round", "approximate"}}}}}};
  auto res = load_ratings_text(text, column_map_from_json(j));
  ASSERT_EQ(res.records.size(), 2u);
  // Scenario ids are kept verbatim.
  EXPECT_EQ(res.records[0].coords,
            (DesignCoordinates{"Bicycle", Context::kHP, Form::kPrecise,
                               Attribute::kCompetent}));
  EXPECT_EQ(res.records[1].coords.attribute, Attribute::kWellPrepared);
  EXPECT_EQ(res.records[1].rating, 5);
}

TEST(Ingest, WideFormat) {
  const std::string text =
      "id,scen,ctx,form,c,k,w,h,l,p\n"
      "r1,bicycle,hp,precise,7,6,5,4,3,2\n";
  Json j = {{"columns",
             {{"rater_id", "id"},
              {"scenario", "scen"},
              {"context", "ctx"},
              {"form", "form"}}},
            {"attribute_columns",
             {{"competent", "c"},
              {"knowledgeable", "k"},
              {"well_prepared", "w"},
              {"helpful", "h"},
              {"likeable", "l"},
              {"pedantic", "p"}}}};
  auto res = load_ratings_text(text, column_map_from_json(j));
  ASSERT_EQ(res.records.size(), 6u);
  std::map<Attribute, int> got;
  for (const auto& r : res.records) got[r.coords.attribute] = r.rating;
  EXPECT_EQ(got[Attribute::kCompetent], 7);
  EXPECT_EQ(got[Attribute::kPedantic], 2);
}

TEST(Ingest, MissingColumnIsNamed) {
  try {
    load_ratings_text("rater_id,scenario,context,form,attribute\n",
                      canonical_column_map());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rating"), std::string::npos);
  }
}

TEST(Ingest, UnmappedValueIsListed) {
  std::string text = to_canonical_csv(synthetic_human());
  text += "x,bicycle,medium,precise,competent,4\n";
  try {
    load_ratings_text(text, canonical_column_map());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("medium"), std::string::npos);
  }
}

TEST(Ingest, OutOfRangeRowsAreRejectedUpToTheLimit) {
  auto recs = synthetic_human();
  std::string text = to_canonical_csv(recs);
  text += "x,bicycle,hp,precise,competent,8\n";
  text += "x,bicycle,hp,precise,competent,4.5\n";
  text += "x,bicycle,hp,precise,competent,\n";
  auto res = load_ratings_text(text, canonical_column_map());
  EXPECT_EQ(res.rejected.size(), 3u);
  EXPECT_EQ(res.records.size(), recs.size());
  EXPECT_EQ(res.data_rows, recs.size() + 3);
  EXPECT_EQ(res.records.size(), res.data_rows - res.rejected.size());
}

TEST(Ingest, TooManyRejectionsIsAHardError) {
  std::string text = "rater_id,scenario,context,form,attribute,rating\n";
  for (int i = 0; i < 10; ++i) {
    text += "x,bicycle,hp,precise,competent," +
            std::string(i < 2 ? "9" : "4") + "\n";
  }
  EXPECT_THROW(load_ratings_text(text, canonical_column_map()), ConfigError);
}

// ---- aggregation -----------------------------------------------------------

TEST(Aggregation, MeansMatchBruteForcePivot) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> likert(1, 7);
  std::vector<RatingRecord> recs;
  for (const auto& c : full_design(testing::scenario_ids(3))) {
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      recs.push_back({"r" + std::to_string(i), c, likert(rng),
                      Source::kHuman});
    }
  }
  auto t = condition_means(recs);
  ASSERT_TRUE(t.is_complete());
  for (const auto& key : all_cells()) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& r : recs) {
      if (cell_of(r.coords) == key) {
        sum += r.rating;
        ++n;
      }
    }
    EXPECT_NEAR(t.mean(key.attribute, key.context, key.form), sum / n, 1e-12);
    EXPECT_EQ(t.cells.at(key).count, n);
  }
  auto per = scenario_means(recs);
  EXPECT_EQ(per.size(), 72u);
}

TEST(Aggregation, EmptyCellIsNamed) {
  auto recs = synthetic_human();
  std::erase_if(recs, [](const RatingRecord& r) {
    return r.coords.attribute == Attribute::kHelpful &&
           r.coords.context == Context::kLP && r.coords.form == Form::kPrecise;
  });
  try {
    condition_means(recs);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("helpful"), std::string::npos);
  }
}

TEST(Aggregation, EffectsFromKnownStructure) {
  auto t = condition_means(synthetic_human());
  for (const auto& spec : benchmark_effects()) {
    auto e = compute_effect(t, spec);
    const double dhp = cell_centre(spec.attribute, Context::kHP, Form::kPrecise) -
                       cell_centre(spec.attribute, Context::kHP, Form::kApproximate);
    const double dlp = cell_centre(spec.attribute, Context::kLP, Form::kPrecise) -
                       cell_centre(spec.attribute, Context::kLP, Form::kApproximate);
    ASSERT_TRUE(e.per_context_deltas.has_value());
    EXPECT_DOUBLE_EQ(e.per_context_deltas->first, dhp);
    EXPECT_DOUBLE_EQ(e.per_context_deltas->second, dlp);
    if (spec.kind == EffectKind::kMainEffect) {
      EXPECT_DOUBLE_EQ(e.delta, (dhp + dlp) / 2);
    } else {
      EXPECT_DOUBLE_EQ(e.delta, dhp - dlp);
    }
  }
}

TEST(Benchmark, BuildAndValidate) {
  auto b = build_benchmark(synthetic_human());
  EXPECT_EQ(b.effects.size(), 10u);
  EXPECT_EQ(b.supplementary_effects.size(), 2u);
  for (const auto& e : b.effects) EXPECT_GT(e.delta, 0.0);
  EXPECT_TRUE(validate_benchmark(b).passed);
  EXPECT_EQ(b.individual_ratings.size(), synthetic_human().size());
}

TEST(Benchmark, FlippedSignFailsValidation) {
  auto recs = synthetic_human();
  for (auto& r : recs) {
    if (r.coords.attribute == Attribute::kHelpful) {
      r.coords.form = r.coords.form == Form::kPrecise ? Form::kApproximate
                                                      : Form::kPrecise;
    }
  }
  auto b = build_benchmark(recs);
  auto v = validate_benchmark(b);
  EXPECT_FALSE(v.passed);
  ASSERT_FALSE(v.problems.empty());
  EXPECT_NE(v.problems.front().find("helpful"), std::string::npos);
}

TEST(Benchmark, CustomEffectSetNeedsTheOverride) {
  std::vector<EffectSpec> specs(benchmark_effects().begin(),
                                benchmark_effects().end() - 1);
  auto b = build_benchmark(synthetic_human(), specs);
  EXPECT_FALSE(validate_benchmark(b).passed);
  EXPECT_TRUE(validate_benchmark(b, true).passed);
}

TEST(Benchmark, JsonRoundTrip) {
  auto b = build_benchmark(synthetic_human(2));
  EXPECT_EQ(benchmark_from_json(to_json(b)), b);
}

// ---- model ratings ---------------------------------------------------------

TEST(ModelRatings, NullMarksMissingAndInvalidInstances) {
  std::string text;
  const DesignCoordinates c{"bicycle", Context::kHP, Form::kPrecise,
                            Attribute::kCompetent};
  for (int i = 0; i < 10; ++i) {
    Json j = RatingRecord{std::to_string(i), c, 4, Source::kModel};
    j["condition"] = "MIN";
    if (i < 3) j["rating"] = nullptr;
    text += j.dump() + "\n";
  }
  Json other = RatingRecord{"0", c, 6, Source::kModel};
  other["condition"] = "ALT";
  text += other.dump() + "\n";

  auto r = parse_model_ratings_jsonl(text, "min");
  EXPECT_EQ(r.records.size(), 7u);
  EXPECT_EQ(r.missing.at(c), 3u);
  EXPECT_EQ(r.total.at(c), 10u);
  auto bad = invalid_instances(r);
  ASSERT_EQ(bad.size(), 1u);  // 30% > 20%
  EXPECT_EQ(bad[0], c);
  auto m = model_means(r);
  EXPECT_FALSE(m.is_complete());
  EXPECT_EQ(m.invalid_cells.size(), 1u);
  EXPECT_THROW(m.require_complete(), ConfigError);
}

TEST(ModelRatings, ExactlyTwentyPercentStaysValid) {
  ModelRatings r;
  const DesignCoordinates c{"bicycle", Context::kLP, Form::kPrecise,
                            Attribute::kHelpful};
  r.total[c] = 10;
  r.missing[c] = 2;
  EXPECT_TRUE(invalid_instances(r).empty());
}

}  // namespace
}  // namespace smeval
