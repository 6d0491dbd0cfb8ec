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

// Vocabulary of the 2x2 (context x form) rating experiment: design
// coordinates, Likert records, condition-mean tables and the benchmark
// effect specification shared by every other module.

#ifndef SMEVAL_DESIGN_HPP_
#define SMEVAL_DESIGN_HPP_

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace smeval {

enum class Context { kHP, kLP };
enum class Form { kPrecise, kApproximate };
enum class Attribute {
  kCompetent,
  kKnowledgeable,
  kWellPrepared,
  kHelpful,
  kLikeable,
  kPedantic,
};
enum class Source { kHuman, kModel };
enum class EffectKind { kMainEffect, kInteraction };

inline constexpr std::array<Context, 2> kAllContexts = {Context::kHP,
                                                        Context::kLP};
inline constexpr std::array<Form, 2> kAllForms = {Form::kPrecise,
                                                  Form::kApproximate};
inline constexpr std::array<Attribute, 6> kAllAttributes = {
    Attribute::kCompetent, Attribute::kKnowledgeable, Attribute::kWellPrepared,
    Attribute::kHelpful,   Attribute::kLikeable,      Attribute::kPedantic,
};

// Canonical lowercase snake-case encodings ("hp", "approximate",
// "well_prepared", ...). Decoders throw ConfigError on unknown text.
std::string_view to_string(Context c);
std::string_view to_string(Form f);
std::string_view to_string(Attribute a);
std::string_view to_string(Source s);
std::string_view to_string(EffectKind k);

Context parse_context(std::string_view s);
Form parse_form(std::string_view s);
Attribute parse_attribute(std::string_view s);
Source parse_source(std::string_view s);
EffectKind parse_effect_kind(std::string_view s);

// Non-throwing variants used by ingestion to collect unmapped values.
std::optional<Context> try_parse_context(std::string_view s);
std::optional<Form> try_parse_form(std::string_view s);
std::optional<Attribute> try_parse_attribute(std::string_view s);

// Human-facing adjective, e.g. "well-prepared".
std::string_view adjective(Attribute a);

struct DesignCoordinates {
  std::string scenario;
  Context context = Context::kHP;
  Form form = Form::kPrecise;
  Attribute attribute = Attribute::kCompetent;

  auto operator<=>(const DesignCoordinates&) const = default;
  bool operator==(const DesignCoordinates&) const = default;
};

std::string to_string(const DesignCoordinates& c);

// Cross product scenario x context x form x attribute, in that nesting
// order. Six scenario ids give the 144-cell design. Throws ConfigError on
// empty or duplicate ids.
std::vector<DesignCoordinates> full_design(
    std::span<const std::string> scenario_ids);

struct RatingRecord {
  std::string rater_id;
  DesignCoordinates coords;
  int rating = 0;  // Likert points, 1..7
  Source source = Source::kHuman;

  bool operator==(const RatingRecord&) const = default;
};

inline constexpr int kLikertMin = 1;
inline constexpr int kLikertMax = 7;

inline bool is_likert(int v) { return v >= kLikertMin && v <= kLikertMax; }

// One (attribute, context, form) condition; scenarios are pooled.
struct CellKey {
  Attribute attribute = Attribute::kCompetent;
  Context context = Context::kHP;
  Form form = Form::kPrecise;

  auto operator<=>(const CellKey&) const = default;
  bool operator==(const CellKey&) const = default;
};

std::string to_string(const CellKey& k);

inline CellKey cell_of(const DesignCoordinates& c) {
  return {c.attribute, c.context, c.form};
}

// The 24 pooled cells in attribute, context, form order.
std::vector<CellKey> all_cells();

struct CellStat {
  double mean = 0.0;
  std::size_t count = 0;

  bool operator==(const CellStat&) const = default;
};

// Condition means per (attribute, context, form). A complete table has all
// 24 cells; cells flagged invalid (too many unparseable model samples)
// are kept out of `cells` and listed in `invalid_cells`.
struct MeansTable {
  std::map<CellKey, CellStat> cells;
  std::vector<CellKey> invalid_cells;

  bool is_complete() const;
  // Throws ConfigError naming missing/invalid cells or out-of-range means.
  void require_complete() const;
  double mean(const CellKey& k) const;  // throws ConfigError if missing
  double mean(Attribute a, Context c, Form f) const {
    return mean(CellKey{a, c, f});
  }

  bool operator==(const MeansTable&) const = default;
};

// Per-scenario means (the 144-cell variant used for diagnostics and for
// the per-scenario correlation mode).
using ScenarioMeansTable = std::map<DesignCoordinates, CellStat>;

struct EffectSpec {
  EffectKind kind = EffectKind::kMainEffect;
  Attribute attribute = Attribute::kCompetent;
  int expected_sign = +1;

  auto operator<=>(const EffectSpec&) const = default;
  bool operator==(const EffectSpec&) const = default;
};

std::string to_string(const EffectSpec& s);

// The ten significant human effects: form main effects on competent,
// knowledgeable, well-prepared, helpful and pedantic; form x context
// interactions on competent, knowledgeable, well-prepared, helpful and
// likeable. All with expected sign +1.
const std::vector<EffectSpec>& benchmark_effects();

// The two non-significant effects (likeable main, pedantic interaction).
// Computed and reported, never scored.
const std::vector<EffectSpec>& supplementary_effects();

struct EffectEstimate {
  EffectSpec spec;
  double delta = 0.0;
  // (HP delta, LP delta)
  std::optional<std::pair<double, double>> per_context_deltas;

  bool operator==(const EffectEstimate&) const = default;
};

}  // namespace smeval

#endif  // SMEVAL_DESIGN_HPP_
