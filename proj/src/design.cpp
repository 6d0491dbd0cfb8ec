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

#include "smeval/design.hpp"

#include <cmath>
#include <set>

#include "smeval/error.hpp"

namespace smeval {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(
    std::string_view s,
    const std::array<std::pair<Enum, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

constexpr std::array<std::pair<Context, std::string_view>, 2> kContextNames{{
    {Context::kHP, "hp"},
    {Context::kLP, "lp"},
}};

constexpr std::array<std::pair<Form, std::string_view>, 2> kFormNames{{
    {Form::kPrecise, "precise"},
    {Form::kApproximate, "approximate"},
}};

constexpr std::array<std::pair<Attribute, std::string_view>, 6>
    kAttributeNames{{
        {Attribute::kCompetent, "competent"},
        {Attribute::kKnowledgeable, "knowledgeable"},
        {Attribute::kWellPrepared, "well_prepared"},
        {Attribute::kHelpful, "helpful"},
        {Attribute::kLikeable, "likeable"},
        {Attribute::kPedantic, "pedantic"},
    }};

constexpr std::array<std::pair<Source, std::string_view>, 2> kSourceNames{{
    {Source::kHuman, "human"},
    {Source::kModel, "model"},
}};

constexpr std::array<std::pair<EffectKind, std::string_view>, 2> kKindNames{{
    {EffectKind::kMainEffect, "main_effect"},
    {EffectKind::kInteraction, "interaction"},
}};

template <typename Enum, std::size_t N>
std::string_view name_of(
    Enum v, const std::array<std::pair<Enum, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

template <typename Enum, std::size_t N>
Enum parse_or_throw(
    std::string_view s, std::string_view what,
    const std::array<std::pair<Enum, std::string_view>, N>& table) {
  if (auto v = lookup(s, table)) return *v;
  throw ConfigError("unknown " + std::string(what) + " value '" +
                    std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Context c) { return name_of(c, kContextNames); }
std::string_view to_string(Form f) { return name_of(f, kFormNames); }
std::string_view to_string(Attribute a) { return name_of(a, kAttributeNames); }
std::string_view to_string(Source s) { return name_of(s, kSourceNames); }
std::string_view to_string(EffectKind k) { return name_of(k, kKindNames); }

Context parse_context(std::string_view s) {
  return parse_or_throw(s, "context", kContextNames);
}
Form parse_form(std::string_view s) {
  return parse_or_throw(s, "form", kFormNames);
}
Attribute parse_attribute(std::string_view s) {
  return parse_or_throw(s, "attribute", kAttributeNames);
}
Source parse_source(std::string_view s) {
  return parse_or_throw(s, "source", kSourceNames);
}
EffectKind parse_effect_kind(std::string_view s) {
  return parse_or_throw(s, "effect kind", kKindNames);
}

std::optional<Context> try_parse_context(std::string_view s) {
  return lookup(s, kContextNames);
}
std::optional<Form> try_parse_form(std::string_view s) {
  return lookup(s, kFormNames);
}
std::optional<Attribute> try_parse_attribute(std::string_view s) {
  return lookup(s, kAttributeNames);
}

std::string_view adjective(Attribute a) {
  switch (a) {
    case Attribute::kCompetent: return "competent";
    case Attribute::kKnowledgeable: return "knowledgeable";
    case Attribute::kWellPrepared: return "well-prepared";
    case Attribute::kHelpful: return "helpful";
    case Attribute::kLikeable: return "likeable";
    case Attribute::kPedantic: return "pedantic";
  }
  return "?";
}

std::string to_string(const DesignCoordinates& c) {
  std::string out = c.scenario;
  out += '/';
  out += to_string(c.context);
  out += '/';
  out += to_string(c.form);
  out += '/';
  out += to_string(c.attribute);
  return out;
}

std::string to_string(const CellKey& k) {
  std::string out(to_string(k.attribute));
  out += '/';
  out += to_string(k.context);
  out += '/';
  out += to_string(k.form);
  return out;
}

std::string to_string(const EffectSpec& s) {
  std::string out(to_string(s.kind));
  out += ':';
  out += to_string(s.attribute);
  return out;
}

std::vector<DesignCoordinates> full_design(
    std::span<const std::string> scenario_ids) {
  if (scenario_ids.empty()) throw ConfigError("design has no scenarios");
  std::set<std::string_view> seen;
  for (const auto& id : scenario_ids) {
    if (id.empty()) throw ConfigError("empty scenario id");
    if (!seen.insert(id).second) {
      throw ConfigError("duplicate scenario id '" + id + "'");
    }
  }
  std::vector<DesignCoordinates> out;
  out.reserve(scenario_ids.size() * 24);
  for (const auto& id : scenario_ids) {
    for (Context c : kAllContexts) {
      for (Form f : kAllForms) {
        for (Attribute a : kAllAttributes) {
          out.push_back({id, c, f, a});
        }
      }
    }
  }
  return out;
}

std::vector<CellKey> all_cells() {
  std::vector<CellKey> out;
  out.reserve(24);
  for (Attribute a : kAllAttributes) {
    for (Context c : kAllContexts) {
      for (Form f : kAllForms) out.push_back({a, c, f});
    }
  }
  return out;
}

bool MeansTable::is_complete() const {
  if (!invalid_cells.empty()) return false;
  for (const auto& k : all_cells()) {
    auto it = cells.find(k);
    if (it == cells.end() || !std::isfinite(it->second.mean)) return false;
  }
  return true;
}

void MeansTable::require_complete() const {
  std::string problems;
  auto add = [&](const std::string& msg) {
    if (!problems.empty()) problems += ", ";
    problems += msg;
  };
  for (const auto& k : invalid_cells) add(to_string(k) + " (invalid)");
  for (const auto& k : all_cells()) {
    auto it = cells.find(k);
    if (it == cells.end()) {
      bool flagged = false;
      for (const auto& inv : invalid_cells) flagged |= inv == k;
      if (!flagged) add(to_string(k) + " (missing)");
    } else if (!std::isfinite(it->second.mean)) {
      add(to_string(k) + " (non-finite)");
    }
  }
  if (!problems.empty()) {
    throw ConfigError("means table incomplete: " + problems);
  }
}

double MeansTable::mean(const CellKey& k) const {
  auto it = cells.find(k);
  if (it == cells.end()) {
    throw ConfigError("means table has no cell " + to_string(k));
  }
  return it->second.mean;
}

const std::vector<EffectSpec>& benchmark_effects() {
  static const std::vector<EffectSpec> kEffects = {
      {EffectKind::kMainEffect, Attribute::kCompetent, +1},
      {EffectKind::kMainEffect, Attribute::kKnowledgeable, +1},
      {EffectKind::kMainEffect, Attribute::kWellPrepared, +1},
      {EffectKind::kMainEffect, Attribute::kHelpful, +1},
      {EffectKind::kMainEffect, Attribute::kPedantic, +1},
      {EffectKind::kInteraction, Attribute::kCompetent, +1},
      {EffectKind::kInteraction, Attribute::kKnowledgeable, +1},
      {EffectKind::kInteraction, Attribute::kWellPrepared, +1},
      {EffectKind::kInteraction, Attribute::kHelpful, +1},
      {EffectKind::kInteraction, Attribute::kLikeable, +1},
  };
  return kEffects;
}

const std::vector<EffectSpec>& supplementary_effects() {
  // Sign is nominal; these are never scored.
  static const std::vector<EffectSpec> kEffects = {
      {EffectKind::kMainEffect, Attribute::kLikeable, +1},
      {EffectKind::kInteraction, Attribute::kPedantic, +1},
  };
  return kEffects;
}

}  // namespace smeval
