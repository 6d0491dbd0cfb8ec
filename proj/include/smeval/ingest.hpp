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

// Loading of raw Likert ratings (human study export or model output),
// aggregation into condition means, and derivation of form effects.

#ifndef SMEVAL_INGEST_HPP_
#define SMEVAL_INGEST_HPP_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "smeval/design.hpp"
#include "smeval/json_io.hpp"

namespace smeval {

// Maps the six logical fields onto source columns.
//
// Long format: one row per rating; `columns` maps every logical field
// (rater_id, scenario, context, form, attribute, rating).
//
// Wide format: one row per rater; `attribute_columns` maps each attribute
// to the column holding its rating, and `columns` omits attribute/rating.
//
// `value_maps[field][source_text]` gives the canonical encoding. Fields
// without a map must already hold canonical text (case and '-'/' ' vs '_'
// are normalised).
struct ColumnMap {
  std::map<std::string, std::string> columns;
  std::map<Attribute, std::string> attribute_columns;
  std::map<std::string, std::map<std::string, std::string>> value_maps;
  char delimiter = ',';
  Source source = Source::kHuman;
  // Fraction of rejected rows above which loading is a hard error.
  double max_reject_fraction = 0.05;

  bool is_wide() const { return !attribute_columns.empty(); }
};

ColumnMap column_map_from_json(const Json& j);
Json to_json(const ColumnMap& m);
ColumnMap load_column_map(const std::filesystem::path& path);
// Long-format identity mapping: columns named after the logical fields,
// values already canonical.
ColumnMap canonical_column_map(Source source = Source::kHuman);

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<RatingRecord> records;
  std::vector<RejectedRow> rejected;
  std::size_t data_rows = 0;

  std::size_t distinct_raters() const;
};

// Missing columns and unmapped categorical values raise ConfigError naming
// them. Ratings that are not integers in [1, 7] are rejected per row;
// if the rejected fraction of observations exceeds
// map.max_reject_fraction the load fails with ConfigError.
LoadResult load_ratings(const std::filesystem::path& path,
                        const ColumnMap& map);
LoadResult load_ratings_text(std::string_view text, const ColumnMap& map);

// Arithmetic mean per pooled cell. Every cell in `required` (default: all
// 24) must have at least one record, else ConfigError naming the cells.
MeansTable condition_means(std::span<const RatingRecord> records);
MeansTable condition_means(std::span<const RatingRecord> records,
                           std::span<const CellKey> required);

// Per-scenario means over whatever coordinates occur in `records`.
ScenarioMeansTable scenario_means(std::span<const RatingRecord> records);

// Main effect: mean over contexts of (precise - approximate), contexts
// weighted equally. Interaction: (precise - approximate | HP) minus
// (precise - approximate | LP). Both carry the per-context deltas.
std::vector<EffectEstimate> compute_effects(const MeansTable& means,
                                            std::span<const EffectSpec> specs);
EffectEstimate compute_effect(const MeansTable& means, const EffectSpec& spec);

struct HumanBenchmark {
  MeansTable means;
  ScenarioMeansTable scenario_means;
  std::vector<RatingRecord> individual_ratings;
  std::vector<EffectEstimate> effects;                // scored
  std::vector<EffectEstimate> supplementary_effects;  // reported only

  bool operator==(const HumanBenchmark&) const = default;
};

// Aggregates the records and computes the scored and supplementary
// effects. `specs` defaults to benchmark_effects().
HumanBenchmark build_benchmark(std::vector<RatingRecord> records);
HumanBenchmark build_benchmark(std::vector<RatingRecord> records,
                               std::span<const EffectSpec> specs);

struct ValidationReport {
  bool passed = true;
  std::vector<std::string> problems;
};

// Fails for any scored effect whose delta is zero or whose sign differs
// from the expected sign, and for an effect set that is not the fixed
// ten-effect benchmark unless `allow_custom_effects` is set.
ValidationReport validate_benchmark(const HumanBenchmark& bench,
                                    bool allow_custom_effects = false);

Json to_json(const HumanBenchmark& b);
HumanBenchmark benchmark_from_json(const Json& j);

// Effect sets other than the benchmark are read from an explicit override
// file: {"effects": [{"kind":..., "attribute":..., "expected_sign":...}]}.
std::vector<EffectSpec> load_effect_specs(const std::filesystem::path& path);

// Model ratings as written by the gateway: one JSON object per line with
// RatingRecord fields; "rating": null marks an unparseable sample.
struct ModelRatings {
  std::vector<RatingRecord> records;
  std::map<DesignCoordinates, std::size_t> missing;  // per prompt instance
  std::map<DesignCoordinates, std::size_t> total;    // per prompt instance
};

// A non-empty `condition` keeps only lines whose "condition" field equals
// it (case-insensitive); lines without the field are always kept.
ModelRatings load_model_ratings_jsonl(const std::filesystem::path& path,
                                      std::string_view condition = {});
ModelRatings parse_model_ratings_jsonl(std::string_view text,
                                       std::string_view condition = {});
ModelRatings model_ratings_from_records(std::vector<RatingRecord> records);

// Prompt instances with more than this fraction of Missing samples are
// invalid; a pooled cell containing an invalid instance is excluded.
inline constexpr double kMaxMissingFraction = 0.20;

std::vector<DesignCoordinates> invalid_instances(const ModelRatings& ratings);

// Pooled means with invalid cells moved to MeansTable::invalid_cells.
MeansTable model_means(const ModelRatings& ratings);

}  // namespace smeval

#endif  // SMEVAL_INGEST_HPP_
