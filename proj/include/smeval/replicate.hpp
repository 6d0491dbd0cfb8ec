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

// Scores a set of recorded model ratings against a human ratings export
// and compares the results with a table of expected values.

#ifndef SMEVAL_REPLICATE_HPP_
#define SMEVAL_REPLICATE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smeval/ingest.hpp"
#include "smeval/json_io.hpp"
#include "smeval/promptgen.hpp"
#include "smeval/scoring.hpp"

namespace smeval {

struct ModelSource {
  std::string model;
  PromptCondition condition = PromptCondition::kMIN;
  std::filesystem::path path;
  std::string format = "jsonl";  // "jsonl" (gateway output) or "csv"
  std::optional<ColumnMap> column_map;  // csv only
  // csv only: keep rows whose `filter_column` equals `filter_value`.
  std::string filter_column;
  std::string filter_value;
};

// {"human": {"path": ..., "column_map": <path or object>},
//  "models": [{"model", "condition", "path", "format", "column_map"}]}
// Relative paths resolve against the manifest directory.
struct ReplicationManifest {
  std::filesystem::path human_path;
  ColumnMap human_map;
  std::vector<ModelSource> models;
};

ReplicationManifest load_manifest(const std::filesystem::path& path);

// Ratings of one model/condition with per-instance missing counts.
ModelRatings load_model_source(const ModelSource& src);

// Expected metric values keyed by model, condition and metric name
// ("spearman", "ccc", "rmse", "cds_main", "cds_interaction", "cds",
// "rmse_individual", "das", "iss").
struct ExpectedTable {
  double tolerance = 0.01;
  // group -> metric names; groups are reported separately.
  std::map<std::string, std::vector<std::string>> groups;
  std::map<std::string,
           std::map<std::string, std::map<std::string, double>>> values;
};

ExpectedTable load_expected(const std::filesystem::path& path);

struct ReplicationCheck {
  std::string group;
  std::string model;
  std::string condition;
  std::string metric;
  double expected = 0.0;
  std::optional<double> actual;
  bool pass = false;
};

struct ReplicationOutcome {
  Granularity granularity = Granularity::kPooled;
  std::vector<CalibrationReport> reports;
  std::vector<ReplicationCheck> checks;
  // Granularities evaluated, in order, with their pass counts.
  std::vector<std::pair<Granularity, std::size_t>> tried;

  bool group_passed(const std::string& group) const;
  bool all_passed() const;
};

std::optional<double> metric_value(const CalibrationReport& r,
                                   const std::string& metric);

std::vector<ReplicationCheck> compare(
    std::span<const CalibrationReport> reports, const ExpectedTable& expected);

// Scores every model source at pooled granularity; if any "global" check
// fails, scores again per scenario and keeps whichever mode passes more
// checks (pooled on ties).
ReplicationOutcome replicate(const ReplicationManifest& manifest,
                             const ExpectedTable& expected);

// One line per (group, model, condition): PASS/FAIL with each metric.
std::string format_matrix(const ReplicationOutcome& outcome);

}  // namespace smeval

#endif  // SMEVAL_REPLICATE_HPP_
