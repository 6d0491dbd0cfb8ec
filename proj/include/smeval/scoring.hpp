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

#ifndef SMEVAL_SCORING_HPP_
#define SMEVAL_SCORING_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smeval/design.hpp"
#include "smeval/ingest.hpp"
#include "smeval/json_io.hpp"
#include "smeval/metrics.hpp"
#include "smeval/promptgen.hpp"

namespace smeval {

// Which H-M pairs feed Spearman, CCC and mean-level RMSE: the 24 pooled
// condition means, or the per-scenario means (144 for six scenarios).
enum class Granularity { kPooled, kPerScenario };

std::string_view to_string(Granularity g);
Granularity parse_granularity(std::string_view s);

struct CalibrationReport {
  std::string model_id;
  PromptCondition condition = PromptCondition::kMIN;
  Granularity granularity = Granularity::kPooled;

  // Unset metrics have an entry in `unavailable` with the reason.
  std::optional<double> spearman;
  std::optional<double> ccc;
  std::optional<double> rmse_mean;
  std::optional<double> rmse_individual;
  std::optional<double> das;
  std::optional<double> iss;
  std::optional<CalibrationScores> calibration;
  std::map<std::string, std::string> unavailable;

  // Scored and supplementary effects as estimated from the model means.
  std::vector<EffectEstimate> model_effects;
  MeansTable cell_means;

  bool operator==(const CalibrationReport&) const = default;
};

struct ScoreOptions {
  Granularity granularity = Granularity::kPooled;
  // Required for kPerScenario.
  const ScenarioMeansTable* model_scenario_means = nullptr;
  bool use_individuals = true;
};

// Scores one (model, condition). ConfigError when the model table is not
// complete (invalid or missing cells are listed).
CalibrationReport score_model(const MeansTable& model_means,
                              const HumanBenchmark& bench,
                              std::string model_id, PromptCondition condition,
                              const ScoreOptions& options = {});

void to_json(Json& j, const CalibrationReport& r);
void from_json(const Json& j, CalibrationReport& r);

Json reports_document(std::span<const CalibrationReport> reports);
std::vector<CalibrationReport> reports_from_document(const Json& j);
std::vector<CalibrationReport> load_reports(const std::filesystem::path& path);

enum class TableFormat { kMarkdown, kJson, kCsv };
TableFormat parse_table_format(std::string_view s);

// Writes the global similarity table (model, condition, Spearman, CCC,
// RMSE), the calibration table (CDS_m, CDS_i, CDS) and, when any report
// has individual-level RMSE, the RMSE mean-vs-individual table. Values at
// 3 decimals; the best value per model and metric is flagged (bold in
// markdown, listed in a "best" column in CSV). The JSON format writes the
// full reports document. Returns the written paths.
std::vector<std::filesystem::path> emit_tables(
    std::span<const CalibrationReport> reports, TableFormat format,
    const std::filesystem::path& out_dir);

// Table text without touching the filesystem.
std::string global_table_markdown(std::span<const CalibrationReport> reports);
std::string calibration_table_markdown(
    std::span<const CalibrationReport> reports);
std::string rmse_table_markdown(std::span<const CalibrationReport> reports);
std::string global_table_csv(std::span<const CalibrationReport> reports);
std::string calibration_table_csv(std::span<const CalibrationReport> reports);
std::string rmse_table_csv(std::span<const CalibrationReport> reports);

inline constexpr double kDefaultEsrCap = 4.5;

struct EsrCell {
  std::string model;
  PromptCondition condition = PromptCondition::kMIN;
  EffectSpec effect;
  std::optional<double> esr;
  bool over_cap = false;
};

// Long-format ESR cells: benchmark effects (main then interaction) for
// every report.
std::vector<EsrCell> esr_heatmap_cells(
    std::span<const CalibrationReport> reports, double cap = kDefaultEsrCap);

std::string esr_heatmap_csv(std::span<const CalibrationReport> reports,
                            double cap = kDefaultEsrCap);
// Rows: the ten effects; columns: conditions present for `model`.
std::string esr_matrix_csv(std::span<const CalibrationReport> reports,
                           const std::string& model,
                           double cap = kDefaultEsrCap);
// One row per (cell, model, condition): h, m.
std::string scatter_csv(std::span<const CalibrationReport> reports,
                        const MeansTable& human_means);

// Writes esr_heatmap.csv, esr_matrix_<model>.csv, scatter.csv and
// chart_spec.json. Returns the written paths.
std::vector<std::filesystem::path> emit_figure_data(
    std::span<const CalibrationReport> reports, const MeansTable& human_means,
    const std::filesystem::path& out_dir, double cap = kDefaultEsrCap);

// Three-decimal display used by every table.
std::string format3(double v);

}  // namespace smeval

#endif  // SMEVAL_SCORING_HPP_
