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

#include "smeval/scoring.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>

#include "smeval/csv.hpp"
#include "smeval/error.hpp"

namespace smeval {

namespace {

template <typename F>
void try_metric(CalibrationReport& r, const char* name, F&& f) {
  try {
    f();
  } catch (const MetricError& e) {
    r.unavailable[name] = e.what();
  }
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> read_optional(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

// Models in first-appearance order.
std::vector<std::string> model_order(
    std::span<const CalibrationReport> reports) {
  std::vector<std::string> out;
  for (const auto& r : reports) {
    if (std::find(out.begin(), out.end(), r.model_id) == out.end()) {
      out.push_back(r.model_id);
    }
  }
  return out;
}

using Getter = std::function<std::optional<double>(const CalibrationReport&)>;

struct Column {
  std::string title;
  std::string key;
  Getter get;
  bool higher_is_better;
};

// best[i][c] is true when report i holds the best value of column c among
// reports of the same model.
std::vector<std::vector<bool>> best_flags(
    std::span<const CalibrationReport> reports,
    const std::vector<Column>& columns) {
  std::vector<std::vector<bool>> best(reports.size(),
                                      std::vector<bool>(columns.size(), false));
  for (const auto& model : model_order(reports)) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      std::optional<double> top;
      for (const auto& r : reports) {
        if (r.model_id != model) continue;
        auto v = columns[c].get(r);
        if (!v) continue;
        if (!top || (columns[c].higher_is_better ? *v > *top : *v < *top)) {
          top = v;
        }
      }
      if (!top) continue;
      for (std::size_t i = 0; i < reports.size(); ++i) {
        if (reports[i].model_id != model) continue;
        auto v = columns[c].get(reports[i]);
        if (v && format3(*v) == format3(*top)) best[i][c] = true;
      }
    }
  }
  return best;
}

std::string markdown_table(std::span<const CalibrationReport> reports,
                           const std::vector<Column>& columns) {
  auto best = best_flags(reports, columns);
  std::string out = "| Model | Prompt |";
  std::string rule = "|---|---|";
  for (const auto& c : columns) {
    out += " " + c.title + " |";
    rule += "---:|";
  }
  out += "\n" + rule + "\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out += "| " + r.model_id + " | " + std::string(to_string(r.condition)) +
           " |";
    for (std::size_t c = 0; c < columns.size(); ++c) {
      auto v = columns[c].get(r);
      std::string cell = v ? format3(*v) : "n/a";
      if (best[i][c]) cell = "**" + cell + "**";
      out += " " + cell + " |";
    }
    out += "\n";
  }
  return out;
}

std::string csv_table(std::span<const CalibrationReport> reports,
                      const std::vector<Column>& columns) {
  auto best = best_flags(reports, columns);
  std::vector<std::string> header = {"model", "condition"};
  for (const auto& c : columns) header.push_back(c.key);
  header.push_back("best");
  std::string out = csv_line(header);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::vector<std::string> row = {r.model_id,
                                    std::string(to_string(r.condition))};
    std::string flags;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      auto v = columns[c].get(r);
      row.push_back(v ? format3(*v) : "");
      if (best[i][c]) {
        if (!flags.empty()) flags += ';';
        flags += columns[c].key;
      }
    }
    row.push_back(flags);
    out += csv_line(row);
  }
  return out;
}

std::vector<Column> global_columns() {
  return {
      {"Spearman ρ", "spearman", [](const auto& r) { return r.spearman; },
       true},
      {"CCC", "ccc", [](const auto& r) { return r.ccc; }, true},
      {"RMSE", "rmse", [](const auto& r) { return r.rmse_mean; }, false},
  };
}

std::optional<double> cds_field(const CalibrationReport& r,
                                double CalibrationScores::*field) {
  if (!r.calibration) return std::nullopt;
  return (*r.calibration).*field;
}

std::vector<Column> calibration_columns() {
  return {
      {"CDS_m", "cds_main",
       [](const auto& r) { return cds_field(r, &CalibrationScores::cds_main); },
       false},
      {"CDS_i", "cds_interaction",
       [](const auto& r) {
         return cds_field(r, &CalibrationScores::cds_interaction);
       },
       false},
      {"CDS", "cds",
       [](const auto& r) {
         return cds_field(r, &CalibrationScores::cds_aggregate);
       },
       false},
  };
}

std::vector<Column> rmse_columns() {
  return {
      {"RMSE_mean", "rmse_mean", [](const auto& r) { return r.rmse_mean; },
       false},
      {"RMSE_indiv", "rmse_individual",
       [](const auto& r) { return r.rmse_individual; }, false},
  };
}

std::vector<PromptCondition> conditions_for(
    std::span<const CalibrationReport> reports, const std::string& model) {
  std::set<PromptCondition> present;
  for (const auto& r : reports) {
    if (r.model_id == model) present.insert(r.condition);
  }
  return {present.begin(), present.end()};
}

std::vector<EffectSpec> ordered_benchmark() {
  std::vector<EffectSpec> out;
  for (const auto& s : benchmark_effects()) {
    if (s.kind == EffectKind::kMainEffect) out.push_back(s);
  }
  for (const auto& s : benchmark_effects()) {
    if (s.kind == EffectKind::kInteraction) out.push_back(s);
  }
  return out;
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' &&
        c != '.') {
      c = '_';
    }
  }
  return s;
}

}  // namespace

std::string format3(double v) {
  std::string s = fmt::format("{:.3f}", v);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string_view to_string(Granularity g) {
  return g == Granularity::kPooled ? "pooled" : "per_scenario";
}

Granularity parse_granularity(std::string_view s) {
  if (s == "pooled") return Granularity::kPooled;
  if (s == "per_scenario" || s == "per-scenario") {
    return Granularity::kPerScenario;
  }
  throw ConfigError("unknown granularity '" + std::string(s) + "'");
}

CalibrationReport score_model(const MeansTable& model_means,
                              const HumanBenchmark& bench,
                              std::string model_id, PromptCondition condition,
                              const ScoreOptions& options) {
  model_means.require_complete();
  bench.means.require_complete();

  CalibrationReport r;
  r.model_id = std::move(model_id);
  r.condition = condition;
  r.granularity = options.granularity;
  r.cell_means = model_means;

  PairedSeries series;
  if (options.granularity == Granularity::kPooled) {
    series = pair_means(bench.means, model_means);
  } else {
    if (options.model_scenario_means == nullptr) {
      throw ConfigError("per-scenario scoring needs per-scenario model means");
    }
    if (bench.scenario_means.empty()) {
      throw ConfigError("benchmark has no per-scenario means");
    }
    series = pair_scenario_means(bench.scenario_means,
                                 *options.model_scenario_means);
  }

  try_metric(r, "spearman", [&] { r.spearman = spearman_rho(series); });
  try_metric(r, "ccc", [&] { r.ccc = ccc(series); });
  try_metric(r, "rmse_mean", [&] { r.rmse_mean = rmse_means(series); });
  if (options.use_individuals && !bench.individual_ratings.empty()) {
    try_metric(r, "rmse_individual", [&] {
      r.rmse_individual = rmse_individual(model_means, bench.individual_ratings);
    });
  } else {
    r.unavailable["rmse_individual"] = "no individual data";
  }

  std::vector<EffectSpec> specs;
  for (const auto& e : bench.effects) specs.push_back(e.spec);
  const std::vector<EffectEstimate> scored =
      compute_effects(model_means, specs);
  for (const auto& e : bench.supplementary_effects) specs.push_back(e.spec);
  r.model_effects = compute_effects(model_means, specs);

  try_metric(r, "das", [&] { r.das = das(scored, bench.effects); });
  try_metric(r, "iss", [&] { r.iss = iss(scored, bench.effects); });
  try_metric(r, "calibration", [&] {
    r.calibration = calibration_scores(scored, bench.effects);
  });
  return r;
}

void to_json(Json& j, const CalibrationReport& r) {
  j = Json::object();
  j["model_id"] = r.model_id;
  j["condition"] = to_string(r.condition);
  j["granularity"] = to_string(r.granularity);
  j["spearman"] = optional_number(r.spearman);
  j["ccc"] = optional_number(r.ccc);
  j["rmse_mean"] = optional_number(r.rmse_mean);
  j["rmse_individual"] = optional_number(r.rmse_individual);
  j["das"] = optional_number(r.das);
  j["iss"] = optional_number(r.iss);
  if (r.calibration) {
    Json esr = Json::array();
    for (const auto& [spec, v] : r.calibration->esr_per_effect) {
      Json e = spec;
      e["esr"] = v;
      esr.push_back(std::move(e));
    }
    j["calibration"] = Json{{"esr", std::move(esr)},
                            {"cds_main", r.calibration->cds_main},
                            {"cds_interaction", r.calibration->cds_interaction},
                            {"cds_aggregate", r.calibration->cds_aggregate},
                            {"excluded", r.calibration->excluded}};
  } else {
    j["calibration"] = nullptr;
  }
  j["unavailable"] = r.unavailable;
  j["model_effects"] = r.model_effects;
  j["cell_means"] = r.cell_means;
}

void from_json(const Json& j, CalibrationReport& r) {
  r = CalibrationReport{};
  r.model_id = j.at("model_id").get<std::string>();
  r.condition = parse_condition(j.at("condition").get<std::string>());
  r.granularity = parse_granularity(j.value("granularity", "pooled"));
  r.spearman = read_optional(j, "spearman");
  r.ccc = read_optional(j, "ccc");
  r.rmse_mean = read_optional(j, "rmse_mean");
  r.rmse_individual = read_optional(j, "rmse_individual");
  r.das = read_optional(j, "das");
  r.iss = read_optional(j, "iss");
  if (j.contains("calibration") && !j.at("calibration").is_null()) {
    const Json& c = j.at("calibration");
    CalibrationScores s;
    for (const auto& e : c.at("esr")) {
      s.esr_per_effect[e.get<EffectSpec>()] = e.at("esr").get<double>();
    }
    s.cds_main = c.at("cds_main").get<double>();
    s.cds_interaction = c.at("cds_interaction").get<double>();
    s.cds_aggregate = c.at("cds_aggregate").get<double>();
    s.excluded = c.value("excluded", std::vector<EffectSpec>{});
    r.calibration = std::move(s);
  }
  r.unavailable =
      j.value("unavailable", std::map<std::string, std::string>{});
  r.model_effects = j.at("model_effects").get<std::vector<EffectEstimate>>();
  r.cell_means = j.at("cell_means").get<MeansTable>();
}

Json reports_document(std::span<const CalibrationReport> reports) {
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(r);
  return Json{{"schema", "smeval.reports/1"}, {"reports", std::move(arr)}};
}

std::vector<CalibrationReport> reports_from_document(const Json& j) {
  try {
    const auto schema = j.value("schema", std::string{});
    if (schema != "smeval.reports/1") {
      throw ConfigError("unsupported reports schema '" + schema + "'");
    }
    return j.at("reports").get<std::vector<CalibrationReport>>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("reports document: ") + e.what());
  }
}

std::vector<CalibrationReport> load_reports(const std::filesystem::path& path) {
  return reports_from_document(read_json_file(path));
}

TableFormat parse_table_format(std::string_view s) {
  if (s == "markdown" || s == "md") return TableFormat::kMarkdown;
  if (s == "json") return TableFormat::kJson;
  if (s == "csv") return TableFormat::kCsv;
  throw ConfigError("unknown table format '" + std::string(s) + "'");
}

std::string global_table_markdown(std::span<const CalibrationReport> reports) {
  return markdown_table(reports, global_columns());
}
std::string calibration_table_markdown(
    std::span<const CalibrationReport> reports) {
  return markdown_table(reports, calibration_columns());
}
std::string rmse_table_markdown(std::span<const CalibrationReport> reports) {
  return markdown_table(reports, rmse_columns());
}
std::string global_table_csv(std::span<const CalibrationReport> reports) {
  return csv_table(reports, global_columns());
}
std::string calibration_table_csv(std::span<const CalibrationReport> reports) {
  return csv_table(reports, calibration_columns());
}
std::string rmse_table_csv(std::span<const CalibrationReport> reports) {
  return csv_table(reports, rmse_columns());
}

std::vector<std::filesystem::path> emit_tables(
    std::span<const CalibrationReport> reports, TableFormat format,
    const std::filesystem::path& out_dir) {
  if (reports.empty()) throw ConfigError("no reports to tabulate");
  std::vector<std::filesystem::path> written;
  if (format == TableFormat::kJson) {
    auto path = out_dir / "reports.json";
    write_json_file(path, reports_document(reports));
    written.push_back(path);
    return written;
  }
  const bool md = format == TableFormat::kMarkdown;
  const std::string ext = md ? ".md" : ".csv";
  auto emit = [&](const std::string& name, const std::string& text) {
    auto path = out_dir / (name + ext);
    write_text_file(path, text);
    written.push_back(path);
  };
  emit("global_similarity",
       md ? global_table_markdown(reports) : global_table_csv(reports));
  emit("calibration_deviation", md ? calibration_table_markdown(reports)
                                   : calibration_table_csv(reports));
  bool any_individual = std::any_of(
      reports.begin(), reports.end(),
      [](const auto& r) { return r.rmse_individual.has_value(); });
  if (any_individual) {
    emit("rmse_levels",
         md ? rmse_table_markdown(reports) : rmse_table_csv(reports));
  }
  return written;
}

std::vector<EsrCell> esr_heatmap_cells(
    std::span<const CalibrationReport> reports, double cap) {
  std::vector<EsrCell> out;
  const auto effects = ordered_benchmark();
  for (const auto& r : reports) {
    for (const auto& spec : effects) {
      EsrCell cell{r.model_id, r.condition, spec, std::nullopt, false};
      if (r.calibration) {
        auto it = r.calibration->esr_per_effect.find(spec);
        if (it != r.calibration->esr_per_effect.end()) {
          cell.esr = it->second;
          cell.over_cap = it->second > cap;
        }
      }
      out.push_back(std::move(cell));
    }
  }
  return out;
}

std::string esr_heatmap_csv(std::span<const CalibrationReport> reports,
                            double cap) {
  std::string out = csv_line(
      {"model", "condition", "effect_kind", "attribute", "esr", "over_cap"});
  for (const auto& c : esr_heatmap_cells(reports, cap)) {
    out += csv_line({c.model, std::string(to_string(c.condition)),
                     std::string(to_string(c.effect.kind)),
                     std::string(to_string(c.effect.attribute)),
                     c.esr ? fmt::format("{}", *c.esr) : "",
                     c.over_cap ? "1" : "0"});
  }
  return out;
}

std::string esr_matrix_csv(std::span<const CalibrationReport> reports,
                           const std::string& model, double cap) {
  const auto conditions = conditions_for(reports, model);
  std::vector<std::string> header = {"effect_kind", "attribute"};
  for (auto c : conditions) header.emplace_back(to_string(c));
  header.push_back("over_cap");
  std::string out = csv_line(header);

  std::map<std::pair<PromptCondition, EffectSpec>, EsrCell> cells;
  for (auto& c : esr_heatmap_cells(reports, cap)) {
    if (c.model == model) cells[{c.condition, c.effect}] = c;
  }
  for (const auto& spec : ordered_benchmark()) {
    std::vector<std::string> row = {std::string(to_string(spec.kind)),
                                    std::string(to_string(spec.attribute))};
    std::string over;
    for (auto cond : conditions) {
      auto it = cells.find({cond, spec});
      if (it == cells.end() || !it->second.esr) {
        row.emplace_back();
        continue;
      }
      row.push_back(fmt::format("{}", *it->second.esr));
      if (it->second.over_cap) {
        if (!over.empty()) over += ';';
        over += to_string(cond);
      }
    }
    row.push_back(over);
    out += csv_line(row);
  }
  return out;
}

std::string scatter_csv(std::span<const CalibrationReport> reports,
                        const MeansTable& human_means) {
  std::string out = csv_line(
      {"model", "condition", "attribute", "context", "form", "h", "m"});
  for (const auto& r : reports) {
    for (const auto& [key, stat] : r.cell_means.cells) {
      auto it = human_means.cells.find(key);
      if (it == human_means.cells.end()) continue;
      out += csv_line({r.model_id, std::string(to_string(r.condition)),
                       std::string(to_string(key.attribute)),
                       std::string(to_string(key.context)),
                       std::string(to_string(key.form)),
                       fmt::format("{}", it->second.mean),
                       fmt::format("{}", stat.mean)});
    }
  }
  return out;
}

std::vector<std::filesystem::path> emit_figure_data(
    std::span<const CalibrationReport> reports, const MeansTable& human_means,
    const std::filesystem::path& out_dir, double cap) {
  if (reports.empty()) throw ConfigError("no reports for figure data");
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    auto path = out_dir / name;
    write_text_file(path, text);
    written.push_back(path);
  };
  emit("esr_heatmap.csv", esr_heatmap_csv(reports, cap));
  Json matrices = Json::array();
  for (const auto& model : model_order(reports)) {
    const std::string name = "esr_matrix_" + file_safe(model) + ".csv";
    emit(name, esr_matrix_csv(reports, model, cap));
    matrices.push_back(Json{{"model", model}, {"file", name}});
  }
  emit("scatter.csv", scatter_csv(reports, human_means));

  // Declarative chart descriptions (Vega-Lite); no renderer is bundled.
  Json heatmap = {
      {"$schema", "https://vega.github.io/schema/vega-lite/v5.json"},
      {"data", {{"url", "esr_heatmap.csv"}}},
      {"facet", {{"column", {{"field", "model"}, {"type", "nominal"}}}}},
      {"spec",
       {{"mark", "rect"},
        {"encoding",
         {{"x",
           {{"field", "condition"},
            {"type", "ordinal"},
            {"sort", {"MIN", "ALT", "KMA", "COM"}}}},
          {"y",
           {{"field", "attribute"},
            {"type", "nominal"},
            {"title", "effect"}}},
          {"row", {{"field", "effect_kind"}, {"type", "nominal"}}},
          {"color",
           {{"field", "esr"},
            {"type", "quantitative"},
            {"scale",
             {{"domain", {0.0, 1.0, cap}},
              {"range", {"#2166ac", "#ffffff", "#b2182b"}},
              {"clamp", true}}}}}}}}},
      {"over_cap_marker", "*"},
      {"colorscale_max", cap}};
  Json scatter = {
      {"$schema", "https://vega.github.io/schema/vega-lite/v5.json"},
      {"data", {{"url", "scatter.csv"}}},
      {"facet", {{"column", {{"field", "model"}, {"type", "nominal"}}}}},
      {"spec",
       {{"layer",
         Json::array(
             {{{"mark", "point"},
               {"encoding",
                {{"x",
                  {{"field", "h"},
                   {"type", "quantitative"},
                   {"scale", {{"domain", {1, 7}}}}}},
                 {"y",
                  {{"field", "m"},
                   {"type", "quantitative"},
                   {"scale", {{"domain", {1, 7}}}}}},
                 {"shape", {{"field", "condition"}, {"type", "nominal"}}},
                 {"color", {{"field", "condition"}, {"type", "nominal"}}}}}},
              {{"mark", {{"type", "rule"}, {"strokeDash", {4, 4}}}},
               {"encoding",
                {{"x", {{"datum", 1}}},
                 {"y", {{"datum", 1}}},
                 {"x2", {{"datum", 7}}},
                 {"y2", {{"datum", 7}}}}}}})}}}};
  Json spec = {{"schema", "smeval.charts/1"},
               {"esr_heatmap", heatmap},
               {"esr_matrices", matrices},
               {"scatter", scatter}};
  emit("chart_spec.json", spec.dump(2) + "\n");
  return written;
}

}  // namespace smeval
