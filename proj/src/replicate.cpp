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

#include "smeval/replicate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "smeval/csv.hpp"
#include "smeval/error.hpp"

namespace smeval {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

ColumnMap column_map_entry(const Json& j, const std::filesystem::path& base,
                           Source source) {
  ColumnMap m = j.is_string()
                    ? load_column_map(resolve(base, j.get<std::string>()))
                    : column_map_from_json(j);
  m.source = source;
  return m;
}

std::vector<RatingRecord> valid_records(const ModelRatings& ratings) {
  auto invalid = invalid_instances(ratings);
  std::set<DesignCoordinates> bad(invalid.begin(), invalid.end());
  std::vector<RatingRecord> out;
  for (const auto& r : ratings.records) {
    if (!bad.count(r.coords)) out.push_back(r);
  }
  return out;
}

std::string filtered_csv(const std::filesystem::path& path,
                         const ModelSource& src, char delimiter) {
  CsvTable table = read_csv(path, delimiter);
  auto idx = table.column(src.filter_column);
  if (!idx) {
    throw ConfigError(path.string() + ": no column '" + src.filter_column +
                      "'");
  }
  std::string out = csv_line(table.header, delimiter);
  for (const auto& row : table.rows) {
    if (*idx < row.fields.size() && row.fields[*idx] == src.filter_value) {
      out += csv_line(row.fields, delimiter);
    }
  }
  return out;
}

}  // namespace

ReplicationManifest load_manifest(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  const auto base = path.parent_path();
  try {
    ReplicationManifest m;
    const Json& human = j.at("human");
    m.human_path = resolve(base, human.at("path").get<std::string>());
    m.human_map = human.contains("column_map")
                      ? column_map_entry(human.at("column_map"), base,
                                         Source::kHuman)
                      : canonical_column_map(Source::kHuman);
    for (const auto& e : j.at("models")) {
      ModelSource s;
      s.model = e.at("model").get<std::string>();
      s.condition = parse_condition(e.at("condition").get<std::string>());
      s.path = resolve(base, e.at("path").get<std::string>());
      s.format = e.value("format", std::string("jsonl"));
      if (s.format != "jsonl" && s.format != "csv") {
        throw ConfigError("model source format must be jsonl or csv, got '" +
                          s.format + "'");
      }
      if (e.contains("column_map")) {
        s.column_map = column_map_entry(e.at("column_map"), base,
                                        Source::kModel);
      }
      s.filter_column = e.value("filter_column", std::string{});
      s.filter_value = e.value("filter_value", std::string{});
      m.models.push_back(std::move(s));
    }
    if (m.models.empty()) throw ConfigError("manifest lists no models");
    return m;
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ModelRatings load_model_source(const ModelSource& src) {
  if (src.format == "jsonl") {
    return load_model_ratings_jsonl(src.path, to_string(src.condition));
  }
  ColumnMap map = src.column_map ? *src.column_map
                                 : canonical_column_map(Source::kModel);
  map.source = Source::kModel;
  LoadResult loaded =
      src.filter_column.empty()
          ? load_ratings(src.path, map)
          : load_ratings_text(filtered_csv(src.path, src, map.delimiter), map);
  return model_ratings_from_records(std::move(loaded.records));
}

ExpectedTable load_expected(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    ExpectedTable t;
    t.tolerance = j.value("tolerance", 0.01);
    for (const auto& [group, metrics] : j.at("groups").items()) {
      t.groups[group] = metrics.get<std::vector<std::string>>();
    }
    for (const auto& [model, conds] : j.at("values").items()) {
      for (const auto& [cond, metrics] : conds.items()) {
        for (const auto& [metric, v] : metrics.items()) {
          t.values[model][cond][metric] = v.get<double>();
        }
      }
    }
    return t;
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

bool ReplicationOutcome::group_passed(const std::string& group) const {
  bool any = false;
  for (const auto& c : checks) {
    if (c.group != group) continue;
    any = true;
    if (!c.pass) return false;
  }
  return any;
}

bool ReplicationOutcome::all_passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(),
                     [](const auto& c) { return c.pass; });
}

std::optional<double> metric_value(const CalibrationReport& r,
                                   const std::string& metric) {
  if (metric == "spearman") return r.spearman;
  if (metric == "ccc") return r.ccc;
  if (metric == "rmse") return r.rmse_mean;
  if (metric == "rmse_individual") return r.rmse_individual;
  if (metric == "das") return r.das;
  if (metric == "iss") return r.iss;
  if (!r.calibration) return std::nullopt;
  if (metric == "cds_main") return r.calibration->cds_main;
  if (metric == "cds_interaction") return r.calibration->cds_interaction;
  if (metric == "cds") return r.calibration->cds_aggregate;
  throw ConfigError("unknown metric '" + metric + "'");
}

std::vector<ReplicationCheck> compare(
    std::span<const CalibrationReport> reports, const ExpectedTable& expected) {
  std::vector<ReplicationCheck> out;
  for (const auto& [group, metrics] : expected.groups) {
    for (const auto& [model, conds] : expected.values) {
      for (const auto& [cond, values] : conds) {
        const CalibrationReport* report = nullptr;
        for (const auto& r : reports) {
          if (r.model_id == model && to_string(r.condition) == cond) {
            report = &r;
          }
        }
        for (const auto& metric : metrics) {
          auto it = values.find(metric);
          if (it == values.end()) continue;
          ReplicationCheck c{group, model, cond, metric, it->second,
                             std::nullopt, false};
          if (report) c.actual = metric_value(*report, metric);
          c.pass = c.actual &&
                   std::abs(*c.actual - c.expected) <=
                       expected.tolerance + 1e-12;
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

namespace {

std::vector<CalibrationReport> score_all(const ReplicationManifest& manifest,
                                         const HumanBenchmark& bench,
                                         Granularity g) {
  std::vector<CalibrationReport> reports;
  for (const auto& src : manifest.models) {
    ModelRatings ratings = load_model_source(src);
    MeansTable means = model_means(ratings);
    ScenarioMeansTable per_scenario = scenario_means(valid_records(ratings));
    ScoreOptions opt;
    opt.granularity = g;
    opt.model_scenario_means = &per_scenario;
    reports.push_back(score_model(means, bench, src.model, src.condition, opt));
  }
  return reports;
}

std::size_t pass_count(const std::vector<ReplicationCheck>& checks) {
  return static_cast<std::size_t>(std::count_if(
      checks.begin(), checks.end(), [](const auto& c) { return c.pass; }));
}

}  // namespace

ReplicationOutcome replicate(const ReplicationManifest& manifest,
                             const ExpectedTable& expected) {
  LoadResult human = load_ratings(manifest.human_path, manifest.human_map);
  HumanBenchmark bench = build_benchmark(std::move(human.records));

  ReplicationOutcome best;
  best.granularity = Granularity::kPooled;
  best.reports = score_all(manifest, bench, Granularity::kPooled);
  best.checks = compare(best.reports, expected);
  best.tried.emplace_back(Granularity::kPooled, pass_count(best.checks));
  if (best.group_passed("global") || !expected.groups.count("global")) {
    return best;
  }

  ReplicationOutcome alt;
  alt.granularity = Granularity::kPerScenario;
  alt.reports = score_all(manifest, bench, Granularity::kPerScenario);
  alt.checks = compare(alt.reports, expected);
  const std::size_t alt_pass = pass_count(alt.checks);
  best.tried.emplace_back(Granularity::kPerScenario, alt_pass);
  if (alt_pass > best.tried.front().second) {
    alt.tried = best.tried;
    return alt;
  }
  return best;
}

std::string format_matrix(const ReplicationOutcome& outcome) {
  std::string out;
  for (const auto& [g, n] : outcome.tried) {
    out += fmt::format("granularity {}: {} checks passed\n", to_string(g), n);
  }
  out += fmt::format("using {}\n", to_string(outcome.granularity));
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<const ReplicationCheck*>>
      rows;
  for (const auto& c : outcome.checks) {
    rows[{c.group, c.model, c.condition}].push_back(&c);
  }
  for (const auto& [key, checks] : rows) {
    const auto& [group, model, cond] = key;
    bool pass = std::all_of(checks.begin(), checks.end(),
                            [](const auto* c) { return c->pass; });
    std::string line = fmt::format("{} {} {}/{}", pass ? "PASS" : "FAIL",
                                   group, model, cond);
    for (const auto* c : checks) {
      line += fmt::format(" {}={}(exp {})", c->metric,
                          c->actual ? format3(*c->actual) : "n/a",
                          format3(c->expected));
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace smeval
