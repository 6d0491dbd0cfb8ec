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

#include "smeval/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "smeval/csv.hpp"
#include "smeval/error.hpp"
#include "smeval/metrics.hpp"

namespace smeval {

namespace {

constexpr std::array<std::string_view, 6> kLogicalFields = {
    "rater_id", "scenario", "context", "form", "attribute", "rating"};

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::string normalise(std::string_view s) {
  std::string out = trim(s);
  for (char& c : out) {
    if (c == '-' || c == ' ') {
      c = '_';
    } else {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

// Integer Likert value; accepts "5" and "5.0".
std::optional<int> parse_rating(std::string_view text) {
  std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{}) return std::nullopt;
  std::string_view rest(ptr, s.data() + s.size() - ptr);
  if (!rest.empty()) {
    if (rest.front() != '.') return std::nullopt;
    rest.remove_prefix(1);
    if (rest.empty()) return std::nullopt;
    for (char c : rest) {
      if (c != '0') return std::nullopt;
    }
  }
  return value;
}

class ValueMapper {
 public:
  explicit ValueMapper(const ColumnMap& map) : map_(map) {}

  // Maps through the value map for `field` if one exists, then normalises.
  std::string canonical(const std::string& field, std::string_view raw) {
    std::string value = trim(raw);
    auto fm = map_.value_maps.find(field);
    if (fm != map_.value_maps.end()) {
      auto it = fm->second.find(value);
      if (it != fm->second.end()) return it->second;
    }
    return field == "scenario" ? value : normalise(value);
  }

  template <typename Parse>
  auto decode(const std::string& field, std::string_view raw, Parse parse)
      -> decltype(parse(std::string_view{})) {
    auto v = parse(canonical(field, raw));
    if (!v) unmapped_[field].insert(trim(raw));
    return v;
  }

  void throw_if_unmapped() const {
    if (unmapped_.empty()) return;
    std::string msg = "unmapped categorical values:";
    for (const auto& [field, values] : unmapped_) {
      msg += " " + field + " {";
      bool first = true;
      for (const auto& v : values) {
        if (!first) msg += ", ";
        msg += "'" + v + "'";
        first = false;
      }
      msg += "}";
    }
    throw ConfigError(msg);
  }

 private:
  const ColumnMap& map_;
  std::map<std::string, std::set<std::string>> unmapped_;
};

}  // namespace

ColumnMap column_map_from_json(const Json& j) {
  ColumnMap m;
  if (j.contains("columns")) {
    for (const auto& [k, v] : j.at("columns").items()) {
      if (std::find(kLogicalFields.begin(), kLogicalFields.end(), k) ==
          kLogicalFields.end()) {
        throw ConfigError("column map: unknown logical field '" + k + "'");
      }
      m.columns[k] = v.get<std::string>();
    }
  }
  if (j.contains("attribute_columns")) {
    for (const auto& [k, v] : j.at("attribute_columns").items()) {
      m.attribute_columns[parse_attribute(k)] = v.get<std::string>();
    }
  }
  if (j.contains("value_maps")) {
    for (const auto& [field, values] : j.at("value_maps").items()) {
      for (const auto& [src, dst] : values.items()) {
        m.value_maps[field][src] = dst.get<std::string>();
      }
    }
  }
  if (j.contains("delimiter")) {
    auto d = j.at("delimiter").get<std::string>();
    if (d == "\\t" || d == "tab") d = "\t";
    if (d.size() != 1) throw ConfigError("column map: delimiter must be 1 char");
    m.delimiter = d[0];
  }
  if (j.contains("source")) {
    m.source = parse_source(j.at("source").get<std::string>());
  }
  m.max_reject_fraction = j.value("max_reject_fraction", 0.05);

  std::vector<std::string_view> needed = {"rater_id", "scenario", "context",
                                          "form"};
  if (!m.is_wide()) {
    needed.push_back("attribute");
    needed.push_back("rating");
  } else if (m.attribute_columns.size() != kAllAttributes.size()) {
    throw ConfigError("column map: wide format must map all six attributes");
  }
  for (auto f : needed) {
    if (!m.columns.contains(std::string(f))) {
      throw ConfigError("column map: logical field '" + std::string(f) +
                        "' is not mapped");
    }
  }
  return m;
}

Json to_json(const ColumnMap& m) {
  Json j;
  j["columns"] = m.columns;
  if (m.is_wide()) {
    Json ac = Json::object();
    for (const auto& [a, col] : m.attribute_columns) {
      ac[std::string(to_string(a))] = col;
    }
    j["attribute_columns"] = std::move(ac);
  }
  j["value_maps"] = m.value_maps;
  j["delimiter"] = std::string(1, m.delimiter);
  j["source"] = to_string(m.source);
  j["max_reject_fraction"] = m.max_reject_fraction;
  return j;
}

ColumnMap load_column_map(const std::filesystem::path& path) {
  try {
    return column_map_from_json(read_json_file(path));
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ColumnMap canonical_column_map(Source source) {
  ColumnMap m;
  for (auto f : kLogicalFields) m.columns[std::string(f)] = std::string(f);
  m.source = source;
  return m;
}

std::size_t LoadResult::distinct_raters() const {
  std::set<std::string_view> ids;
  for (const auto& r : records) ids.insert(r.rater_id);
  return ids.size();
}

LoadResult load_ratings_text(std::string_view text, const ColumnMap& map) {
  CsvTable table = parse_csv(text, map.delimiter);

  auto require = [&](const std::string& column) {
    auto idx = table.column(column);
    if (!idx) {
      throw ConfigError("input has no column '" + column + "'");
    }
    return *idx;
  };
  auto field_column = [&](std::string_view field) {
    auto it = map.columns.find(std::string(field));
    if (it == map.columns.end()) {
      throw ConfigError("column map: logical field '" + std::string(field) +
                        "' is not mapped");
    }
    return require(it->second);
  };

  const std::size_t rater_col = field_column("rater_id");
  const std::size_t scenario_col = field_column("scenario");
  const std::size_t context_col = field_column("context");
  const std::size_t form_col = field_column("form");

  std::vector<std::pair<std::optional<std::size_t>, std::size_t>> rating_cols;
  std::optional<std::size_t> attribute_col;
  std::vector<Attribute> wide_attributes;
  if (map.is_wide()) {
    for (const auto& [a, col] : map.attribute_columns) {
      wide_attributes.push_back(a);
      rating_cols.push_back({std::nullopt, require(col)});
    }
  } else {
    attribute_col = field_column("attribute");
    rating_cols.push_back({attribute_col, field_column("rating")});
  }

  ValueMapper mapper(map);
  LoadResult result;
  std::size_t observations = 0;
  for (const auto& row : table.rows) {
    ++result.data_rows;
    if (row.fields.size() != table.header.size()) {
      result.rejected.push_back(
          {row.line, "expected " + std::to_string(table.header.size()) +
                         " fields, found " +
                         std::to_string(row.fields.size())});
      observations += rating_cols.size();
      continue;
    }
    auto context = mapper.decode("context", row.fields[context_col],
                                 try_parse_context);
    auto form = mapper.decode("form", row.fields[form_col], try_parse_form);
    std::string scenario =
        mapper.canonical("scenario", row.fields[scenario_col]);
    std::string rater = trim(row.fields[rater_col]);

    for (std::size_t i = 0; i < rating_cols.size(); ++i) {
      ++observations;
      std::optional<Attribute> attribute;
      if (map.is_wide()) {
        attribute = wide_attributes[i];
      } else {
        attribute = mapper.decode("attribute", row.fields[*attribute_col],
                                  try_parse_attribute);
      }
      const std::string& raw = row.fields[rating_cols[i].second];
      auto rating = parse_rating(raw);
      if (!rating || !is_likert(*rating)) {
        std::string where = map.is_wide()
                                ? " (" + std::string(to_string(*attribute)) + ")"
                                : "";
        result.rejected.push_back(
            {row.line, "rating '" + trim(raw) + "' is not an integer in [1, 7]" +
                           where});
        continue;
      }
      if (!context || !form || !attribute || scenario.empty()) continue;
      result.records.push_back(RatingRecord{
          rater, DesignCoordinates{scenario, *context, *form, *attribute},
          *rating, map.source});
    }
  }
  mapper.throw_if_unmapped();

  if (observations > 0 &&
      static_cast<double>(result.rejected.size()) >
          map.max_reject_fraction * static_cast<double>(observations)) {
    std::ostringstream msg;
    msg << result.rejected.size() << " of " << observations
        << " observations rejected (limit "
        << map.max_reject_fraction * 100.0 << "%)";
    for (std::size_t i = 0; i < result.rejected.size() && i < 5; ++i) {
      msg << "; line " << result.rejected[i].line << ": "
          << result.rejected[i].reason;
    }
    throw ConfigError(msg.str());
  }
  return result;
}

LoadResult load_ratings(const std::filesystem::path& path,
                        const ColumnMap& map) {
  try {
    return load_ratings_text(read_text_file(path), map);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

MeansTable condition_means(std::span<const RatingRecord> records) {
  auto cells = all_cells();
  return condition_means(records, cells);
}

MeansTable condition_means(std::span<const RatingRecord> records,
                           std::span<const CellKey> required) {
  if (records.empty()) throw ConfigError("no rating records");
  std::map<CellKey, std::pair<long long, std::size_t>> sums;
  for (const auto& r : records) {
    auto& [sum, n] = sums[cell_of(r.coords)];
    sum += r.rating;
    ++n;
  }
  std::string missing;
  for (const auto& k : required) {
    if (!sums.contains(k)) {
      if (!missing.empty()) missing += ", ";
      missing += to_string(k);
    }
  }
  if (!missing.empty()) throw ConfigError("empty cells: " + missing);

  MeansTable table;
  for (const auto& [k, sn] : sums) {
    // Integer sums keep the mean independent of record order.
    table.cells[k] = CellStat{static_cast<double>(sn.first) /
                                  static_cast<double>(sn.second),
                              sn.second};
  }
  return table;
}

ScenarioMeansTable scenario_means(std::span<const RatingRecord> records) {
  std::map<DesignCoordinates, std::pair<long long, std::size_t>> sums;
  for (const auto& r : records) {
    auto& [sum, n] = sums[r.coords];
    sum += r.rating;
    ++n;
  }
  ScenarioMeansTable out;
  for (const auto& [c, sn] : sums) {
    out[c] = CellStat{static_cast<double>(sn.first) /
                          static_cast<double>(sn.second),
                      sn.second};
  }
  return out;
}

EffectEstimate compute_effect(const MeansTable& means, const EffectSpec& spec) {
  auto form_delta = [&](Context c) {
    return means.mean(spec.attribute, c, Form::kPrecise) -
           means.mean(spec.attribute, c, Form::kApproximate);
  };
  const double hp = form_delta(Context::kHP);
  const double lp = form_delta(Context::kLP);
  EffectEstimate e;
  e.spec = spec;
  e.per_context_deltas = std::make_pair(hp, lp);
  e.delta = spec.kind == EffectKind::kMainEffect ? (hp + lp) / 2.0 : hp - lp;
  return e;
}

std::vector<EffectEstimate> compute_effects(const MeansTable& means,
                                            std::span<const EffectSpec> specs) {
  std::vector<EffectEstimate> out;
  out.reserve(specs.size());
  for (const auto& s : specs) out.push_back(compute_effect(means, s));
  return out;
}

HumanBenchmark build_benchmark(std::vector<RatingRecord> records) {
  return build_benchmark(std::move(records), benchmark_effects());
}

HumanBenchmark build_benchmark(std::vector<RatingRecord> records,
                               std::span<const EffectSpec> specs) {
  HumanBenchmark b;
  b.means = condition_means(records);
  b.scenario_means = scenario_means(records);
  b.effects = compute_effects(b.means, specs);
  std::vector<EffectSpec> extra;
  for (const auto& s : supplementary_effects()) {
    bool scored = std::any_of(specs.begin(), specs.end(), [&](const auto& x) {
      return x.kind == s.kind && x.attribute == s.attribute;
    });
    if (!scored) extra.push_back(s);
  }
  b.supplementary_effects = compute_effects(b.means, extra);
  b.individual_ratings = std::move(records);
  return b;
}

ValidationReport validate_benchmark(const HumanBenchmark& bench,
                                    bool allow_custom_effects) {
  ValidationReport report;
  auto fail = [&](std::string msg) {
    report.passed = false;
    report.problems.push_back(std::move(msg));
  };
  if (!allow_custom_effects) {
    std::vector<EffectSpec> got;
    for (const auto& e : bench.effects) got.push_back(e.spec);
    std::vector<EffectSpec> want = benchmark_effects();
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got != want) {
      fail("effect set differs from the fixed ten-effect benchmark");
    }
  }
  for (const auto& e : bench.effects) {
    if (!std::isfinite(e.delta)) {
      fail(to_string(e.spec) + ": non-finite delta");
    } else if (is_zero_delta(e.delta)) {
      fail(to_string(e.spec) + ": zero human delta");
    } else if ((e.delta > 0 ? 1 : -1) != e.spec.expected_sign) {
      std::ostringstream msg;
      msg << to_string(e.spec) << ": delta " << e.delta
          << " has the wrong sign (expected " << (e.spec.expected_sign > 0 ? "+" : "-")
          << ")";
      fail(msg.str());
    }
  }
  return report;
}

Json to_json(const HumanBenchmark& b) {
  Json j;
  j["schema"] = "smeval.benchmark/1";
  j["means"] = b.means;
  Json scen = Json::array();
  for (const auto& [c, stat] : b.scenario_means) {
    Json row = c;
    row["mean"] = stat.mean;
    row["count"] = stat.count;
    scen.push_back(std::move(row));
  }
  j["scenario_means"] = std::move(scen);
  j["effects"] = b.effects;
  j["supplementary_effects"] = b.supplementary_effects;
  j["individual_ratings"] = b.individual_ratings;
  return j;
}

HumanBenchmark benchmark_from_json(const Json& j) {
  try {
    HumanBenchmark b;
    b.means = j.at("means").get<MeansTable>();
    if (j.contains("scenario_means")) {
      for (const auto& row : j.at("scenario_means")) {
        b.scenario_means[row.get<DesignCoordinates>()] =
            CellStat{row.at("mean").get<double>(),
                     row.value("count", std::size_t{0})};
      }
    }
    b.effects = j.at("effects").get<std::vector<EffectEstimate>>();
    if (j.contains("supplementary_effects")) {
      b.supplementary_effects =
          j.at("supplementary_effects").get<std::vector<EffectEstimate>>();
    }
    if (j.contains("individual_ratings")) {
      b.individual_ratings =
          j.at("individual_ratings").get<std::vector<RatingRecord>>();
    }
    return b;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("benchmark document: ") + e.what());
  }
}

std::vector<EffectSpec> load_effect_specs(const std::filesystem::path& path) {
  Json j = read_json_file(path);
  try {
    return j.at("effects").get<std::vector<EffectSpec>>();
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ModelRatings parse_model_ratings_jsonl(std::string_view text,
                                       std::string_view condition) {
  const std::string wanted = normalise(condition);
  ModelRatings out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      Json j = Json::parse(line);
      if (!wanted.empty() && j.contains("condition") &&
          normalise(j.at("condition").get<std::string>()) != wanted) {
        continue;
      }
      DesignCoordinates c = j.get<DesignCoordinates>();
      ++out.total[c];
      if (j.at("rating").is_null()) {
        ++out.missing[c];
        continue;
      }
      RatingRecord r = j.get<RatingRecord>();
      if (!is_likert(r.rating)) {
        throw ConfigError("rating out of range");
      }
      out.records.push_back(std::move(r));
    } catch (const Json::exception& e) {
      throw ConfigError("ratings line " + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("ratings line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return out;
}

ModelRatings load_model_ratings_jsonl(const std::filesystem::path& path,
                                      std::string_view condition) {
  try {
    return parse_model_ratings_jsonl(read_text_file(path), condition);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ModelRatings model_ratings_from_records(std::vector<RatingRecord> records) {
  ModelRatings out;
  for (const auto& r : records) ++out.total[r.coords];
  out.records = std::move(records);
  return out;
}

std::vector<DesignCoordinates> invalid_instances(const ModelRatings& ratings) {
  std::vector<DesignCoordinates> out;
  for (const auto& [c, total] : ratings.total) {
    auto it = ratings.missing.find(c);
    std::size_t missing = it == ratings.missing.end() ? 0 : it->second;
    if (total > 0 && static_cast<double>(missing) >
                         kMaxMissingFraction * static_cast<double>(total)) {
      out.push_back(c);
    }
  }
  return out;
}

MeansTable model_means(const ModelRatings& ratings) {
  std::set<CellKey> invalid;
  for (const auto& c : invalid_instances(ratings)) invalid.insert(cell_of(c));

  std::vector<RatingRecord> kept;
  kept.reserve(ratings.records.size());
  for (const auto& r : ratings.records) {
    if (!invalid.contains(cell_of(r.coords))) kept.push_back(r);
  }
  MeansTable table;
  if (!kept.empty()) {
    std::vector<CellKey> none;
    table = condition_means(kept, none);
  }
  table.invalid_cells.assign(invalid.begin(), invalid.end());
  return table;
}

}  // namespace smeval
