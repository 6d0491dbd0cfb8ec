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

// smeval: command-line front end.
//
//   smeval ingest-human  --input ratings.csv --column-map map.json -o bench.json
//   smeval gen-prompts   --prompts-dir data/prompts -o plan.jsonl
//   smeval run           --plan plan.jsonl --provider mock -o ratings.jsonl
//   smeval score         --benchmark bench.json --input gpt:MIN:ratings.jsonl
//   smeval synth         --benchmark bench.json --scale 2 -o means.json
//   smeval replicate     --manifest manifest.json --expected tables.json
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or validation
// failure.

#include <fmt/format.h>

#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smeval/error.hpp"
#include "smeval/gateway.hpp"
#include "smeval/ingest.hpp"
#include "smeval/json_io.hpp"
#include "smeval/promptgen.hpp"
#include "smeval/replicate.hpp"
#include "smeval/scoring.hpp"
#include "smeval/synth.hpp"

namespace {

using namespace smeval;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// ---- ingest-human ----------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string column_map;
  std::string effects;
  std::string output = "benchmark.json";
  std::string report;
};

int cmd_ingest(const IngestArgs& a) {
  ColumnMap map = a.column_map.empty() ? canonical_column_map()
                                       : load_column_map(a.column_map);
  map.source = Source::kHuman;
  LoadResult loaded = load_ratings(a.input, map);

  const bool custom = !a.effects.empty();
  std::vector<EffectSpec> specs = custom ? load_effect_specs(a.effects)
                                         : benchmark_effects();
  HumanBenchmark bench = build_benchmark(loaded.records, specs);
  ValidationReport v = validate_benchmark(bench, custom);

  Json report = {{"input", a.input},
                 {"data_rows", loaded.data_rows},
                 {"observations", loaded.records.size()},
                 {"raters", loaded.distinct_raters()},
                 {"rejected", loaded.rejected.size()},
                 {"custom_effects", custom},
                 {"passed", v.passed},
                 {"problems", v.problems}};
  Json rejected = Json::array();
  for (const auto& r : loaded.rejected) {
    rejected.push_back({{"line", r.line}, {"reason", r.reason}});
  }
  report["rejected_rows"] = std::move(rejected);

  write_json_file(a.output, to_json(bench));
  std::string report_path =
      a.report.empty() ? a.output + ".validation.json" : a.report;
  write_json_file(report_path, report);

  std::cout << fmt::format("{} raters, {} observations, {} rejected rows\n",
                           loaded.distinct_raters(), loaded.records.size(),
                           loaded.rejected.size());
  for (const auto& e : bench.effects) {
    std::cout << fmt::format("  {:<40} delta={:+.3f}\n", to_string(e.spec),
                             e.delta);
  }
  if (!v.passed) {
    for (const auto& p : v.problems) std::cerr << "validation: " << p << "\n";
    return kExitConfig;
  }
  std::cout << "benchmark written to " << a.output << "\n";
  return kExitOk;
}

// ---- gen-prompts -----------------------------------------------------------

struct GenArgs {
  std::string prompts_dir = SMEVAL_DATA_DIR "/prompts";
  std::vector<std::string> conditions;
  std::vector<std::string> scenarios;
  std::string output = "plan.jsonl";
};

int cmd_gen(const GenArgs& a) {
  PromptSet set = load_prompt_set(a.prompts_dir);
  std::vector<PromptCondition> conds;
  for (const auto& c : a.conditions) conds.push_back(parse_condition(c));
  if (conds.empty()) conds.assign(kAllConditions.begin(), kAllConditions.end());
  std::vector<std::string> ids =
      a.scenarios.empty() ? set.scenario_ids() : a.scenarios;
  auto plan = build_plan(set, ids, conds);
  write_text_file(a.output, to_jsonl(plan));
  std::cout << fmt::format(
      "{} prompt instances ({} scenarios x {} conditions), template {}\n",
      plan.size(), ids.size(), conds.size(), set.template_version);
  return kExitOk;
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  std::string plan;
  std::string provider = "mock";
  std::string model;
  std::string mock_response = "4";
  bool mock_hashed = false;
  std::string cache = ".smeval_cache";
  int samples = 10;
  double temperature = 1.0;
  int concurrency = 4;
  int retries = 3;
  double rpm = 60.0;
  std::string output = "ratings.jsonl";
  std::string summary;
};

std::unique_ptr<ProviderClient> make_client(const RunArgs& a) {
  if (a.provider == "mock") {
    std::string model = a.model.empty() ? "mock" : a.model;
    return a.mock_hashed ? MockProvider::hashed(model)
                         : MockProvider::constant(a.mock_response, model);
  }
  if (a.model.empty()) {
    throw ConfigError("--model is required for provider '" + a.provider + "'");
  }
  if (a.provider == "replay") return std::make_unique<ReplayProvider>(a.model);
  return HttpProvider::from_env(parse_provider_family(a.provider), a.model);
}

int cmd_run(const RunArgs& a) {
  auto plan = plan_from_jsonl(read_text_file(a.plan));
  auto client = make_client(a);
  RunConfig cfg;
  cfg.temperature = a.temperature;
  cfg.samples_per_query = a.samples;
  cfg.max_parse_retries = a.retries;
  cfg.max_concurrency = a.concurrency;
  cfg.requests_per_minute = a.provider == "mock" ? 0.0 : a.rpm;
  cfg.provider_model_id = client->provider_name() + "/" + client->model_id();
  cfg.validate();

  ResponseCache cache(a.cache);
  RunResult result = run_plan(plan, *client, cfg, cache);
  write_text_file(a.output, ratings_jsonl(result, client->model_id()));
  Json summary = to_json(result.summary);
  if (!a.summary.empty()) write_json_file(a.summary, summary);

  const auto& s = result.summary;
  std::cout << fmt::format(
      "{} samples: {} parsed, {} missing, {} failed; {} cache hits, {} "
      "calls\n",
      s.sample_slots, s.parsed, s.missing, s.failed, s.cache_hits,
      s.network_calls);
  for (const auto& inst : s.invalid_instances) {
    std::cerr << "invalid instance (>20% missing): " << inst << "\n";
  }
  return s.failed > 0 ? kExitRuntime : kExitOk;
}

// ---- score -----------------------------------------------------------------

struct ScoreArgs {
  std::string benchmark;
  std::vector<std::string> inputs;
  std::string format = "markdown";
  std::string out_dir = "results";
  std::string granularity = "pooled";
  double esr_cap = kDefaultEsrCap;
};

int cmd_score(const ScoreArgs& a) {
  HumanBenchmark bench = benchmark_from_json(read_json_file(a.benchmark));
  const Granularity g = parse_granularity(a.granularity);
  const TableFormat format = parse_table_format(a.format);

  std::vector<CalibrationReport> reports;
  for (const auto& spec : a.inputs) {
    auto parts = split(spec, ':');
    if (parts.size() < 3) {
      throw ConfigError("--input expects model:condition:path, got '" + spec +
                        "'");
    }
    std::string path = parts[2];
    for (std::size_t i = 3; i < parts.size(); ++i) path += ":" + parts[i];
    const PromptCondition cond = parse_condition(parts[1]);

    MeansTable means;
    ScenarioMeansTable per_scenario;
    bool have_scenarios = false;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
      Json j = read_json_file(path);
      means = (j.contains("cell_means") ? j.at("cell_means") : j)
                  .get<MeansTable>();
    } else {
      ModelRatings ratings = load_model_ratings_jsonl(path, to_string(cond));
      means = model_means(ratings);
      per_scenario = scenario_means(ratings.records);
      have_scenarios = true;
    }
    if (g == Granularity::kPerScenario && !have_scenarios) {
      throw ConfigError(path + ": per-scenario scoring needs ratings JSONL");
    }
    ScoreOptions opt;
    opt.granularity = g;
    opt.model_scenario_means = have_scenarios ? &per_scenario : nullptr;
    reports.push_back(score_model(means, bench, parts[0], cond, opt));
  }

  std::vector<std::filesystem::path> written;
  std::filesystem::path out(a.out_dir);
  write_json_file(out / "reports.json", reports_document(reports));
  written.push_back(out / "reports.json");
  if (format != TableFormat::kJson) {
    for (auto& p : emit_tables(reports, format, out)) written.push_back(p);
  }
  for (auto& p : emit_figure_data(reports, bench.means, out / "figures",
                                  a.esr_cap)) {
    written.push_back(p);
  }

  std::cout << global_table_markdown(reports) << "\n"
            << calibration_table_markdown(reports);
  for (const auto& r : reports) {
    for (const auto& [metric, why] : r.unavailable) {
      std::cerr << fmt::format("{}/{}: {} unavailable: {}\n", r.model_id,
                               to_string(r.condition), metric, why);
    }
  }
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  return kExitOk;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string benchmark;
  double scale = 1.0;
  double shift = 0.0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  bool clamp = false;
  std::string output = "synthetic_means.json";
};

int cmd_synth(const SynthArgs& a) {
  HumanBenchmark bench = benchmark_from_json(read_json_file(a.benchmark));
  DistortionSpec spec{a.scale, a.shift, a.noise_sd, a.seed, a.clamp};
  MeansTable m = distort(bench.means, spec);
  write_json_file(a.output, Json(m));
  std::cout << "synthetic means written to " << a.output << "\n";
  return kExitOk;
}

// ---- replicate -------------------------------------------------------------

struct ReplicateArgs {
  std::string manifest;
  std::string expected = SMEVAL_DATA_DIR "/published_tables.json";
  std::string out_dir;
};

int cmd_replicate(const ReplicateArgs& a) {
  ReplicationManifest manifest = load_manifest(a.manifest);
  ExpectedTable expected = load_expected(a.expected);
  ReplicationOutcome outcome = replicate(manifest, expected);
  std::cout << format_matrix(outcome);
  if (!a.out_dir.empty()) {
    std::filesystem::path out(a.out_dir);
    write_json_file(out / "reports.json", reports_document(outcome.reports));
    emit_tables(outcome.reports, TableFormat::kMarkdown, out);
  }
  return outcome.all_passed() ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smeval: social-meaning calibration of language models"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest =
      app.add_subcommand("ingest-human", "Build the human benchmark");
  c_ingest->add_option("--input", ingest.input, "Ratings CSV")->required();
  c_ingest->add_option("--column-map", ingest.column_map, "Column map JSON");
  c_ingest->add_option("--effects", ingest.effects,
                       "Effect set override JSON (skips the fixed set)");
  c_ingest->add_option("-o,--output", ingest.output, "Benchmark JSON");
  c_ingest->add_option("--report", ingest.report, "Validation report JSON");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-prompts", "Render the prompt plan");
  c_gen->add_option("--prompts-dir", gen.prompts_dir, "Prompt data directory");
  c_gen->add_option("--conditions", gen.conditions, "MIN ALT KMA COM")
      ->delimiter(',');
  c_gen->add_option("--scenarios", gen.scenarios, "Scenario ids")
      ->delimiter(',');
  c_gen->add_option("-o,--output", gen.output, "Plan JSONL");

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Execute a plan against a provider");
  c_run->add_option("--plan", run.plan, "Plan JSONL")->required();
  c_run->add_option("--provider", run.provider,
                    "mock, replay, openai, anthropic or gemini");
  c_run->add_option("--model", run.model, "Provider model id");
  c_run->add_option("--mock-response", run.mock_response,
                    "Constant mock completion");
  c_run->add_flag("--mock-hashed", run.mock_hashed,
                  "Mock ratings derived from a prompt hash");
  c_run->add_option("--cache", run.cache, "Response cache directory");
  c_run->add_option("-n,--samples", run.samples, "Samples per prompt");
  c_run->add_option("--temperature", run.temperature, "Sampling temperature");
  c_run->add_option("--concurrency", run.concurrency, "Worker threads");
  c_run->add_option("--max-parse-retries", run.retries,
                    "Completions per sample before Missing");
  c_run->add_option("--rpm", run.rpm, "Requests per minute (0 = unlimited)");
  c_run->add_option("-o,--output", run.output, "Ratings JSONL");
  c_run->add_option("--summary", run.summary, "Run summary JSON");

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "Score model ratings");
  c_score->add_option("--benchmark", score.benchmark, "Benchmark JSON")
      ->required();
  c_score->add_option("--input", score.inputs,
                      "model:condition:path (ratings JSONL or means JSON)")
      ->required();
  c_score->add_option("--format", score.format, "markdown, csv or json");
  c_score->add_option("--out-dir", score.out_dir, "Output directory");
  c_score->add_option("--granularity", score.granularity,
                      "pooled or per_scenario");
  c_score->add_option("--esr-cap", score.esr_cap, "ESR colour-scale cap");

  SynthArgs synth;
  auto* c_synth =
      app.add_subcommand("synth", "Distort the human means synthetically");
  c_synth->add_option("--benchmark", synth.benchmark, "Benchmark JSON")
      ->required();
  c_synth->add_option("--scale", synth.scale, "Scale about the grand mean");
  c_synth->add_option("--shift", synth.shift, "Additive shift");
  c_synth->add_option("--noise-sd", synth.noise_sd, "Gaussian noise sd");
  c_synth->add_option("--seed", synth.seed, "Noise seed");
  c_synth->add_flag("--clamp", synth.clamp, "Clamp to the 1-7 scale");
  c_synth->add_option("-o,--output", synth.output, "Means JSON");

  ReplicateArgs rep;
  auto* c_rep = app.add_subcommand(
      "replicate", "Score recorded ratings against expected tables");
  c_rep->add_option("--manifest", rep.manifest, "Manifest JSON")->required();
  c_rep->add_option("--expected", rep.expected, "Expected values JSON");
  c_rep->add_option("--out-dir", rep.out_dir, "Write reports and tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*c_ingest) return cmd_ingest(ingest);
    if (*c_gen) return cmd_gen(gen);
    if (*c_run) return cmd_run(run);
    if (*c_score) return cmd_score(score);
    if (*c_synth) return cmd_synth(synth);
    if (*c_rep) return cmd_replicate(rep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
