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

// Acceptance checks, one PASS/FAIL/SKIP line per criterion.
//
//   smeval_acceptance [--only 1,5,6] [--published-dir DIR]
//
// Criteria 2-4 need the published human and model rating files described
// by <published-dir>/manifest.json; without it they report SKIP. Exit
// status: 0 if nothing failed and something ran, 77 if everything selected
// was skipped, 1 on any failure.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prompt_text.hpp"
#include "smeval/error.hpp"
#include "smeval/metrics.hpp"
#include "smeval/promptgen.hpp"
#include "smeval/replicate.hpp"
#include "smeval/scoring.hpp"
#include "smeval/synth.hpp"
#include "test_support.hpp"

namespace {

using namespace smeval;
using testing::make_series;

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict = Verdict::kPass;
  std::string detail;
};

// Collects failed sub-checks; the first few are reported.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok) failures_.push_back(what);
  }
  void near(double actual, double expected, double tol,
            const std::string& what) {
    expect(std::abs(actual - expected) <= tol,
           fmt::format("{}: got {:.15g}, expected {:.15g}", what, actual,
                       expected));
  }
  template <typename F>
  void throws(F&& f, const std::string& what) {
    bool threw = false;
    try {
      f();
    } catch (const Error&) {
      threw = true;
    }
    expect(threw, what + " did not raise");
  }

  Outcome outcome(const std::string& summary) const {
    if (failures_.empty()) {
      return {Verdict::kPass, fmt::format("{} ({} checks)", summary, total_)};
    }
    std::string d = fmt::format("{} of {} checks failed", failures_.size(),
                                total_);
    for (std::size_t i = 0; i < failures_.size() && i < 3; ++i) {
      d += "; " + failures_[i];
    }
    return {Verdict::kFail, d};
  }

 private:
  std::size_t total_ = 0;
  std::vector<std::string> failures_;
};

std::vector<EffectEstimate> effects_with(EffectKind kind,
                                         std::vector<double> deltas) {
  std::vector<EffectEstimate> out;
  std::size_t i = 0;
  for (const auto& s : benchmark_effects()) {
    if (s.kind == kind) out.push_back({s, deltas.at(i++), std::nullopt});
  }
  return out;
}

// ---- 1: metric examples ----------------------------------------------------

Outcome metric_examples() {
  const auto start = std::chrono::steady_clock::now();
  Checks c;
  c.near(spearman_rho(make_series({1, 2, 3}, {1, 2, 3})), 1.0, 0,
         "spearman identity");
  c.near(spearman_rho(make_series({1, 2, 3}, {3, 2, 1})), -1.0, 0,
         "spearman reversal");
  c.near(spearman_rho(make_series({1, 2, 2, 4}, {1, 3, 2, 4})),
         testing::brute_spearman({1, 2, 2, 4}, {1, 3, 2, 4}), 1e-15,
         "spearman tie case");
  c.throws([] { spearman_rho(make_series({2, 2, 2}, {1, 2, 3})); },
           "spearman on constant series");
  c.near(ccc(make_series({1, 3, 2, 6}, {1, 3, 2, 6})), 1.0, 1e-15,
         "ccc identity");
  c.near(ccc(make_series({1, 2, 3}, {2, 3, 4})), 4.0 / 7.0, 1e-15,
         "ccc shift");
  c.near(ccc(make_series({1, 2, 3}, {3, 2, 1})), -1.0, 1e-15,
         "ccc reversal");
  c.throws([] { ccc(make_series({3, 3}, {3, 3})); }, "ccc zero denominator");
  c.near(rmse_means(make_series({1, 4, 6}, {1, 4, 6})), 0.0, 0,
         "rmse identity");
  c.near(rmse_means(make_series({1, 4, 6}, {1.5, 4.5, 6.5})), 0.5, 1e-15,
         "rmse offset");

  MeansTable five, four;
  for (const auto& k : all_cells()) {
    five.cells[k] = {5.0, 1};
    four.cells[k] = {4.0, 1};
  }
  const DesignCoordinates at{"bicycle", Context::kHP, Form::kPrecise,
                             Attribute::kCompetent};
  std::vector<RatingRecord> one = {{"r", at, 5, Source::kHuman}};
  std::vector<RatingRecord> two = {{"r", at, 3, Source::kHuman},
                                   {"s", at, 5, Source::kHuman}};
  c.near(rmse_individual(five, one), 0.0, 0, "rmse_individual exact");
  c.near(rmse_individual(four, two), 1.0, 1e-15, "rmse_individual symmetric");

  auto ones = effects_with(EffectKind::kMainEffect, {1, 1, 1, 1, 1});
  c.near(das(effects_with(EffectKind::kMainEffect, {2, 1, .5, 3, 1}), ones),
         1.0, 0, "das all match");
  c.near(das(effects_with(EffectKind::kMainEffect, {1, 1, 1, -1, -1}), ones),
         0.6, 0, "das 3 of 5");
  c.near(das(effects_with(EffectKind::kMainEffect, {1, 1, 1, 1, 0}), ones),
         0.8, 0, "das zero model delta");
  auto ione = effects_with(EffectKind::kInteraction, {1, 1, 1, 1, 1});
  c.near(iss(effects_with(EffectKind::kInteraction, {1, 2, 3, 1, 1}), ione),
         1.0, 0, "iss all positive");
  c.near(iss(effects_with(EffectKind::kInteraction, {1, 2, -3, 1, 1}), ione),
         0.8, 0, "iss one flipped");

  c.near(esr(0.5, 0.5), 1.0, 0, "esr match");
  c.near(esr(1.0, 0.5), 2.0, 0, "esr exaggeration");
  c.near(esr(0.0, 0.5), 0.0, 0, "esr attenuation");
  c.throws([] { esr(1.0, 0.0); }, "esr zero human delta");
  c.near(cds(std::vector<double>{1, 1, 1}), 0.0, 0, "cds ones");
  c.near(cds(std::vector<double>{0.5, 1.5}), 0.5, 0, "cds symmetric");
  c.throws([] { cds(std::vector<double>{}); }, "cds empty");

  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  c.expect(ms < 1000.0, fmt::format("runtime {:.1f} ms", ms));
  return c.outcome(fmt::format("all metric examples exact, {:.2f} ms", ms));
}

// ---- 2-4: published data ---------------------------------------------------

struct Published {
  std::optional<ReplicationOutcome> outcome;
  std::string skip_reason;
  double seconds = 0;
};

Published& published(const std::filesystem::path& dir) {
  static Published p = [&] {
    Published out;
    const auto manifest = dir / "manifest.json";
    if (!std::filesystem::exists(manifest)) {
      out.skip_reason = "published rating data not present (" +
                        manifest.string() + ")";
      return out;
    }
    const auto start = std::chrono::steady_clock::now();
    out.outcome = replicate(
        load_manifest(manifest),
        load_expected(std::filesystem::path(SMEVAL_DATA_DIR) /
                      "published_tables.json"));
    out.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return out;
  }();
  return p;
}

Outcome published_group(const std::filesystem::path& dir,
                        const std::vector<std::string>& groups,
                        const std::string& label) {
  auto& p = published(dir);
  if (!p.outcome) return {Verdict::kSkip, p.skip_reason};
  std::size_t n = 0, failed = 0;
  std::string first;
  for (const auto& c : p.outcome->checks) {
    if (std::find(groups.begin(), groups.end(), c.group) == groups.end()) {
      continue;
    }
    ++n;
    if (!c.pass) {
      if (failed++ == 0) {
        first = fmt::format("{}/{} {} = {} vs {}", c.model, c.condition,
                            c.metric,
                            c.actual ? format3(*c.actual) : "n/a",
                            format3(c.expected));
      }
    }
  }
  const std::string mode(to_string(p.outcome->granularity));
  if (n == 0) return {Verdict::kFail, "no checks for " + label};
  if (failed > 0) {
    return {Verdict::kFail,
            fmt::format("{} of {} {} values off by more than 0.01 ({} "
                        "granularity); first: {}",
                        failed, n, label, mode, first)};
  }
  return {Verdict::kPass, fmt::format("{} {} values within 0.01 ({} "
                                      "granularity, {:.2f} s)",
                                      n, label, mode, p.seconds)};
}

// ---- 5: synthetic distortion -----------------------------------------------

HumanBenchmark random_benchmark(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> likert(1, 7);
  while (true) {
    std::vector<RatingRecord> recs;
    for (const auto& coords : full_design(testing::scenario_ids(1))) {
      for (int i = 0; i < 5; ++i) {
        recs.push_back({"r" + std::to_string(i), coords, likert(rng),
                        Source::kHuman});
      }
    }
    HumanBenchmark b = build_benchmark(std::move(recs));
    bool nonzero = std::all_of(b.effects.begin(), b.effects.end(),
                               [](const auto& e) { return !is_zero_delta(e.delta); });
    if (nonzero) return b;
  }
}

Outcome synthetic_properties() {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> log_scale(std::log(0.25),
                                                   std::log(4.0));
  std::uniform_real_distribution<double> shift(0.05, 3.0);
  Checks c;
  for (int spec = 0; spec < 100; ++spec) {
    HumanBenchmark b = random_benchmark(rng);
    const double a = std::exp(log_scale(rng));
    auto scaled = distort(b.means, {a, 0.0, 0.0, 0, false});
    auto r = score_model(scaled, b, "synthetic", PromptCondition::kMIN);
    const std::string tag = fmt::format("spec {} a={:.4f}", spec, a);
    c.expect(r.calibration.has_value(), tag + " calibration missing");
    if (r.calibration) {
      c.expect(r.calibration->esr_per_effect.size() == 10,
               tag + " ESR count");
      for (const auto& [effect, v] : r.calibration->esr_per_effect) {
        c.near(v, a, 1e-9, tag + " ESR " + to_string(effect));
      }
    }
    c.near(r.das.value_or(-1), 1.0, 0, tag + " DAS");
    c.near(r.iss.value_or(-1), 1.0, 0, tag + " ISS");
    c.near(r.spearman.value_or(-1), 1.0, 1e-12, tag + " Spearman");

    double bmag = shift(rng);
    const double sign = (rng() & 1) ? 1.0 : -1.0;
    std::vector<double> mags = {bmag * 0.5, bmag, bmag * 1.5, bmag * 2.0};
    double prev_ccc = 1.0;
    for (double m : mags) {
      const double bshift = sign * m;
      auto shifted = distort(b.means, {1.0, bshift, 0.0, 0, false});
      auto s = score_model(shifted, b, "synthetic", PromptCondition::kMIN);
      const std::string stag = fmt::format("spec {} b={:.4f}", spec, bshift);
      c.near(s.rmse_mean.value_or(-1), std::abs(bshift), 1e-9,
             stag + " RMSE");
      c.near(s.spearman.value_or(-1), 1.0, 1e-12, stag + " Spearman");
      const double cc = s.ccc.value_or(2.0);
      c.expect(cc < prev_ccc, stag + fmt::format(" CCC {} not below {}", cc,
                                                 prev_ccc));
      prev_ccc = cc;
    }
  }
  return c.outcome("100 random specs: ESR = a, DAS = ISS = rho = 1, RMSE = "
                   "|b|, CCC strictly decreasing");
}

// ---- 6: oracle equivalence -------------------------------------------------

Outcome oracle_equivalence() {
  std::mt19937_64 rng(6006);
  Checks c;
  int ties = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    std::vector<double> h(n), m(n);
    auto is_constant = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(),
                         [&](double x) { return x == v[0]; });
    };
    do {
      // Few levels so ties are common.
      const int levels = 2 + static_cast<int>(rng() % 8);
      std::uniform_int_distribution<int> d(1, levels);
      for (auto& x : h) x = 1.0 + 6.0 * (d(rng) - 1) / (levels - 1 + 1e-300);
      for (auto& x : m) x = 1.0 + 0.37 * d(rng);
    } while (is_constant(h) || is_constant(m));
    if (std::set<double>(h.begin(), h.end()).size() < n) ++ties;
    auto s = make_series(h, m);
    c.near(spearman_rho(s), testing::brute_spearman(h, m), 1e-12,
           fmt::format("trial {} spearman", trial));
    c.near(ccc(s), testing::brute_ccc(h, m), 1e-12,
           fmt::format("trial {} ccc", trial));
  }
  c.expect(ties > 500, fmt::format("only {} vectors had ties", ties));
  return c.outcome(fmt::format(
      "1000 vectors (n 2-50, {} with ties) agree within 1e-12", ties));
}

// ---- 7: offline pipeline ---------------------------------------------------

std::map<std::string, std::string> tree_contents(
    const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[std::filesystem::relative(e.path(), root).generic_string()] =
          read_text_file(e.path());
    }
  }
  return out;
}

Outcome offline_pipeline() {
  testing::TempDir tmp;
  const std::string d = tmp.path().string();
  write_text_file(tmp / "human.csv",
                  testing::to_canonical_csv(testing::synthetic_human()));
  Checks c;
  // No API keys in the environment: any network path would fail.
  for (const char* v : {"OPENAI_API_KEY", "ANTHROPIC_API_KEY",
                        "GEMINI_API_KEY"}) {
    ::unsetenv(v);
  }
  c.expect(testing::run_cli("ingest-human --input " + d + "/human.csv -o " +
                            d + "/bench.json > /dev/null") == 0,
           "ingest-human");
  for (int run = 1; run <= 2; ++run) {
    const std::string r = d + "/run" + std::to_string(run);
    c.expect(testing::run_cli("gen-prompts -o " + r + "_plan.jsonl > /dev/null") == 0,
             "gen-prompts");
    c.expect(testing::run_cli("run --plan " + r + "_plan.jsonl --provider mock "
                              "--mock-hashed -n 10 --concurrency 4 --cache " +
                              r + "_cache -o " + r + "_ratings.jsonl > /dev/null") == 0,
             "run");
    std::string inputs;
    for (auto cond : kAllConditions) {
      inputs += fmt::format(" --input mock:{}:{}_ratings.jsonl",
                            to_string(cond), r);
    }
    c.expect(testing::run_cli("score --benchmark " + d + "/bench.json" +
                              inputs + " --out-dir " + r +
                              "_out > /dev/null 2>&1") == 0,
             "score");
  }
  const auto a = tree_contents(tmp / "run1_out");
  const auto b = tree_contents(tmp / "run2_out");
  c.expect(!a.empty() && a.count("reports.json") == 1, "reports.json written");
  c.expect(a == b, "outputs differ between runs");
  c.expect(read_text_file(tmp / "run1_ratings.jsonl") ==
               read_text_file(tmp / "run2_ratings.jsonl"),
           "ratings differ between runs");
  if (a.count("reports.json")) {
    auto reports = reports_from_document(Json::parse(a.at("reports.json")));
    c.expect(reports.size() == 4, "four reports");
  }
  return c.outcome(fmt::format(
      "gen-prompts -> run (mock) -> score twice, {} output files identical",
      a.size()));
}

// ---- 8: prompt fidelity ----------------------------------------------------

std::size_t occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos;
       p = hay.find(needle, p + 1)) {
    ++n;
  }
  return n;
}

Outcome prompt_fidelity() {
  const PromptSet set =
      load_prompt_set(std::filesystem::path(SMEVAL_DATA_DIR) / "prompts");
  const DesignCoordinates coords{"bicycle", Context::kHP, Form::kApproximate,
                                 Attribute::kCompetent};
  auto render = [&](PromptCondition cond) {
    return render_prompt(set.templates, set.scenarios.at("bicycle"), coords,
                         cond, set.attributes.at(Attribute::kCompetent),
                         set.template_version)
        .text;
  };
  const auto precise =
      render_prompt(set.templates, set.scenarios.at("bicycle"),
                    {"bicycle", Context::kHP, Form::kPrecise,
                     Attribute::kCompetent},
                    PromptCondition::kMIN,
                    set.attributes.at(Attribute::kCompetent),
                    set.template_version)
          .text;
  const std::string min = render(PromptCondition::kMIN);
  const std::string alt = render(PromptCondition::kALT);
  const std::string kma = render(PromptCondition::kKMA);
  const std::string com = render(PromptCondition::kCOM);

  Checks c;
  c.expect(min.find(testing::kApproximateUtterance) != std::string::npos,
           "MIN lacks the approximate utterance");
  c.expect(precise.find(testing::kPreciseUtterance) != std::string::npos,
           "precise prompt lacks the precise utterance");
  c.expect(min.find(testing::kInstructionSentence) != std::string::npos,
           "MIN lacks the instruction sentence");
  c.expect(min == testing::kMinimalCompetentPrompt,
           "MIN differs from the expected minimal prompt");
  c.expect(occurrences(alt, testing::kAltExemplar) == 1,
           "ALT lacks the exemplar block");
  c.expect(occurrences(kma, testing::kKmaBlock) == 1,
           "KMA lacks the knowledge-and-motives block");
  c.expect(occurrences(com, testing::kAltExemplar) == 1,
           "COM lacks the exemplar block");
  c.expect(occurrences(com, testing::kKmaBlock) == 1,
           "COM lacks the knowledge-and-motives block");
  c.expect(occurrences(min, testing::kAltExemplar) == 0 &&
               occurrences(min, testing::kKmaBlock) == 0,
           "MIN contains an extension block");
  return c.outcome("utterances, instruction, exemplar and KMA blocks verbatim");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smeval acceptance checks"};
  std::vector<int> only;
  std::string published_dir = SMEVAL_PUBLISHED_DIR;
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  app.add_option("--published-dir", published_dir,
                 "Directory holding manifest.json for the published data");
  CLI11_PARSE(app, argc, argv);

  const std::filesystem::path pub(published_dir);
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, metric_examples},
      {2, [&] { return published_group(pub, {"global"}, "Spearman/CCC/RMSE"); }},
      {3, [&] {
         return published_group(pub, {"calibration", "individual"},
                                "CDS/RMSE_indiv");
       }},
      {4, [&] { return published_group(pub, {"structure"}, "DAS/ISS"); }},
      {5, synthetic_properties},
      {6, oracle_equivalence},
      {7, offline_pipeline},
      {8, prompt_fidelity},
  };

  int ran = 0, failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) {
      continue;
    }
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Verdict::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::kPass   ? "PASS"
                      : o.verdict == Verdict::kFail ? "FAIL"
                                                    : "SKIP";
    std::cout << fmt::format("criterion {}: {} - {}\n", id, tag, o.detail);
    if (o.verdict != Verdict::kSkip) ++ran;
    if (o.verdict == Verdict::kFail) ++failed;
  }
  if (failed > 0) return 1;
  return ran == 0 ? 77 : 0;
}
