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

#include "smeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "smeval/error.hpp"

namespace smeval {

namespace {

struct Moments {
  double mean_h = 0.0;
  double mean_m = 0.0;
  double var_h = 0.0;
  double var_m = 0.0;
  double cov = 0.0;
};

// Two-pass population moments.
Moments moments(std::span<const PairedValue> s) {
  Moments mo;
  const double n = static_cast<double>(s.size());
  for (const auto& p : s) {
    mo.mean_h += p.h;
    mo.mean_m += p.m;
  }
  mo.mean_h /= n;
  mo.mean_m /= n;
  for (const auto& p : s) {
    const double dh = p.h - mo.mean_h;
    const double dm = p.m - mo.mean_m;
    mo.var_h += dh * dh;
    mo.var_m += dm * dm;
    mo.cov += dh * dm;
  }
  mo.var_h /= n;
  mo.var_m /= n;
  mo.cov /= n;
  return mo;
}

bool all_equal(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) ==
         v.end();
}

void require_finite(std::span<const PairedValue> s) {
  for (const auto& p : s) {
    if (!std::isfinite(p.h) || !std::isfinite(p.m)) {
      throw MetricError("series contains a non-finite value");
    }
  }
}

double sign_agreement(std::span<const EffectEstimate> model_effects,
                      std::span<const EffectEstimate> human_effects,
                      EffectKind kind) {
  std::map<EffectSpec, double> human;
  for (const auto& e : human_effects) {
    if (e.spec.kind == kind) human[e.spec] = e.delta;
  }
  std::map<EffectSpec, double> model;
  for (const auto& e : model_effects) {
    if (e.spec.kind == kind) model[e.spec] = e.delta;
  }
  if (human.empty()) {
    throw MetricError(std::string("no ") + std::string(to_string(kind)) +
                      " effects to score");
  }
  std::size_t matches = 0;
  for (const auto& [spec, dh] : human) {
    auto it = model.find(spec);
    if (it == model.end()) {
      throw ConfigError("model effects lack " + to_string(spec));
    }
    if (is_zero_delta(dh)) {
      throw MetricError(to_string(spec) + ": zero human delta");
    }
    const double dm = it->second;
    if (!is_zero_delta(dm) && (dm > 0.0) == (dh > 0.0)) ++matches;
  }
  if (model.size() != human.size()) {
    throw ConfigError(std::string("model and human ") +
                      std::string(to_string(kind)) + " sets differ");
  }
  return static_cast<double>(matches) / static_cast<double>(human.size());
}

}  // namespace

PairedSeries pair_means(const MeansTable& human, const MeansTable& model) {
  PairedSeries out;
  out.reserve(human.cells.size());
  for (const auto& [k, stat] : human.cells) {
    auto it = model.cells.find(k);
    if (it == model.cells.end()) {
      throw ConfigError("model means lack cell " + to_string(k));
    }
    out.push_back({stat.mean, it->second.mean});
  }
  if (model.cells.size() != human.cells.size()) {
    throw ConfigError("model means have cells absent from the human table");
  }
  return out;
}

PairedSeries pair_scenario_means(const ScenarioMeansTable& human,
                                 const ScenarioMeansTable& model) {
  PairedSeries out;
  out.reserve(human.size());
  for (const auto& [c, stat] : human) {
    auto it = model.find(c);
    if (it == model.end()) {
      throw ConfigError("model means lack cell " + to_string(c));
    }
    out.push_back({stat.mean, it->second.mean});
  }
  if (model.size() != human.size()) {
    throw ConfigError("model means have cells absent from the human table");
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] < values[b];
                   });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share rank mean(i+1..j+1).
    const double rank = (static_cast<double>(i + j) + 2.0) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const PairedValue> series) {
  if (series.size() < 2) {
    throw MetricError("undefined correlation: fewer than 2 pairs");
  }
  require_finite(series);
  std::vector<double> h, m;
  for (const auto& p : series) {
    h.push_back(p.h);
    m.push_back(p.m);
  }
  if (all_equal(h) || all_equal(m)) {
    throw MetricError("undefined correlation: constant series");
  }
  const Moments mo = moments(series);
  return mo.cov / std::sqrt(mo.var_h * mo.var_m);
}

double spearman_rho(std::span<const PairedValue> series) {
  if (series.size() < 2) {
    throw MetricError("undefined correlation: fewer than 2 pairs");
  }
  require_finite(series);
  std::vector<double> h, m;
  h.reserve(series.size());
  m.reserve(series.size());
  for (const auto& p : series) {
    h.push_back(p.h);
    m.push_back(p.m);
  }
  if (all_equal(h) || all_equal(m)) {
    throw MetricError("undefined correlation: constant series");
  }
  const auto rh = average_ranks(h);
  const auto rm = average_ranks(m);
  PairedSeries ranked(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) ranked[i] = {rh[i], rm[i]};
  return std::clamp(pearson(ranked), -1.0, 1.0);
}

double ccc(std::span<const PairedValue> series) {
  if (series.size() < 2) {
    throw MetricError("undefined concordance: fewer than 2 pairs");
  }
  require_finite(series);
  const Moments mo = moments(series);
  const double gap = mo.mean_h - mo.mean_m;
  const double denom = mo.var_h + mo.var_m + gap * gap;
  if (denom == 0.0) {
    throw MetricError("undefined concordance: zero denominator");
  }
  return 2.0 * mo.cov / denom;
}

double rmse_means(std::span<const PairedValue> series) {
  if (series.empty()) throw MetricError("RMSE of an empty series");
  require_finite(series);
  double ss = 0.0;
  for (const auto& p : series) ss += (p.h - p.m) * (p.h - p.m);
  return std::sqrt(ss / static_cast<double>(series.size()));
}

double rmse_individual(const MeansTable& model_means,
                       std::span<const RatingRecord> human_individuals) {
  if (human_individuals.empty()) {
    throw MetricError("RMSE over no individual ratings");
  }
  double ss = 0.0;
  for (const auto& r : human_individuals) {
    auto it = model_means.cells.find(cell_of(r.coords));
    if (it == model_means.cells.end()) {
      throw ConfigError("model means lack cell " + to_string(r.coords));
    }
    const double d = static_cast<double>(r.rating) - it->second.mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(human_individuals.size()));
}

double das(std::span<const EffectEstimate> model_effects,
           std::span<const EffectEstimate> human_effects) {
  return sign_agreement(model_effects, human_effects, EffectKind::kMainEffect);
}

double iss(std::span<const EffectEstimate> model_effects,
           std::span<const EffectEstimate> human_effects) {
  return sign_agreement(model_effects, human_effects,
                        EffectKind::kInteraction);
}

double esr(double delta_m, double delta_h) {
  if (is_zero_delta(delta_h)) {
    throw MetricError("effect excluded: zero human delta");
  }
  return std::abs(delta_m) / std::abs(delta_h);
}

double cds(std::span<const double> esr_values) {
  if (esr_values.empty()) throw MetricError("CDS over no effects");
  double sum = 0.0;
  for (double v : esr_values) sum += std::abs(v - 1.0);
  return sum / static_cast<double>(esr_values.size());
}

CalibrationScores calibration_scores(
    std::span<const EffectEstimate> model_effects,
    std::span<const EffectEstimate> human_effects) {
  std::map<EffectSpec, double> model;
  for (const auto& e : model_effects) model[e.spec] = e.delta;

  CalibrationScores out;
  std::vector<double> main_esr, inter_esr, all_esr;
  for (const auto& h : human_effects) {
    if (is_zero_delta(h.delta)) {
      out.excluded.push_back(h.spec);
      continue;
    }
    auto it = model.find(h.spec);
    if (it == model.end()) {
      throw ConfigError("model effects lack " + to_string(h.spec));
    }
    const double v = esr(it->second, h.delta);
    out.esr_per_effect[h.spec] = v;
  }
  // Map order keeps the sums independent of input ordering.
  for (const auto& [spec, v] : out.esr_per_effect) {
    (spec.kind == EffectKind::kMainEffect ? main_esr : inter_esr).push_back(v);
    all_esr.push_back(v);
  }
  if (all_esr.empty()) throw MetricError("CDS over no effects");
  out.cds_main = main_esr.empty() ? 0.0 : cds(main_esr);
  out.cds_interaction = inter_esr.empty() ? 0.0 : cds(inter_esr);
  out.cds_aggregate = cds(all_esr);
  return out;
}

}  // namespace smeval
