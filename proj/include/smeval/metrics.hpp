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

// Human-vs-model agreement metrics.
//
// Global pattern similarity compares paired condition means (h, m):
// Spearman rank correlation, Lin's concordance correlation coefficient and
// RMSE. Structural alignment (DAS, ISS) checks the sign of each benchmark
// effect. Magnitude calibration compares effect sizes: ESR = |dM| / |dH|
// per effect and CDS = mean |ESR - 1| over effects with non-zero dH.

#ifndef SMEVAL_METRICS_HPP_
#define SMEVAL_METRICS_HPP_

#include <cmath>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "smeval/design.hpp"

namespace smeval {

struct PairedValue {
  double h = 0.0;
  double m = 0.0;
};

using PairedSeries = std::vector<PairedValue>;

// Pairs the cells present in both tables (all 24 for complete tables).
// Throws ConfigError if the key sets differ.
PairedSeries pair_means(const MeansTable& human, const MeansTable& model);
PairedSeries pair_scenario_means(const ScenarioMeansTable& human,
                                 const ScenarioMeansTable& model);

// Fractional ranks (1-based, ties get the average of their positions).
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation (population moments). MetricError when either side
// is constant or the series is shorter than 2.
double pearson(std::span<const PairedValue> series);

// Pearson correlation of average ranks.
double spearman_rho(std::span<const PairedValue> series);

// 2 s_hm / (s_h^2 + s_m^2 + (mean_h - mean_m)^2), population moments.
double ccc(std::span<const PairedValue> series);

double rmse_means(std::span<const PairedValue> series);

// sqrt(mean over human records of (rating - model cell mean)^2).
double rmse_individual(const MeansTable& model_means,
                       std::span<const RatingRecord> human_individuals);

// Effect deltas within this distance of zero are treated as zero. Cell means
// are averages of integers, so a delta that is zero in exact arithmetic can
// come out as round-off.
inline constexpr double kZeroDeltaTolerance = 1e-12;

inline bool is_zero_delta(double d) { return std::abs(d) <= kZeroDeltaTolerance; }

// Fraction of main effects (resp. interactions) in `human_effects` whose
// model delta has the same sign. A zero model delta is a mismatch. Both
// lists must carry the same specs of that kind.
double das(std::span<const EffectEstimate> model_effects,
           std::span<const EffectEstimate> human_effects);
double iss(std::span<const EffectEstimate> model_effects,
           std::span<const EffectEstimate> human_effects);

// |delta_m| / |delta_h|; MetricError when delta_h is zero.
double esr(double delta_m, double delta_h);

// Mean of |ESR_i - 1|; MetricError on an empty list.
double cds(std::span<const double> esr_values);

struct CalibrationScores {
  std::map<EffectSpec, double> esr_per_effect;
  double cds_main = 0.0;
  double cds_interaction = 0.0;
  double cds_aggregate = 0.0;
  std::vector<EffectSpec> excluded;  // zero human delta

  bool operator==(const CalibrationScores&) const = default;
};

// ESR for every human effect with non-zero delta; CDS over main effects,
// interactions and all of them.
CalibrationScores calibration_scores(
    std::span<const EffectEstimate> model_effects,
    std::span<const EffectEstimate> human_effects);

}  // namespace smeval

#endif  // SMEVAL_METRICS_HPP_
