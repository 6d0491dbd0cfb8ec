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

#include "smeval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "smeval/error.hpp"

namespace smeval {

MeansTable distort(const MeansTable& human, const DistortionSpec& spec) {
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) {
    throw ConfigError("distortion scale must be > 0");
  }
  if (!(spec.noise_sd >= 0.0)) {
    throw ConfigError("distortion noise_sd must be >= 0");
  }
  if (human.cells.empty()) throw ConfigError("cannot distort an empty table");

  double grand = 0.0;
  for (const auto& [k, stat] : human.cells) grand += stat.mean;
  grand /= static_cast<double>(human.cells.size());

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  MeansTable out;
  out.invalid_cells = human.invalid_cells;
  for (const auto& [k, stat] : human.cells) {
    // Unit scale skips the centering round trip so identity is exact.
    double m = spec.scale == 1.0
                   ? stat.mean + spec.shift
                   : spec.scale * (stat.mean - grand) + grand + spec.shift;
    if (spec.noise_sd > 0.0) m += spec.noise_sd * noise(rng);
    if (spec.clamp) {
      m = std::clamp(m, static_cast<double>(kLikertMin),
                     static_cast<double>(kLikertMax));
    }
    out.cells[k] = CellStat{m, stat.count};
  }
  return out;
}

}  // namespace smeval
