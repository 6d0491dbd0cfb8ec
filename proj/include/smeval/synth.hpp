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

#ifndef SMEVAL_SYNTH_HPP_
#define SMEVAL_SYNTH_HPP_

#include <cstdint>

#include "smeval/design.hpp"

namespace smeval {

// m = scale * (h - grand_mean) + grand_mean + shift + N(0, noise_sd)
struct DistortionSpec {
  double scale = 1.0;
  double shift = 0.0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  bool clamp = false;  // clamp to [1, 7]
};

// Synthetic "model" means with a known distortion of `human`. The grand
// mean is taken over the cells present. Noise is drawn per cell in table
// order from a seeded mt19937_64, so results are reproducible. Throws
// ConfigError for scale <= 0 or noise_sd < 0.
MeansTable distort(const MeansTable& human, const DistortionSpec& spec);

}  // namespace smeval

#endif  // SMEVAL_SYNTH_HPP_
