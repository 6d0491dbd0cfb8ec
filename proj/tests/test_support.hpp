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

// Shared fixtures: temporary directories, synthetic human ratings with a
// known effect structure, and brute-force reference implementations.

#ifndef SMEVAL_TESTS_TEST_SUPPORT_HPP_
#define SMEVAL_TESTS_TEST_SUPPORT_HPP_

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "smeval/csv.hpp"
#include "smeval/design.hpp"
#include "smeval/ingest.hpp"
#include "smeval/json_io.hpp"
#include "smeval/metrics.hpp"

namespace smeval::testing {

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("smeval_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::vector<std::string> scenario_ids(int n) {
  std::vector<std::string> ids = {"bicycle"};
  for (int i = 1; i < n; ++i) ids.push_back("scenario" + std::to_string(i));
  return ids;
}

// Integer cell centre with positive main effects and positive
// interactions for every attribute: approximate = base, precise/LP =
// base + 1, precise/HP = base + 2. Pedantic runs the other way round in
// LP so its supplementary interaction is not trivially positive.
inline int cell_centre(Attribute a, Context c, Form f) {
  const int base = 2 + static_cast<int>(a) % 3;
  if (f == Form::kApproximate) return base;
  return base + (c == Context::kHP ? 2 : 1);
}

// Four raters per coordinate with offsets {-1, 0, 0, +1} around the cell
// centre, so every pooled mean equals cell_centre exactly.
inline std::vector<RatingRecord> synthetic_human(int n_scenarios = 1) {
  static constexpr int kOffsets[] = {-1, 0, 0, 1};
  std::vector<RatingRecord> out;
  int rater = 0;
  for (const auto& coords : full_design(scenario_ids(n_scenarios))) {
    const int centre = cell_centre(coords.attribute, coords.context,
                                   coords.form);
    for (int k = 0; k < 4; ++k) {
      out.push_back(RatingRecord{"p" + std::to_string(rater++ % 40), coords,
                                 centre + kOffsets[k], Source::kHuman});
    }
  }
  return out;
}

inline std::string to_canonical_csv(const std::vector<RatingRecord>& recs) {
  std::string out =
      csv_line({"rater_id", "scenario", "context", "form", "attribute",
                "rating"});
  for (const auto& r : recs) {
    out += csv_line({r.rater_id, r.coords.scenario,
                     std::string(to_string(r.coords.context)),
                     std::string(to_string(r.coords.form)),
                     std::string(to_string(r.coords.attribute)),
                     std::to_string(r.rating)});
  }
  return out;
}

// Reference rank: 1 + (#strictly smaller) + (#ties - 1) / 2.
inline std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1;
      if (v[j] == v[i]) equal += 1;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

// Direct moment evaluation in long double.
struct BruteMoments {
  long double mean_x = 0, mean_y = 0, var_x = 0, var_y = 0, cov = 0;
};

inline BruteMoments brute_moments(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  BruteMoments m;
  const long double n = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.mean_x += x[i];
    m.mean_y += y[i];
  }
  m.mean_x /= n;
  m.mean_y /= n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double dx = x[i] - m.mean_x, dy = y[i] - m.mean_y;
    m.var_x += dx * dx;
    m.var_y += dy * dy;
    m.cov += dx * dy;
  }
  m.var_x /= n;
  m.var_y /= n;
  m.cov /= n;
  return m;
}

inline double brute_pearson(const std::vector<double>& x,
                            const std::vector<double>& y) {
  auto m = brute_moments(x, y);
  return static_cast<double>(m.cov / std::sqrt(m.var_x * m.var_y));
}

inline double brute_spearman(const std::vector<double>& h,
                             const std::vector<double>& m) {
  return brute_pearson(brute_ranks(h), brute_ranks(m));
}

inline double brute_ccc(const std::vector<double>& h,
                        const std::vector<double>& m) {
  auto mo = brute_moments(h, m);
  const long double gap = mo.mean_x - mo.mean_y;
  return static_cast<double>(2 * mo.cov / (mo.var_x + mo.var_y + gap * gap));
}

inline PairedSeries make_series(const std::vector<double>& h,
                                const std::vector<double>& m) {
  PairedSeries s;
  for (std::size_t i = 0; i < h.size(); ++i) s.push_back({h[i], m[i]});
  return s;
}

inline std::string read_file(const std::filesystem::path& p) {
  return read_text_file(p);
}

// Runs the CLI binary and returns its exit status.
inline int run_cli(const std::string& args) {
  const std::string cmd = std::string(SMEVAL_CLI_PATH) + " " + args;
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Copies the shipped prompt directory and adds clones of the bicycle
// scenario under other ids, so six-scenario plans can be built.
inline std::filesystem::path prompt_dir_with_scenarios(const TempDir& tmp,
                                                       int n_scenarios) {
  const auto dst = tmp / "prompts";
  std::filesystem::copy(std::filesystem::path(SMEVAL_DATA_DIR) / "prompts",
                        dst, std::filesystem::copy_options::recursive);
  Json bicycle = read_json_file(dst / "scenarios" / "bicycle.json");
  auto ids = scenario_ids(n_scenarios);
  for (std::size_t i = 1; i < ids.size(); ++i) {
    Json clone = bicycle;
    clone["id"] = ids[i];
    write_json_file(dst / "scenarios" / (ids[i] + ".json"), clone);
  }
  return dst;
}

}  // namespace smeval::testing

#endif  // SMEVAL_TESTS_TEST_SUPPORT_HPP_
