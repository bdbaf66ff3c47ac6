/*
 * Copyright 2026 The rehabeval Authors.
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

// Brute-force split search used to check find_best_split: every feature,
// every midpoint between distinct values, children formed by re-partitioning
// the members from scratch.

#ifndef REHAB_TESTS_SPLIT_ORACLE_HPP_
#define REHAB_TESTS_SPLIT_ORACLE_HPP_

#include <algorithm>
#include <optional>
#include <random>
#include <vector>

#include "rehab/models.hpp"

namespace rehab::testing {

inline std::optional<SplitCandidate> brute_force_split(const FeatureMatrix& x,
                                                       const std::vector<double>& grad,
                                                       const std::vector<double>& hess,
                                                       const std::vector<std::size_t>& members,
                                                       const GbdtParams& params) {
  std::optional<SplitCandidate> best;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> values;
    for (std::size_t r : members) values.push_back(x(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double threshold = values[i] + (values[i + 1] - values[i]) / 2.0;
      double gl = 0.0, hl = 0.0, gr = 0.0, hr = 0.0;
      for (std::size_t r : members) {
        if (x(r, f) < threshold) {
          gl += grad[r];
          hl += hess[r];
        } else {
          gr += grad[r];
          hr += hess[r];
        }
      }
      if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
      const double gain = 0.5 * (gl * gl / (hl + params.lambda_l2) + gr * gr / (hr + params.lambda_l2) -
                                 (gl + gr) * (gl + gr) / (hl + hr + params.lambda_l2)) -
                          params.gamma_min_gain;
      if (gain > 0.0 && (!best || gain > best->gain)) best = SplitCandidate{f, threshold, gain};
    }
  }
  return best;
}

struct SplitInstance {
  FeatureMatrix x;
  std::vector<double> grad;
  std::vector<double> hess;
  std::vector<std::size_t> members;
  GbdtParams params;
};

// Gradients and hessians are random dyadic rationals, so every partial sum
// over at most 12 rows is exact and ties between candidates are real ties.
// Half of the instances use small-integer feature values to force duplicates.
inline SplitInstance random_split_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> rows_d(2, 12), cols_d(1, 4), val_d(0, 5), g_d(-4096, 4096),
      h_d(16, 128);
  std::uniform_real_distribution<double> real_d(-1.0, 1.0);
  SplitInstance s;
  const int rows = rows_d(rng), cols = cols_d(rng);
  const bool integer_values = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
  s.x = FeatureMatrix(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) s.x(r, c) = integer_values ? val_d(rng) : real_d(rng);
    s.grad.push_back(g_d(rng) / 1024.0);
    s.hess.push_back(h_d(rng) / 64.0);
  }
  for (int r = 0; r < rows; ++r) {
    if (std::uniform_int_distribution<int>(0, 4)(rng) != 0) s.members.push_back(r);
  }
  s.params.lambda_l2 = std::uniform_int_distribution<int>(0, 2)(rng);
  s.params.min_child_weight = std::uniform_int_distribution<int>(0, 3)(rng);
  return s;
}

}  // namespace rehab::testing

#endif  // REHAB_TESTS_SPLIT_ORACLE_HPP_
