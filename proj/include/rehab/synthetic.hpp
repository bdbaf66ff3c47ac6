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

// Deterministic KIMORE-shaped synthetic dataset: 25-joint position and
// quaternion CSVs per subject and exercise, a score file and a manifest.
// Each subject has a latent movement quality that drives motion amplitude,
// left/right symmetry, tremor and pace, and the clinical score.

#ifndef REHAB_SYNTHETIC_HPP_
#define REHAB_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace rehab {

struct SyntheticDatasetSpec {
  int n_control = 15;
  int n_patient = 15;
  std::vector<int> exercises = {1, 2, 3, 4, 5};
  std::uint64_t seed = 2024;
  double sample_rate_hz = 30.0;
  // Single-frame spikes in some position files, one corrupt row in a few.
  bool inject_artifacts = true;
};

struct SyntheticSummary {
  std::filesystem::path manifest;
  std::size_t recordings = 0;
  std::size_t cycles = 0;  // ground-truth movement cycles over all recordings
};

// Layout under root:
//   manifest.json, scores.csv,
//   data/<CG|GPP>/<subject>/Es<exercise>/<JointPosition|JointOrientation>.csv
SyntheticSummary write_synthetic_dataset(const std::filesystem::path& root,
                                         const SyntheticDatasetSpec& spec = {});

}  // namespace rehab

#endif  // REHAB_SYNTHETIC_HPP_
