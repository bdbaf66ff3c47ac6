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

// rehab-eval command line. Stages communicate through a workspace
// directory (--out):
//
//   repetitions/   archive written by `segment`
//   diagnostics/   per-recording peak CSVs and ingest_log.json
//   features/      <stream>_<selection>.csv and meta.json from `featurize`
//   models/        splits.json, <stream>_<selection>/ex<k>_{baseline,gbdt}.json
//                  and train_log.csv from `train`
//   report/        report.json, report.csv and plot CSVs from `evaluate`

#ifndef REHAB_CLI_HPP_
#define REHAB_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rehab/error.hpp"
#include "rehab/eval.hpp"
#include "rehab/models.hpp"
#include "rehab/preprocess.hpp"

namespace rehab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitEmptyResult = 3;
inline constexpr int kExitJoinError = 4;

// Exit code for an error raised by a pipeline stage.
int exit_code_for(ErrorCode code);

// Settings shared by every command. Loaded from --config JSON, then
// overridden by flags. Keys: manifest, segmentation, filter {order,
// cutoff_hz, zero_phase}, features, stream, joints, exercises,
// split {test_fraction, seed, unit}, gbdt {n_trees, learning_rate,
// max_depth, lambda_l2, gamma_min_gain, min_child_weight, seed}, out,
// verbosity, workers.
struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path segmentation;  // empty: built-in per-exercise defaults
  FilterSpec filter;
  std::string features = "paper44";
  std::vector<StreamKind> streams;          // empty: all present
  std::vector<JointSelection> selections;   // empty: all
  std::vector<int> exercises;               // empty: all present
  SplitSpec split;
  GbdtParams gbdt;
  std::filesystem::path out;
  int verbosity = 1;
  unsigned workers = 0;  // 0: hardware concurrency
};

// Unknown keys and malformed values throw INVALID_ARGUMENT. Relative paths
// resolve against `base_dir`.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);

// argv-style entry point without the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rehab

#endif  // REHAB_CLI_HPP_
