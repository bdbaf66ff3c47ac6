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

// Experiment harness: shared deterministic splits, per-exercise training,
// error metrics and report emission.

#ifndef REHAB_EVAL_HPP_
#define REHAB_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rehab/features.hpp"
#include "rehab/mocap.hpp"
#include "rehab/models.hpp"

namespace rehab {

inline constexpr double kMapeEpsilon = 1e-8;
inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "0.1.0";

enum class SplitUnit { kSubject, kRepetition };
std::string_view split_unit_name(SplitUnit unit);
SplitUnit parse_split_unit(std::string_view name);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  SplitUnit unit = SplitUnit::kSubject;

  void validate() const;
};

// Which units went to the test side. Applying one assignment to several
// repetition lists (streams, selections) gives every model the same split.
struct SplitAssignment {
  SplitUnit unit = SplitUnit::kSubject;
  std::set<std::string> test_subjects;
  std::set<RepetitionKey> test_keys;

  bool is_test(const RepetitionKey& key) const;
};

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Shuffles the sorted distinct units with a seeded mt19937_64 and sends the
// first max(1, round(fraction * units)) to test, keeping at least one unit
// for training. Throws TOO_FEW_UNITS below two units.
SplitAssignment make_assignment(std::span<const RepetitionKey> keys, const SplitSpec& spec);
SplitResult apply_assignment(const SplitAssignment& assignment, std::span<const RepetitionKey> keys);
SplitResult make_split(std::span<const RepetitionKey> keys, const SplitSpec& spec);

struct MetricSet {
  double rmse = 0.0;
  double mae = 0.0;
  double mape_percent = 0.0;
  std::size_t n = 0;
};

MetricSet compute_metrics(std::span<const double> predictions, std::span<const double> labels);

using ExternalPredictions = std::map<RepetitionKey, double>;
// CSV with header subject_id,exercise_id,repetition_index,prediction.
ExternalPredictions load_external_predictions(const std::filesystem::path& path);

enum class ModelKind { kBaseline, kGbdt, kExternal };

struct ModelSpec {
  ModelKind kind = ModelKind::kBaseline;
  std::string name = "baseline";  // report label
  std::filesystem::path path;     // kExternal only

  static ModelSpec baseline() { return {ModelKind::kBaseline, "baseline", {}}; }
  static ModelSpec gbdt() { return {ModelKind::kGbdt, "gbdt", {}}; }
  static ModelSpec external(std::string name, std::filesystem::path path) {
    return {ModelKind::kExternal, std::move(name), std::move(path)};
  }
};

struct EvalRow {
  int exercise_id = 0;
  std::string model;
  StreamKind stream = StreamKind::kPosition;
  JointSelection selection = JointSelection::kFull;
  MetricSet metrics;
  // In-memory detail; only sizes are serialized.
  std::vector<RepetitionKey> train_keys;
  std::vector<RepetitionKey> test_keys;
  std::vector<double> test_labels;
  std::vector<double> predictions;
};

struct ReportMetadata {
  SplitSpec split;
  std::string feature_config = "paper44";
  GbdtParams gbdt;
  std::string code_version = kCodeVersion;
  std::string generated_at;  // omitted when empty
};

struct EvalReport {
  ReportMetadata metadata;
  std::vector<EvalRow> rows;

  // Throws DUPLICATE_KEY if (exercise, model, stream, selection) repeats.
  void add_row(EvalRow row);
  // Stable order: exercise, stream, selection, then insertion order of models.
  void sort_rows();
};

// Model evaluation on one feature table. Fits on the assignment's train
// rows (BASELINE/GBDT) or joins external predictions, then scores the test rows.
EvalRow evaluate_on_table(const FeatureTable& table, const SplitAssignment& assignment,
                          const ModelSpec& model, const GbdtParams& params,
                          const ExternalPredictions* external = nullptr);

// Scores an already-trained model on the test rows.
EvalRow evaluate_fitted(const FeatureTable& table, const SplitAssignment& assignment,
                        const AnyModel& model, const std::string& label);

struct ExperimentSpec {
  int exercise_id = 1;
  StreamKind stream = StreamKind::kPosition;
  JointSelection selection = JointSelection::kFull;
  ModelSpec model;
  SplitSpec split;
  std::string feature_config = "paper44";
  GbdtParams gbdt;
};

EvalRow run_experiment(const ExperimentSpec& spec, std::span<const Repetition> dataset,
                       const JointMap& joints = JointMap::kinect_v2());

struct MatrixSpec {
  std::vector<int> exercises;  // empty: every exercise present
  std::vector<ModelSpec> models = {ModelSpec::baseline(), ModelSpec::gbdt()};
  std::vector<StreamKind> streams = {StreamKind::kPosition, StreamKind::kOrientation};
  std::vector<JointSelection> selections = {JointSelection::kFull, JointSelection::kVr};
  SplitSpec split;
  std::string feature_config = "paper44";
  GbdtParams gbdt;
  unsigned workers = 1;
};

// Cartesian product with one split per exercise computed over the union of
// that exercise's repetition keys across streams.
EvalReport run_matrix(std::span<const Repetition> dataset, const MatrixSpec& spec,
                      const JointMap& joints = JointMap::kinect_v2());

std::string report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);

// Writes report.json, report.csv and plot-data CSVs
// (plot_<stream>_<selection>.csv, compare_<selection>.csv); returns the paths.
std::vector<std::filesystem::path> emit_report(const EvalReport& report,
                                               const std::filesystem::path& out_dir);

std::string assignment_to_json(const std::map<int, SplitAssignment>& per_exercise,
                               const SplitSpec& spec);
std::map<int, SplitAssignment> assignment_from_json(const std::string& text);

}  // namespace rehab

#endif  // REHAB_EVAL_HPP_
