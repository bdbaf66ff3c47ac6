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

#include "rehab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "rehab/csv.hpp"
#include "rehab/error.hpp"
#include "rehab/parallel.hpp"

namespace rehab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view split_unit_name(SplitUnit unit) {
  return unit == SplitUnit::kSubject ? "subject" : "repetition";
}

SplitUnit parse_split_unit(std::string_view name) {
  if (name == "subject") return SplitUnit::kSubject;
  if (name == "repetition") return SplitUnit::kRepetition;
  throw Error(ErrorCode::kInvalidArgument, "unknown split unit '" + std::string(name) + "'");
}

void SplitSpec::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must lie in (0, 1)");
  }
}

bool SplitAssignment::is_test(const RepetitionKey& key) const {
  return unit == SplitUnit::kSubject ? test_subjects.contains(key.subject_id)
                                     : test_keys.contains(key);
}

namespace {

// Unbiased draw in [0, bound); std::uniform_int_distribution is not
// specified bit-exactly across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = bounded(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

std::size_t test_count(std::size_t units, double fraction) {
  auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(units)));
  return std::clamp<std::size_t>(n, 1, units - 1);
}

}  // namespace

SplitAssignment make_assignment(std::span<const RepetitionKey> keys, const SplitSpec& spec) {
  spec.validate();
  SplitAssignment out;
  out.unit = spec.unit;
  if (spec.unit == SplitUnit::kSubject) {
    std::set<std::string> subjects;
    for (const auto& k : keys) subjects.insert(k.subject_id);
    if (subjects.size() < 2) {
      throw Error(ErrorCode::kTooFewUnits,
                  "subject split needs >= 2 subjects, got " + std::to_string(subjects.size()));
    }
    std::vector<std::string> units(subjects.begin(), subjects.end());
    seeded_shuffle(units, spec.seed);
    const std::size_t n_test = test_count(units.size(), spec.test_fraction);
    out.test_subjects.insert(units.begin(), units.begin() + static_cast<std::ptrdiff_t>(n_test));
  } else {
    std::set<RepetitionKey> distinct(keys.begin(), keys.end());
    if (distinct.size() < 2) {
      throw Error(ErrorCode::kTooFewUnits, "repetition split needs >= 2 repetitions");
    }
    std::vector<RepetitionKey> units(distinct.begin(), distinct.end());
    seeded_shuffle(units, spec.seed);
    const std::size_t n_test = test_count(units.size(), spec.test_fraction);
    out.test_keys.insert(units.begin(), units.begin() + static_cast<std::ptrdiff_t>(n_test));
  }
  return out;
}

SplitResult apply_assignment(const SplitAssignment& assignment, std::span<const RepetitionKey> keys) {
  SplitResult out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    (assignment.is_test(keys[i]) ? out.test : out.train).push_back(i);
  }
  return out;
}

SplitResult make_split(std::span<const RepetitionKey> keys, const SplitSpec& spec) {
  return apply_assignment(make_assignment(keys, spec), keys);
}

MetricSet compute_metrics(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(predictions.size()) +
                                                " predictions vs " + std::to_string(labels.size()) +
                                                " labels");
  }
  if (labels.empty()) throw Error(ErrorCode::kEmptyInput, "no predictions to score");
  double se = 0.0, ae = 0.0, ape = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double err = std::abs(predictions[i] - labels[i]);
    se += err * err;
    ae += err;
    ape += err / std::max(std::abs(labels[i]), kMapeEpsilon);
  }
  const auto n = static_cast<double>(labels.size());
  return MetricSet{std::sqrt(se / n), ae / n, 100.0 * ape / n, labels.size()};
}

ExternalPredictions load_external_predictions(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::kIoFailure, "external predictions not found: " + path.string());
  }
  const csv::Table table = csv::read_table(path);
  const auto s = table.column("subject_id");
  const auto e = table.column("exercise_id");
  const auto r = table.column("repetition_index");
  const auto p = table.column("prediction");
  if (!s || !e || !r || !p) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + " needs columns subject_id, exercise_id, repetition_index, prediction");
  }
  ExternalPredictions out;
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::kColumnMismatch, path.string() + " has a ragged row");
    }
    const auto ex = csv::parse_int(row[*e]);
    const auto rep = csv::parse_int(row[*r]);
    const auto pred = csv::parse_double(row[*p]);
    if (!ex || !rep || !pred) throw Error(ErrorCode::kInvalidArgument, path.string() + " has a malformed row");
    RepetitionKey key{row[*s], static_cast<int>(*ex), static_cast<int>(*rep)};
    if (!out.emplace(key, *pred).second) {
      throw Error(ErrorCode::kDuplicateKey, "duplicate external prediction for " + to_string(key));
    }
  }
  return out;
}

void EvalReport::add_row(EvalRow row) {
  for (const auto& r : rows) {
    if (r.exercise_id == row.exercise_id && r.model == row.model && r.stream == row.stream &&
        r.selection == row.selection) {
      throw Error(ErrorCode::kDuplicateKey, "report already has exercise " +
                                                std::to_string(row.exercise_id) + " " + row.model +
                                                " " + std::string(stream_name(row.stream)) + " " +
                                                std::string(selection_name(row.selection)));
    }
  }
  rows.push_back(std::move(row));
}

void EvalReport::sort_rows() {
  std::stable_sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) {
    if (a.exercise_id != b.exercise_id) return a.exercise_id < b.exercise_id;
    if (a.stream != b.stream) return a.stream < b.stream;
    return a.selection < b.selection;
  });
}

namespace {

struct TableSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

TableSplit split_table(const FeatureTable& table, const SplitAssignment& assignment, int exercise) {
  TableSplit out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.keys[i].exercise_id != exercise) continue;
    (assignment.is_test(table.keys[i]) ? out.test : out.train).push_back(i);
  }
  return out;
}

int single_exercise(const FeatureTable& table) {
  if (table.size() == 0) throw Error(ErrorCode::kEmptyInput, "feature table is empty");
  const int ex = table.keys.front().exercise_id;
  for (const auto& k : table.keys) {
    if (k.exercise_id != ex) {
      throw Error(ErrorCode::kInvalidArgument, "feature table mixes exercises; filter first");
    }
  }
  return ex;
}

EvalRow start_row(const FeatureTable& table, const TableSplit& split, int exercise,
                  const std::string& model) {
  if (split.test.empty()) throw Error(ErrorCode::kEmptyInput, "no test repetitions for exercise " + std::to_string(exercise));
  if (split.train.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "no training repetitions for exercise " + std::to_string(exercise));
  }
  EvalRow row;
  row.exercise_id = exercise;
  row.model = model;
  for (std::size_t i : split.train) row.train_keys.push_back(table.keys[i]);
  for (std::size_t i : split.test) {
    row.test_keys.push_back(table.keys[i]);
    row.test_labels.push_back(table.labels[i]);
  }
  return row;
}

}  // namespace

EvalRow evaluate_fitted(const FeatureTable& table, const SplitAssignment& assignment,
                        const AnyModel& model, const std::string& label) {
  const int exercise = single_exercise(table);
  const TableSplit split = split_table(table, assignment, exercise);
  EvalRow row = start_row(table, split, exercise, label);
  for (std::size_t i : split.test) row.predictions.push_back(predict(model, table.rows[i]));
  row.metrics = compute_metrics(row.predictions, row.test_labels);
  return row;
}

EvalRow evaluate_on_table(const FeatureTable& table, const SplitAssignment& assignment,
                          const ModelSpec& model, const GbdtParams& params,
                          const ExternalPredictions* external) {
  const int exercise = single_exercise(table);
  const TableSplit split = split_table(table, assignment, exercise);
  if (model.kind == ModelKind::kExternal) {
    if (!external) throw Error(ErrorCode::kInvalidArgument, "external model without predictions");
    EvalRow row = start_row(table, split, exercise, model.name);
    std::vector<std::string> missing;
    for (const auto& key : row.test_keys) {
      const auto it = external->find(key);
      if (it == external->end()) {
        missing.push_back(to_string(key));
      } else {
        row.predictions.push_back(it->second);
      }
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw Error(ErrorCode::kMissingExternalPrediction,
                  model.name + " lacks predictions for " + list);
    }
    row.metrics = compute_metrics(row.predictions, row.test_labels);
    return row;
  }

  std::vector<double> train_labels;
  std::vector<std::vector<double>> train_rows;
  for (std::size_t i : split.train) {
    train_labels.push_back(table.labels[i]);
    train_rows.push_back(table.rows[i]);
  }
  AnyModel fitted;
  if (model.kind == ModelKind::kBaseline) {
    BaselineModel b = fit_baseline(train_labels);
    b.feature_names = table.feature_names;
    fitted = std::move(b);
  } else {
    fitted = fit_gbdt(FeatureMatrix::from_rows(train_rows), train_labels, params,
                      table.feature_names)
                 .model;
  }
  return evaluate_fitted(table, assignment, fitted, model.name);
}

namespace {

std::vector<Repetition> select_reps(std::span<const Repetition> dataset, int exercise,
                                    StreamKind stream) {
  std::vector<Repetition> out;
  for (const auto& r : dataset) {
    if (r.key.exercise_id == exercise && r.stream == stream) out.push_back(r);
  }
  std::sort(out.begin(), out.end(),
            [](const Repetition& a, const Repetition& b) { return a.key < b.key; });
  return out;
}

std::vector<RepetitionKey> exercise_keys(std::span<const Repetition> dataset, int exercise) {
  std::set<RepetitionKey> keys;
  for (const auto& r : dataset) {
    if (r.key.exercise_id == exercise) keys.insert(r.key);
  }
  return {keys.begin(), keys.end()};
}

const ExternalPredictions& load_external_for(const ModelSpec& spec,
                                             std::map<std::string, ExternalPredictions>& cache) {
  auto it = cache.find(spec.path.string());
  if (it == cache.end()) {
    it = cache.emplace(spec.path.string(), load_external_predictions(spec.path)).first;
  }
  return it->second;
}

}  // namespace

EvalRow run_experiment(const ExperimentSpec& spec, std::span<const Repetition> dataset,
                       const JointMap& joints) {
  const std::vector<Repetition> reps = select_reps(dataset, spec.exercise_id, spec.stream);
  if (reps.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no " + std::string(stream_name(spec.stream)) +
                                            " repetitions for exercise " +
                                            std::to_string(spec.exercise_id));
  }
  const std::vector<RepetitionKey> keys = exercise_keys(dataset, spec.exercise_id);
  const SplitAssignment assignment = make_assignment(keys, spec.split);
  const FeatureConfig cfg = resolve_feature_config(spec.feature_config, spec.stream, spec.selection, joints);
  const FeatureTable table = build_feature_table(reps, cfg);
  ExternalPredictions external;
  if (spec.model.kind == ModelKind::kExternal) external = load_external_predictions(spec.model.path);
  EvalRow row = evaluate_on_table(table, assignment, spec.model, spec.gbdt, &external);
  row.stream = spec.stream;
  row.selection = spec.selection;
  return row;
}

EvalReport run_matrix(std::span<const Repetition> dataset, const MatrixSpec& spec,
                      const JointMap& joints) {
  std::vector<int> exercises = spec.exercises;
  if (exercises.empty()) {
    std::set<int> present;
    for (const auto& r : dataset) present.insert(r.key.exercise_id);
    exercises.assign(present.begin(), present.end());
  }
  if (exercises.empty()) throw Error(ErrorCode::kEmptyInput, "dataset has no repetitions");

  std::map<int, SplitAssignment> assignments;
  for (int ex : exercises) assignments[ex] = make_assignment(exercise_keys(dataset, ex), spec.split);

  std::map<std::string, ExternalPredictions> external_cache;
  for (const auto& m : spec.models) {
    if (m.kind == ModelKind::kExternal) load_external_for(m, external_cache);
  }

  struct Job {
    int exercise;
    StreamKind stream;
    JointSelection selection;
  };
  std::vector<Job> jobs;
  for (int ex : exercises) {
    for (StreamKind s : spec.streams) {
      for (JointSelection sel : spec.selections) jobs.push_back({ex, s, sel});
    }
  }
  std::vector<std::vector<EvalRow>> results(jobs.size());
  parallel_for(jobs.size(), spec.workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    const std::vector<Repetition> reps = select_reps(dataset, job.exercise, job.stream);
    if (reps.empty()) {
      throw Error(ErrorCode::kEmptyInput, "no " + std::string(stream_name(job.stream)) +
                                              " repetitions for exercise " +
                                              std::to_string(job.exercise));
    }
    const FeatureConfig cfg = resolve_feature_config(spec.feature_config, job.stream, job.selection, joints);
    const FeatureTable table = build_feature_table(reps, cfg);
    for (const auto& m : spec.models) {
      const ExternalPredictions* ext = nullptr;
      if (m.kind == ModelKind::kExternal) ext = &external_cache.at(m.path.string());
      EvalRow row = evaluate_on_table(table, assignments.at(job.exercise), m, spec.gbdt, ext);
      row.stream = job.stream;
      row.selection = job.selection;
      results[j].push_back(std::move(row));
    }
  });

  EvalReport report;
  report.metadata.split = spec.split;
  report.metadata.feature_config = spec.feature_config;
  report.metadata.gbdt = spec.gbdt;
  for (auto& rows : results) {
    for (auto& row : rows) report.add_row(std::move(row));
  }
  report.sort_rows();
  return report;
}

namespace {

json metadata_json(const ReportMetadata& m) {
  json j;
  j["seed"] = m.split.seed;
  j["test_fraction"] = m.split.test_fraction;
  j["split_unit"] = split_unit_name(m.split.unit);
  j["mape_epsilon"] = kMapeEpsilon;
  j["feature_config"] = m.feature_config;
  j["gbdt_params"] = {{"n_trees", m.gbdt.n_trees},
                      {"learning_rate", m.gbdt.learning_rate},
                      {"max_depth", m.gbdt.max_depth},
                      {"lambda_l2", m.gbdt.lambda_l2},
                      {"gamma_min_gain", m.gbdt.gamma_min_gain},
                      {"min_child_weight", m.gbdt.min_child_weight},
                      {"seed", m.gbdt.seed}};
  j["code_version"] = m.code_version;
  if (!m.generated_at.empty()) j["generated_at"] = m.generated_at;
  return j;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["metadata"] = metadata_json(report.metadata);
  doc["rows"] = json::array();
  for (const auto& r : report.rows) {
    doc["rows"].push_back({{"exercise_id", r.exercise_id},
                           {"model", r.model},
                           {"stream", stream_name(r.stream)},
                           {"selection", selection_name(r.selection)},
                           {"rmse", r.metrics.rmse},
                           {"mae", r.metrics.mae},
                           {"mape_percent", r.metrics.mape_percent},
                           {"n", r.metrics.n},
                           {"n_train", r.train_keys.size()}});
  }
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "exercise_id,model,stream,selection,rmse,mae,mape_percent,n\n";
  for (const auto& r : report.rows) {
    out << r.exercise_id << ',' << r.model << ',' << stream_name(r.stream) << ','
        << selection_name(r.selection) << ',' << csv::format_double(r.metrics.rmse) << ','
        << csv::format_double(r.metrics.mae) << ',' << csv::format_double(r.metrics.mape_percent)
        << ',' << r.metrics.n << '\n';
  }
  return out.str();
}

std::vector<fs::path> emit_report(const EvalReport& report, const fs::path& out_dir) {
  if (report.rows.empty()) throw Error(ErrorCode::kEmptyInput, "report has no rows");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + out_dir.string());

  std::vector<fs::path> written;
  auto write = [&](const fs::path& p, const std::string& content) {
    csv::write_file(p, content);
    written.push_back(p);
  };
  write(out_dir / "report.json", report_to_json(report));
  write(out_dir / "report.csv", report_to_csv(report));

  // One panel file per (stream, selection): bars per model, RMSE and MAE.
  std::map<std::string, std::ostringstream> panels;
  std::map<std::string, std::ostringstream> compare;
  for (const auto& r : report.rows) {
    const std::string panel = "plot_" + std::string(stream_name(r.stream)) + "_" +
                              std::string(selection_name(r.selection)) + ".csv";
    const std::string cmp = "compare_" + std::string(selection_name(r.selection)) + ".csv";
    for (const auto& [metric, value] : {std::pair{"rmse", r.metrics.rmse}, std::pair{"mae", r.metrics.mae}}) {
      panels[panel] << r.exercise_id << ',' << r.model << ',' << metric << ','
                    << csv::format_double(value) << '\n';
      compare[cmp] << r.exercise_id << ',' << r.model << '@' << stream_name(r.stream) << ','
                   << metric << ',' << csv::format_double(value) << '\n';
    }
  }
  for (auto* group : {&panels, &compare}) {
    for (auto& [name, body] : *group) {
      write(out_dir / name, "exercise_id,model,metric,value\n" + body.str());
    }
  }
  return written;
}

std::string assignment_to_json(const std::map<int, SplitAssignment>& per_exercise,
                               const SplitSpec& spec) {
  json doc;
  doc["schema_version"] = 1;
  doc["seed"] = spec.seed;
  doc["test_fraction"] = spec.test_fraction;
  doc["unit"] = split_unit_name(spec.unit);
  doc["exercises"] = json::object();
  for (const auto& [ex, a] : per_exercise) {
    json item;
    item["test_subjects"] = std::vector<std::string>(a.test_subjects.begin(), a.test_subjects.end());
    json keys = json::array();
    for (const auto& k : a.test_keys) keys.push_back({k.subject_id, k.exercise_id, k.repetition_index});
    item["test_keys"] = keys;
    doc["exercises"][std::to_string(ex)] = item;
  }
  return doc.dump(2) + "\n";
}

std::map<int, SplitAssignment> assignment_from_json(const std::string& text) {
  std::map<int, SplitAssignment> out;
  try {
    const json doc = json::parse(text);
    const SplitUnit unit = parse_split_unit(doc.at("unit").get<std::string>());
    for (const auto& [ex, item] : doc.at("exercises").items()) {
      SplitAssignment a;
      a.unit = unit;
      for (const auto& s : item.at("test_subjects")) a.test_subjects.insert(s.get<std::string>());
      for (const auto& k : item.at("test_keys")) {
        a.test_keys.insert({k.at(0).get<std::string>(), k.at(1).get<int>(), k.at(2).get<int>()});
      }
      out[std::stoi(ex)] = std::move(a);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed split file: ") + e.what());
  }
  return out;
}

}  // namespace rehab
