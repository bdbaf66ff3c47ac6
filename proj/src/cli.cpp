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

#include "rehab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "rehab/archive.hpp"
#include "rehab/csv.hpp"
#include "rehab/error.hpp"
#include "rehab/features.hpp"
#include "rehab/ingest.hpp"
#include "rehab/parallel.hpp"
#include "rehab/synthetic.hpp"

namespace rehab {

namespace fs = std::filesystem;
using json = nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoRepetitions:
      return kExitEmptyResult;
    case ErrorCode::kMissingExternalPrediction:
      return kExitJoinError;
    default:
      return kExitInputError;
  }
}

namespace {

[[noreturn]] void bad_config(const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, "config: " + msg);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) bad_config(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) bad_config("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
std::vector<T> one_or_many(const json& v, T (*parse)(std::string_view)) {
  std::vector<T> out;
  if (v.is_string()) {
    out.push_back(parse(v.get<std::string>()));
  } else if (v.is_array()) {
    for (const auto& item : v) out.push_back(parse(item.get<std::string>()));
  } else {
    bad_config("expected a string or an array of strings");
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

unsigned worker_count(const RunConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string combo_name(StreamKind stream, JointSelection selection) {
  return std::string(stream_name(stream)) + "_" + std::string(selection_name(selection));
}

bool wanted_exercise(const RunConfig& cfg, int exercise) {
  return cfg.exercises.empty() ||
         std::find(cfg.exercises.begin(), cfg.exercises.end(), exercise) != cfg.exercises.end();
}

void require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
}

void reset_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
}

FeatureTable filter_table(const FeatureTable& table, int exercise) {
  FeatureTable out;
  out.feature_names = table.feature_names;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.keys[i].exercise_id != exercise) continue;
    out.keys.push_back(table.keys[i]);
    out.labels.push_back(table.labels[i]);
    out.rows.push_back(table.rows[i]);
  }
  return out;
}

std::set<int> table_exercises(const FeatureTable& table) {
  std::set<int> out;
  for (const auto& k : table.keys) out.insert(k.exercise_id);
  return out;
}

// ---------------------------------------------------------------- segment

struct PairOutput {
  std::string subject;
  int exercise = 0;
  std::vector<Repetition> reps;
  std::string diagnostics;  // empty when not segmented
  std::string drop_reason;
  bool no_repetitions = false;
};

std::vector<Segment> clip_segments(const std::vector<Segment>& segments, std::size_t n_frames) {
  std::vector<Segment> out;
  for (Segment s : segments) {
    s.end = std::min(s.end, n_frames);
    if (s.begin < s.end && s.length() >= 2) out.push_back(s);
  }
  return out;
}

PairOutput segment_pair(const SkeletonRecording* position, const SkeletonRecording* orientation,
                        const SegmentationSpec& seg, const FilterSpec& filt) {
  PairOutput out;
  const SkeletonRecording& any = position ? *position : *orientation;
  out.subject = any.subject_id;
  out.exercise = any.exercise_id;
  if (!position) {
    out.drop_reason = "no position recording to segment against";
    return out;
  }
  SegmentationResult result;
  FilterSpec spec = filt;
  spec.sample_rate_hz = position->sample_rate_hz;
  try {
    result.raw_channel = segmentation_channel(*position, seg);
    result.filtered_channel = apply_filter(result.raw_channel, spec);
    result.peaks = detect_peaks(result.filtered_channel, seg, position->sample_rate_hz);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSignalTooShort) throw;
    out.drop_reason = e.what();
    return out;
  }
  out.diagnostics = peak_diagnostics_csv(result);
  try {
    result.segments = segments_from_peaks(result.peaks.accepted, position->frames.frame_count());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoRepetitions) throw;
    out.drop_reason = e.what();
    out.no_repetitions = true;
    return out;
  }
  for (std::size_t k = 0; k < result.segments.size(); ++k) {
    out.reps.push_back(resample_repetition(*position, result.segments[k], static_cast<int>(k)));
  }
  if (orientation) {
    // Orientation shares the position boundaries; indices stay aligned.
    const std::size_t n = orientation->frames.frame_count();
    for (std::size_t k = 0; k < result.segments.size(); ++k) {
      const auto clipped = clip_segments({result.segments[k]}, n);
      if (clipped.empty()) continue;
      out.reps.push_back(resample_repetition(*orientation, clipped.front(), static_cast<int>(k)));
    }
  }
  return out;
}

int cmd_segment(const RunConfig& cfg, std::ostream& out) {
  require_out(cfg);
  if (cfg.manifest.empty()) throw Error(ErrorCode::kInvalidArgument, "--manifest is required");
  if (!fs::is_regular_file(cfg.manifest)) {
    throw Error(ErrorCode::kIoFailure, "manifest not found: " + cfg.manifest.string());
  }
  const IngestManifest manifest = load_manifest(cfg.manifest);
  const SegmentationConfig seg =
      cfg.segmentation.empty()
          ? SegmentationConfig::defaults(manifest.joint_map)
          : SegmentationConfig::from_json(csv::read_file(cfg.segmentation), manifest.joint_map);
  seg.fallback.validate(manifest.sample_rate_hz, 3);
  for (const auto& [ex, s] : seg.per_exercise) s.validate(manifest.sample_rate_hz, 3);
  FilterSpec filt = cfg.filter;
  filt.sample_rate_hz = manifest.sample_rate_hz;
  filt.validate();
  const ScoreTable scores = load_scores(manifest.score_file, manifest);
  const ScanResult scan = scan_dataset(manifest.dataset_root, manifest);

  std::vector<DatasetEntry> entries;
  for (const auto& e : scan.entries) {
    if (wanted_exercise(cfg, e.exercise_id)) entries.push_back(e);
  }
  if (entries.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                "no recordings under " + manifest.dataset_root.string() + " match the manifest");
  }
  const unsigned workers = worker_count(cfg);
  std::vector<LoadResult> loaded(entries.size());
  parallel_for(entries.size(), workers, [&](std::size_t i) {
    try {
      loaded[i] = load_recording(entries[i], manifest, scores);
    } catch (const Error& e) {
      throw Error(e.code(), entries[i].path.string() + ": " + e.what());
    }
  });

  std::map<ScoreKey, std::pair<const SkeletonRecording*, const SkeletonRecording*>> pairs;
  for (const auto& l : loaded) {
    auto& slot = pairs[{l.recording.subject_id, l.recording.exercise_id}];
    (l.recording.stream == StreamKind::kPosition ? slot.first : slot.second) = &l.recording;
  }
  std::vector<std::pair<const SkeletonRecording*, const SkeletonRecording*>> jobs;
  for (const auto& [key, p] : pairs) jobs.push_back(p);
  std::vector<PairOutput> results(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const auto* any = jobs[i].first ? jobs[i].first : jobs[i].second;
    results[i] = segment_pair(jobs[i].first, jobs[i].second, seg.for_exercise(any->exercise_id), filt);
  });

  std::vector<Repetition> reps;
  std::size_t drops = 0, position_reps = 0, orientation_reps = 0;
  bool any_no_reps = false;
  for (auto& r : results) {
    if (!r.drop_reason.empty()) ++drops;
    any_no_reps = any_no_reps || r.no_repetitions;
    for (auto& rep : r.reps) {
      (rep.stream == StreamKind::kPosition ? position_reps : orientation_reps)++;
      reps.push_back(std::move(rep));
    }
  }
  if (reps.empty()) {
    if (any_no_reps) throw Error(ErrorCode::kNoRepetitions, "no recording yielded a repetition");
    throw Error(ErrorCode::kEmptyInput, "no recording could be segmented");
  }

  const fs::path archive_dir = cfg.out / "repetitions";
  const fs::path diag_dir = cfg.out / "diagnostics";
  reset_dir(archive_dir);
  reset_dir(diag_dir);
  write_archive(archive_dir, reps);
  for (const auto& r : results) {
    if (r.diagnostics.empty()) continue;
    csv::write_file(diag_dir / (r.subject + "_ex" + std::to_string(r.exercise) + "_peaks.csv"),
                    r.diagnostics);
  }
  IngestLog log;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    log.files.push_back({entries[i].path, loaded[i].dropped_rows, loaded[i].dropped_lines,
                         loaded[i].renormalized_quaternions, {}});
  }
  log.unmatched = scan.unmatched;
  csv::write_file(diag_dir / "ingest_log.json", log.to_json());

  if (cfg.verbosity >= 1) {
    std::size_t dropped_rows = 0;
    for (const auto& l : loaded) dropped_rows += l.dropped_rows;
    out << "recordings       " << loaded.size() << "\n"
        << "repetitions      " << reps.size() << " (position " << position_reps << ", orientation "
        << orientation_reps << ")\n"
        << "dropped pairs    " << drops << "\n"
        << "dropped rows     " << dropped_rows << "\n"
        << "unmatched files  " << scan.unmatched.size() << "\n";
  }
  if (cfg.verbosity >= 2) {
    for (const auto& r : results) {
      if (!r.drop_reason.empty()) out << "  " << r.subject << " ex" << r.exercise << ": " << r.drop_reason << "\n";
    }
  }
  return kExitOk;
}

// -------------------------------------------------------------- featurize

int cmd_featurize(const RunConfig& cfg, std::ostream& out) {
  require_out(cfg);
  const std::vector<Repetition> archive = read_archive(cfg.out / "repetitions");
  std::set<StreamKind> present;
  for (const auto& r : archive) present.insert(r.stream);
  std::vector<StreamKind> streams = cfg.streams;
  if (streams.empty()) streams.assign(present.begin(), present.end());
  std::vector<JointSelection> selections = cfg.selections;
  if (selections.empty()) selections = {JointSelection::kFull, JointSelection::kVr};

  struct Job {
    StreamKind stream;
    JointSelection selection;
    FeatureConfig config;
    std::vector<Repetition> reps;
  };
  std::vector<Job> jobs;
  for (StreamKind s : streams) {
    std::vector<Repetition> reps;
    for (const auto& r : archive) {
      if (r.stream == s && wanted_exercise(cfg, r.key.exercise_id)) reps.push_back(r);
    }
    if (reps.empty()) {
      throw Error(ErrorCode::kEmptyInput, "the archive holds no selected " +
                                              std::string(stream_name(s)) + " repetitions");
    }
    std::sort(reps.begin(), reps.end(),
              [](const Repetition& a, const Repetition& b) { return a.key < b.key; });
    for (JointSelection sel : selections) {
      jobs.push_back({s, sel, resolve_feature_config(cfg.features, s, sel), reps});
    }
  }
  const unsigned workers = worker_count(cfg);
  std::vector<FeatureTable> tables;
  for (const auto& job : jobs) tables.push_back(build_feature_table(job.reps, job.config, workers));

  const fs::path dir = cfg.out / "features";
  reset_dir(dir);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string name = combo_name(jobs[i].stream, jobs[i].selection) + ".csv";
    csv::write_file(dir / name, tables[i].to_csv());
    if (cfg.verbosity >= 1) {
      out << "features/" << name << "  rows " << tables[i].size() << "  features "
          << tables[i].feature_names.size() << "\n";
    }
  }
  json meta;
  meta["schema_version"] = 1;
  meta["feature_config"] = cfg.features;
  csv::write_file(dir / "meta.json", meta.dump(2) + "\n");
  return kExitOk;
}

// ------------------------------------------------------------------ train

struct Combo {
  StreamKind stream;
  JointSelection selection;
  bool operator<(const Combo& o) const {
    return std::tie(stream, selection) < std::tie(o.stream, o.selection);
  }
};

// Feature matrices present in the workspace, in (stream, selection) order.
std::vector<Combo> present_combos(const fs::path& features_dir) {
  std::vector<Combo> out;
  for (StreamKind s : {StreamKind::kPosition, StreamKind::kOrientation}) {
    for (JointSelection sel : {JointSelection::kFull, JointSelection::kVr}) {
      if (fs::is_regular_file(features_dir / (combo_name(s, sel) + ".csv"))) out.push_back({s, sel});
    }
  }
  return out;
}

std::vector<Combo> requested_combos(const RunConfig& cfg, const std::vector<Combo>& present,
                                    const std::string& what) {
  std::vector<Combo> out;
  for (const Combo& c : present) {
    const bool stream_ok = cfg.streams.empty() ||
                           std::count(cfg.streams.begin(), cfg.streams.end(), c.stream);
    const bool sel_ok = cfg.selections.empty() ||
                        std::count(cfg.selections.begin(), cfg.selections.end(), c.selection);
    if (stream_ok && sel_ok) out.push_back(c);
  }
  for (StreamKind s : cfg.streams) {
    for (JointSelection sel : cfg.selections.empty()
                                  ? std::vector<JointSelection>{}
                                  : cfg.selections) {
      if (!std::count_if(out.begin(), out.end(),
                         [&](const Combo& c) { return c.stream == s && c.selection == sel; })) {
        throw Error(ErrorCode::kIoFailure, "no " + what + " for " + combo_name(s, sel));
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::kIoFailure, "no " + what + " match the request");
  return out;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  require_out(cfg);
  const fs::path features_dir = cfg.out / "features";
  const std::vector<Combo> present = present_combos(features_dir);
  if (present.empty()) {
    throw Error(ErrorCode::kIoFailure, "no feature matrices under " + features_dir.string());
  }
  const std::vector<Combo> combos = requested_combos(cfg, present, "feature matrix");

  std::map<Combo, FeatureTable> tables;
  for (const Combo& c : present) {
    tables[c] = FeatureTable::from_csv(features_dir / (combo_name(c.stream, c.selection) + ".csv"));
  }
  // One split per exercise over every key in the workspace, so all streams
  // and selections see the same partition.
  std::map<int, std::set<RepetitionKey>> keys;
  for (const auto& [c, t] : tables) {
    for (const auto& k : t.keys) {
      if (wanted_exercise(cfg, k.exercise_id)) keys[k.exercise_id].insert(k);
    }
  }
  if (keys.empty()) throw Error(ErrorCode::kEmptyInput, "feature matrices hold no selected rows");
  std::map<int, SplitAssignment> assignments;
  for (const auto& [ex, ks] : keys) {
    const std::vector<RepetitionKey> list(ks.begin(), ks.end());
    assignments[ex] = make_assignment(list, cfg.split);
  }

  struct Job {
    Combo combo;
    int exercise;
    std::string baseline_json;
    std::string gbdt_json;
    std::vector<double> loss;
  };
  std::vector<Job> jobs;
  for (const Combo& c : combos) {
    for (int ex : table_exercises(tables.at(c))) {
      if (assignments.count(ex)) jobs.push_back({c, ex, {}, {}, {}});
    }
  }
  parallel_for(jobs.size(), worker_count(cfg), [&](std::size_t i) {
    Job& job = jobs[i];
    const FeatureTable sub = filter_table(tables.at(job.combo), job.exercise);
    const SplitAssignment& a = assignments.at(job.exercise);
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    for (std::size_t r = 0; r < sub.size(); ++r) {
      if (a.is_test(sub.keys[r])) continue;
      rows.push_back(sub.rows[r]);
      labels.push_back(sub.labels[r]);
    }
    if (rows.empty()) {
      throw Error(ErrorCode::kEmptyTrainingSet,
                  "exercise " + std::to_string(job.exercise) + " has no training rows");
    }
    BaselineModel baseline = fit_baseline(labels);
    baseline.feature_names = sub.feature_names;
    job.baseline_json = serialize_model(AnyModel{baseline});
    GbdtFitResult fit = fit_gbdt(FeatureMatrix::from_rows(rows), labels, cfg.gbdt, sub.feature_names);
    job.gbdt_json = serialize_model(AnyModel{std::move(fit.model)});
    job.loss = std::move(fit.loss_history);
  });

  const fs::path models_dir = cfg.out / "models";
  reset_dir(models_dir);
  csv::write_file(models_dir / "splits.json", assignment_to_json(assignments, cfg.split));
  std::map<Combo, std::ostringstream> logs;
  for (const Job& job : jobs) {
    const fs::path dir = models_dir / combo_name(job.combo.stream, job.combo.selection);
    const std::string stem = "ex" + std::to_string(job.exercise);
    csv::write_file(dir / (stem + "_baseline.json"), job.baseline_json);
    csv::write_file(dir / (stem + "_gbdt.json"), job.gbdt_json);
    auto& log = logs[job.combo];
    for (std::size_t r = 0; r < job.loss.size(); ++r) {
      log << job.exercise << ',' << r << ',' << csv::format_double(job.loss[r]) << '\n';
    }
  }
  for (const auto& [c, log] : logs) {
    csv::write_file(models_dir / combo_name(c.stream, c.selection) / "train_log.csv",
                    "exercise_id,round,train_mse\n" + log.str());
  }
  if (cfg.verbosity >= 1) {
    for (const Combo& c : combos) {
      std::size_t n = 0;
      for (const Job& j : jobs) n += (j.combo.stream == c.stream && j.combo.selection == c.selection);
      out << "models/" << combo_name(c.stream, c.selection) << "  exercises " << n << "  files "
          << 2 * n << "\n";
    }
  }
  return kExitOk;
}

// --------------------------------------------------------------- evaluate

struct ExternalArg {
  std::string name;
  fs::path path;
};

ExternalArg parse_external(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw Error(ErrorCode::kInvalidArgument, "--external expects NAME=PATH, got '" + arg + "'");
  }
  ExternalArg out{arg.substr(0, eq), arg.substr(eq + 1)};
  if (out.name == "baseline" || out.name == "gbdt") {
    throw Error(ErrorCode::kInvalidArgument, "external model name '" + out.name + "' is reserved");
  }
  if (!fs::is_regular_file(out.path)) {
    throw Error(ErrorCode::kIoFailure, "external predictions not found: " + out.path.string());
  }
  return out;
}

SplitSpec split_spec_from_json(const std::string& text) {
  SplitSpec spec;
  try {
    const json doc = json::parse(text);
    spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.test_fraction = doc.at("test_fraction").get<double>();
    spec.unit = parse_split_unit(doc.at("unit").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed split file: ") + e.what());
  }
  return spec;
}

void check_model_features(const AnyModel& model, const FeatureTable& table, const fs::path& path) {
  if (feature_names(model) != table.feature_names) {
    throw Error(ErrorCode::kFeatureLengthMismatch,
                path.string() + " was trained on different features than the matrix");
  }
}

int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& external_args,
                 std::ostream& out) {
  require_out(cfg);
  std::vector<ExternalArg> externals;
  std::set<std::string> names;
  for (const auto& a : external_args) {
    externals.push_back(parse_external(a));
    if (!names.insert(externals.back().name).second) {
      throw Error(ErrorCode::kInvalidArgument, "external model '" + externals.back().name + "' given twice");
    }
  }
  const fs::path models_dir = cfg.out / "models";
  const fs::path features_dir = cfg.out / "features";
  const fs::path splits_path = models_dir / "splits.json";
  if (!fs::is_regular_file(splits_path)) {
    throw Error(ErrorCode::kIoFailure, "split file not found: " + splits_path.string() + " (run train)");
  }
  const std::string splits_text = csv::read_file(splits_path);
  const std::map<int, SplitAssignment> assignments = assignment_from_json(splits_text);
  const SplitSpec split = split_spec_from_json(splits_text);

  std::vector<Combo> trained;
  for (const Combo& c : present_combos(features_dir)) {
    if (fs::is_directory(models_dir / combo_name(c.stream, c.selection))) trained.push_back(c);
  }
  const std::vector<Combo> combos = requested_combos(cfg, trained, "trained models");

  std::vector<ExternalPredictions> predictions;
  for (const auto& e : externals) predictions.push_back(load_external_predictions(e.path));

  EvalReport report;
  report.metadata.split = split;
  const fs::path meta_path = features_dir / "meta.json";
  if (fs::is_regular_file(meta_path)) {
    try {
      report.metadata.feature_config =
          json::parse(csv::read_file(meta_path)).at("feature_config").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, meta_path.string() + ": " + e.what());
    }
  }
  bool have_params = false;
  for (const Combo& c : combos) {
    const FeatureTable table =
        FeatureTable::from_csv(features_dir / (combo_name(c.stream, c.selection) + ".csv"));
    for (int ex : table_exercises(table)) {
      if (!wanted_exercise(cfg, ex) || !assignments.count(ex)) continue;
      const FeatureTable sub = filter_table(table, ex);
      const SplitAssignment& a = assignments.at(ex);
      const fs::path dir = models_dir / combo_name(c.stream, c.selection);
      for (const char* kind : {"baseline", "gbdt"}) {
        const fs::path path = dir / ("ex" + std::to_string(ex) + "_" + kind + ".json");
        if (!fs::is_regular_file(path)) throw Error(ErrorCode::kIoFailure, "model not found: " + path.string());
        const AnyModel model = load_model(path);
        check_model_features(model, sub, path);
        if (const auto* g = std::get_if<GbdtModel>(&model); g && !have_params) {
          report.metadata.gbdt = g->params;
          have_params = true;
        }
        EvalRow row = evaluate_fitted(sub, a, model, kind);
        row.stream = c.stream;
        row.selection = c.selection;
        report.add_row(std::move(row));
      }
      for (std::size_t e = 0; e < externals.size(); ++e) {
        EvalRow row = evaluate_on_table(sub, a, ModelSpec::external(externals[e].name, externals[e].path),
                                        cfg.gbdt, &predictions[e]);
        row.stream = c.stream;
        row.selection = c.selection;
        report.add_row(std::move(row));
      }
    }
  }
  if (report.rows.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to evaluate");
  report.sort_rows();
  report.metadata.generated_at = now_utc();

  const fs::path report_dir = cfg.out / "report";
  reset_dir(report_dir);
  emit_report(report, report_dir);
  if (cfg.verbosity >= 1) {
    out << std::left << std::setw(4) << "ex" << std::setw(14) << "model" << std::setw(12) << "stream"
        << std::setw(6) << "joints" << std::right << std::setw(10) << "rmse" << std::setw(10) << "mae"
        << std::setw(10) << "mape%" << std::setw(6) << "n" << "\n";
    for (const auto& r : report.rows) {
      out << std::left << std::setw(4) << r.exercise_id << std::setw(14) << r.model << std::setw(12)
          << stream_name(r.stream) << std::setw(6) << selection_name(r.selection) << std::right
          << std::fixed << std::setprecision(4) << std::setw(10) << r.metrics.rmse << std::setw(10)
          << r.metrics.mae << std::setprecision(2) << std::setw(10) << r.metrics.mape_percent
          << std::setw(6) << r.metrics.n << "\n";
      out.unsetf(std::ios::fixed);
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- predict

std::vector<double> parse_row(const std::string& text) {
  std::vector<double> values;
  for (const auto& cell : csv::split(text, ',')) {
    const auto v = csv::parse_double(cell);
    if (!v) throw Error(ErrorCode::kInvalidArgument, "malformed feature row: '" + text + "'");
    values.push_back(*v);
  }
  return values;
}

void check_row_width(const AnyModel& model, std::size_t width) {
  const auto& names = feature_names(model);
  if (!names.empty() && names.size() != width) {
    throw Error(ErrorCode::kFeatureLengthMismatch, "row has " + std::to_string(width) +
                                                       " values, the model expects " +
                                                       std::to_string(names.size()));
  }
}

int cmd_predict(const RunConfig& cfg, const fs::path& model_path, const std::vector<std::string>& rows,
                const fs::path& input, const fs::path& repetition, std::ostream& out) {
  const int sources = !rows.empty() + !input.empty() + !repetition.empty();
  if (sources != 1) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --row, --input, --repetition");
  }
  if (!fs::is_regular_file(model_path)) {
    throw Error(ErrorCode::kIoFailure, "model not found: " + model_path.string());
  }
  const AnyModel model = load_model(model_path);
  std::vector<std::vector<double>> inputs;
  if (!rows.empty()) {
    for (const auto& r : rows) inputs.push_back(parse_row(r));
  } else if (!input.empty()) {
    const FeatureTable table = FeatureTable::from_csv(input);
    const auto& names = feature_names(model);
    if (!names.empty() && names != table.feature_names) {
      throw Error(ErrorCode::kFeatureLengthMismatch, input.string() + " columns differ from the model's features");
    }
    inputs = table.rows;
  } else {
    const csv::Table head = csv::read_table(repetition);
    if (head.header.empty()) throw Error(ErrorCode::kInvalidArgument, repetition.string() + " is empty");
    const StreamKind stream = head.header.front() == "j00_w" ? StreamKind::kOrientation : StreamKind::kPosition;
    Repetition rep;
    rep.stream = stream;
    rep.frames = repetition_frames_from_csv(repetition, stream);
    std::vector<JointSelection> candidates = cfg.selections;
    if (candidates.empty()) candidates = {JointSelection::kFull, JointSelection::kVr};
    const auto& names = feature_names(model);
    std::optional<FeatureConfig> chosen;
    for (JointSelection sel : candidates) {
      FeatureConfig fc = resolve_feature_config(cfg.features, stream, sel);
      if (names.empty() || fc.feature_names() == names) {
        chosen = std::move(fc);
        break;
      }
    }
    if (!chosen) {
      throw Error(ErrorCode::kFeatureLengthMismatch,
                  "no joint selection of " + cfg.features + " matches the model's features");
    }
    inputs.push_back(extract(rep, *chosen).values);
  }
  std::ostringstream buf;
  for (const auto& x : inputs) {
    check_row_width(model, x.size());
    buf << csv::format_double(predict(model, x)) << '\n';
  }
  out << buf.str();
  return kExitOk;
}

// ------------------------------------------------------------------ synth

int cmd_synth(const RunConfig& cfg, const SyntheticDatasetSpec& spec, std::ostream& out) {
  require_out(cfg);
  if (spec.n_control < 0 || spec.n_patient < 0 || spec.n_control + spec.n_patient < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least two subjects");
  }
  for (int e : spec.exercises) {
    if (e < 1 || e > 5) throw Error(ErrorCode::kInvalidArgument, "exercises are numbered 1..5");
  }
  const SyntheticSummary summary = write_synthetic_dataset(cfg.out, spec);
  if (cfg.verbosity >= 1) {
    out << "manifest     " << summary.manifest.string() << "\n"
        << "recordings   " << summary.recordings << "\n"
        << "cycles       " << summary.cycles << "\n";
  }
  return kExitOk;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    bad_config(std::string("not valid JSON: ") + e.what());
  }
  reject_unknown(doc, {"manifest", "segmentation", "filter", "features", "stream", "joints", "exercises",
                       "split", "gbdt", "out", "verbosity", "workers"},
                 "run config");
  RunConfig cfg;
  try {
    if (doc.contains("manifest")) cfg.manifest = resolve(base_dir, doc["manifest"].get<std::string>());
    if (doc.contains("segmentation")) {
      cfg.segmentation = resolve(base_dir, doc["segmentation"].get<std::string>());
    }
    if (doc.contains("filter")) {
      const json& f = doc["filter"];
      reject_unknown(f, {"order", "cutoff_hz", "zero_phase"}, "filter");
      cfg.filter.order = f.value("order", cfg.filter.order);
      cfg.filter.cutoff_hz = f.value("cutoff_hz", cfg.filter.cutoff_hz);
      cfg.filter.zero_phase = f.value("zero_phase", cfg.filter.zero_phase);
    }
    if (doc.contains("features")) {
      std::string f = doc["features"].get<std::string>();
      if (f != "paper44" && f != "full56") f = resolve(base_dir, f).string();
      cfg.features = f;
    }
    if (doc.contains("stream")) cfg.streams = one_or_many<StreamKind>(doc["stream"], parse_stream);
    if (doc.contains("joints")) cfg.selections = one_or_many<JointSelection>(doc["joints"], parse_selection);
    if (doc.contains("exercises")) cfg.exercises = doc["exercises"].get<std::vector<int>>();
    if (doc.contains("split")) {
      const json& s = doc["split"];
      reject_unknown(s, {"test_fraction", "seed", "unit"}, "split");
      cfg.split.test_fraction = s.value("test_fraction", cfg.split.test_fraction);
      cfg.split.seed = s.value("seed", cfg.split.seed);
      if (s.contains("unit")) cfg.split.unit = parse_split_unit(s["unit"].get<std::string>());
    }
    if (doc.contains("gbdt")) {
      const json& g = doc["gbdt"];
      reject_unknown(g, {"n_trees", "learning_rate", "max_depth", "lambda_l2", "gamma_min_gain",
                         "min_child_weight", "seed"},
                     "gbdt");
      cfg.gbdt.n_trees = g.value("n_trees", cfg.gbdt.n_trees);
      cfg.gbdt.learning_rate = g.value("learning_rate", cfg.gbdt.learning_rate);
      cfg.gbdt.max_depth = g.value("max_depth", cfg.gbdt.max_depth);
      cfg.gbdt.lambda_l2 = g.value("lambda_l2", cfg.gbdt.lambda_l2);
      cfg.gbdt.gamma_min_gain = g.value("gamma_min_gain", cfg.gbdt.gamma_min_gain);
      cfg.gbdt.min_child_weight = g.value("min_child_weight", cfg.gbdt.min_child_weight);
      cfg.gbdt.seed = g.value("seed", cfg.gbdt.seed);
    }
    if (doc.contains("out")) cfg.out = resolve(base_dir, doc["out"].get<std::string>());
    cfg.verbosity = doc.value("verbosity", cfg.verbosity);
    cfg.workers = doc.value("workers", cfg.workers);
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
  return cfg;
}

namespace {

struct Flags {
  std::string config, manifest, segmentation, features, out, split_unit;
  std::vector<std::string> streams, joints, externals, rows;
  std::vector<int> exercises;
  std::uint64_t seed = 0;
  double test_fraction = 0.0, learning_rate = 0.0, cutoff_hz = 0.0;
  int n_trees = 0, max_depth = 0, filter_order = 0, verbosity = 1;
  unsigned workers = 0;
  std::string model, input, repetition;
  SyntheticDatasetSpec synth;
  bool no_artifacts = false;
};

class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}
  template <typename T>
  void add(const std::string& name, T& var, const std::string& desc) {
    opts_[name] = app_->add_option("--" + name, var, desc);
  }
  void flag(const std::string& name, bool& var, const std::string& desc) {
    opts_[name] = app_->add_flag("--" + name, var, desc);
  }
  bool given(const std::string& name) const {
    const auto it = opts_.find(name);
    return it != opts_.end() && it->second->count() > 0;
  }
  CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::map<std::string, CLI::Option*> opts_;
};

void add_common(Options& o, Flags& f) {
  o.add("config", f.config, "run config JSON");
  o.add("out", f.out, "workspace directory");
  o.add("workers", f.workers, "worker threads (0: all cores)");
  o.add("verbosity", f.verbosity, "0 quiet, 1 summary, 2 detail");
}

void add_selection(Options& o, Flags& f) {
  o.add("exercise", f.exercises, "restrict to exercise id (repeatable)");
  o.add("stream", f.streams, "position|orientation (repeatable)");
  o.add("joints", f.joints, "full|vr (repeatable)");
}

RunConfig build_config(const Flags& f, const Options& o) {
  RunConfig cfg;
  if (o.given("config")) {
    const fs::path p = f.config;
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::kIoFailure, "config file not found: " + p.string());
    cfg = parse_run_config(csv::read_file(p), p.parent_path());
  }
  if (o.given("manifest")) cfg.manifest = f.manifest;
  if (o.given("segmentation")) cfg.segmentation = f.segmentation;
  if (o.given("features")) cfg.features = f.features;
  if (o.given("out")) cfg.out = f.out;
  if (o.given("stream")) {
    cfg.streams.clear();
    for (const auto& s : f.streams) cfg.streams.push_back(parse_stream(s));
  }
  if (o.given("joints")) {
    cfg.selections.clear();
    for (const auto& s : f.joints) cfg.selections.push_back(parse_selection(s));
  }
  if (o.given("exercise")) cfg.exercises = f.exercises;
  if (o.given("seed")) cfg.split.seed = f.seed;
  if (o.given("test-fraction")) cfg.split.test_fraction = f.test_fraction;
  if (o.given("split-unit")) cfg.split.unit = parse_split_unit(f.split_unit);
  if (o.given("n-trees")) cfg.gbdt.n_trees = f.n_trees;
  if (o.given("learning-rate")) cfg.gbdt.learning_rate = f.learning_rate;
  if (o.given("max-depth")) cfg.gbdt.max_depth = f.max_depth;
  if (o.given("cutoff-hz")) cfg.filter.cutoff_hz = f.cutoff_hz;
  if (o.given("filter-order")) cfg.filter.order = f.filter_order;
  if (o.given("workers")) cfg.workers = f.workers;
  if (o.given("verbosity")) cfg.verbosity = f.verbosity;

  cfg.split.validate();
  cfg.gbdt.validate();
  if (!cfg.segmentation.empty() && !fs::is_regular_file(cfg.segmentation)) {
    throw Error(ErrorCode::kIoFailure, "segmentation config not found: " + cfg.segmentation.string());
  }
  if (cfg.features != "paper44" && cfg.features != "full56" && !fs::is_regular_file(cfg.features)) {
    throw Error(ErrorCode::kIoFailure, "feature config not found: " + cfg.features);
  }
  return cfg;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exercise quality scoring from skeleton recordings"};
  app.require_subcommand(1);
  Flags f;

  Options synth(app.add_subcommand("synth", "write a synthetic dataset"));
  add_common(synth, f);
  synth.add("seed", f.synth.seed, "generator seed");
  synth.add("n-control", f.synth.n_control, "control subjects");
  synth.add("n-patient", f.synth.n_patient, "patient subjects");
  synth.add("exercise", f.synth.exercises, "exercise ids (repeatable)");
  synth.flag("no-artifacts", f.no_artifacts, "omit spikes and corrupt rows");

  Options segment(app.add_subcommand("segment", "ingest recordings and cut repetitions"));
  add_common(segment, f);
  segment.add("manifest", f.manifest, "dataset manifest JSON");
  segment.add("segmentation", f.segmentation, "segmentation config JSON");
  segment.add("exercise", f.exercises, "restrict to exercise id (repeatable)");
  segment.add("cutoff-hz", f.cutoff_hz, "low-pass cutoff");
  segment.add("filter-order", f.filter_order, "Butterworth order");

  Options featurize(app.add_subcommand("featurize", "build feature matrices from the archive"));
  add_common(featurize, f);
  add_selection(featurize, f);
  featurize.add("features", f.features, "paper44|full56|<config.json>");

  Options train(app.add_subcommand("train", "fit baseline and GBDT models per exercise"));
  add_common(train, f);
  add_selection(train, f);
  train.add("seed", f.seed, "split seed");
  train.add("test-fraction", f.test_fraction, "share of units held out");
  train.add("split-unit", f.split_unit, "subject|repetition");
  train.add("n-trees", f.n_trees, "boosting rounds");
  train.add("learning-rate", f.learning_rate, "shrinkage");
  train.add("max-depth", f.max_depth, "tree depth");

  Options evaluate(app.add_subcommand("evaluate", "score models on the held-out split"));
  add_common(evaluate, f);
  add_selection(evaluate, f);
  evaluate.add("external", f.externals, "NAME=PATH predictions CSV (repeatable)");

  Options predict(app.add_subcommand("predict", "score feature rows or a repetition"));
  add_common(predict, f);
  predict.add("model", f.model, "model JSON");
  predict.add("row", f.rows, "comma-separated feature values (repeatable)");
  predict.add("input", f.input, "feature matrix CSV");
  predict.add("repetition", f.repetition, "repetition CSV from the archive");
  predict.add("joints", f.joints, "full|vr for --repetition");
  predict.add("features", f.features, "feature config for --repetition");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    for (const Options* o : {&synth, &segment, &featurize, &train, &evaluate, &predict}) {
      if (!o->app()->parsed()) continue;
      const RunConfig cfg = build_config(f, *o);
      const std::string name = o->app()->get_name();
      if (name == "synth") {
        SyntheticDatasetSpec spec = f.synth;
        spec.inject_artifacts = !f.no_artifacts;
        return cmd_synth(cfg, spec, out);
      }
      if (name == "segment") return cmd_segment(cfg, out);
      if (name == "featurize") return cmd_featurize(cfg, out);
      if (name == "train") return cmd_train(cfg, out);
      if (name == "evaluate") return cmd_evaluate(cfg, f.externals, out);
      return cmd_predict(cfg, f.model, f.rows, f.input, f.repetition, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace rehab
