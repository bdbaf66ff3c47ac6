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

// Manifest-driven loading of recording CSVs and score files.
//
// The manifest is a JSON document:
//
//   {
//     "dataset_root": ".",                      // relative to the manifest
//     "path_template": "{subject}/Es{exercise}/{stream}.csv",
//     "stream_tokens": {"position": "JointPosition", "orientation": "JointOrientation"},
//     "group_tokens": {"control": "CG", "patient": "GPP"},   // optional
//     "position_layout": "JOINT_MAJOR_XYZ",
//     "orientation_layout": "JOINT_MAJOR_WXYZ",
//     "has_timestamp_column": true,
//     "delimiter": ",",
//     "sample_rate_hz": 30,
//     "joint_name_map": {"HEAD": 3, ...},        // optional, Kinect v2 default
//     "score_file": "scores.csv",
//     "score_column": "score"
//   }

#ifndef REHAB_INGEST_HPP_
#define REHAB_INGEST_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rehab/mocap.hpp"

namespace rehab {

enum class ColumnLayout {
  kJointMajorXyz,   // x, y, z per joint
  kJointMajorXyzc,  // x, y, z, confidence per joint
  kJointMajorWxyz,  // quaternion w, x, y, z per joint
};

// Cells per joint as laid out in the file.
int layout_width(ColumnLayout layout);
// Components kept per joint after discarding confidence.
int layout_components(ColumnLayout layout);
ColumnLayout parse_layout(std::string_view name);
std::string_view layout_name(ColumnLayout layout);

struct IngestManifest {
  std::filesystem::path dataset_root;
  std::string path_template = "{subject}/{exercise}/{stream}.csv";
  std::map<std::string, std::string> stream_tokens = {{"position", "position"},
                                                       {"orientation", "orientation"}};
  std::map<std::string, std::string> group_tokens;
  ColumnLayout position_layout = ColumnLayout::kJointMajorXyz;
  ColumnLayout orientation_layout = ColumnLayout::kJointMajorWxyz;
  bool has_timestamp_column = false;
  char delimiter = ',';
  double sample_rate_hz = 30.0;
  JointMap joint_map;
  std::filesystem::path score_file;
  std::string score_column = "score";

  ColumnLayout layout_for(StreamKind stream) const;
  // Expected cell count of every row for a stream.
  std::size_t row_width(StreamKind stream) const;
};

// Parses a manifest document; relative paths resolve against `base_dir`.
IngestManifest parse_manifest(const std::string& json_text,
                              const std::filesystem::path& base_dir);
IngestManifest load_manifest(const std::filesystem::path& path);

struct ScoreEntry {
  ScoreLabel label;
  Group group = Group::kUnknown;
};

using ScoreKey = std::pair<std::string, int>;  // (subject_id, exercise_id)
using ScoreTable = std::map<ScoreKey, ScoreEntry>;

// Header must contain subject_id, exercise_id and the manifest's score
// column; an optional "group" column fills ScoreEntry::group.
ScoreTable load_scores(const std::filesystem::path& score_file, const IngestManifest& manifest);

struct DatasetEntry {
  std::string subject_id;
  int exercise_id = 0;
  StreamKind stream = StreamKind::kPosition;
  Group group = Group::kUnknown;
  std::filesystem::path path;

  auto operator<=>(const DatasetEntry&) const = default;
};

struct ScanResult {
  std::vector<DatasetEntry> entries;           // sorted by (subject, exercise, stream)
  std::vector<std::filesystem::path> unmatched;  // sorted
};

// Recursively lists files under root that match the manifest's path template.
ScanResult scan_dataset(const std::filesystem::path& root, const IngestManifest& manifest);

// Matches the template against the trailing components of `path`.
std::optional<DatasetEntry> match_path(const std::filesystem::path& path,
                                       const IngestManifest& manifest);

struct LoadResult {
  SkeletonRecording recording;
  std::size_t dropped_rows = 0;
  std::vector<std::size_t> dropped_lines;  // 1-based line numbers
  std::size_t renormalized_quaternions = 0;
};

LoadResult load_recording(const DatasetEntry& entry, const IngestManifest& manifest,
                          const ScoreTable& scores);
// Ids come from matching the path against the template.
LoadResult load_recording(const std::filesystem::path& path, const IngestManifest& manifest,
                          StreamKind stream, const ScoreTable& scores);

// Machine-readable ingest log (JSON).
struct IngestLog {
  struct FileRecord {
    std::filesystem::path path;
    std::size_t dropped_rows = 0;
    std::vector<std::size_t> dropped_lines;
    std::size_t renormalized_quaternions = 0;
    std::string error;  // empty if loaded
  };
  std::vector<FileRecord> files;
  std::vector<std::filesystem::path> unmatched;

  std::string to_json() const;
};

}  // namespace rehab

#endif  // REHAB_INGEST_HPP_
