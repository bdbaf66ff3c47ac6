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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rehab/csv.hpp"
#include "rehab/error.hpp"
#include "rehab/ingest.hpp"
#include "test_support.hpp"

namespace rehab {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

// Cell value used by the fixtures: deterministic and easy to check.
double cell(std::size_t row, int joint, int comp) { return row * 100.0 + joint + comp / 10.0; }

std::string position_rows(std::size_t n, bool timestamp, int width = 3) {
  std::ostringstream out;
  for (std::size_t r = 0; r < n; ++r) {
    if (timestamp) out << r * 0.033;
    for (int j = 0; j < kJointCount; ++j) {
      for (int c = 0; c < width; ++c) {
        if (timestamp || j || c) out << ',';
        out << (c < 3 ? csv::format_double(cell(r, j, c)) : "2");
      }
    }
    out << '\n';
  }
  return out.str();
}

struct Fixture {
  TempDir dir;
  IngestManifest manifest;
  ScoreTable scores;

  explicit Fixture(const std::string& extra = "") {
    csv::write_file(dir / "scores.csv", "subject_id,exercise_id,score\nS1,1,40\nS2,1,10\n");
    csv::write_file(dir / "manifest.json",
                    "{\"path_template\": \"{subject}/Es{exercise}/{stream}.csv\","
                    " \"has_timestamp_column\": true, \"score_file\": \"scores.csv\"" +
                        extra + "}");
    manifest = load_manifest(dir / "manifest.json");
    scores = load_scores(manifest.score_file, manifest);
  }

  fs::path write(const std::string& rel, const std::string& content) const {
    csv::write_file(dir / rel, content);
    return dir / rel;
  }
};

TEST(LoadRecording, ParsesThreeRowsCellByCell) {
  Fixture fx;
  const fs::path p = fx.write("S1/Es1/position.csv", position_rows(3, true));
  const LoadResult r = load_recording(p, fx.manifest, StreamKind::kPosition, fx.scores);
  ASSERT_EQ(r.recording.frames.frame_count(), 3u);
  for (std::size_t f = 0; f < 3; ++f) {
    for (int j = 0; j < kJointCount; ++j) {
      for (int c = 0; c < 3; ++c) EXPECT_EQ(r.recording.frames.at(f, j, c), cell(f, j, c));
    }
  }
  EXPECT_EQ(r.recording.subject_id, "S1");
  EXPECT_EQ(r.recording.exercise_id, 1);
  EXPECT_DOUBLE_EQ(r.recording.label.normalized, 0.8);
  EXPECT_EQ(r.recording.timestamps, (std::vector<double>{0.0, 0.033, 0.066}));
  EXPECT_EQ(r.dropped_rows, 0u);
}

TEST(LoadRecording, NarrowRowsAreColumnMismatch) {
  Fixture fx;
  std::string rows = position_rows(4, true);
  // Drop the last two cells of every row: 74 columns instead of 76.
  std::ostringstream narrow;
  std::istringstream in(rows);
  for (std::string line; std::getline(in, line);) {
    for (int k = 0; k < 2; ++k) line.erase(line.rfind(','));
    narrow << line << '\n';
  }
  const fs::path p = fx.write("S1/Es1/position.csv", narrow.str());
  EXPECT_EQ(code_of([&] { load_recording(p, fx.manifest, StreamKind::kPosition, fx.scores); }),
            ErrorCode::kColumnMismatch);
}

TEST(LoadRecording, CorruptRowIsDroppedAndCounted) {
  Fixture fx;
  std::string rows = position_rows(10, true);
  const std::size_t line4 = [&] {
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) pos = rows.find('\n', pos) + 1;
    return pos;
  }();
  const std::size_t comma = rows.find(',', line4);
  rows.replace(comma + 1, rows.find(',', comma + 1) - comma - 1, "NaN");
  const fs::path p = fx.write("S1/Es1/position.csv", rows);
  const LoadResult r = load_recording(p, fx.manifest, StreamKind::kPosition, fx.scores);
  EXPECT_EQ(r.recording.frames.frame_count(), 9u);
  EXPECT_EQ(r.dropped_rows, 1u);
  EXPECT_EQ(r.dropped_lines, (std::vector<std::size_t>{4}));
  EXPECT_EQ(r.recording.frames.at(3, 0, 0), cell(4, 0, 0));
}

TEST(LoadRecording, FewerThanTwoUsableRowsIsEmptyFile) {
  Fixture fx;
  const fs::path p = fx.write("S1/Es1/position.csv", position_rows(1, true));
  EXPECT_EQ(code_of([&] { load_recording(p, fx.manifest, StreamKind::kPosition, fx.scores); }),
            ErrorCode::kEmptyFile);
  const fs::path q = fx.write("S2/Es1/position.csv", "");
  EXPECT_EQ(code_of([&] { load_recording(q, fx.manifest, StreamKind::kPosition, fx.scores); }),
            ErrorCode::kEmptyFile);
}

TEST(LoadRecording, UnscoredSubjectIsLabelMissing) {
  Fixture fx;
  const fs::path p = fx.write("S9/Es1/position.csv", position_rows(3, true));
  EXPECT_EQ(code_of([&] { load_recording(p, fx.manifest, StreamKind::kPosition, fx.scores); }),
            ErrorCode::kLabelMissing);
}

TEST(LoadRecording, ConfidenceColumnsAreDiscarded) {
  Fixture fx(", \"position_layout\": \"JOINT_MAJOR_XYZC\"");
  const fs::path p = fx.write("S1/Es1/position.csv", position_rows(3, true, 4));
  const LoadResult r = load_recording(p, fx.manifest, StreamKind::kPosition, fx.scores);
  ASSERT_EQ(r.recording.frames.frame_count(), 3u);
  EXPECT_EQ(r.recording.frames.components(), 3);
  EXPECT_EQ(r.recording.frames.at(2, 24, 2), cell(2, 24, 2));
}

TEST(LoadRecording, TimestampsAreSynthesizedWhenAbsent) {
  Fixture fx(", \"has_timestamp_column\": false");
  const fs::path p = fx.write("S1/Es1/position.csv", position_rows(3, false));
  const LoadResult r = load_recording(p, fx.manifest, StreamKind::kPosition, fx.scores);
  ASSERT_EQ(r.recording.timestamps.size(), 3u);
  EXPECT_DOUBLE_EQ(r.recording.timestamps[2], 2.0 / 30.0);
}

TEST(LoadRecording, TrailingDelimiterIsTolerated) {
  Fixture fx;
  std::string rows = position_rows(2, true);
  std::string with_trailing;
  std::istringstream in(rows);
  for (std::string line; std::getline(in, line);) with_trailing += line + ",\n";
  const fs::path p = fx.write("S1/Es1/position.csv", with_trailing);
  EXPECT_EQ(load_recording(p, fx.manifest, StreamKind::kPosition, fx.scores).recording.frames.frame_count(), 2u);
}

TEST(LoadRecording, QuaternionsAreRenormalizedAndCounted) {
  Fixture fx;
  std::ostringstream rows;
  for (int r = 0; r < 3; ++r) {
    rows << r;
    for (int j = 0; j < kJointCount; ++j) rows << (j == 4 && r == 1 ? ",2,0,0,0" : ",1,0,0,0");
    rows << '\n';
  }
  const fs::path p = fx.write("S1/Es1/orientation.csv", rows.str());
  const LoadResult r = load_recording(p, fx.manifest, StreamKind::kOrientation, fx.scores);
  EXPECT_EQ(r.renormalized_quaternions, 1u);
  EXPECT_DOUBLE_EQ(r.recording.frames.at(1, 4, 0), 1.0);
  EXPECT_TRUE(validate_recording(r.recording).empty());
}

TEST(LoadScores, ScalesToUnitRange) {
  TempDir dir;
  csv::write_file(dir / "s.csv", "subject_id,exercise_id,score\nA,1,50\nA,2,0\nA,3,25\n");
  IngestManifest m;
  const ScoreTable t = load_scores(dir / "s.csv", m);
  EXPECT_EQ(t.at({"A", 1}).label.normalized, 1.0);
  EXPECT_EQ(t.at({"A", 2}).label.normalized, 0.0);
  EXPECT_EQ(t.at({"A", 3}).label.normalized, 0.5);
}

TEST(LoadScores, RejectsOutOfRangeAndDuplicates) {
  TempDir dir;
  IngestManifest m;
  csv::write_file(dir / "a.csv", "subject_id,exercise_id,score\nA,1,50.5\n");
  EXPECT_EQ(code_of([&] { load_scores(dir / "a.csv", m); }), ErrorCode::kScoreOutOfRange);
  csv::write_file(dir / "b.csv", "subject_id,exercise_id,score\nA,1,-1\n");
  EXPECT_EQ(code_of([&] { load_scores(dir / "b.csv", m); }), ErrorCode::kScoreOutOfRange);
  csv::write_file(dir / "c.csv", "subject_id,exercise_id,score\nA,1,10\nA,1,12\n");
  EXPECT_EQ(code_of([&] { load_scores(dir / "c.csv", m); }), ErrorCode::kDuplicateKey);
}

TEST(LoadScores, ReadsGroupAndCustomColumn) {
  TempDir dir;
  IngestManifest m;
  m.score_column = "clinical_total";
  csv::write_file(dir / "s.csv", "subject_id,exercise_id,group,clinical_total\nA,1,patient,20\n");
  const ScoreTable t = load_scores(dir / "s.csv", m);
  EXPECT_EQ(t.at({"A", 1}).group, Group::kPatient);
  EXPECT_DOUBLE_EQ(t.at({"A", 1}).label.raw, 20.0);
}

TEST(ScanDataset, EmptyDirectoryListsNothing) {
  Fixture fx;
  fs::create_directories(fx.dir / "data");
  const ScanResult s = scan_dataset(fx.dir / "data", fx.manifest);
  EXPECT_TRUE(s.entries.empty());
  EXPECT_TRUE(s.unmatched.empty());
}

TEST(ScanDataset, CountsFixtureTreeAndStrays) {
  Fixture fx;
  for (const char* s : {"S2", "S1"}) {
    for (int e = 1; e <= 5; ++e) {
      for (const char* k : {"position", "orientation"}) {
        fx.write(std::string("data/") + s + "/Es" + std::to_string(e) + "/" + k + ".csv", "");
      }
    }
  }
  ScanResult s = scan_dataset(fx.dir / "data", fx.manifest);
  EXPECT_EQ(s.entries.size(), 20u);
  EXPECT_TRUE(s.unmatched.empty());
  EXPECT_TRUE(std::is_sorted(s.entries.begin(), s.entries.end()));
  EXPECT_EQ(s.entries.front().subject_id, "S1");

  fx.write("data/S1/notes.txt", "stray");
  s = scan_dataset(fx.dir / "data", fx.manifest);
  EXPECT_EQ(s.entries.size(), 20u);
  ASSERT_EQ(s.unmatched.size(), 1u);
  EXPECT_EQ(s.unmatched[0].generic_string(), "S1/notes.txt");

  const ScanResult again = scan_dataset(fx.dir / "data", fx.manifest);
  EXPECT_EQ(again.entries, s.entries);
  EXPECT_EQ(again.unmatched, s.unmatched);
}

TEST(ScanDataset, GroupTokensInTemplate) {
  TempDir dir;
  csv::write_file(dir / "m.json",
                  "{\"path_template\": \"{group}/{subject}/Es{exercise}/{stream}.csv\","
                  " \"group_tokens\": {\"control\": \"CG\", \"patient\": \"GPP\"},"
                  " \"stream_tokens\": {\"position\": \"JointPosition\", \"orientation\": \"JointOrientation\"}}");
  const IngestManifest m = load_manifest(dir / "m.json");
  csv::write_file(dir / "GPP/P01/Es3/JointOrientation.csv", "");
  csv::write_file(dir / "XX/P01/Es3/JointOrientation.csv", "");
  const ScanResult s = scan_dataset(dir.path(), m);
  ASSERT_EQ(s.entries.size(), 1u);
  EXPECT_EQ(s.entries[0].group, Group::kPatient);
  EXPECT_EQ(s.entries[0].stream, StreamKind::kOrientation);
  EXPECT_EQ(s.entries[0].exercise_id, 3);
  EXPECT_EQ(s.unmatched.size(), 2u);  // the stray tree and m.json
}

TEST(Manifest, RejectsUnknownKeysAndMissingFile) {
  TempDir dir;
  EXPECT_EQ(code_of([&] { parse_manifest("{\"colum_layout\": \"JOINT_MAJOR_XYZ\"}", dir.path()); }),
            ErrorCode::kInvalidManifest);
  EXPECT_EQ(code_of([&] { load_manifest(dir / "absent.json"); }), ErrorCode::kIoFailure);
}

TEST(Manifest, RowWidthFollowsLayout) {
  const IngestManifest m = parse_manifest(
      "{\"column_layout\": \"JOINT_MAJOR_XYZC\", \"has_timestamp_column\": true}", ".");
  EXPECT_EQ(m.row_width(StreamKind::kPosition), 101u);
  EXPECT_EQ(m.row_width(StreamKind::kOrientation), 101u);
  const IngestManifest plain = parse_manifest("{}", ".");
  EXPECT_EQ(plain.row_width(StreamKind::kPosition), 75u);
}

TEST(Manifest, JointNameMapOverridesDefaults) {
  const IngestManifest m = parse_manifest("{\"joint_name_map\": {\"HEAD\": 20}}", ".");
  EXPECT_EQ(m.joint_map.head().index, 20);
  EXPECT_EQ(m.joint_map.hand_left().index, 7);
}

TEST(IngestLog, SerializesDroppedLines) {
  IngestLog log;
  log.files.push_back({"a/b.csv", 1, {4}, 0, {}});
  log.unmatched.push_back("x.txt");
  const std::string j = log.to_json();
  EXPECT_NE(j.find("\"dropped_lines\""), std::string::npos);
  EXPECT_NE(j.find("x.txt"), std::string::npos);
}

}  // namespace
}  // namespace rehab
