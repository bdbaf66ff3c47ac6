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

#include "rehab/archive.hpp"

#include <algorithm>
#include <sstream>

#include "rehab/csv.hpp"
#include "rehab/error.hpp"

namespace rehab {

namespace fs = std::filesystem;

namespace {

std::string column_name(int joint, int component, StreamKind stream) {
  static constexpr const char* kXyz[] = {"x", "y", "z"};
  static constexpr const char* kWxyz[] = {"w", "x", "y", "z"};
  std::string j = std::to_string(joint);
  if (j.size() < 2) j = "0" + j;
  return "j" + j + "_" + (stream == StreamKind::kPosition ? kXyz[component] : kWxyz[component]);
}

}  // namespace

std::string repetition_file_name(const Repetition& rep) {
  return std::string(stream_name(rep.stream)) + "/" + rep.key.subject_id + "_ex" +
         std::to_string(rep.key.exercise_id) + "_rep" + std::to_string(rep.key.repetition_index) +
         ".csv";
}

std::string repetition_to_csv(const Repetition& rep) {
  std::ostringstream out;
  const int comps = rep.frames.components();
  for (int j = 0; j < kJointCount; ++j) {
    for (int c = 0; c < comps; ++c) {
      if (j || c) out << ',';
      out << column_name(j, c, rep.stream);
    }
  }
  out << '\n';
  for (std::size_t f = 0; f < rep.frames.frame_count(); ++f) {
    const auto row = rep.frames.frame(f);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv::format_double(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

JointFrames repetition_frames_from_csv(const fs::path& path, StreamKind stream) {
  const csv::Table table = csv::read_table(path);
  const int comps = component_count(stream);
  JointFrames frames(0, comps);
  if (table.header.size() != frames.frame_stride()) {
    throw Error(ErrorCode::kColumnMismatch, path.string() + " header does not match a " +
                                                std::string(stream_name(stream)) + " repetition");
  }
  std::vector<double> values(frames.frame_stride());
  for (const auto& row : table.rows) {
    if (row.size() != values.size()) {
      throw Error(ErrorCode::kColumnMismatch, path.string() + " has a ragged row");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto v = csv::parse_double(row[i]);
      if (!v) throw Error(ErrorCode::kInvalidArgument, path.string() + " has a non-numeric cell");
      values[i] = *v;
    }
    frames.append_frame(values);
  }
  return frames;
}

void write_archive(const fs::path& dir, std::span<const Repetition> reps) {
  std::vector<const Repetition*> sorted;
  for (const auto& r : reps) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const Repetition* a, const Repetition* b) {
    if (a->stream != b->stream) return a->stream < b->stream;
    return a->key < b->key;
  });
  std::ostringstream index;
  index << "subject_id,exercise_id,repetition_index,stream,group,label_raw,label,file\n";
  for (const Repetition* r : sorted) {
    const std::string file = repetition_file_name(*r);
    csv::write_file(dir / file, repetition_to_csv(*r));
    index << r->key.subject_id << ',' << r->key.exercise_id << ',' << r->key.repetition_index << ','
          << stream_name(r->stream) << ',' << group_name(r->group) << ','
          << csv::format_double(r->label.raw) << ',' << csv::format_double(r->label.normalized)
          << ',' << file << '\n';
  }
  csv::write_file(dir / "index.csv", index.str());
}

std::vector<Repetition> read_archive(const fs::path& dir) {
  const fs::path index_path = dir / "index.csv";
  if (!fs::is_regular_file(index_path)) {
    throw Error(ErrorCode::kIoFailure, "repetition archive index not found: " + index_path.string());
  }
  const csv::Table table = csv::read_table(index_path);
  static const std::vector<std::string> kHeader = {"subject_id", "exercise_id", "repetition_index",
                                                   "stream", "group", "label_raw", "label", "file"};
  if (table.header != kHeader) {
    throw Error(ErrorCode::kInvalidArgument, index_path.string() + " has an unexpected header");
  }
  if (table.rows.empty()) throw Error(ErrorCode::kEmptyInput, "repetition archive is empty");
  std::vector<Repetition> reps;
  for (const auto& row : table.rows) {
    if (row.size() != kHeader.size()) {
      throw Error(ErrorCode::kColumnMismatch, index_path.string() + " has a ragged row");
    }
    const auto ex = csv::parse_int(row[1]);
    const auto idx = csv::parse_int(row[2]);
    const auto raw = csv::parse_double(row[5]);
    const auto norm = csv::parse_double(row[6]);
    if (!ex || !idx || !raw || !norm) {
      throw Error(ErrorCode::kInvalidArgument, index_path.string() + " has a malformed row");
    }
    Repetition rep;
    rep.key = {row[0], static_cast<int>(*ex), static_cast<int>(*idx)};
    rep.stream = parse_stream(row[3]);
    rep.group = parse_group(row[4]);
    rep.label = ScoreLabel{*raw, *norm};
    rep.frames = repetition_frames_from_csv(dir / row[7], rep.stream);
    if (rep.frames.frame_count() != static_cast<std::size_t>(kRepetitionLength)) {
      throw Error(ErrorCode::kInvalidArgument, row[7] + " does not hold 104 frames");
    }
    reps.push_back(std::move(rep));
  }
  return reps;
}

}  // namespace rehab
