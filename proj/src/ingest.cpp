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

#include "rehab/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

#include "json.hpp"
#include "rehab/csv.hpp"
#include "rehab/error.hpp"

namespace rehab {

namespace fs = std::filesystem;
using nlohmann::json;

int layout_width(ColumnLayout layout) {
  switch (layout) {
    case ColumnLayout::kJointMajorXyz: return 3;
    case ColumnLayout::kJointMajorXyzc: return 4;
    case ColumnLayout::kJointMajorWxyz: return 4;
  }
  return 3;
}

int layout_components(ColumnLayout layout) {
  return layout == ColumnLayout::kJointMajorWxyz ? 4 : 3;
}

ColumnLayout parse_layout(std::string_view name) {
  if (name == "JOINT_MAJOR_XYZ") return ColumnLayout::kJointMajorXyz;
  if (name == "JOINT_MAJOR_XYZC") return ColumnLayout::kJointMajorXyzc;
  if (name == "JOINT_MAJOR_WXYZ") return ColumnLayout::kJointMajorWxyz;
  throw Error(ErrorCode::kInvalidManifest, "unknown column layout '" + std::string(name) + "'");
}

std::string_view layout_name(ColumnLayout layout) {
  switch (layout) {
    case ColumnLayout::kJointMajorXyz: return "JOINT_MAJOR_XYZ";
    case ColumnLayout::kJointMajorXyzc: return "JOINT_MAJOR_XYZC";
    case ColumnLayout::kJointMajorWxyz: return "JOINT_MAJOR_WXYZ";
  }
  return "JOINT_MAJOR_XYZ";
}

ColumnLayout IngestManifest::layout_for(StreamKind stream) const {
  return stream == StreamKind::kPosition ? position_layout : orientation_layout;
}

std::size_t IngestManifest::row_width(StreamKind stream) const {
  return static_cast<std::size_t>(layout_width(layout_for(stream))) * kJointCount +
         (has_timestamp_column ? 1 : 0);
}

IngestManifest parse_manifest(const std::string& json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidManifest, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidManifest, "manifest must be an object");

  static const std::vector<std::string> kKnown = {
      "dataset_root", "path_template", "stream_tokens", "group_tokens",
      "position_layout", "orientation_layout", "column_layout", "has_timestamp_column",
      "delimiter", "sample_rate_hz", "joint_name_map", "score_file", "score_column"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw Error(ErrorCode::kInvalidManifest, "unknown manifest key '" + key + "'");
    }
  }

  IngestManifest m;
  try {
    m.dataset_root = base_dir / doc.value("dataset_root", std::string("."));
    m.dataset_root = m.dataset_root.lexically_normal();
    m.path_template = doc.value("path_template", m.path_template);
    if (doc.contains("stream_tokens")) {
      for (const auto& [k, v] : doc["stream_tokens"].items()) {
        parse_stream(k);
        m.stream_tokens[k] = v.get<std::string>();
      }
    }
    if (doc.contains("group_tokens")) {
      for (const auto& [k, v] : doc["group_tokens"].items()) {
        m.group_tokens[k] = v.get<std::string>();
      }
    }
    // column_layout is shorthand for the position layout.
    if (doc.contains("column_layout")) {
      m.position_layout = parse_layout(doc["column_layout"].get<std::string>());
    }
    if (doc.contains("position_layout")) {
      m.position_layout = parse_layout(doc["position_layout"].get<std::string>());
    }
    if (doc.contains("orientation_layout")) {
      m.orientation_layout = parse_layout(doc["orientation_layout"].get<std::string>());
    }
    m.has_timestamp_column = doc.value("has_timestamp_column", false);
    const std::string delim = doc.value("delimiter", std::string(","));
    if (delim.size() != 1) throw Error(ErrorCode::kInvalidManifest, "delimiter must be one character");
    m.delimiter = delim[0];
    m.sample_rate_hz = doc.value("sample_rate_hz", 30.0);
    if (doc.contains("joint_name_map")) {
      std::map<std::string, int> names;
      for (const auto& [k, v] : doc["joint_name_map"].items()) names[k] = v.get<int>();
      // Unnamed joints keep their Kinect v2 names.
      for (const auto& [k, v] : JointMap::kinect_v2().names()) {
        const bool index_taken = std::any_of(names.begin(), names.end(),
                                             [&](const auto& kv) { return kv.second == v; });
        if (!names.contains(k) && !index_taken) names[k] = v;
      }
      m.joint_map = JointMap(std::move(names));
    }
    if (doc.contains("score_file")) {
      m.score_file = (base_dir / doc["score_file"].get<std::string>()).lexically_normal();
    }
    m.score_column = doc.value("score_column", m.score_column);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidManifest, std::string("bad manifest field: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidManifest) throw;
    throw Error(ErrorCode::kInvalidManifest, e.what());
  }

  if (!(m.sample_rate_hz > 0.0)) throw Error(ErrorCode::kInvalidManifest, "sample_rate_hz must be positive");
  if (layout_components(m.position_layout) != 3) {
    throw Error(ErrorCode::kInvalidManifest, "position_layout must carry 3 components");
  }
  if (layout_components(m.orientation_layout) != 4) {
    throw Error(ErrorCode::kInvalidManifest, "orientation_layout must carry 4 components");
  }
  m.joint_map.vr_joints();
  return m;
}

IngestManifest load_manifest(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::kIoFailure, "manifest not found: " + path.string());
  }
  return parse_manifest(csv::read_file(path), path.parent_path());
}

ScoreTable load_scores(const fs::path& score_file, const IngestManifest& manifest) {
  const csv::Table table = csv::read_table(score_file, ',');
  const auto subject_col = table.column("subject_id");
  const auto exercise_col = table.column("exercise_id");
  const auto score_col = table.column(manifest.score_column);
  const auto group_col = table.column("group");
  if (!subject_col || !exercise_col || !score_col) {
    throw Error(ErrorCode::kInvalidArgument,
                "score file " + score_file.string() + " needs columns subject_id, exercise_id, " +
                    manifest.score_column);
  }
  ScoreTable scores;
  std::size_t line = 1;
  for (const auto& row : table.rows) {
    ++line;
    const std::size_t need = std::max({*subject_col, *exercise_col, *score_col}) + 1;
    if (row.size() < need) {
      throw Error(ErrorCode::kColumnMismatch,
                  score_file.string() + " line " + std::to_string(line) + " is too short");
    }
    const auto exercise = csv::parse_int(row[*exercise_col]);
    const auto raw = csv::parse_double(row[*score_col]);
    if (!exercise || !raw) {
      throw Error(ErrorCode::kInvalidArgument,
                  score_file.string() + " line " + std::to_string(line) + " is not numeric");
    }
    if (*raw < 0.0 || *raw > kMaxRawScore) {
      throw Error(ErrorCode::kScoreOutOfRange,
                  "score " + csv::format_double(*raw) + " for " + row[*subject_col] +
                      " exercise " + std::to_string(*exercise) + " outside [0, 50]");
    }
    ScoreEntry entry{ScoreLabel::from_raw(*raw), Group::kUnknown};
    if (group_col && *group_col < row.size()) entry.group = parse_group(row[*group_col]);
    ScoreKey key{row[*subject_col], static_cast<int>(*exercise)};
    if (!scores.emplace(key, entry).second) {
      throw Error(ErrorCode::kDuplicateKey, "duplicate score for " + key.first + " exercise " +
                                                std::to_string(key.second));
    }
  }
  return scores;
}

namespace {

std::string regex_escape(std::string_view s) {
  static const std::string kSpecial = R"(\^$.|?*+()[]{}/)";
  std::string out;
  for (char c : s) {
    if (kSpecial.find(c) != std::string::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string alternatives(const std::map<std::string, std::string>& tokens) {
  std::vector<std::string> values;
  for (const auto& [k, v] : tokens) values.push_back(regex_escape(v));
  // Longest first so that one token being a prefix of another cannot win.
  std::sort(values.begin(), values.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  std::string out = "(";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += "|";
    out += values[i];
  }
  return out + ")";
}

struct CompiledTemplate {
  std::regex pattern;
  std::vector<std::string> fields;  // capture order
  std::size_t segments = 1;
};

CompiledTemplate compile_template(const IngestManifest& m) {
  CompiledTemplate out;
  std::string re;
  const std::string& t = m.path_template;
  std::size_t i = 0;
  while (i < t.size()) {
    if (t[i] == '{') {
      const std::size_t close = t.find('}', i);
      if (close == std::string::npos) {
        throw Error(ErrorCode::kInvalidManifest, "unterminated placeholder in path_template");
      }
      const std::string field = t.substr(i + 1, close - i - 1);
      if (field == "subject") {
        re += "([^/]+?)";
      } else if (field == "exercise") {
        re += "([0-9]+)";
      } else if (field == "stream") {
        re += alternatives(m.stream_tokens);
      } else if (field == "group") {
        re += m.group_tokens.empty() ? std::string("([^/]+?)") : alternatives(m.group_tokens);
      } else {
        throw Error(ErrorCode::kInvalidManifest, "unknown placeholder {" + field + "}");
      }
      out.fields.push_back(field);
      i = close + 1;
    } else {
      if (t[i] == '/') ++out.segments;
      re += regex_escape(std::string_view(&t[i], 1));
      ++i;
    }
  }
  for (const char* need : {"subject", "exercise", "stream"}) {
    if (std::find(out.fields.begin(), out.fields.end(), need) == out.fields.end()) {
      throw Error(ErrorCode::kInvalidManifest,
                  std::string("path_template lacks {") + need + "}");
    }
  }
  out.pattern = std::regex(re, std::regex::ECMAScript);
  return out;
}

std::optional<DatasetEntry> match_relative(const std::string& rel, const CompiledTemplate& ct,
                                           const IngestManifest& m) {
  std::smatch match;
  if (!std::regex_match(rel, match, ct.pattern)) return std::nullopt;
  DatasetEntry entry;
  for (std::size_t k = 0; k < ct.fields.size(); ++k) {
    const std::string value = match[k + 1].str();
    const std::string& field = ct.fields[k];
    if (field == "subject") {
      entry.subject_id = value;
    } else if (field == "exercise") {
      entry.exercise_id = std::stoi(value);
    } else if (field == "stream") {
      for (const auto& [name, token] : m.stream_tokens) {
        if (token == value) entry.stream = parse_stream(name);
      }
    } else if (field == "group") {
      Group g = parse_group(value);
      for (const auto& [name, token] : m.group_tokens) {
        if (token == value) g = parse_group(name);
      }
      entry.group = g;
    }
  }
  if (entry.exercise_id < 1 || entry.exercise_id > 5) return std::nullopt;
  return entry;
}

}  // namespace

std::optional<DatasetEntry> match_path(const fs::path& path, const IngestManifest& manifest) {
  const CompiledTemplate ct = compile_template(manifest);
  std::vector<std::string> parts;
  for (const auto& p : path.lexically_normal()) {
    if (!p.empty() && p != "/") parts.push_back(p.generic_string());
  }
  if (parts.size() < ct.segments) return std::nullopt;
  std::string rel;
  for (std::size_t i = parts.size() - ct.segments; i < parts.size(); ++i) {
    if (!rel.empty()) rel += "/";
    rel += parts[i];
  }
  auto entry = match_relative(rel, ct, manifest);
  if (entry) entry->path = path;
  return entry;
}

ScanResult scan_dataset(const fs::path& root, const IngestManifest& manifest) {
  ScanResult result;
  if (!fs::is_directory(root)) return result;
  const CompiledTemplate ct = compile_template(manifest);
  std::error_code ec;
  const fs::path score_file = manifest.score_file.empty()
                                  ? fs::path()
                                  : fs::weakly_canonical(manifest.score_file, ec);
  for (const auto& item : fs::recursive_directory_iterator(root)) {
    if (!item.is_regular_file()) continue;
    const fs::path rel = item.path().lexically_relative(root);
    if (!score_file.empty() && fs::weakly_canonical(item.path(), ec) == score_file) continue;
    auto entry = match_relative(rel.generic_string(), ct, manifest);
    if (entry) {
      entry->path = item.path();
      result.entries.push_back(std::move(*entry));
    } else {
      result.unmatched.push_back(rel);
    }
  }
  std::sort(result.entries.begin(), result.entries.end());
  std::sort(result.unmatched.begin(), result.unmatched.end());
  return result;
}

LoadResult load_recording(const DatasetEntry& entry, const IngestManifest& manifest,
                          const ScoreTable& scores) {
  const ColumnLayout layout = manifest.layout_for(entry.stream);
  const int width = layout_width(layout);
  const int comps = layout_components(layout);
  if (comps != component_count(entry.stream)) {
    throw Error(ErrorCode::kInvalidManifest, "layout does not match stream kind");
  }
  const std::size_t expected = manifest.row_width(entry.stream);
  const std::size_t offset = manifest.has_timestamp_column ? 1 : 0;
  // Confidence cells (XYZC) are skipped, never parsed.

  std::ifstream in(entry.path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + entry.path.string());

  const auto score = scores.find({entry.subject_id, entry.exercise_id});
  if (score == scores.end()) {
    throw Error(ErrorCode::kLabelMissing, "no score for subject " + entry.subject_id +
                                              " exercise " + std::to_string(entry.exercise_id));
  }

  LoadResult result;
  SkeletonRecording& rec = result.recording;
  rec.subject_id = entry.subject_id;
  rec.exercise_id = entry.exercise_id;
  rec.stream = entry.stream;
  rec.group = entry.group != Group::kUnknown ? entry.group : score->second.group;
  rec.sample_rate_hz = manifest.sample_rate_hz;
  rec.label = score->second.label;
  rec.frames = JointFrames(0, comps);

  std::vector<double> frame(static_cast<std::size_t>(kJointCount) * comps);
  std::vector<double> timestamps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    std::vector<std::string> cells = csv::split(line, manifest.delimiter);
    // Tolerate a single trailing delimiter.
    if (cells.size() == expected + 1 && csv::trim(cells.back()).empty()) cells.pop_back();
    if (cells.size() != expected) {
      throw Error(ErrorCode::kColumnMismatch,
                  entry.path.string() + " line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " columns, manifest expects " +
                      std::to_string(expected));
    }
    bool ok = true;
    double ts = 0.0;
    if (offset) {
      const auto v = csv::parse_double(cells[0]);
      ok = v.has_value();
      if (ok) ts = *v;
    }
    for (int j = 0; ok && j < kJointCount; ++j) {
      for (int c = 0; c < comps; ++c) {
        const auto v = csv::parse_double(cells[offset + static_cast<std::size_t>(j) * width + c]);
        if (!v) {
          ok = false;
          break;
        }
        frame[static_cast<std::size_t>(j) * comps + c] = *v;
      }
    }
    if (!ok) {
      ++result.dropped_rows;
      result.dropped_lines.push_back(line_no);
      continue;
    }
    rec.frames.append_frame(frame);
    if (offset) timestamps.push_back(ts);
  }

  if (rec.frames.frame_count() < 2) {
    throw Error(ErrorCode::kEmptyFile, entry.path.string() + " has fewer than 2 usable rows");
  }
  if (offset) {
    rec.timestamps = std::move(timestamps);
  } else {
    rec.timestamps.resize(rec.frames.frame_count());
    for (std::size_t f = 0; f < rec.timestamps.size(); ++f) {
      rec.timestamps[f] = static_cast<double>(f) / rec.sample_rate_hz;
    }
  }
  if (rec.stream == StreamKind::kOrientation) {
    result.renormalized_quaternions = normalize_quaternions(rec.frames);
  }
  const auto violations = validate_recording(rec);
  if (!violations.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                entry.path.string() + " failed validation: " + violations.front());
  }
  return result;
}

LoadResult load_recording(const fs::path& path, const IngestManifest& manifest, StreamKind stream,
                          const ScoreTable& scores) {
  auto entry = match_path(path, manifest);
  if (!entry) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + " does not match path template " + manifest.path_template);
  }
  entry->stream = stream;
  return load_recording(*entry, manifest, scores);
}

std::string IngestLog::to_json() const {
  json doc;
  doc["files"] = json::array();
  for (const auto& f : files) {
    json item;
    item["path"] = f.path.generic_string();
    item["dropped_rows"] = f.dropped_rows;
    item["dropped_lines"] = f.dropped_lines;
    item["renormalized_quaternions"] = f.renormalized_quaternions;
    if (!f.error.empty()) item["error"] = f.error;
    doc["files"].push_back(std::move(item));
  }
  doc["unmatched"] = json::array();
  for (const auto& u : unmatched) doc["unmatched"].push_back(u.generic_string());
  return doc.dump(2) + "\n";
}

}  // namespace rehab
