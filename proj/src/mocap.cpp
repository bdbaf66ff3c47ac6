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

#include "rehab/mocap.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rehab/error.hpp"

namespace rehab {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kIoFailure: return "IO_FAILURE";
    case ErrorCode::kColumnMismatch: return "COLUMN_MISMATCH";
    case ErrorCode::kEmptyFile: return "EMPTY_FILE";
    case ErrorCode::kLabelMissing: return "LABEL_MISSING";
    case ErrorCode::kScoreOutOfRange: return "SCORE_OUT_OF_RANGE";
    case ErrorCode::kDuplicateKey: return "DUPLICATE_KEY";
    case ErrorCode::kInvalidManifest: return "INVALID_MANIFEST";
    case ErrorCode::kInvalidCutoff: return "INVALID_CUTOFF";
    case ErrorCode::kSignalTooShort: return "SIGNAL_TOO_SHORT";
    case ErrorCode::kNoRepetitions: return "NO_REPETITIONS";
    case ErrorCode::kSegmentTooShort: return "SEGMENT_TOO_SHORT";
    case ErrorCode::kJointNotInSelection: return "JOINT_NOT_IN_SELECTION";
    case ErrorCode::kInvalidFeatureConfig: return "INVALID_FEATURE_CONFIG";
    case ErrorCode::kEmptyTrainingSet: return "EMPTY_TRAINING_SET";
    case ErrorCode::kFeatureLabelLengthMismatch: return "FEATURE_LABEL_LENGTH_MISMATCH";
    case ErrorCode::kFeatureLengthMismatch: return "FEATURE_LENGTH_MISMATCH";
    case ErrorCode::kSchemaVersionMismatch: return "SCHEMA_VERSION_MISMATCH";
    case ErrorCode::kTooFewUnits: return "TOO_FEW_UNITS";
    case ErrorCode::kLengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::kEmptyInput: return "EMPTY_INPUT";
    case ErrorCode::kMissingExternalPrediction: return "MISSING_EXTERNAL_PREDICTION";
  }
  return "UNKNOWN";
}

int component_count(StreamKind stream) {
  return stream == StreamKind::kPosition ? 3 : 4;
}

std::string_view stream_name(StreamKind stream) {
  return stream == StreamKind::kPosition ? "position" : "orientation";
}

StreamKind parse_stream(std::string_view name) {
  if (name == "position") return StreamKind::kPosition;
  if (name == "orientation") return StreamKind::kOrientation;
  throw Error(ErrorCode::kInvalidArgument, "unknown stream '" + std::string(name) + "'");
}

std::string_view group_name(Group group) {
  switch (group) {
    case Group::kControl: return "control";
    case Group::kPatient: return "patient";
    case Group::kUnknown: break;
  }
  return "unknown";
}

Group parse_group(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "control" || lower == "cg") return Group::kControl;
  if (lower == "patient" || lower == "gpp") return Group::kPatient;
  return Group::kUnknown;
}

std::string_view selection_name(JointSelection selection) {
  return selection == JointSelection::kFull ? "full" : "vr";
}

JointSelection parse_selection(std::string_view name) {
  if (name == "full") return JointSelection::kFull;
  if (name == "vr") return JointSelection::kVr;
  throw Error(ErrorCode::kInvalidArgument, "unknown joint selection '" + std::string(name) + "'");
}

JointId JointId::checked(int index) {
  if (index < 0 || index >= kJointCount) {
    throw Error(ErrorCode::kInvalidArgument,
                "joint index " + std::to_string(index) + " outside [0, 24]");
  }
  return JointId{index};
}

namespace {

std::map<std::string, int> kinect_v2_names() {
  static constexpr std::array<const char*, kJointCount> kNames = {
      "SPINE_BASE",     "SPINE_MID",   "NECK",           "HEAD",
      "SHOULDER_LEFT",  "ELBOW_LEFT",  "WRIST_LEFT",     "HAND_LEFT",
      "SHOULDER_RIGHT", "ELBOW_RIGHT", "WRIST_RIGHT",    "HAND_RIGHT",
      "HIP_LEFT",       "KNEE_LEFT",   "ANKLE_LEFT",     "FOOT_LEFT",
      "HIP_RIGHT",      "KNEE_RIGHT",  "ANKLE_RIGHT",    "FOOT_RIGHT",
      "SPINE_SHOULDER", "HAND_TIP_LEFT", "THUMB_LEFT",   "HAND_TIP_RIGHT",
      "THUMB_RIGHT"};
  std::map<std::string, int> names;
  for (int i = 0; i < kJointCount; ++i) names.emplace(kNames[i], i);
  return names;
}

}  // namespace

JointMap::JointMap() : names_(kinect_v2_names()) {}

JointMap::JointMap(std::map<std::string, int> names) : names_(std::move(names)) {
  for (const auto& [name, index] : names_) JointId::checked(index);
}

const JointMap& JointMap::kinect_v2() {
  static const JointMap map;
  return map;
}

JointId JointMap::at(std::string_view name) const {
  const auto found = find(name);
  if (!found) {
    throw Error(ErrorCode::kInvalidArgument, "joint '" + std::string(name) + "' not in joint map");
  }
  return *found;
}

std::optional<JointId> JointMap::find(std::string_view name) const {
  const auto it = names_.find(std::string(name));
  if (it == names_.end()) return std::nullopt;
  return JointId{it->second};
}

std::string JointMap::name_of(JointId joint) const {
  for (const auto& [name, index] : names_) {
    if (index == joint.index) return name;
  }
  return "JOINT_" + std::to_string(joint.index);
}

std::array<JointId, 3> JointMap::vr_joints() const {
  const std::array<JointId, 3> joints = {head(), hand_left(), hand_right()};
  if (joints[0] == joints[1] || joints[0] == joints[2] || joints[1] == joints[2]) {
    throw Error(ErrorCode::kInvalidArgument,
                "HEAD, HAND_LEFT and HAND_RIGHT must map to distinct indices");
  }
  return joints;
}

std::vector<int> selected_joints(JointSelection selection, const JointMap& joints) {
  std::vector<int> out;
  if (selection == JointSelection::kFull) {
    for (int i = 0; i < kJointCount; ++i) out.push_back(i);
    return out;
  }
  for (JointId j : joints.vr_joints()) out.push_back(j.index);
  std::sort(out.begin(), out.end());
  return out;
}

ScoreLabel ScoreLabel::from_raw(double raw) {
  return ScoreLabel{raw, raw / kMaxRawScore};
}

ScoreLabel ScoreLabel::from_normalized(double normalized) {
  return ScoreLabel{normalized * kMaxRawScore, normalized};
}

JointFrames::JointFrames(std::size_t n_frames, int n_components)
    : n_frames_(n_frames),
      n_components_(n_components),
      data_(n_frames * kJointCount * static_cast<std::size_t>(n_components), 0.0) {}

std::vector<double> JointFrames::channel(int joint, int component) const {
  std::vector<double> out(n_frames_);
  for (std::size_t f = 0; f < n_frames_; ++f) out[f] = at(f, joint, component);
  return out;
}

JointFrames JointFrames::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, n_frames_);
  begin = std::min(begin, end);
  JointFrames out(end - begin, n_components_);
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(begin * frame_stride()),
            data_.begin() + static_cast<std::ptrdiff_t>(end * frame_stride()),
            out.data_.begin());
  return out;
}

void JointFrames::append_frame(std::span<const double> values) {
  if (values.size() != frame_stride()) {
    throw Error(ErrorCode::kInvalidArgument, "frame width mismatch");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++n_frames_;
}

namespace {

double quaternion_norm(const JointFrames& frames, std::size_t f, int joint) {
  double sum = 0.0;
  for (int c = 0; c < 4; ++c) sum += frames.at(f, joint, c) * frames.at(f, joint, c);
  return std::sqrt(sum);
}

}  // namespace

std::vector<std::string> validate_recording(const SkeletonRecording& rec) {
  std::vector<std::string> violations;
  const JointFrames& frames = rec.frames;
  if (frames.frame_count() < 2) violations.emplace_back("n_frames < 2");
  if (rec.exercise_id < 1 || rec.exercise_id > 5) {
    violations.push_back("exercise_id " + std::to_string(rec.exercise_id) + " outside [1, 5]");
  }
  if (!(rec.sample_rate_hz > 0.0) || !std::isfinite(rec.sample_rate_hz)) {
    violations.emplace_back("sample_rate_hz must be positive");
  }
  if (frames.components() != component_count(rec.stream)) {
    violations.push_back("stream " + std::string(stream_name(rec.stream)) + " expects " +
                         std::to_string(component_count(rec.stream)) +
                         " components per joint, got " + std::to_string(frames.components()));
  }
  if (frames.data().size() != frames.frame_count() * frames.frame_stride()) {
    violations.emplace_back("frame storage does not match n_frames x 25 x n_components");
  } else {
    const bool finite = std::all_of(frames.data().begin(), frames.data().end(),
                                    [](double v) { return std::isfinite(v); });
    if (!finite) violations.emplace_back("non-finite joint values");
    if (rec.stream == StreamKind::kOrientation && frames.components() == 4) {
      std::size_t bad = 0;
      std::string first;
      for (std::size_t f = 0; f < frames.frame_count(); ++f) {
        for (int j = 0; j < kJointCount; ++j) {
          const double n = quaternion_norm(frames, f, j);
          if (!(std::abs(n - 1.0) <= kQuaternionNormTolerance)) {
            if (bad++ == 0) {
              std::ostringstream ss;
              ss << "frame " << f << " joint " << j << " norm " << n;
              first = ss.str();
            }
          }
        }
      }
      if (bad > 0) {
        violations.push_back("quaternion norm outside 1 +/- 1e-3 for " + std::to_string(bad) +
                             " joint(s), first at " + first);
      }
    }
  }
  if (!rec.timestamps.empty() && rec.timestamps.size() != frames.frame_count()) {
    violations.emplace_back("timestamp count does not match frame count");
  }
  if (!(rec.label.raw >= 0.0 && rec.label.raw <= kMaxRawScore)) {
    violations.emplace_back("raw score outside [0, 50]");
  }
  if (std::abs(rec.label.normalized - rec.label.raw / kMaxRawScore) > 1e-12) {
    violations.emplace_back("normalized score != raw / 50");
  }
  return violations;
}

std::size_t normalize_quaternions(JointFrames& frames) {
  if (frames.components() != 4) return 0;
  std::size_t touched = 0;
  for (std::size_t f = 0; f < frames.frame_count(); ++f) {
    for (int j = 0; j < kJointCount; ++j) {
      const double n = quaternion_norm(frames, f, j);
      if (n == 0.0 || !std::isfinite(n)) continue;
      if (std::abs(n - 1.0) > kQuaternionNormTolerance) {
        for (int c = 0; c < 4; ++c) frames.at(f, j, c) /= n;
        ++touched;
      }
    }
  }
  return touched;
}

std::string to_string(const RepetitionKey& key) {
  return key.subject_id + "/" + std::to_string(key.exercise_id) + "/" +
         std::to_string(key.repetition_index);
}

std::vector<std::string> FeatureVector::validate() const {
  std::vector<std::string> violations;
  if (names.size() != values.size()) violations.emplace_back("names and values differ in length");
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) violations.push_back("duplicate feature name " + n);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      violations.push_back("non-finite value at " + std::to_string(i));
    }
  }
  return violations;
}

}  // namespace rehab
