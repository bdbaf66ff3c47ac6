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

// Core skeleton-recording value types shared by every pipeline stage.

#ifndef REHAB_MOCAP_HPP_
#define REHAB_MOCAP_HPP_

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rehab {

inline constexpr int kJointCount = 25;
inline constexpr int kRepetitionLength = 104;
inline constexpr double kMaxRawScore = 50.0;
inline constexpr double kQuaternionNormTolerance = 1e-3;

enum class StreamKind { kPosition, kOrientation };

// 3 for positions (x, y, z), 4 for quaternions (w, x, y, z).
int component_count(StreamKind stream);
std::string_view stream_name(StreamKind stream);
StreamKind parse_stream(std::string_view name);

enum class Group { kControl, kPatient, kUnknown };
std::string_view group_name(Group group);
Group parse_group(std::string_view name);

enum class JointSelection { kFull, kVr };
std::string_view selection_name(JointSelection selection);
JointSelection parse_selection(std::string_view name);

struct JointId {
  int index = 0;

  static JointId checked(int index);
  auto operator<=>(const JointId&) const = default;
};

// Name -> index table for the 25 tracked joints. Defaults to the Kinect v2
// enumeration; datasets override it through the ingestion manifest.
class JointMap {
 public:
  JointMap();
  explicit JointMap(std::map<std::string, int> names);

  static const JointMap& kinect_v2();

  JointId at(std::string_view name) const;
  std::optional<JointId> find(std::string_view name) const;
  // Name for an index; falls back to "JOINT_<i>" for unnamed indices.
  std::string name_of(JointId joint) const;

  JointId head() const { return at("HEAD"); }
  JointId hand_left() const { return at("HAND_LEFT"); }
  JointId hand_right() const { return at("HAND_RIGHT"); }

  // HEAD, HAND_LEFT, HAND_RIGHT. Throws if the mapping collides.
  std::array<JointId, 3> vr_joints() const;

  const std::map<std::string, int>& names() const { return names_; }

 private:
  std::map<std::string, int> names_;
};

// Sorted joint indices covered by a selection.
std::vector<int> selected_joints(JointSelection selection, const JointMap& joints);

struct ScoreLabel {
  double raw = 0.0;
  double normalized = 0.0;

  static ScoreLabel from_raw(double raw);
  static ScoreLabel from_normalized(double normalized);
};

// Dense n_frames x 25 x n_components array, frame-major.
class JointFrames {
 public:
  JointFrames() = default;
  JointFrames(std::size_t n_frames, int n_components);

  std::size_t frame_count() const { return n_frames_; }
  int components() const { return n_components_; }
  std::size_t frame_stride() const {
    return static_cast<std::size_t>(kJointCount) * n_components_;
  }

  double& at(std::size_t frame, int joint, int component) {
    return data_[frame * frame_stride() + joint * n_components_ + component];
  }
  double at(std::size_t frame, int joint, int component) const {
    return data_[frame * frame_stride() + joint * n_components_ + component];
  }

  std::span<double> frame(std::size_t f) {
    return {data_.data() + f * frame_stride(), frame_stride()};
  }
  std::span<const double> frame(std::size_t f) const {
    return {data_.data() + f * frame_stride(), frame_stride()};
  }

  // Series of one joint component across frames.
  std::vector<double> channel(int joint, int component) const;

  // Copies frames [begin, end).
  JointFrames slice(std::size_t begin, std::size_t end) const;

  void append_frame(std::span<const double> values);

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const JointFrames&) const = default;

 private:
  std::size_t n_frames_ = 0;
  int n_components_ = 3;
  std::vector<double> data_;
};

struct SkeletonRecording {
  std::string subject_id;
  Group group = Group::kUnknown;
  int exercise_id = 1;
  StreamKind stream = StreamKind::kPosition;
  double sample_rate_hz = 30.0;
  JointFrames frames;
  // Seconds; synthesized as frame / sample_rate_hz when the source has none.
  std::vector<double> timestamps;
  ScoreLabel label;
};

// One human-readable entry per violated recording invariant; empty if valid.
std::vector<std::string> validate_recording(const SkeletonRecording& rec);

// Rescales quaternions whose norm is off by more than the tolerance.
// Returns the number of quaternions touched. Zero quaternions are left as is.
std::size_t normalize_quaternions(JointFrames& frames);

struct RepetitionKey {
  std::string subject_id;
  int exercise_id = 0;
  int repetition_index = 0;

  auto operator<=>(const RepetitionKey&) const = default;
};

std::string to_string(const RepetitionKey& key);

struct Repetition {
  RepetitionKey key;
  Group group = Group::kUnknown;
  StreamKind stream = StreamKind::kPosition;
  JointFrames frames;
  ScoreLabel label;
};

struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  // Violations of the finite/unique/aligned invariants.
  std::vector<std::string> validate() const;
};

}  // namespace rehab

#endif  // REHAB_MOCAP_HPP_
