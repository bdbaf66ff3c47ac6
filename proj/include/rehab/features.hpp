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

// Summary-statistic features over named per-frame channels of a repetition.

#ifndef REHAB_FEATURES_HPP_
#define REHAB_FEATURES_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rehab/mocap.hpp"

namespace rehab {

enum class ChannelKind {
  kPerAxisCoord,        // joint component value
  kInterHandAxisDiff,   // |left_c - right_c|
  kHandHeadEuclid,      // ||hand - head|| over x, y, z
  kHandHeadGeodesic,    // 2 acos |<q_hand, q_head>|
};

struct FeatureChannel {
  std::string name;
  ChannelKind kind = ChannelKind::kPerAxisCoord;
  JointId joint;      // kPerAxisCoord: the joint; hand-head kinds: the hand
  int component = 0;  // kPerAxisCoord, kInterHandAxisDiff

  bool operator==(const FeatureChannel&) const = default;
};

enum class Stat { kMax, kMin, kMean, kStd };
std::string_view stat_name(Stat stat);

struct FeatureConfig {
  std::string name;
  StreamKind stream = StreamKind::kPosition;
  JointSelection selection = JointSelection::kVr;
  std::vector<FeatureChannel> channels;
  std::vector<Stat> stats = {Stat::kMax, Stat::kMin, Stat::kMean, Stat::kStd};
  // Resolved from the joint map when the config is built.
  JointId head{3};
  JointId hand_left{7};
  JointId hand_right{11};
  std::vector<int> allowed_joints;

  std::size_t feature_count() const { return channels.size() * stats.size(); }
  std::vector<std::string> feature_names() const;
};

// "paper44" preset: inter-hand per-axis differences, hand-head relations and
// per-axis hand coordinates. FULL appends per-axis channels of every other
// joint in index order.
FeatureConfig default_config(StreamKind stream, JointSelection selection,
                             const JointMap& joints = JointMap::kinect_v2());

// "full56" preset: paper44 plus per-axis head coordinates (VR only; under
// FULL the head is already present and this equals the default).
FeatureConfig with_head_config(StreamKind stream, JointSelection selection,
                               const JointMap& joints = JointMap::kinect_v2());

// Preset by name ("paper44", "full56") or a JSON file path:
//   {"stats": ["max", ...], "channels": [{"kind": "per_axis", "joint": "HEAD",
//    "component": 1}, {"kind": "inter_hand_diff", "component": 0},
//    {"kind": "hand_head_euclid", "hand": "left"}, ...]}
FeatureConfig resolve_feature_config(const std::string& name_or_path, StreamKind stream,
                                     JointSelection selection,
                                     const JointMap& joints = JointMap::kinect_v2());

std::vector<double> evaluate_channel(const Repetition& rep, const FeatureChannel& channel,
                                     const FeatureConfig& cfg);

// Population standard deviation.
double compute_stat(std::span<const double> series, Stat stat);

FeatureVector extract(const Repetition& rep, const FeatureConfig& cfg);

// Feature matrix CSV: subject_id,exercise_id,repetition_index,label,<names...>
struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<RepetitionKey> keys;
  std::vector<double> labels;              // normalized
  std::vector<std::vector<double>> rows;   // one per key

  std::size_t size() const { return keys.size(); }
  std::string to_csv() const;
  static FeatureTable from_csv(const std::filesystem::path& path);
};

// Extracts features for every repetition; `workers` threads, order preserved.
FeatureTable build_feature_table(std::span<const Repetition> reps, const FeatureConfig& cfg,
                                 unsigned workers = 1);

}  // namespace rehab

#endif  // REHAB_FEATURES_HPP_
