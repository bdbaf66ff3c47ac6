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

#include "rehab/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rehab/csv.hpp"
#include "rehab/error.hpp"
#include "rehab/parallel.hpp"

namespace rehab {

using nlohmann::json;

std::string_view stat_name(Stat stat) {
  switch (stat) {
    case Stat::kMax: return "max";
    case Stat::kMin: return "min";
    case Stat::kMean: return "mean";
    case Stat::kStd: return "std";
  }
  return "?";
}

std::vector<std::string> FeatureConfig::feature_names() const {
  std::vector<std::string> names;
  names.reserve(feature_count());
  for (const auto& ch : channels) {
    for (Stat s : stats) names.push_back(ch.name + "." + std::string(stat_name(s)));
  }
  return names;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string axis_label(StreamKind stream, int component) {
  static constexpr const char* kXyz[] = {"x", "y", "z"};
  static constexpr const char* kWxyz[] = {"qw", "qx", "qy", "qz"};
  return stream == StreamKind::kPosition ? kXyz[component] : kWxyz[component];
}

FeatureChannel per_axis(const JointMap& joints, JointId joint, StreamKind stream, int c) {
  return {lower(joints.name_of(joint)) + "_" + axis_label(stream, c), ChannelKind::kPerAxisCoord,
          joint, c};
}

FeatureChannel hand_head(JointId hand, bool left, StreamKind stream) {
  const bool pos = stream == StreamKind::kPosition;
  return {std::string(left ? "hand_left" : "hand_right") + (pos ? "_head_dist" : "_head_angle"),
          pos ? ChannelKind::kHandHeadEuclid : ChannelKind::kHandHeadGeodesic, hand, 0};
}

FeatureConfig base_config(StreamKind stream, JointSelection selection, const JointMap& joints) {
  FeatureConfig cfg;
  cfg.stream = stream;
  cfg.selection = selection;
  const auto vr = joints.vr_joints();
  cfg.head = vr[0];
  cfg.hand_left = vr[1];
  cfg.hand_right = vr[2];
  cfg.allowed_joints = selected_joints(selection, joints);
  return cfg;
}

}  // namespace

FeatureConfig default_config(StreamKind stream, JointSelection selection, const JointMap& joints) {
  FeatureConfig cfg = base_config(stream, selection, joints);
  cfg.name = "paper44";
  const int comps = component_count(stream);
  for (int c = 0; c < comps; ++c) {
    cfg.channels.push_back({"hands_diff_" + axis_label(stream, c), ChannelKind::kInterHandAxisDiff,
                            cfg.hand_left, c});
  }
  cfg.channels.push_back(hand_head(cfg.hand_left, true, stream));
  cfg.channels.push_back(hand_head(cfg.hand_right, false, stream));
  for (JointId hand : {cfg.hand_left, cfg.hand_right}) {
    for (int c = 0; c < comps; ++c) cfg.channels.push_back(per_axis(joints, hand, stream, c));
  }
  if (selection == JointSelection::kFull) {
    for (int j = 0; j < kJointCount; ++j) {
      if (j == cfg.hand_left.index || j == cfg.hand_right.index) continue;
      for (int c = 0; c < comps; ++c) cfg.channels.push_back(per_axis(joints, JointId{j}, stream, c));
    }
  }
  return cfg;
}

FeatureConfig with_head_config(StreamKind stream, JointSelection selection, const JointMap& joints) {
  FeatureConfig cfg = default_config(stream, selection, joints);
  cfg.name = "full56";
  if (selection == JointSelection::kVr) {
    for (int c = 0; c < component_count(stream); ++c) {
      cfg.channels.push_back(per_axis(joints, cfg.head, stream, c));
    }
  }
  return cfg;
}

FeatureConfig resolve_feature_config(const std::string& name_or_path, StreamKind stream,
                                     JointSelection selection, const JointMap& joints) {
  if (name_or_path == "paper44") return default_config(stream, selection, joints);
  if (name_or_path == "full56") return with_head_config(stream, selection, joints);
  if (!std::filesystem::is_regular_file(name_or_path)) {
    throw Error(ErrorCode::kInvalidFeatureConfig,
                "feature config '" + name_or_path + "' is neither a preset nor a file");
  }
  FeatureConfig cfg = base_config(stream, selection, joints);
  cfg.name = std::filesystem::path(name_or_path).stem().string();
  try {
    const json doc = json::parse(csv::read_file(name_or_path));
    for (const auto& [key, value] : doc.items()) {
      if (key != "stats" && key != "channels") {
        throw Error(ErrorCode::kInvalidFeatureConfig, "unknown feature config key '" + key + "'");
      }
    }
    if (doc.contains("stats")) {
      cfg.stats.clear();
      for (const auto& s : doc["stats"]) {
        const std::string n = s.get<std::string>();
        if (n == "max") cfg.stats.push_back(Stat::kMax);
        else if (n == "min") cfg.stats.push_back(Stat::kMin);
        else if (n == "mean") cfg.stats.push_back(Stat::kMean);
        else if (n == "std") cfg.stats.push_back(Stat::kStd);
        else throw Error(ErrorCode::kInvalidFeatureConfig, "unknown stat '" + n + "'");
      }
    }
    const int comps = component_count(stream);
    for (const auto& ch : doc.at("channels")) {
      const std::string kind = ch.at("kind").get<std::string>();
      if (kind == "per_axis") {
        const int c = ch.at("component").get<int>();
        if (c < 0 || c >= comps) throw Error(ErrorCode::kInvalidFeatureConfig, "component out of range");
        cfg.channels.push_back(per_axis(joints, joints.at(ch.at("joint").get<std::string>()), stream, c));
      } else if (kind == "inter_hand_diff") {
        const int c = ch.at("component").get<int>();
        if (c < 0 || c >= comps) throw Error(ErrorCode::kInvalidFeatureConfig, "component out of range");
        cfg.channels.push_back({"hands_diff_" + axis_label(stream, c),
                                ChannelKind::kInterHandAxisDiff, cfg.hand_left, c});
      } else if (kind == "hand_head_euclid" || kind == "hand_head_geodesic") {
        const bool left = ch.at("hand").get<std::string>() == "left";
        FeatureChannel fc = hand_head(left ? cfg.hand_left : cfg.hand_right, left, stream);
        const bool euclid = kind == "hand_head_euclid";
        if (euclid != (stream == StreamKind::kPosition)) {
          throw Error(ErrorCode::kInvalidFeatureConfig, kind + " does not apply to this stream");
        }
        cfg.channels.push_back(fc);
      } else {
        throw Error(ErrorCode::kInvalidFeatureConfig, "unknown channel kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidFeatureConfig, std::string("bad feature config: ") + e.what());
  }
  return cfg;
}

namespace {

void require_joint(const FeatureConfig& cfg, JointId joint) {
  if (!std::binary_search(cfg.allowed_joints.begin(), cfg.allowed_joints.end(), joint.index)) {
    throw Error(ErrorCode::kJointNotInSelection,
                "joint " + std::to_string(joint.index) + " not in selection " +
                    std::string(selection_name(cfg.selection)));
  }
}

}  // namespace

std::vector<double> evaluate_channel(const Repetition& rep, const FeatureChannel& channel,
                                     const FeatureConfig& cfg) {
  const JointFrames& fr = rep.frames;
  const std::size_t n = fr.frame_count();
  std::vector<double> out(n);
  switch (channel.kind) {
    case ChannelKind::kPerAxisCoord:
      require_joint(cfg, channel.joint);
      for (std::size_t f = 0; f < n; ++f) out[f] = fr.at(f, channel.joint.index, channel.component);
      break;
    case ChannelKind::kInterHandAxisDiff:
      require_joint(cfg, cfg.hand_left);
      require_joint(cfg, cfg.hand_right);
      for (std::size_t f = 0; f < n; ++f) {
        out[f] = std::abs(fr.at(f, cfg.hand_left.index, channel.component) -
                          fr.at(f, cfg.hand_right.index, channel.component));
      }
      break;
    case ChannelKind::kHandHeadEuclid:
      require_joint(cfg, channel.joint);
      require_joint(cfg, cfg.head);
      for (std::size_t f = 0; f < n; ++f) {
        double sum = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double d = fr.at(f, channel.joint.index, c) - fr.at(f, cfg.head.index, c);
          sum += d * d;
        }
        out[f] = std::sqrt(sum);
      }
      break;
    case ChannelKind::kHandHeadGeodesic:
      require_joint(cfg, channel.joint);
      require_joint(cfg, cfg.head);
      if (fr.components() != 4) {
        throw Error(ErrorCode::kInvalidFeatureConfig, "geodesic channel needs quaternion frames");
      }
      for (std::size_t f = 0; f < n; ++f) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int c = 0; c < 4; ++c) {
          const double a = fr.at(f, channel.joint.index, c);
          const double b = fr.at(f, cfg.head.index, c);
          dot += a * b;
          na += a * a;
          nb += b * b;
        }
        const double denom = std::sqrt(na * nb);
        const double cosine = denom > 0.0 ? std::min(1.0, std::abs(dot) / denom) : 1.0;
        out[f] = 2.0 * std::acos(cosine);
      }
      break;
  }
  return out;
}

double compute_stat(std::span<const double> series, Stat stat) {
  if (series.empty()) throw Error(ErrorCode::kEmptyInput, "statistic of empty series");
  switch (stat) {
    case Stat::kMax: return *std::max_element(series.begin(), series.end());
    case Stat::kMin: return *std::min_element(series.begin(), series.end());
    case Stat::kMean:
    case Stat::kStd: {
      double sum = 0.0;
      for (double v : series) sum += v;
      const double mean = sum / static_cast<double>(series.size());
      if (stat == Stat::kMean) return mean;
      double ss = 0.0;
      for (double v : series) ss += (v - mean) * (v - mean);
      return std::sqrt(ss / static_cast<double>(series.size()));
    }
  }
  return 0.0;
}

FeatureVector extract(const Repetition& rep, const FeatureConfig& cfg) {
  if (rep.stream != cfg.stream) {
    throw Error(ErrorCode::kInvalidFeatureConfig, "feature config built for a different stream");
  }
  FeatureVector fv;
  fv.names = cfg.feature_names();
  fv.values.reserve(fv.names.size());
  for (const auto& ch : cfg.channels) {
    const std::vector<double> series = evaluate_channel(rep, ch, cfg);
    for (Stat s : cfg.stats) fv.values.push_back(compute_stat(series, s));
  }
  return fv;
}

std::string FeatureTable::to_csv() const {
  std::ostringstream out;
  out << "subject_id,exercise_id,repetition_index,label";
  for (const auto& n : feature_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out << keys[i].subject_id << ',' << keys[i].exercise_id << ',' << keys[i].repetition_index
        << ',' << csv::format_double(labels[i]);
    for (double v : rows[i]) out << ',' << csv::format_double(v);
    out << '\n';
  }
  return out.str();
}

FeatureTable FeatureTable::from_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_table(path);
  static const std::vector<std::string> kKeyColumns = {"subject_id", "exercise_id",
                                                       "repetition_index", "label"};
  if (table.header.size() < kKeyColumns.size() ||
      !std::equal(kKeyColumns.begin(), kKeyColumns.end(), table.header.begin())) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + " is not a feature matrix");
  }
  FeatureTable out;
  out.feature_names.assign(table.header.begin() + 4, table.header.end());
  std::size_t line = 1;
  for (const auto& row : table.rows) {
    ++line;
    if (row.size() != table.header.size()) {
      throw Error(ErrorCode::kColumnMismatch, path.string() + " line " + std::to_string(line) +
                                                  " has the wrong number of columns");
    }
    const auto ex = csv::parse_int(row[1]);
    const auto rep = csv::parse_int(row[2]);
    const auto label = csv::parse_double(row[3]);
    if (!ex || !rep || !label) {
      throw Error(ErrorCode::kInvalidArgument, path.string() + " line " + std::to_string(line) +
                                                   " has a malformed key or label");
    }
    std::vector<double> values;
    values.reserve(out.feature_names.size());
    for (std::size_t c = 4; c < row.size(); ++c) {
      const auto v = csv::parse_double(row[c]);
      if (!v) {
        throw Error(ErrorCode::kInvalidArgument, path.string() + " line " + std::to_string(line) +
                                                     " has a non-numeric feature");
      }
      values.push_back(*v);
    }
    out.keys.push_back({row[0], static_cast<int>(*ex), static_cast<int>(*rep)});
    out.labels.push_back(*label);
    out.rows.push_back(std::move(values));
  }
  return out;
}

FeatureTable build_feature_table(std::span<const Repetition> reps, const FeatureConfig& cfg,
                                 unsigned workers) {
  FeatureTable table;
  table.feature_names = cfg.feature_names();
  table.keys.resize(reps.size());
  table.labels.resize(reps.size());
  table.rows.resize(reps.size());
  parallel_for(reps.size(), workers, [&](std::size_t i) {
    table.keys[i] = reps[i].key;
    table.labels[i] = reps[i].label.normalized;
    table.rows[i] = extract(reps[i], cfg).values;
  });
  return table;
}

}  // namespace rehab
