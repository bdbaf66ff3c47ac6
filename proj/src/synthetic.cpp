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

#include "rehab/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "rehab/csv.hpp"
#include "rehab/mocap.hpp"

namespace rehab {

namespace fs = std::filesystem;

namespace {

using Vec3 = std::array<double, 3>;
using Quat = std::array<double, 4>;  // w, x, y, z

// Portable draws: std distributions are not bit-specified across libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
  double normal(double sigma) {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Kinect v2 ordering, metres, subject facing the sensor at ~2.5 m.
constexpr std::array<Vec3, kJointCount> kRestPose = {{
    {0.00, 0.00, 2.50},   {0.00, 0.30, 2.50},   {0.00, 0.60, 2.50},   {0.00, 0.75, 2.48},
    {-0.18, 0.55, 2.50},  {-0.22, 0.30, 2.50},  {-0.24, 0.08, 2.48},  {-0.25, 0.00, 2.47},
    {0.18, 0.55, 2.50},   {0.22, 0.30, 2.50},   {0.24, 0.08, 2.48},   {0.25, 0.00, 2.47},
    {-0.10, -0.05, 2.50}, {-0.10, -0.45, 2.48}, {-0.10, -0.85, 2.50}, {-0.10, -0.90, 2.40},
    {0.10, -0.05, 2.50},  {0.10, -0.45, 2.48},  {0.10, -0.85, 2.50},  {0.10, -0.90, 2.40},
    {0.00, 0.52, 2.50},   {-0.26, -0.08, 2.46}, {-0.22, -0.03, 2.45}, {0.26, -0.08, 2.46},
    {0.22, -0.03, 2.45},
}};

// Distance along the arm chain: 0 at the shoulder, ~1 at the hand.
double arm_weight(int j) {
  switch (j) {
    case 5: case 9: return 0.5;
    case 6: case 10: return 0.9;
    case 7: case 11: return 1.0;
    case 21: case 23: case 22: case 24: return 1.05;
    default: return 0.0;
  }
}

bool left_arm(int j) { return j == 5 || j == 6 || j == 7 || j == 21 || j == 22; }
bool right_arm(int j) { return j == 9 || j == 10 || j == 11 || j == 23 || j == 24; }
bool upper_body(int j) { return kRestPose[j][1] >= -0.06; }

constexpr std::array<double, 6> kBaseAmplitude = {0.0, 0.60, 0.25, 0.30, 0.12, 0.35};

Quat axis_angle(const Vec3& axis, double angle) {
  const double s = std::sin(angle / 2.0);
  return {std::cos(angle / 2.0), axis[0] * s, axis[1] * s, axis[2] * s};
}

Quat multiply(const Quat& a, const Quat& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

struct Performance {
  double quality = 0.0;      // [0, 1]
  double amplitude = 0.0;    // metres of primary motion
  double right_factor = 1.0; // symmetry of the right side
  double tremor = 0.0;       // metres
  double period_s = 2.0;
  int cycles = 5;
};

// Motion envelope in [0, 1]: rest, K raised-cosine cycles, rest.
double envelope(double t, double lead_s, const Performance& p) {
  const double u = t - lead_s;
  if (u < 0.0 || u > p.cycles * p.period_s) return 0.0;
  return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u / p.period_s));
}

Vec3 displaced(int exercise, int j, double m, const Performance& p) {
  Vec3 d = {0.0, 0.0, 0.0};
  const double a = p.amplitude;
  const double side = right_arm(j) ? p.right_factor : 1.0;
  const double w = arm_weight(j);
  switch (exercise) {
    case 1:  // arm lifting
      if (left_arm(j) || right_arm(j)) {
        d[1] = a * side * m * w;
        d[2] = -0.3 * a * side * m * w;
      }
      break;
    case 2:  // lateral trunk tilt
      if (upper_body(j)) {
        const double h = std::max(0.0, kRestPose[j][1] + 0.05) / 0.8;
        d[0] = a * m * h * (right_arm(j) ? p.right_factor : 1.0);
        d[1] = -0.15 * a * m * h;
      }
      break;
    case 3:  // trunk rotation
      if (left_arm(j) || j == 4) d[2] = a * m * std::max(w, 0.3);
      if (right_arm(j) || j == 8) d[2] = -a * p.right_factor * m * std::max(w, 0.3);
      break;
    case 4:  // pelvis rotation
      if (j == 0 || j == 12 || j == 16 || j == 1) d[0] = a * m;
      if (j == 12) d[2] = 0.5 * a * m;
      if (j == 16) d[2] = -0.5 * a * p.right_factor * m;
      if (left_arm(j) || right_arm(j)) d[0] = 0.8 * a * side * m;
      break;
    case 5:  // squat
      if (upper_body(j)) {
        d[1] = -a * m;
        if (left_arm(j) || right_arm(j)) d[2] = -0.6 * a * side * m * w;
      } else if (j == 13 || j == 17) {
        d[1] = -0.4 * a * m;
        d[2] = -0.3 * a * m * (j == 17 ? p.right_factor : 1.0);
      }
      break;
    default:
      break;
  }
  return d;
}

Quat orientation(int exercise, int j, double m, const Performance& p, const Quat& rest) {
  static const Vec3 kX = {1.0, 0.0, 0.0}, kY = {0.0, 1.0, 0.0}, kZ = {0.0, 0.0, 1.0};
  const double rel = p.amplitude / kBaseAmplitude[exercise];
  const double side = right_arm(j) ? p.right_factor : 1.0;
  double angle = 0.0;
  Vec3 axis = kX;
  switch (exercise) {
    case 1:
      angle = 1.4 * rel * side * m * arm_weight(j);
      axis = kX;
      break;
    case 2:
      angle = upper_body(j) ? 0.5 * rel * m * side : 0.0;
      axis = kZ;
      break;
    case 3:
      angle = (upper_body(j) && j != 0) ? 0.7 * rel * m * side : 0.0;
      axis = kY;
      break;
    case 4:
      angle = (j == 0 || j == 12 || j == 16) ? 0.5 * rel * m : 0.2 * rel * m * side;
      axis = kY;
      break;
    case 5:
      angle = (j == 13 || j == 17 || j == 12 || j == 16) ? 1.2 * rel * m : 0.3 * rel * m * side;
      axis = kX;
      break;
    default:
      break;
  }
  return multiply(axis_angle(axis, angle), rest);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct Recording {
  std::string position_csv;
  std::string orientation_csv;
};

Recording synthesize(int exercise, const Performance& p, double fs, bool artifacts, Rng& rng) {
  const double lead_s = 0.6, tail_s = 1.0;
  const auto n = static_cast<std::size_t>(std::ceil((lead_s + p.cycles * p.period_s + tail_s) * fs));
  std::array<Quat, kJointCount> rest{};
  std::array<double, kJointCount> tremor_phase{};
  for (int j = 0; j < kJointCount; ++j) {
    const Vec3 axis = {0.0, 1.0, 0.0};
    rest[j] = axis_angle(axis, 0.1 * (j % 5) - 0.2);
    tremor_phase[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  const bool spike = artifacts && rng.uniform() < 0.35;
  const std::size_t spike_frame = static_cast<std::size_t>(rng.uniform(0.1, 0.9) * n);
  const int spike_joint = rng.integer(0, kJointCount - 1);
  const bool corrupt = artifacts && rng.uniform() < 0.1;
  const std::size_t corrupt_frame = static_cast<std::size_t>(rng.uniform(0.2, 0.8) * n);

  std::ostringstream pos, ori;
  for (std::size_t f = 0; f < n; ++f) {
    const double t = static_cast<double>(f) / fs;
    const double m = envelope(t, lead_s, p);
    pos << fmt(t);
    ori << fmt(t);
    for (int j = 0; j < kJointCount; ++j) {
      const Vec3 d = displaced(exercise, j, m, p);
      const double tremor = (left_arm(j) || right_arm(j))
                                ? p.tremor * std::sin(2.0 * std::numbers::pi * 5.0 * t + tremor_phase[j])
                                : 0.0;
      for (int c = 0; c < 3; ++c) {
        double v = kRestPose[j][c] + d[c] + rng.normal(0.003) + (c == 1 ? tremor : 0.0);
        if (spike && f == spike_frame && j == spike_joint) v += 0.08;
        if (corrupt && f == corrupt_frame && j == 0 && c == 0) {
          pos << ",NaN";
          continue;
        }
        pos << ',' << fmt(v);
      }
      pos << ",2";  // tracking state, discarded on ingest
      Quat q = orientation(exercise, j, m, p, rest[j]);
      const Quat wobble = axis_angle({0.0, 0.0, 1.0}, rng.normal(0.01) + 4.0 * (left_arm(j) || right_arm(j) ? tremor : 0.0));
      q = multiply(wobble, q);
      for (int c = 0; c < 4; ++c) ori << ',' << fmt(q[c]);
    }
    pos << '\n';
    ori << '\n';
  }
  return {pos.str(), ori.str()};
}

std::string manifest_json(double fs) {
  std::ostringstream out;
  out << "{\n"
      << "  \"dataset_root\": \"data\",\n"
      << "  \"path_template\": \"{group}/{subject}/Es{exercise}/{stream}.csv\",\n"
      << "  \"stream_tokens\": {\"position\": \"JointPosition\", \"orientation\": \"JointOrientation\"},\n"
      << "  \"group_tokens\": {\"control\": \"CG\", \"patient\": \"GPP\"},\n"
      << "  \"position_layout\": \"JOINT_MAJOR_XYZC\",\n"
      << "  \"orientation_layout\": \"JOINT_MAJOR_WXYZ\",\n"
      << "  \"has_timestamp_column\": true,\n"
      << "  \"delimiter\": \",\",\n"
      << "  \"sample_rate_hz\": " << csv::format_double(fs) << ",\n"
      << "  \"score_file\": \"scores.csv\",\n"
      << "  \"score_column\": \"score\"\n"
      << "}\n";
  return out.str();
}

}  // namespace

SyntheticSummary write_synthetic_dataset(const fs::path& root, const SyntheticDatasetSpec& spec) {
  Rng rng(spec.seed);
  SyntheticSummary summary;
  summary.manifest = root / "manifest.json";
  csv::write_file(summary.manifest, manifest_json(spec.sample_rate_hz));

  std::ostringstream scores;
  scores << "subject_id,exercise_id,group,score\n";
  const int n_subjects = spec.n_control + spec.n_patient;
  for (int s = 0; s < n_subjects; ++s) {
    const bool control = s < spec.n_control;
    char id[16];
    std::snprintf(id, sizeof(id), "%s%02d", control ? "C" : "P", control ? s + 1 : s - spec.n_control + 1);
    const double subject_quality = control ? rng.uniform(0.65, 1.0) : rng.uniform(0.1, 0.6);
    const double weak_side = rng.uniform(0.5, 1.0);
    for (int e : spec.exercises) {
      Performance p;
      p.quality = std::clamp(subject_quality + rng.normal(0.07), 0.0, 1.0);
      p.amplitude = kBaseAmplitude[e] * (0.55 + 0.45 * p.quality);
      p.right_factor = 1.0 - 0.35 * (1.0 - p.quality) * weak_side;
      p.tremor = 0.012 * (1.0 - p.quality);
      p.period_s = 2.0 + 1.2 * (1.0 - p.quality) + rng.uniform(-0.2, 0.2);
      p.cycles = rng.integer(4, 7);
      const double raw = std::clamp(50.0 * (0.15 + 0.8 * p.quality + rng.normal(0.02)), 0.0, 50.0);
      scores << id << ',' << e << ',' << (control ? "control" : "patient") << ',' << fmt(raw) << '\n';

      const Recording rec = synthesize(e, p, spec.sample_rate_hz, spec.inject_artifacts, rng);
      const fs::path dir = root / "data" / (control ? "CG" : "GPP") / id / ("Es" + std::to_string(e));
      csv::write_file(dir / "JointPosition.csv", rec.position_csv);
      csv::write_file(dir / "JointOrientation.csv", rec.orientation_csv);
      summary.recordings += 2;
      summary.cycles += static_cast<std::size_t>(p.cycles);
    }
  }
  csv::write_file(root / "scores.csv", scores.str());
  return summary;
}

}  // namespace rehab
