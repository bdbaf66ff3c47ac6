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

// Fixtures shared by the unit and acceptance tests.

#ifndef REHAB_TESTS_TEST_SUPPORT_HPP_
#define REHAB_TESTS_TEST_SUPPORT_HPP_

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rehab/mocap.hpp"

namespace rehab::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "rehab_test_XXXXXX").string();
    if (!mkdtemp(tmpl.data())) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

struct CycleRecording {
  SkeletonRecording recording;
  std::vector<std::size_t> true_peaks;  // frames of the cycle maxima
};

// Position recording for exercise 1 whose hands rise K times along Y in a
// raised-cosine profile. Optional single-frame spikes land on random hand
// samples at least a quarter period from every true peak (closer to a crest,
// the filtered spike legitimately moves the maximum); optional ripple adds
// small bumps that stay under the height threshold.
inline CycleRecording make_cycle_recording(int cycles, double period_s, std::uint64_t seed,
                                           bool spikes = false, bool ripple = false,
                                           double fs = 30.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double lead_s = 1.0, tail_s = 1.2, amplitude = 0.5;
  const auto n = static_cast<std::size_t>(std::ceil((lead_s + cycles * period_s + tail_s) * fs));
  CycleRecording out;
  SkeletonRecording& rec = out.recording;
  rec.subject_id = "S" + std::to_string(seed);
  rec.exercise_id = 1;
  rec.stream = StreamKind::kPosition;
  rec.sample_rate_hz = fs;
  rec.frames = JointFrames(n, 3);
  rec.label = ScoreLabel::from_raw(35.0);
  for (std::size_t f = 0; f < n; ++f) {
    const double t = static_cast<double>(f) / fs;
    const double u = t - lead_s;
    double m = 0.0;
    if (u >= 0.0 && u <= cycles * period_s) m = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u / period_s));
    double bump = 0.0;
    if (ripple && m < 0.05) bump = 0.02 * std::sin(2.0 * std::numbers::pi * 1.5 * t);
    for (int j = 0; j < kJointCount; ++j) {
      rec.frames.at(f, j, 0) = 0.01 * j;
      rec.frames.at(f, j, 1) = 0.02 * j + ((j == 7 || j == 11) ? amplitude * m + bump : 0.0);
      rec.frames.at(f, j, 2) = 2.5;
    }
    rec.timestamps.push_back(t);
  }
  for (int k = 0; k < cycles; ++k) {
    out.true_peaks.push_back(
        static_cast<std::size_t>(std::llround((lead_s + (k + 0.5) * period_s) * fs)));
  }
  if (spikes) {
    const auto guard = static_cast<std::size_t>(std::llround(period_s * fs / 4.0));
    int placed = 0;
    while (placed < cycles) {
      const auto f = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
      bool near = false;
      for (std::size_t p : out.true_peaks) near = near || (f + guard > p && f < p + guard);
      if (near) continue;
      const int joint = unit(rng) < 0.5 ? 7 : 11;
      rec.frames.at(f, joint, 1) += 0.3;
      ++placed;
    }
  }
  return out;
}

// 104-frame repetition with uniform random coordinates (positions) or random
// unit quaternions (orientations).
inline Repetition random_repetition(std::mt19937_64& rng, StreamKind stream, int rep_index = 0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Repetition rep;
  rep.key = {"R", 1, rep_index};
  rep.stream = stream;
  rep.label = ScoreLabel::from_raw(25.0);
  const int comps = component_count(stream);
  rep.frames = JointFrames(kRepetitionLength, comps);
  for (std::size_t f = 0; f < static_cast<std::size_t>(kRepetitionLength); ++f) {
    for (int j = 0; j < kJointCount; ++j) {
      double norm = 0.0;
      for (int c = 0; c < comps; ++c) {
        rep.frames.at(f, j, c) = normal(rng);
        norm += rep.frames.at(f, j, c) * rep.frames.at(f, j, c);
      }
      if (stream == StreamKind::kOrientation) {
        norm = std::sqrt(norm);
        for (int c = 0; c < comps; ++c) rep.frames.at(f, j, c) /= norm;
      }
    }
  }
  return rep;
}

}  // namespace rehab::testing

#endif  // REHAB_TESTS_TEST_SUPPORT_HPP_
