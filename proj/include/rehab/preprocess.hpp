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

// Signal pipeline that turns a recording into fixed-length repetitions:
// low-pass filter one segmentation channel, find its peaks, reject false
// peaks, cut peak-to-peak over the raw frames and resample to 104 frames.

#ifndef REHAB_PREPROCESS_HPP_
#define REHAB_PREPROCESS_HPP_

#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rehab/mocap.hpp"

namespace rehab {

struct FilterSpec {
  int order = 3;
  double cutoff_hz = 3.0;
  double sample_rate_hz = 30.0;
  bool zero_phase = true;

  // Throws INVALID_CUTOFF unless 0 < cutoff < Nyquist and order >= 1.
  void validate() const;
};

struct FilterCoefficients {
  std::vector<double> b;  // numerator, b[0..order]
  std::vector<double> a;  // denominator, a[0] == 1
};

// Digital Butterworth low-pass via the bilinear transform with frequency
// pre-warping, so the -3 dB point lands exactly on cutoff_hz. DC gain is 1.
FilterCoefficients design_butterworth(const FilterSpec& spec);

// H(e^{jw}) at frequency_hz.
std::complex<double> frequency_response(const FilterCoefficients& coeffs, double frequency_hz,
                                        double sample_rate_hz);

// Steady-state initial conditions of the transposed direct form II filter
// for a unit step input.
std::vector<double> filter_initial_state(const FilterCoefficients& coeffs);

// Single pass of the filter. `initial_state` may be empty (zero state).
std::vector<double> lfilter(const FilterCoefficients& coeffs, std::span<const double> signal,
                            std::span<const double> initial_state = {});

// Zero-phase mode filters forward then backward over an odd-reflected
// extension of min(3 * (order + 1), n - 1) samples at each edge. Causal mode
// runs one pass initialised to the first sample's steady state.
std::vector<double> apply_filter(std::span<const double> signal, const FilterSpec& spec);

enum class Polarity { kMaxima, kMinima };

struct SegmentationSpec {
  // Joints whose channel is averaged to form the segmentation signal.
  std::vector<JointId> joints;
  int axis = 1;
  Polarity polarity = Polarity::kMaxima;
  double min_height_quantile = 0.6;
  double min_separation_s = 1.0;

  // min_separation_s * sample rate, rounded up.
  std::size_t min_separation_frames(double sample_rate_hz) const;
  void validate(double sample_rate_hz, int n_components) const;
};

// Per-exercise segmentation settings, with a fallback default.
struct SegmentationConfig {
  SegmentationSpec fallback;
  std::map<int, SegmentationSpec> per_exercise;

  const SegmentationSpec& for_exercise(int exercise_id) const;

  // Built-in defaults resolved through `joints`.
  static SegmentationConfig defaults(const JointMap& joints);
  // JSON: {"default": {...}, "exercises": {"1": {...}}}; each spec has
  // joints (names), axis, polarity ("maxima"|"minima"), min_height_quantile,
  // min_separation_s. Missing fields inherit from the built-in defaults.
  static SegmentationConfig from_json(const std::string& json_text, const JointMap& joints);
};

enum class RejectReason { kHeight, kSeparation };
std::string_view reject_reason_name(RejectReason reason);

struct RejectedPeak {
  std::size_t index = 0;
  RejectReason reason = RejectReason::kHeight;
};

struct PeakList {
  std::vector<std::size_t> accepted;  // strictly increasing
  std::vector<RejectedPeak> rejected;  // sorted by index
  double height_threshold = 0.0;      // in the polarity-adjusted signal
};

// Linear-interpolation quantile (the usual "type 7" definition).
double quantile(std::span<const double> values, double q);

// A signal whose peak-to-peak range is within kFlatSignalTolerance of its
// magnitude is treated as motionless: filter round-off there is not a peak.
inline constexpr double kFlatSignalTolerance = 1e-9;

PeakList detect_peaks(std::span<const double> signal, const SegmentationSpec& spec,
                      double sample_rate_hz);

struct Segment {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::size_t length() const { return end - begin; }
  bool operator==(const Segment&) const = default;
};

struct SegmentationResult {
  std::vector<Segment> segments;
  PeakList peaks;
  std::vector<double> raw_channel;
  std::vector<double> filtered_channel;
};

// Segmentation signal: mean over the spec's joints of component `axis`.
std::vector<double> segmentation_channel(const SkeletonRecording& rec, const SegmentationSpec& seg);

SegmentationResult split_repetitions(const SkeletonRecording& rec, const SegmentationSpec& seg,
                                     const FilterSpec& filt);

// Peak-to-peak segments from accepted peaks over n_frames (the trailing and
// minimum-length rules applied). Throws NO_REPETITIONS below two peaks.
std::vector<Segment> segments_from_peaks(std::span<const std::size_t> peaks, std::size_t n_frames);

// Linear interpolation of every channel onto target_len points spanning the
// first and last frames; endpoints are copied exactly. Interpolated
// quaternions are sign-aligned then renormalised.
JointFrames resample_frames(const JointFrames& frames, StreamKind stream,
                            int target_len = kRepetitionLength);

Repetition resample_repetition(const SkeletonRecording& rec, const Segment& segment,
                               int repetition_index, int target_len = kRepetitionLength);

// CSV: frame,raw_value,filtered_value,is_accepted_peak,is_rejected_peak,reason
std::string peak_diagnostics_csv(const SegmentationResult& result);

}  // namespace rehab

#endif  // REHAB_PREPROCESS_HPP_
