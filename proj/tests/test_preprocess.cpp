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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rehab/error.hpp"
#include "rehab/preprocess.hpp"
#include "test_support.hpp"

namespace rehab {
namespace {

constexpr double kPi = std::numbers::pi;

// Reference values below were produced once with scipy.signal (butter,
// lfilter_zi, lfilter, filtfilt, find_peaks) and frozen here.
const std::vector<double> kButter3B = {0.018098933007514428, 0.05429679902254328,
                                       0.05429679902254328, 0.018098933007514428};
const std::vector<double> kButter3A = {1.0, -1.7600418803431688, 1.182893262037831,
                                       -0.27805991763454646};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

FilterSpec default_filter() { return FilterSpec{}; }

TEST(Butterworth, MatchesReferenceCoefficients) {
  const FilterCoefficients c = design_butterworth(default_filter());
  ASSERT_EQ(c.b.size(), 4u);
  ASSERT_EQ(c.a.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(c.b[i], kButter3B[i], 1e-14);
    EXPECT_NEAR(c.a[i], kButter3A[i], 1e-14);
  }
  const FilterCoefficients c2 = design_butterworth({2, 5.0, 100.0, true});
  const std::vector<double> b2 = {0.020083365564211232, 0.040166731128422464, 0.020083365564211232};
  const std::vector<double> a2 = {1.0, -1.5610180758007182, 0.6413515380575631};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(c2.b[i], b2[i], 1e-14);
    EXPECT_NEAR(c2.a[i], a2[i], 1e-14);
  }
}

TEST(Butterworth, GainAtDcCutoffAndNyquist) {
  for (int order : {1, 2, 3, 4, 5}) {
    for (double cutoff : {0.5, 3.0, 7.0, 12.0}) {
      const FilterSpec spec{order, cutoff, 30.0, true};
      const FilterCoefficients c = design_butterworth(spec);
      EXPECT_NEAR(std::abs(frequency_response(c, 0.0, 30.0)), 1.0, 1e-9);
      EXPECT_NEAR(std::abs(frequency_response(c, cutoff, 30.0)), 1.0 / std::sqrt(2.0), 1e-6);
      EXPECT_LT(std::abs(frequency_response(c, 15.0, 30.0)), 1e-6);
    }
  }
}

TEST(Butterworth, RejectsCutoffOutsideNyquist) {
  EXPECT_EQ(code_of([] { design_butterworth({3, 15.0, 30.0, true}); }), ErrorCode::kInvalidCutoff);
  EXPECT_EQ(code_of([] { design_butterworth({3, 0.0, 30.0, true}); }), ErrorCode::kInvalidCutoff);
  EXPECT_EQ(code_of([] { design_butterworth({0, 3.0, 30.0, true}); }), ErrorCode::kInvalidCutoff);
}

TEST(Lfilter, MatchesReferenceRampAndInitialState) {
  const FilterCoefficients c = design_butterworth(default_filter());
  const std::vector<double> zi = filter_initial_state(c);
  const std::vector<double> zi_ref = {0.9819010669924833, -0.8324376123732247, 0.2961588506420602};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(zi[i], zi_ref[i], 1e-13);

  const std::vector<double> ramp = {0, 1, 2, 3, 4, 5, 6, 7};
  const std::vector<double> ref = {0.0, 0.018098933007514428, 0.12234954512032287,
                                   0.41111841363821466, 0.9458704212189115, 1.7192529819799773,
                                   2.6729706436737106, 3.7302092134187226};
  const std::vector<double> y = lfilter(c, ramp);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
}

TEST(ApplyFilter, ZeroPhaseMatchesReference) {
  std::vector<double> x(40);
  for (int i = 0; i < 40; ++i) {
    x[i] = std::sin(2 * kPi * 0.5 * i / 30.0) + (i == 20 ? 1.0 : 0.0) + 0.05 * ((i * 7) % 5);
  }
  const std::vector<double> ref = {
      -0.0009269036286881638, 0.147670396685714,   0.2867695661515844,  0.41075850953009047,
      0.5191517627750208,     0.6147597935912087,  0.7006973019598315,  0.7785081386376275,
      0.848203182827669,      0.9091536854683507,  0.960576838682879,   1.001717284408497,
      1.032648354673582,      1.055688095512739,   1.0759423487222965,  1.0995804648886907,
      1.13023159609207,       1.1653979973414306,  1.1948247454014904,  1.2023219444663997,
      1.1721228184399022,     1.0977185759998682,  0.9864669656386388,  0.8554702041056219,
      0.7225633149347527,     0.5993327271966135,  0.48903560135967206, 0.38858178649339686,
      0.29247626131139126,    0.19620090147792285, 0.09744587917681966, -0.0043205665974018525,
      -0.10831278912925164,   -0.21217237169536932, -0.3118652999954628, -0.40276689929505416,
      -0.48157957018106823,   -0.5477622086313859, -0.6037722830278702, -0.6545313889644641};
  const std::vector<double> y = apply_filter(x, default_filter());
  ASSERT_EQ(y.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-10) << i;
}

TEST(ApplyFilter, ShortSignalClampsPadding) {
  // n = 10 < 3 * (order + 1) + 1: padding shrinks to n - 1.
  const std::vector<double> x = {0, 1, 3, 2, 5, 4, 6, 8, 7, 9};
  const std::vector<double> ref = {0.038792149384438056, 1.066700121273381, 2.0710919823434346,
                                   3.0486848686382557,  4.007935029847296, 4.9640615399838275,
                                   5.932086784246219,   6.923829982183623, 7.948708955787654,
                                   9.011906811150249};
  const std::vector<double> y = apply_filter(x, default_filter());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-10) << i;
}

TEST(ApplyFilter, ConstantSignalIsUnchanged) {
  const std::vector<double> x(90, 2.5);
  for (bool zero_phase : {true, false}) {
    FilterSpec spec;
    spec.zero_phase = zero_phase;
    for (double v : apply_filter(x, spec)) EXPECT_NEAR(v, 2.5, 1e-6);
  }
}

TEST(ApplyFilter, TooShortSignalIsRejected) {
  EXPECT_EQ(code_of([] { apply_filter(std::vector<double>(9, 1.0), FilterSpec{}); }),
            ErrorCode::kSignalTooShort);
  EXPECT_NO_THROW(apply_filter(std::vector<double>(10, 1.0), FilterSpec{}));
}

TEST(ApplyFilter, SlowSinusoidKeepsAmplitudeAndPeaks) {
  const std::size_t n = 300;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * kPi * 0.5 * i / 30.0);
  const std::vector<double> y = apply_filter(x, FilterSpec{});
  double peak = 0.0;
  for (std::size_t i = 30; i < n - 30; ++i) peak = std::max(peak, std::abs(y[i]));
  EXPECT_GE(peak, 0.99);
  // Crests of the input sit at frames 15 + 60k.
  for (std::size_t crest = 75; crest + 30 < n; crest += 60) {
    const auto lo = y.begin() + static_cast<long>(crest) - 10;
    const auto best = std::max_element(lo, lo + 21) - y.begin();
    EXPECT_LE(std::abs(static_cast<long>(best) - static_cast<long>(crest)), 1);
  }
}

TEST(ApplyFilter, SpikeIsAttenuatedByTheImpulseResponsePeak) {
  // Linearity: the deviation equals spike height times the peak of the
  // forward-backward impulse response (2.0666 for a magnitude-10 spike).
  const std::size_t n = 300;
  std::vector<double> clean(n), spiked(n);
  for (std::size_t i = 0; i < n; ++i) clean[i] = spiked[i] = std::sin(2 * kPi * 0.5 * i / 30.0);
  spiked[150] += 10.0;
  const std::vector<double> yc = apply_filter(clean, FilterSpec{});
  const std::vector<double> ys = apply_filter(spiked, FilterSpec{});
  double dev = 0.0, dev_raw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dev = std::max(dev, std::abs(ys[i] - yc[i]));
    dev_raw = std::max(dev_raw, std::abs(ys[i] - clean[i]));
  }
  EXPECT_NEAR(dev, 2.066596866094712, 1e-6);
  EXPECT_NEAR(dev_raw, 2.0665968660947125, 1e-6);
}

TEST(ApplyFilter, ZeroPhaseIsShiftEquivariant) {
  const std::size_t n = 400, shift = 17;
  std::vector<double> x(n + shift);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::sin(2 * kPi * i / 60.0) + 0.3 * std::cos(2 * kPi * i / 23.0);
  }
  const std::vector<double> a(x.begin(), x.begin() + n);
  const std::vector<double> b(x.begin() + shift, x.end());
  const std::vector<double> ya = apply_filter(a, FilterSpec{});
  const std::vector<double> yb = apply_filter(b, FilterSpec{});
  for (std::size_t i = 100; i + 100 < n; ++i) EXPECT_NEAR(ya[i + shift], yb[i], 1e-6);
}

SegmentationSpec peak_spec(double quantile, double sep_s, Polarity polarity = Polarity::kMaxima) {
  SegmentationSpec s;
  s.min_height_quantile = quantile;
  s.min_separation_s = sep_s;
  s.polarity = polarity;
  return s;
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v = {3, 1, 4, 1, 5};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.6), 3.4);  // position 2.4 between 3 and 4
}

TEST(DetectPeaks, MatchesReferenceMultiTone) {
  std::vector<double> x(200);
  for (int i = 0; i < 200; ++i) x[i] = std::sin(0.37 * i) + 0.6 * std::sin(1.91 * i + 0.3) + 0.25 * std::cos(4.3 * i);
  const PeakList p = detect_peaks(x, peak_spec(0.6, 0.2), 30.0);
  EXPECT_NEAR(p.height_threshold, 0.31526913708977106, 1e-12);
  EXPECT_EQ(p.accepted, (std::vector<std::size_t>{4, 20, 37, 57, 73, 89, 106, 123, 139, 155, 162, 175, 191}));
  std::size_t height = 0, sep = 0;
  for (const auto& r : p.rejected) (r.reason == RejectReason::kHeight ? height : sep)++;
  EXPECT_EQ(height, 61u - 37u);
  EXPECT_EQ(sep, 37u - 13u);

  const PeakList m = detect_peaks(x, peak_spec(0.6, 0.2, Polarity::kMinima), 30.0);
  EXPECT_EQ(m.accepted, (std::vector<std::size_t>{12, 29, 45, 52, 65, 81, 97, 114, 131, 147, 154, 160, 167, 183, 197}));
}

TEST(DetectPeaks, MonotoneRampHasNoPeaks) {
  std::vector<double> x(50);
  for (int i = 0; i < 50; ++i) x[i] = 0.1 * i;
  const PeakList p = detect_peaks(x, peak_spec(0.6, 1.0), 30.0);
  EXPECT_TRUE(p.accepted.empty());
  EXPECT_TRUE(p.rejected.empty());
}

TEST(DetectPeaks, FivePeriodSinusoidCrests) {
  const int period = 60;
  std::vector<double> x(5 * period);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * kPi * i / period);
  const PeakList p = detect_peaks(x, peak_spec(0.6, 1.0), 30.0);
  ASSERT_EQ(p.accepted.size(), 5u);
  for (int k = 0; k < 5; ++k) {
    EXPECT_LE(std::abs(static_cast<int>(p.accepted[k]) - (15 + period * k)), 1);
  }
}

TEST(DetectPeaks, RippleBumpsRejectedByHeight) {
  const int period = 60;
  std::vector<double> x(5 * period);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * kPi * i / period);
  // A narrow bump in every trough creates one spurious local maximum each.
  for (int k = 0; k < 5; ++k) {
    const int trough = 45 + period * k;
    for (int d = -3; d <= 3; ++d) {
      const int i = trough + d;
      if (i >= 0 && i < static_cast<int>(x.size())) x[i] += 0.1 * std::exp(-d * d / 2.0);
    }
  }
  const PeakList p = detect_peaks(x, peak_spec(0.6, 1.0), 30.0);
  EXPECT_EQ(p.accepted.size(), 5u);
  ASSERT_EQ(p.rejected.size(), 5u);
  for (const auto& r : p.rejected) EXPECT_EQ(r.reason, RejectReason::kHeight);
}

TEST(DetectPeaks, PlateauMidpointAndSeparationInvariant) {
  const std::vector<double> plateau = {0, 1, 2, 2, 2, 1, 0, 0, 0, 0};
  const PeakList p = detect_peaks(plateau, peak_spec(0.0, 0.1), 30.0);
  EXPECT_EQ(p.accepted, (std::vector<std::size_t>{3}));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(150);
    for (double& v : x) v = normal(rng);
    const double sep = 0.1 + 0.05 * (trial % 20);
    const SegmentationSpec spec = peak_spec(0.3 + 0.001 * trial, sep);
    const PeakList r = detect_peaks(x, spec, 30.0);
    const std::size_t dist = spec.min_separation_frames(30.0);
    for (std::size_t k = 1; k < r.accepted.size(); ++k) {
      EXPECT_GT(r.accepted[k], r.accepted[k - 1]);
      EXPECT_GE(r.accepted[k] - r.accepted[k - 1], dist);
    }
  }
}

TEST(SegmentationSpec, SeparationMustCoverTwoFrames) {
  SegmentationSpec s;
  s.joints = {JointId{7}};
  s.min_separation_s = 0.05;
  EXPECT_THROW(s.validate(30.0, 3), Error);
  s.min_separation_s = 2.0 / 30.0;
  EXPECT_NO_THROW(s.validate(30.0, 3));
  EXPECT_EQ(s.min_separation_frames(30.0), 2u);
}

TEST(SegmentsFromPeaks, TrailingRuleAndNoRepetitions) {
  // Peak-to-peak lengths 30, 30, 30; tail from 100 to n.
  const std::vector<std::size_t> peaks = {10, 40, 70, 100};
  EXPECT_EQ(segments_from_peaks(peaks, 115).size(), 4u);  // tail 15 >= 15
  EXPECT_EQ(segments_from_peaks(peaks, 114).size(), 3u);  // tail 14 < 15
  const auto segs = segments_from_peaks(peaks, 115);
  EXPECT_EQ(segs[0], (Segment{10, 40}));
  EXPECT_EQ(segs[3], (Segment{100, 115}));
  EXPECT_EQ(code_of([] { segments_from_peaks(std::vector<std::size_t>{5}, 50); }),
            ErrorCode::kNoRepetitions);
  const auto tight = segments_from_peaks(std::vector<std::size_t>{10, 11, 40}, 41);
  for (const auto& s : tight) EXPECT_GE(s.length(), 2u);
}

SegmentationSpec hands_y() {
  return SegmentationConfig::defaults(JointMap::kinect_v2()).for_exercise(1);
}

TEST(SplitRepetitions, FiveCyclesFollowTheTrailingRule) {
  for (double period : {2.0, 2.5, 3.0}) {
    const auto cr = testing::make_cycle_recording(5, period, 11);
    const SegmentationResult r = split_repetitions(cr.recording, hands_y(), FilterSpec{});
    ASSERT_EQ(r.peaks.accepted.size(), 5u);
    // By hand: four peak-to-peak segments of one period each; the tail runs
    // from the last crest (half a period plus the rest) to the end.
    const std::size_t n = cr.recording.frames.frame_count();
    const std::size_t tail = n - cr.true_peaks.back();
    const double half_median = 0.5 * period * 30.0;
    EXPECT_EQ(r.segments.size(), tail >= half_median ? 5u : 4u);
    for (std::size_t k = 0; k + 1 < r.segments.size(); ++k) {
      EXPECT_LE(std::abs(static_cast<long>(r.segments[k].begin) - static_cast<long>(cr.true_peaks[k])), 2);
      EXPECT_LE(std::abs(static_cast<long>(r.segments[k].end) - static_cast<long>(cr.true_peaks[k + 1])), 2);
    }
  }
}

TEST(SplitRepetitions, SegmentsAreOrderedAndContiguous) {
  const auto cr = testing::make_cycle_recording(6, 2.2, 3, true, true);
  const SegmentationResult r = split_repetitions(cr.recording, hands_y(), FilterSpec{});
  ASSERT_FALSE(r.segments.empty());
  for (std::size_t k = 1; k < r.segments.size(); ++k) {
    EXPECT_EQ(r.segments[k].begin, r.segments[k - 1].end);
  }
}

TEST(SplitRepetitions, FlatMotionHasNoRepetitions) {
  SkeletonRecording rec;
  rec.frames = JointFrames(120, 3);
  EXPECT_EQ(code_of([&] { split_repetitions(rec, hands_y(), FilterSpec{}); }),
            ErrorCode::kNoRepetitions);
}

TEST(SplitRepetitions, OffsetFlatMotionHasNoRepetitions) {
  SkeletonRecording rec;
  rec.frames = JointFrames(200, 3);
  std::fill(rec.frames.data().begin(), rec.frames.data().end(), 0.5);
  EXPECT_EQ(code_of([&] { split_repetitions(rec, hands_y(), FilterSpec{}); }),
            ErrorCode::kNoRepetitions);
}

TEST(SplitRepetitions, TwoCyclesCoverOneCycleEach) {
  const auto cr = testing::make_cycle_recording(2, 2.5, 5);
  const SegmentationResult r = split_repetitions(cr.recording, hands_y(), FilterSpec{});
  ASSERT_GE(r.segments.size(), 1u);
  EXPECT_LE(std::abs(static_cast<long>(r.segments[0].begin) - static_cast<long>(cr.true_peaks[0])), 2);
  EXPECT_LE(std::abs(static_cast<long>(r.segments[0].end) - static_cast<long>(cr.true_peaks[1])), 2);
}

TEST(SplitRepetitions, IsDeterministic) {
  const auto cr = testing::make_cycle_recording(5, 2.3, 9, true, true);
  const auto a = split_repetitions(cr.recording, hands_y(), FilterSpec{});
  const auto b = split_repetitions(cr.recording, hands_y(), FilterSpec{});
  EXPECT_EQ(a.segments, b.segments);
  EXPECT_EQ(a.filtered_channel, b.filtered_channel);
  ASSERT_FALSE(a.segments.empty());
  const Repetition ra = resample_repetition(cr.recording, a.segments[0], 0);
  const Repetition rb = resample_repetition(cr.recording, b.segments[0], 0);
  EXPECT_EQ(ra.frames, rb.frames);
}

TEST(SegmentationConfig, DefaultsPerExercise) {
  const SegmentationConfig c = SegmentationConfig::defaults(JointMap::kinect_v2());
  EXPECT_EQ(c.for_exercise(1).joints, (std::vector<JointId>{JointId{7}, JointId{11}}));
  EXPECT_EQ(c.for_exercise(1).axis, 1);
  EXPECT_EQ(c.for_exercise(5).polarity, Polarity::kMinima);
  EXPECT_EQ(c.for_exercise(9).joints, c.fallback.joints);
}

TEST(SegmentationConfig, JsonOverrides) {
  const SegmentationConfig c = SegmentationConfig::from_json(
      R"({"exercises": {"2": {"joints": ["HAND_RIGHT"], "axis": 2, "polarity": "minima",
          "min_height_quantile": 0.5}}})",
      JointMap::kinect_v2());
  const SegmentationSpec& s = c.for_exercise(2);
  EXPECT_EQ(s.joints, (std::vector<JointId>{JointId{11}}));
  EXPECT_EQ(s.axis, 2);
  EXPECT_EQ(s.polarity, Polarity::kMinima);
  EXPECT_DOUBLE_EQ(s.min_height_quantile, 0.5);
  EXPECT_DOUBLE_EQ(s.min_separation_s, 1.0);
  EXPECT_THROW(SegmentationConfig::from_json(R"({"exercises": {"1": {"axes": 1}}})", JointMap::kinect_v2()),
               Error);
}

TEST(Resample, IdentityForTargetLength) {
  std::mt19937_64 rng(1);
  for (StreamKind s : {StreamKind::kPosition, StreamKind::kOrientation}) {
    const Repetition rep = testing::random_repetition(rng, s);
    EXPECT_EQ(resample_frames(rep.frames, s), rep.frames);
  }
}

TEST(Resample, TwoFramesBecomeRamp) {
  JointFrames f(2, 3);
  for (int j = 0; j < kJointCount; ++j) f.at(1, j, 0) = 1.0;
  const JointFrames out = resample_frames(f, StreamKind::kPosition);
  ASSERT_EQ(out.frame_count(), 104u);
  for (std::size_t k = 0; k < 104; ++k) EXPECT_NEAR(out.at(k, 3, 0), k / 103.0, 1e-15);
  EXPECT_EQ(out.at(103, 3, 0), 1.0);
}

TEST(Resample, LongRampStaysRampWithExactEndpoints) {
  JointFrames f(208, 3);
  for (std::size_t i = 0; i < 208; ++i) f.at(i, 0, 1) = 0.25 + 0.5 * i;
  const JointFrames out = resample_frames(f, StreamKind::kPosition);
  EXPECT_EQ(out.at(0, 0, 1), f.at(0, 0, 1));
  EXPECT_EQ(out.at(103, 0, 1), f.at(207, 0, 1));
  for (std::size_t k = 0; k < 104; ++k) {
    EXPECT_NEAR(out.at(k, 0, 1), 0.25 + 0.5 * (k * 207.0 / 103.0), 1e-12);
  }
}

TEST(Resample, EndpointsExactAndQuaternionsUnit) {
  std::mt19937_64 rng(2);
  for (std::size_t n : {2u, 3u, 57u, 103u, 105u, 311u}) {
    for (StreamKind s : {StreamKind::kPosition, StreamKind::kOrientation}) {
      Repetition src = testing::random_repetition(rng, s);
      const JointFrames f = src.frames.slice(0, std::min<std::size_t>(n, 104));
      JointFrames in = f;
      while (in.frame_count() < n) in.append_frame(f.frame(in.frame_count() % f.frame_count()));
      const JointFrames out = resample_frames(in, s);
      ASSERT_EQ(out.frame_count(), 104u);
      for (std::size_t i = 0; i < in.frame_stride(); ++i) {
        EXPECT_EQ(out.frame(0)[i], in.frame(0)[i]);
        EXPECT_EQ(out.frame(103)[i], in.frame(n - 1)[i]);
      }
      if (s == StreamKind::kOrientation) {
        for (std::size_t k = 0; k < 104; ++k) {
          for (int j = 0; j < kJointCount; ++j) {
            double norm = 0.0;
            for (int c = 0; c < 4; ++c) norm += out.at(k, j, c) * out.at(k, j, c);
            EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-12);
          }
        }
      }
    }
  }
}

TEST(Resample, TooShortSegment) {
  EXPECT_EQ(code_of([] { resample_frames(JointFrames(1, 3), StreamKind::kPosition); }),
            ErrorCode::kSegmentTooShort);
}

TEST(PeakDiagnostics, HasOneRowPerFrame) {
  const auto cr = testing::make_cycle_recording(3, 2.0, 4, true);
  const SegmentationResult r = split_repetitions(cr.recording, hands_y(), FilterSpec{});
  const std::string csv = peak_diagnostics_csv(r);
  EXPECT_EQ(csv.rfind("frame,raw_value,filtered_value,is_accepted_peak,is_rejected_peak,reason\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')),
            cr.recording.frames.frame_count() + 1);
}

}  // namespace
}  // namespace rehab
