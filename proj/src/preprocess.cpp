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

#include "rehab/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rehab/csv.hpp"
#include "rehab/error.hpp"

namespace rehab {

using nlohmann::json;

void FilterSpec::validate() const {
  if (order < 1) throw Error(ErrorCode::kInvalidCutoff, "filter order must be >= 1");
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::kInvalidCutoff, "sample rate must be positive");
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0)) {
    throw Error(ErrorCode::kInvalidCutoff,
                "cutoff " + csv::format_double(cutoff_hz) + " Hz must lie in (0, " +
                    csv::format_double(sample_rate_hz / 2.0) + ")");
  }
}

namespace {

// Real coefficients of prod_k (z - roots[k]), highest power first.
std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c = {1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= c[i] * r;
    }
    c = std::move(next);
  }
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

}  // namespace

FilterCoefficients design_butterworth(const FilterSpec& spec) {
  spec.validate();
  const int n = spec.order;
  const double fs2 = 2.0 * spec.sample_rate_hz;
  const double warped = fs2 * std::tan(std::numbers::pi * spec.cutoff_hz / spec.sample_rate_hz);

  std::vector<std::complex<double>> z_poles;
  z_poles.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n);
    const std::complex<double> s_pole = warped * std::polar(1.0, theta);
    z_poles.push_back((fs2 + s_pole) / (fs2 - s_pole));
  }
  const std::vector<std::complex<double>> z_zeros(n, -1.0);

  FilterCoefficients coeffs;
  coeffs.a = poly_from_roots(z_poles);
  coeffs.b = poly_from_roots(z_zeros);
  const double sum_a = std::accumulate(coeffs.a.begin(), coeffs.a.end(), 0.0);
  const double sum_b = std::accumulate(coeffs.b.begin(), coeffs.b.end(), 0.0);
  const double gain = sum_a / sum_b;
  for (double& v : coeffs.b) v *= gain;
  return coeffs;
}

std::complex<double> frequency_response(const FilterCoefficients& coeffs, double frequency_hz,
                                        double sample_rate_hz) {
  const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate_hz;
  const std::complex<double> zinv = std::polar(1.0, -w);
  std::complex<double> num = 0.0, den = 0.0, p = 1.0;
  for (std::size_t k = 0; k < std::max(coeffs.a.size(), coeffs.b.size()); ++k) {
    if (k < coeffs.b.size()) num += coeffs.b[k] * p;
    if (k < coeffs.a.size()) den += coeffs.a[k] * p;
    p *= zinv;
  }
  return num / den;
}

std::vector<double> filter_initial_state(const FilterCoefficients& coeffs) {
  const std::size_t n = coeffs.a.size() - 1;
  const double sum_a = std::accumulate(coeffs.a.begin(), coeffs.a.end(), 0.0);
  const double sum_b = std::accumulate(coeffs.b.begin(), coeffs.b.end(), 0.0);
  const double y = sum_b / sum_a;
  std::vector<double> zi(n, 0.0);
  double acc = 0.0;
  for (std::size_t m = n; m >= 1; --m) {
    acc += coeffs.b[m] - coeffs.a[m] * y;
    zi[m - 1] = acc;
  }
  return zi;
}

std::vector<double> lfilter(const FilterCoefficients& coeffs, std::span<const double> signal,
                            std::span<const double> initial_state) {
  const std::size_t n = coeffs.a.size() - 1;
  std::vector<double> z(n, 0.0);
  if (!initial_state.empty()) std::copy(initial_state.begin(), initial_state.end(), z.begin());
  std::vector<double> y(signal.size());
  const auto& b = coeffs.b;
  const auto& a = coeffs.a;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const double x = signal[i];
    const double out = b[0] * x + (n ? z[0] : 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) z[k] = b[k + 1] * x + z[k + 1] - a[k + 1] * out;
    if (n) z[n - 1] = b[n] * x - a[n] * out;
    y[i] = out;
  }
  return y;
}

std::vector<double> apply_filter(std::span<const double> signal, const FilterSpec& spec) {
  const FilterCoefficients coeffs = design_butterworth(spec);
  const std::size_t n = signal.size();
  if (n <= static_cast<std::size_t>(3 * spec.order)) {
    throw Error(ErrorCode::kSignalTooShort, "signal of length " + std::to_string(n) +
                                                " needs more than " +
                                                std::to_string(3 * spec.order) + " samples");
  }
  const std::vector<double> zi = filter_initial_state(coeffs);
  auto scaled = [&](double v) {
    std::vector<double> s(zi);
    for (double& x : s) x *= v;
    return s;
  };

  if (!spec.zero_phase) return lfilter(coeffs, signal, scaled(signal[0]));

  const std::size_t pad = std::min<std::size_t>(3 * (spec.order + 1), n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * signal[0] - signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

  std::vector<double> forward = lfilter(coeffs, ext, scaled(ext.front()));
  std::reverse(forward.begin(), forward.end());
  std::vector<double> backward = lfilter(coeffs, forward, scaled(forward.front()));
  std::reverse(backward.begin(), backward.end());
  return std::vector<double>(backward.begin() + static_cast<std::ptrdiff_t>(pad),
                             backward.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

std::size_t SegmentationSpec::min_separation_frames(double sample_rate_hz) const {
  return static_cast<std::size_t>(std::ceil(min_separation_s * sample_rate_hz - 1e-9));
}

void SegmentationSpec::validate(double sample_rate_hz, int n_components) const {
  if (joints.empty()) throw Error(ErrorCode::kInvalidArgument, "segmentation needs at least one joint");
  if (axis < 0 || axis >= n_components) {
    throw Error(ErrorCode::kInvalidArgument, "segmentation axis " + std::to_string(axis) +
                                                 " outside the stream's components");
  }
  if (!(min_height_quantile >= 0.0 && min_height_quantile <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_height_quantile must lie in [0, 1]");
  }
  if (!(min_separation_s > 0.0) || min_separation_s * sample_rate_hz < 2.0) {
    throw Error(ErrorCode::kInvalidArgument, "min_separation_s must span at least 2 frames");
  }
}

const SegmentationSpec& SegmentationConfig::for_exercise(int exercise_id) const {
  const auto it = per_exercise.find(exercise_id);
  return it == per_exercise.end() ? fallback : it->second;
}

SegmentationConfig SegmentationConfig::defaults(const JointMap& joints) {
  auto make = [&](std::vector<std::string> names, int axis, Polarity polarity) {
    SegmentationSpec s;
    for (const auto& n : names) s.joints.push_back(joints.at(n));
    s.axis = axis;
    s.polarity = polarity;
    return s;
  };
  SegmentationConfig cfg;
  cfg.fallback = make({"HAND_LEFT", "HAND_RIGHT"}, 1, Polarity::kMaxima);
  cfg.per_exercise[1] = make({"HAND_LEFT", "HAND_RIGHT"}, 1, Polarity::kMaxima);
  cfg.per_exercise[2] = make({"HEAD"}, 0, Polarity::kMaxima);
  cfg.per_exercise[3] = make({"HAND_LEFT"}, 2, Polarity::kMaxima);
  cfg.per_exercise[4] = make({"SPINE_BASE"}, 0, Polarity::kMaxima);
  cfg.per_exercise[5] = make({"HEAD"}, 1, Polarity::kMinima);
  return cfg;
}

namespace {

SegmentationSpec spec_from_json(const json& j, SegmentationSpec base, const JointMap& joints) {
  for (const auto& [key, value] : j.items()) {
    if (key == "joints") {
      base.joints.clear();
      for (const auto& name : value) base.joints.push_back(joints.at(name.get<std::string>()));
    } else if (key == "axis") {
      base.axis = value.get<int>();
    } else if (key == "polarity") {
      const std::string p = value.get<std::string>();
      if (p == "maxima") {
        base.polarity = Polarity::kMaxima;
      } else if (p == "minima") {
        base.polarity = Polarity::kMinima;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "polarity must be maxima or minima");
      }
    } else if (key == "min_height_quantile") {
      base.min_height_quantile = value.get<double>();
    } else if (key == "min_separation_s") {
      base.min_separation_s = value.get<double>();
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown segmentation key '" + key + "'");
    }
  }
  return base;
}

}  // namespace

SegmentationConfig SegmentationConfig::from_json(const std::string& json_text,
                                                 const JointMap& joints) {
  SegmentationConfig cfg = defaults(joints);
  try {
    const json doc = json::parse(json_text);
    for (const auto& [key, value] : doc.items()) {
      if (key == "default") {
        cfg.fallback = spec_from_json(value, cfg.fallback, joints);
      } else if (key == "exercises") {
        for (const auto& [ex, spec] : value.items()) {
          const int id = std::stoi(ex);
          cfg.per_exercise[id] = spec_from_json(spec, cfg.for_exercise(id), joints);
        }
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown segmentation key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad segmentation config: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::kInvalidArgument, "exercise keys must be integers");
  }
  return cfg;
}

std::string_view reject_reason_name(RejectReason reason) {
  return reason == RejectReason::kHeight ? "HEIGHT" : "SEPARATION";
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "quantile of empty sequence");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

PeakList detect_peaks(std::span<const double> signal, const SegmentationSpec& spec,
                      double sample_rate_hz) {
  PeakList out;
  const std::size_t n = signal.size();
  if (n < 3) return out;
  std::vector<double> s(signal.begin(), signal.end());
  if (spec.polarity == Polarity::kMinima) {
    for (double& v : s) v = -v;
  }
  out.height_threshold = quantile(s, spec.min_height_quantile);
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  if (*hi - *lo <= kFlatSignalTolerance * std::max({1.0, std::abs(*lo), std::abs(*hi)})) return out;

  // Local maxima; a flat top yields its (lower) middle sample.
  std::vector<std::size_t> candidates;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (s[i - 1] < s[i]) {
      std::size_t j = i;
      while (j + 1 < n && s[j + 1] == s[i]) ++j;
      if (j + 1 < n && s[j + 1] < s[i]) {
        candidates.push_back((i + j) / 2);
        i = j + 1;
        continue;
      }
      i = j + 1;
      continue;
    }
    ++i;
  }

  std::vector<std::size_t> tall;
  for (std::size_t c : candidates) {
    if (s[c] < out.height_threshold) {
      out.rejected.push_back({c, RejectReason::kHeight});
    } else {
      tall.push_back(c);
    }
  }

  // Greedy by height: the most extreme peak suppresses neighbours closer
  // than the minimum separation. Ties go to the earlier frame.
  const std::size_t distance = spec.min_separation_frames(sample_rate_hz);
  std::vector<std::size_t> order(tall.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return s[tall[x]] > s[tall[y]]; });
  std::vector<bool> removed(tall.size(), false);
  for (std::size_t o : order) {
    if (removed[o]) continue;
    for (std::size_t k = 0; k < tall.size(); ++k) {
      if (k == o || removed[k]) continue;
      const std::size_t gap = tall[k] > tall[o] ? tall[k] - tall[o] : tall[o] - tall[k];
      if (gap < distance) removed[k] = true;
    }
  }
  for (std::size_t k = 0; k < tall.size(); ++k) {
    if (removed[k]) {
      out.rejected.push_back({tall[k], RejectReason::kSeparation});
    } else {
      out.accepted.push_back(tall[k]);
    }
  }
  std::sort(out.rejected.begin(), out.rejected.end(),
            [](const RejectedPeak& x, const RejectedPeak& y) { return x.index < y.index; });
  return out;
}

std::vector<double> segmentation_channel(const SkeletonRecording& rec, const SegmentationSpec& seg) {
  seg.validate(rec.sample_rate_hz, rec.frames.components());
  std::vector<double> channel(rec.frames.frame_count(), 0.0);
  for (std::size_t f = 0; f < channel.size(); ++f) {
    double sum = 0.0;
    for (JointId j : seg.joints) sum += rec.frames.at(f, j.index, seg.axis);
    channel[f] = sum / static_cast<double>(seg.joints.size());
  }
  return channel;
}

std::vector<Segment> segments_from_peaks(std::span<const std::size_t> peaks, std::size_t n_frames) {
  if (peaks.size() < 2) {
    throw Error(ErrorCode::kNoRepetitions,
                "found " + std::to_string(peaks.size()) + " accepted peak(s), need at least 2");
  }
  std::vector<Segment> segments;
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) segments.push_back({peaks[k], peaks[k + 1]});

  std::vector<double> lengths;
  for (const auto& s : segments) lengths.push_back(static_cast<double>(s.length()));
  std::sort(lengths.begin(), lengths.end());
  const std::size_t m = lengths.size();
  const double median = m % 2 ? lengths[m / 2] : 0.5 * (lengths[m / 2 - 1] + lengths[m / 2]);
  const Segment tail{peaks.back(), n_frames};
  if (tail.end > tail.begin && static_cast<double>(tail.length()) >= 0.5 * median) {
    segments.push_back(tail);
  }
  std::erase_if(segments, [](const Segment& s) { return s.length() < 2; });
  if (segments.empty()) throw Error(ErrorCode::kNoRepetitions, "no segment spans 2 frames");
  return segments;
}

SegmentationResult split_repetitions(const SkeletonRecording& rec, const SegmentationSpec& seg,
                                     const FilterSpec& filt) {
  SegmentationResult result;
  FilterSpec spec = filt;
  spec.sample_rate_hz = rec.sample_rate_hz;
  result.raw_channel = segmentation_channel(rec, seg);
  result.filtered_channel = apply_filter(result.raw_channel, spec);
  result.peaks = detect_peaks(result.filtered_channel, seg, rec.sample_rate_hz);
  result.segments = segments_from_peaks(result.peaks.accepted, rec.frames.frame_count());
  return result;
}

JointFrames resample_frames(const JointFrames& frames, StreamKind stream, int target_len) {
  const std::size_t n = frames.frame_count();
  if (n < 2) {
    throw Error(ErrorCode::kSegmentTooShort, "segment has " + std::to_string(n) + " frame(s)");
  }
  if (target_len < 2) throw Error(ErrorCode::kInvalidArgument, "target length must be >= 2");
  const int comps = frames.components();
  const auto target = static_cast<std::size_t>(target_len);
  JointFrames out(target, comps);
  const bool quaternions = stream == StreamKind::kOrientation && comps == 4;

  for (std::size_t k = 0; k < target; ++k) {
    std::size_t lo = 0;
    double frac = 0.0;
    if (k == target - 1) {
      lo = n - 1;
    } else if (k > 0) {
      const double pos = static_cast<double>(k) * static_cast<double>(n - 1) /
                         static_cast<double>(target - 1);
      lo = std::min(static_cast<std::size_t>(std::floor(pos)), n - 1);
      frac = pos - static_cast<double>(lo);
    }
    const auto src = frames.frame(lo);
    auto dst = out.frame(k);
    if (frac == 0.0 || lo + 1 >= n) {
      std::copy(src.begin(), src.end(), dst.begin());
      continue;
    }
    const auto next = frames.frame(lo + 1);
    if (!quaternions) {
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c] + (next[c] - src[c]) * frac;
      continue;
    }
    for (int j = 0; j < kJointCount; ++j) {
      const std::size_t base = static_cast<std::size_t>(j) * 4;
      double dot = 0.0;
      for (int c = 0; c < 4; ++c) dot += src[base + c] * next[base + c];
      const double sign = dot < 0.0 ? -1.0 : 1.0;
      double norm = 0.0;
      for (int c = 0; c < 4; ++c) {
        const double v = src[base + c] + (sign * next[base + c] - src[base + c]) * frac;
        dst[base + c] = v;
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (int c = 0; c < 4; ++c) dst[base + c] /= norm;
      }
    }
  }
  return out;
}

Repetition resample_repetition(const SkeletonRecording& rec, const Segment& segment,
                               int repetition_index, int target_len) {
  if (segment.end > rec.frames.frame_count() || segment.begin >= segment.end) {
    throw Error(ErrorCode::kSegmentTooShort, "segment outside the recording");
  }
  Repetition rep;
  rep.key = {rec.subject_id, rec.exercise_id, repetition_index};
  rep.group = rec.group;
  rep.stream = rec.stream;
  rep.label = rec.label;
  rep.frames = resample_frames(rec.frames.slice(segment.begin, segment.end), rec.stream, target_len);
  return rep;
}

std::string peak_diagnostics_csv(const SegmentationResult& result) {
  const std::size_t n = result.raw_channel.size();
  std::vector<int> accepted(n, 0);
  std::vector<const RejectedPeak*> rejected(n, nullptr);
  for (std::size_t p : result.peaks.accepted) accepted[p] = 1;
  for (const auto& r : result.peaks.rejected) rejected[r.index] = &r;
  std::ostringstream out;
  out << "frame,raw_value,filtered_value,is_accepted_peak,is_rejected_peak,reason\n";
  for (std::size_t f = 0; f < n; ++f) {
    out << f << ',' << csv::format_double(result.raw_channel[f]) << ','
        << csv::format_double(result.filtered_channel[f]) << ',' << accepted[f] << ','
        << (rejected[f] ? 1 : 0) << ',' << (rejected[f] ? reject_reason_name(rejected[f]->reason) : "")
        << '\n';
  }
  return out.str();
}

}  // namespace rehab
