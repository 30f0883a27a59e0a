// Copyright 2026 The Movelet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic subjects with known ground truth.
//
// Activity templates are drawn in the body frame, noise is added there, and
// the result is mapped into the device frame by inverting x = R u - b. The
// templates are caricatures: they only need to keep the five activity groups
// apart while letting subjects differ in cadence, amplitude and device
// placement.
//
// The device bias is drawn along (1, 1, 0). With standing at -e1 and lying at
// -e2 in the body frame, that is the family of biases for which the
// calibration estimate recovers the generating rotation exactly from
// noiseless standing/lying means; other directions tilt the estimate.

#ifndef MOVELET_SYNTH_HPP_
#define MOVELET_SYNTH_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "movelet/core.hpp"
#include "movelet/error.hpp"
#include "movelet/normalize.hpp"

namespace movelet {

struct ProgramStep {
  std::string label;
  double seconds = 0.0;

  friend bool operator==(const ProgramStep&, const ProgramStep&) = default;
};

// About 60 s per subject including the 1 s gaps between activities.
inline std::vector<ProgramStep> default_program() {
  return {{"standing", 8.0},   {"lying", 8.0},    {"chairStand", 10.0},
          {"normalWalk", 8.0}, {"fastWalk", 6.0}, {"washDish", 7.0},
          {"vacuum", 7.0}};
}

struct SubjectConfig {
  std::uint64_t seed = 0;
  std::string subject_id = "S01";
  std::vector<ProgramStep> program = default_program();
  // Unlabeled crossfade inserted between consecutive activities.
  double gap_seconds = 1.0;
  // Time for two steps, normal and fast pace.
  double step_period = 1.0;
  double fast_step_period = 0.5;
  // Up-down walking amplitude in g.
  double walk_amplitude = 0.35;
  double chair_cycle_seconds = 2.8;
  double upper_body_frequency = 2.0;
  double upper_body_amplitude = 0.12;
  RotationMatrix device_rotation;
  Vec3 device_bias;
  double noise_sigma = 0.05;
  double fs = 80.0;
};

struct SyntheticSubject {
  std::string subject_id;
  TriaxialSeries raw;
  TriaxialSeries normalized_truth;
  LabelTimeline timeline;
  NormalizationTransform truth_transform;
  // First 3 s of the standing and lying runs.
  Segment standing;
  Segment lying;
};

// Ranges the per-subject parameters are drawn from.
struct SynthOptions {
  double fs = 80.0;
  double noise_sigma = 0.05;
  // Bias is beta * (1, 1, 0) with beta uniform in [-max_bias, 0], which
  // inflates the standing magnitude to at most |(-1 - max_bias, -max_bias)|.
  double max_bias = 0.06;
  bool random_rotation = true;
  double normal_step_min = 0.75;
  double normal_step_max = 1.25;
  double fast_step_min = 0.375;
  double fast_step_max = 0.625;
  double walk_amplitude_min = 0.25;
  double walk_amplitude_max = 0.5;
  double chair_cycle_min = 2.4;
  double chair_cycle_max = 3.2;
  double upper_body_frequency_min = 1.5;
  double upper_body_frequency_max = 3.0;
  double upper_body_amplitude_min = 0.10;
  double upper_body_amplitude_max = 0.16;
  std::vector<ProgramStep> program = default_program();
};

// Haar-uniform rotation from a uniformly drawn unit quaternion.
template <typename Rng>
RotationMatrix random_rotation(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng);
  const double u2 = u(rng);
  const double u3 = u(rng);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double w = a * std::sin(kTwoPi * u2);
  const double x = a * std::cos(kTwoPi * u2);
  const double y = b * std::sin(kTwoPi * u3);
  const double z = b * std::cos(kTwoPi * u3);
  const Mat3 m{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
                2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
                2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
  return RotationMatrix::from_matrix(m, 1e-9);
}

inline SubjectConfig draw_subject_config(std::uint64_t seed,
                                         const std::string& subject_id,
                                         const SynthOptions& opts = {}) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  SubjectConfig c;
  c.seed = seed;
  c.subject_id = subject_id;
  c.program = opts.program;
  c.fs = opts.fs;
  c.noise_sigma = opts.noise_sigma;
  c.step_period = uniform(opts.normal_step_min, opts.normal_step_max);
  c.fast_step_period = uniform(opts.fast_step_min, opts.fast_step_max);
  c.walk_amplitude = uniform(opts.walk_amplitude_min, opts.walk_amplitude_max);
  c.chair_cycle_seconds = uniform(opts.chair_cycle_min, opts.chair_cycle_max);
  c.upper_body_frequency =
      uniform(opts.upper_body_frequency_min, opts.upper_body_frequency_max);
  c.upper_body_amplitude =
      uniform(opts.upper_body_amplitude_min, opts.upper_body_amplitude_max);
  const double beta = uniform(-opts.max_bias, 0.0);
  c.device_bias = Vec3{beta, beta, 0.0};
  if (opts.random_rotation) c.device_rotation = random_rotation(rng);
  return c;
}

namespace detail {

enum class Template { kStanding, kLying, kChairStand, kWalk, kFastWalk, kUpperBody };

inline Template template_for(const std::string& label) {
  if (label == "standing") return Template::kStanding;
  if (label == "lying") return Template::kLying;
  if (label == "chairStand") return Template::kChairStand;
  if (label == "normalWalk" || label == "normalWalkNoSwing") return Template::kWalk;
  if (label == "fastWalk" || label == "fastWalkNoSwing") return Template::kFastWalk;
  if (label == "washDish" || label == "knead" || label == "dressing" ||
      label == "foldTowel" || label == "vacuum" || label == "shop" ||
      label == "write" || label == "dealCards") {
    return Template::kUpperBody;
  }
  throw Error(ErrorCode::kInvalidConfig, "no synthetic template for '" + label + "'");
}

// Noise-free body-frame signal of one activity at time t (seconds since the
// activity started). `phase` decorrelates repeated activities.
struct TemplateSignal {
  const SubjectConfig& cfg;
  Template kind;
  double phase;
  // Slowly drifting phase for the band-limited upper-body motion, sampled
  // at the recording rate.
  const std::vector<double>* drift;
  std::size_t drift_offset;

  Vec3 operator()(double t, std::size_t k) const {
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    switch (kind) {
      case Template::kStanding:
        return {-1.0, 0.0, 0.0};
      case Template::kLying:
        return {0.0, -1.0, 0.0};
      case Template::kWalk:
      case Template::kFastWalk: {
        const bool fast = kind == Template::kFastWalk;
        const double period = fast ? cfg.fast_step_period : cfg.step_period;
        const double amp = cfg.walk_amplitude * (fast ? 1.3 : 1.0);
        const double w = kTwoPi * t / period + phase;
        return {-1.0 + amp * std::sin(2.0 * w) + 0.3 * amp * std::sin(w),
                0.5 * amp * std::cos(2.0 * w), 0.25 * amp * std::sin(w)};
      }
      case Template::kChairStand: {
        const double p = std::fmod(t / cfg.chair_cycle_seconds + phase / kTwoPi, 1.0);
        const double tilt = 0.7 * 0.5 * (1.0 - std::cos(kTwoPi * p));
        return {-std::cos(tilt) + 0.25 * std::sin(2.0 * kTwoPi * p),
                std::sin(tilt) + 0.15 * std::sin(kTwoPi * p), 0.0};
      }
      case Template::kUpperBody: {
        const double w = kTwoPi * cfg.upper_body_frequency * t + phase +
                         (*drift)[drift_offset + k];
        const double a = cfg.upper_body_amplitude;
        return {-1.0 + 0.25 * a * std::sin(w), a * std::sin(w),
                0.8 * a * std::sin(w + std::numbers::pi / 3.0)};
      }
    }
    return {};
  }
};

}  // namespace detail

inline void validate(const SubjectConfig& c) {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, what);
  };
  if (!(c.fs > 0.0)) bad("fs must be positive");
  if (!(c.noise_sigma >= 0.0)) bad("noise_sigma must be non-negative");
  if (!(c.gap_seconds >= 0.0)) bad("gap_seconds must be non-negative");
  if (!(c.step_period > 0.0) || !(c.fast_step_period > 0.0)) bad("step periods must be positive");
  if (!(c.chair_cycle_seconds > 0.0)) bad("chair cycle must be positive");
  if (!(c.upper_body_frequency > 0.0)) bad("upper-body frequency must be positive");
  if (c.program.empty()) bad("activity program is empty");
  for (const auto& s : c.program) {
    if (!(s.seconds > 0.0)) bad("activity durations must be positive");
    detail::template_for(s.label);
  }
  if (!is_finite(c.device_bias)) bad("device bias must be finite");
}

inline SyntheticSubject generate_subject(const SubjectConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  const std::size_t gap = samples_for(cfg.gap_seconds, cfg.fs);
  std::vector<std::size_t> lengths;
  std::size_t total = 0;
  for (std::size_t i = 0; i < cfg.program.size(); ++i) {
    lengths.push_back(std::max<std::size_t>(1, samples_for(cfg.program[i].seconds, cfg.fs)));
    total += lengths.back() + (i + 1 < cfg.program.size() ? gap : 0);
  }

  // Random-walk phase drift, shared by all upper-body stretches.
  std::vector<double> drift(total, 0.0);
  const double drift_step = 0.6 / std::sqrt(cfg.fs);
  for (std::size_t k = 1; k < total; ++k) drift[k] = drift[k - 1] + drift_step * noise(rng);

  std::vector<detail::TemplateSignal> signals;
  for (const auto& step : cfg.program) {
    signals.push_back({cfg, detail::template_for(step.label), phase_dist(rng), &drift, 0});
  }

  std::vector<Vec3> body;
  std::vector<MaybeLabel> labels;
  body.reserve(total);
  labels.reserve(total);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < cfg.program.size(); ++i) {
    auto& sig = signals[i];
    sig.drift_offset = offset;
    for (std::size_t k = 0; k < lengths[i]; ++k) {
      body.push_back(sig(static_cast<double>(k) / cfg.fs, k));
      labels.emplace_back(ActivityLabel{cfg.program[i].label});
    }
    offset += lengths[i];
    if (i + 1 == cfg.program.size()) break;
    auto& next = signals[i + 1];
    next.drift_offset = offset + gap;
    for (std::size_t k = 0; k < gap; ++k) {
      const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * (k + 1.0) / (gap + 1.0)));
      const std::size_t kp = lengths[i] + k;
      const Vec3 from = sig(static_cast<double>(kp) / cfg.fs, kp);
      // Next activity evaluated at negative time so it continues smoothly.
      const double tn = (static_cast<double>(k) - static_cast<double>(gap)) / cfg.fs;
      const Vec3 to = next(tn, 0);
      body.push_back((1.0 - w) * from + w * to);
      labels.emplace_back(std::nullopt);
    }
    offset += gap;
  }

  for (Vec3& v : body) {
    v += Vec3{noise(rng), noise(rng), noise(rng)} * cfg.noise_sigma;
  }

  NormalizationTransform truth{cfg.device_rotation, cfg.device_bias};
  std::vector<Vec3> raw;
  raw.reserve(body.size());
  for (const Vec3& x : body) raw.push_back(truth.invert(x));

  SyntheticSubject out;
  out.subject_id = cfg.subject_id;
  out.normalized_truth = TriaxialSeries(std::move(body), cfg.fs);
  out.raw = TriaxialSeries(std::move(raw), cfg.fs);
  out.timeline = LabelTimeline(std::move(labels), cfg.fs);
  out.truth_transform = truth;
  const auto standing = first_run(out.timeline, "standing", 3.0);
  const auto lying = first_run(out.timeline, "lying", 3.0);
  if (standing) out.standing = *standing;
  if (lying) out.lying = *lying;
  return out;
}

// Subject ids S01, S02, ...; subject i uses seed `seed` * 1000003 + i.
inline std::vector<SyntheticSubject> generate_cohort(std::size_t count,
                                                     std::uint64_t seed,
                                                     const SynthOptions& opts = {}) {
  std::vector<SyntheticSubject> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string id = std::to_string(i + 1);
    if (id.size() < 2) id = "0" + id;
    out.push_back(generate_subject(
        draw_subject_config(seed * 1000003ULL + i, "S" + id, opts)));
  }
  return out;
}

}  // namespace movelet

#endif  // MOVELET_SYNTH_HPP_
