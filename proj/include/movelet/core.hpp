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

// Domain types shared by every module: acceleration vectors, uniformly
// sampled triaxial recordings and their per-sample activity labels.
//
// Axis order everywhere is (up-down, forward-backward, left-right) and all
// values are in g units. Time is the sample index; a recording at rate fs
// has sample k at start_time + k / fs.

#ifndef MOVELET_CORE_HPP_
#define MOVELET_CORE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "movelet/error.hpp"

namespace movelet {

struct Vec3 {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;

  constexpr double operator[](std::size_t i) const {
    return i == 0 ? x1 : (i == 1 ? x2 : x3);
  }
  constexpr double& operator[](std::size_t i) {
    return i == 0 ? x1 : (i == 1 ? x2 : x3);
  }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  constexpr Vec3& operator+=(const Vec3& o) {
    x1 += o.x1;
    x2 += o.x2;
    x3 += o.x3;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x1 -= o.x1;
    x2 -= o.x2;
    x3 -= o.x3;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x1 *= s;
    x2 *= s;
    x3 *= s;
    return *this;
  }
};

// Vec3 is read as three contiguous doubles by the distance kernels.
static_assert(sizeof(Vec3) == 3 * sizeof(double));

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x1, -a.x2, -a.x3}; }
constexpr Vec3 operator*(double s, Vec3 v) { return v *= s; }
constexpr Vec3 operator*(Vec3 v, double s) { return v *= s; }

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a.x1 * b.x1 + a.x2 * b.x2 + a.x3 * b.x3;
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.x2 * b.x3 - a.x3 * b.x2, a.x3 * b.x1 - a.x1 * b.x3,
          a.x1 * b.x2 - a.x2 * b.x1};
}

constexpr double squared_norm(const Vec3& v) { return dot(v, v); }

// Euclidean norm; for a mean acceleration vector this is the quantity that
// should equal 1 g at rest.
inline double magnitude(const Vec3& v) { return std::sqrt(squared_norm(v)); }

inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x1) && std::isfinite(v.x2) && std::isfinite(v.x3);
}

inline constexpr Vec3 kE1{1.0, 0.0, 0.0};
inline constexpr Vec3 kE2{0.0, 1.0, 0.0};
inline constexpr Vec3 kE3{0.0, 0.0, 1.0};

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};

  constexpr double operator()(std::size_t r, std::size_t c) const {
    return m[r * 3 + c];
  }
  constexpr double& operator()(std::size_t r, std::size_t c) {
    return m[r * 3 + c];
  }

  static constexpr Mat3 identity() {
    return Mat3{{1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0}};
  }

  // Matrix whose rows are the given vectors.
  static constexpr Mat3 from_rows(const Vec3& r0, const Vec3& r1,
                                  const Vec3& r2) {
    return Mat3{{r0.x1, r0.x2, r0.x3, r1.x1, r1.x2, r1.x3, r2.x1, r2.x2,
                 r2.x3}};
  }

  constexpr Vec3 row(std::size_t r) const {
    return {m[r * 3], m[r * 3 + 1], m[r * 3 + 2]};
  }

  constexpr Mat3 transposed() const {
    Mat3 t;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  constexpr double determinant() const {
    return dot(row(0), cross(row(1), row(2)));
  }

  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

constexpr Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {dot(a.row(0), v), dot(a.row(1), v), dot(a.row(2), v)};
}

constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 out;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
      out(r, c) = s;
    }
  return out;
}

// Uniformly sampled triaxial acceleration record. Immutable once built.
class TriaxialSeries {
 public:
  TriaxialSeries() = default;

  TriaxialSeries(std::vector<Vec3> samples, double fs, double start_time = 0.0)
      : samples_(std::move(samples)), fs_(fs), start_time_(start_time) {
    if (!(fs_ > 0.0) || !std::isfinite(fs_)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sampling frequency must be positive and finite");
    }
    if (!std::isfinite(start_time_)) {
      throw Error(ErrorCode::kInvalidArgument, "start_time must be finite");
    }
    for (std::size_t k = 0; k < samples_.size(); ++k) {
      if (!is_finite(samples_[k])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "non-finite sample at index " + std::to_string(k));
      }
    }
  }

  std::span<const Vec3> samples() const { return samples_; }
  const Vec3& operator[](std::size_t k) const { return samples_[k]; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double fs() const { return fs_; }
  double start_time() const { return start_time_; }
  double time_of(std::size_t k) const {
    return start_time_ + static_cast<double>(k) / fs_;
  }

  friend bool operator==(const TriaxialSeries&,
                         const TriaxialSeries&) = default;

 private:
  std::vector<Vec3> samples_;
  double fs_ = 1.0;
  double start_time_ = 0.0;
};

struct ActivityLabel {
  std::string name;

  friend auto operator<=>(const ActivityLabel&,
                          const ActivityLabel&) = default;
};

// nullopt marks an unlabeled sample (transitions, breaks, gaps).
using MaybeLabel = std::optional<ActivityLabel>;

class LabelTimeline {
 public:
  LabelTimeline() = default;

  LabelTimeline(std::vector<MaybeLabel> labels, double fs)
      : labels_(std::move(labels)), fs_(fs) {
    if (!(fs_ > 0.0) || !std::isfinite(fs_)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sampling frequency must be positive and finite");
    }
  }

  static LabelTimeline unlabeled(std::size_t n, double fs) {
    return LabelTimeline(std::vector<MaybeLabel>(n), fs);
  }

  std::span<const MaybeLabel> labels() const { return labels_; }
  const MaybeLabel& operator[](std::size_t k) const { return labels_[k]; }
  std::size_t size() const { return labels_.size(); }
  double fs() const { return fs_; }

  friend bool operator==(const LabelTimeline&, const LabelTimeline&) = default;

 private:
  std::vector<MaybeLabel> labels_;
  double fs_ = 1.0;
};

// Throws LengthMismatch / FsMismatch unless the timeline pairs with the series.
inline void check_paired(const TriaxialSeries& series,
                         const LabelTimeline& timeline) {
  if (series.size() != timeline.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "timeline has " + std::to_string(timeline.size()) +
                    " labels for " + std::to_string(series.size()) +
                    " samples");
  }
  if (series.fs() != timeline.fs()) {
    throw Error(ErrorCode::kFsMismatch,
                "timeline and series sampling frequencies differ");
  }
}

// Half-open sample range [start, end).
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end > start ? end - start : 0; }
  friend constexpr bool operator==(const Segment&, const Segment&) = default;
};

inline void check_segment(const TriaxialSeries& series, const Segment& seg) {
  if (seg.end > series.size() || seg.start > seg.end) {
    throw Error(ErrorCode::kOutOfBounds,
                "segment [" + std::to_string(seg.start) + ", " +
                    std::to_string(seg.end) + ") outside series of length " +
                    std::to_string(series.size()));
  }
  if (seg.start == seg.end) {
    throw Error(ErrorCode::kEmptySegment, "segment has no samples");
  }
}

// Componentwise arithmetic mean over the samples in `seg`.
inline Vec3 segment_mean(const TriaxialSeries& series, const Segment& seg) {
  check_segment(series, seg);
  Vec3 sum{};
  for (std::size_t k = seg.start; k < seg.end; ++k) sum += series[k];
  return sum * (1.0 / static_cast<double>(seg.length()));
}

// Sample count for a window of `seconds` at `fs`, rounded to nearest.
inline std::size_t samples_for(double seconds, double fs) {
  const double n = std::round(seconds * fs);
  return n <= 0.0 ? 0 : static_cast<std::size_t>(n);
}

// First run of `label` in `timeline`, truncated to `seconds`.
inline std::optional<Segment> first_run(const LabelTimeline& timeline,
                                        const std::string& label,
                                        std::optional<double> seconds = std::nullopt) {
  const ActivityLabel want{label};
  std::size_t k = 0;
  while (k < timeline.size() && timeline[k] != want) ++k;
  if (k == timeline.size()) return std::nullopt;
  std::size_t end = k;
  while (end < timeline.size() && timeline[end] == want) ++end;
  if (seconds) end = std::min(end, k + std::max<std::size_t>(1, samples_for(*seconds, timeline.fs())));
  return Segment{k, end};
}

}  // namespace movelet

#endif  // MOVELET_CORE_HPP_
