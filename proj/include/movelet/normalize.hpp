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

// Subject-level normalization x = R u - b of raw device-frame acceleration u
// into the body frame, and a large-sample test for systematic device bias.
//
// R is picked from standing and lying calibration means a1, a2 so that
// R a1 is as close as possible to -e1 and R a2 to -e2 while keeping a
// right-handed frame. b = R a1 + e1 then pins the standing mean to -e1.

#ifndef MOVELET_NORMALIZE_HPP_
#define MOVELET_NORMALIZE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "movelet/core.hpp"
#include "movelet/error.hpp"

namespace movelet {

inline constexpr double kParallelEpsilon = 1e-6;
inline constexpr double kRotationTolerance = 1e-10;

// Proper rotation: orthonormal with determinant +1.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::identity()) {}

  // Throws InvalidRotation if `m` is not a proper rotation within `tol`.
  static RotationMatrix from_matrix(const Mat3& m,
                                    double tol = kRotationTolerance) {
    const Mat3 gram = m.transposed() * m;
    const Mat3 eye = Mat3::identity();
    for (std::size_t i = 0; i < 9; ++i) {
      if (!std::isfinite(m.m[i]) || std::abs(gram.m[i] - eye.m[i]) > tol) {
        throw Error(ErrorCode::kInvalidRotation, "matrix is not orthonormal");
      }
    }
    if (std::abs(m.determinant() - 1.0) > tol) {
      throw Error(ErrorCode::kInvalidRotation, "determinant is not +1");
    }
    return RotationMatrix(m);
  }

  const Mat3& matrix() const { return m_; }
  RotationMatrix inverse() const { return RotationMatrix(m_.transposed()); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  RotationMatrix operator*(const RotationMatrix& o) const {
    return RotationMatrix(m_ * o.m_);
  }

  friend bool operator==(const RotationMatrix&,
                         const RotationMatrix&) = default;

 private:
  explicit RotationMatrix(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

// Rotation by `angle` radians about the unit axis `axis` (Rodrigues).
inline RotationMatrix axis_angle_rotation(const Vec3& axis, double angle) {
  const double len = magnitude(axis);
  if (!(len > 0.0)) return RotationMatrix();
  const Vec3 k = axis * (1.0 / len);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double t = 1.0 - c;
  const Mat3 m{{t * k.x1 * k.x1 + c, t * k.x1 * k.x2 - s * k.x3,
                t * k.x1 * k.x3 + s * k.x2, t * k.x1 * k.x2 + s * k.x3,
                t * k.x2 * k.x2 + c, t * k.x2 * k.x3 - s * k.x1,
                t * k.x1 * k.x3 - s * k.x2, t * k.x2 * k.x3 + s * k.x1,
                t * k.x3 * k.x3 + c}};
  return RotationMatrix::from_matrix(m, 1e-9);
}

// Applies x = R u - b.
struct NormalizationTransform {
  RotationMatrix rotation;
  Vec3 bias;

  Vec3 apply(const Vec3& u) const { return rotation * u - bias; }
  // Raw sample that maps to `x`: u = R^T (x + b).
  Vec3 invert(const Vec3& x) const { return rotation.inverse() * (x + bias); }

  friend bool operator==(const NormalizationTransform&,
                         const NormalizationTransform&) = default;
};

// Calibration objective ||R a1 + e1||^2 + ||R a2 + e2||^2.
inline double calibration_objective(const Mat3& r, const Vec3& a1,
                                    const Vec3& a2) {
  return squared_norm(r * a1 + kE1) + squared_norm(r * a2 + kE2);
}

// Closed-form minimizer of the calibration objective over proper rotations
// with e3' R (a1 x a2) > 0. With the Gram-Schmidt frame b1, b2 of (a1, a2)
// and a1 = c1 b1, a2 = c2 b1 + c3 b2, the optimum is
// Rot(theta)^T [b1, b2, b1 x b2]^T where (cos, sin) ~ (-(c1 + c3), c2).
inline RotationMatrix estimate_rotation(const Vec3& a1, const Vec3& a2,
                                        double parallel_eps = kParallelEpsilon) {
  if (!is_finite(a1) || !is_finite(a2)) {
    throw Error(ErrorCode::kInvalidArgument, "calibration means must be finite");
  }
  if (!(magnitude(cross(a1, a2)) > parallel_eps)) {
    throw Error(ErrorCode::kDegenerateCalibration,
                "standing and lying means are (near-)parallel or zero");
  }
  const double c1 = magnitude(a1);
  const Vec3 b1 = a1 * (1.0 / c1);
  const double c2 = dot(a2, b1);
  const Vec3 residual = a2 - c2 * b1;
  const double c3 = magnitude(residual);
  const Vec3 b2 = residual * (1.0 / c3);
  const Vec3 b3 = cross(b1, b2);

  const double s1 = c1 + c3;
  const double radius = std::hypot(s1, c2);
  const double cos_t = -s1 / radius;
  const double sin_t = c2 / radius;

  // Rot(theta)^T rows are (cos, sin, 0), (-sin, cos, 0), (0, 0, 1).
  const Mat3 frame = Mat3::from_rows(b1, b2, b3);
  const Mat3 rot_t{{cos_t, sin_t, 0.0, -sin_t, cos_t, 0.0, 0.0, 0.0, 1.0}};
  return RotationMatrix::from_matrix(rot_t * frame);
}

inline NormalizationTransform transform_from_means(
    const Vec3& standing_mean, const Vec3& lying_mean,
    double parallel_eps = kParallelEpsilon) {
  NormalizationTransform t;
  t.rotation = estimate_rotation(standing_mean, lying_mean, parallel_eps);
  t.bias = t.rotation * standing_mean + kE1;
  return t;
}

inline NormalizationTransform estimate_transform(
    const TriaxialSeries& series, const Segment& standing,
    const Segment& lying, double parallel_eps = kParallelEpsilon) {
  return transform_from_means(segment_mean(series, standing),
                              segment_mean(series, lying), parallel_eps);
}

inline TriaxialSeries apply_transform(const TriaxialSeries& series,
                                      const NormalizationTransform& t) {
  std::vector<Vec3> out;
  out.reserve(series.size());
  for (const Vec3& u : series.samples()) out.push_back(t.apply(u));
  return TriaxialSeries(std::move(out), series.fs(), series.start_time());
}

// Eigenvalues of a symmetric 3x3 matrix in descending order, via the
// trigonometric solution of the characteristic cubic.
inline std::array<double, 3> symmetric_eigenvalues(const Mat3& a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  if (p1 == 0.0) {
    std::array<double, 3> d{a(0, 0), a(1, 1), a(2, 2)};
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
  }
  const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) +
                    (a(1, 1) - q) * (a(1, 1) - q) +
                    (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Mat3 b = a;
  for (std::size_t i = 0; i < 3; ++i) b(i, i) -= q;
  for (double& v : b.m) v /= p;
  const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double largest = q + 2.0 * p * std::cos(phi);
  const double smallest =
      q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {largest, 3.0 * q - largest - smallest, smallest};
}

// Unbiased (n - 1) sample covariance of the samples in `seg`.
inline Mat3 sample_covariance(const TriaxialSeries& series, const Segment& seg) {
  check_segment(series, seg);
  const std::size_t n = seg.length();
  if (n < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                "covariance needs at least two samples");
  }
  const Vec3 mean = segment_mean(series, seg);
  Mat3 cov;
  for (std::size_t k = seg.start; k < seg.end; ++k) {
    const Vec3 d = series[k] - mean;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = r; c < 3; ++c) cov(r, c) += d[r] * d[c];
  }
  const double scale = 1.0 / static_cast<double>(n - 1);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = r; c < 3; ++c) {
      cov(r, c) *= scale;
      cov(c, r) = cov(r, c);
    }
  return cov;
}

// Two-sided standard normal critical value z_{alpha/2}.
inline double normal_critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  }
  const boost::math::normal standard;
  return boost::math::quantile(standard, 1.0 - alpha / 2.0);
}

struct BiasTestResult {
  double statistic_T = 0.0;
  std::size_t n = 0;
  double mean_norm_sq = 0.0;
  double sigma_op_norm = 0.0;
  double alpha = 0.05;
  double critical_value = 0.0;
  bool rejected = false;
  // Smallest covariance eigenvalue is numerically zero.
  bool singular_covariance = false;
};

// T = | ||mean||^2 - 1 | / sqrt((6 / n) ||Sigma||_op).
inline double bias_statistic(double mean_norm_sq, double sigma_op_norm,
                             std::size_t n) {
  if (n < 2) {
    throw Error(ErrorCode::kInsufficientSamples, "bias test needs n >= 2");
  }
  if (!(sigma_op_norm > 0.0)) {
    throw Error(ErrorCode::kSingularCovariance,
                "covariance operator norm is zero");
  }
  return std::abs(mean_norm_sq - 1.0) /
         std::sqrt(6.0 / static_cast<double>(n) * sigma_op_norm);
}

// Conservative test of ||mu|| = 1 on a standing segment: under the null,
// mu' Sigma mu <= ||Sigma||_op, so the operator norm stands in for the
// unknown quadratic form.
inline BiasTestResult bias_test(const TriaxialSeries& series,
                                const Segment& standing, double alpha = 0.05) {
  check_segment(series, standing);
  if (standing.length() < 2) {
    throw Error(ErrorCode::kInsufficientSamples, "bias test needs n >= 2");
  }
  BiasTestResult out;
  out.n = standing.length();
  out.alpha = alpha;
  out.critical_value = normal_critical_value(alpha);
  out.mean_norm_sq = squared_norm(segment_mean(series, standing));
  const auto eig = symmetric_eigenvalues(sample_covariance(series, standing));
  out.sigma_op_norm = std::max(eig[0], 0.0);
  out.singular_covariance = eig[2] <= 1e-12 * out.sigma_op_norm;
  out.statistic_T = bias_statistic(out.mean_norm_sq, out.sigma_op_norm, out.n);
  out.rejected = out.statistic_T > out.critical_value;
  return out;
}

}  // namespace movelet

#endif  // MOVELET_NORMALIZE_HPP_
