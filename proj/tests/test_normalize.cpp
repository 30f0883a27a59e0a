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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "movelet/normalize.hpp"
#include "movelet/synth.hpp"
#include "oracles.hpp"

namespace movelet {
namespace {

void expect_matrix_near(const Mat3& a, const Mat3& b, double tol) {
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(a.m[i], b.m[i], tol) << "entry " << i;
}

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(a[d], b[d], tol) << "axis " << d;
}

TEST(EstimateRotation, StandardOrientationIsIdentity) {
  const auto r = estimate_rotation({-1, 0, 0}, {0, -1, 0});
  expect_matrix_near(r.matrix(), Mat3::identity(), 1e-15);
}

TEST(EstimateRotation, FlippedDevice) {
  const Vec3 a1{1, 0, 0}, a2{0, -1, 0};
  const auto r = estimate_rotation(a1, a2);
  expect_vec_near(r * a1, {-1, 0, 0}, 1e-15);
  expect_vec_near(r * a2, {0, -1, 0}, 1e-15);
  expect_matrix_near(r.matrix(), Mat3{{-1, 0, 0, 0, 1, 0, 0, 0, -1}}, 1e-15);
  std::mt19937_64 rng(5);
  const double numeric = oracle::minimize_objective(a1, a2, rng);
  EXPECT_NEAR(calibration_objective(r.matrix(), a1, a2), numeric, 1e-8);
  EXPECT_LE(calibration_objective(r.matrix(), a1, a2), numeric + 1e-12);
}

TEST(EstimateRotation, OrthonormalPairsMapExactly) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const auto q = random_rotation(rng);
    // Rows of a random rotation are a random orthonormal frame.
    const Vec3 a1 = q.matrix().row(0);
    const Vec3 a2 = q.matrix().row(1);
    const auto r = estimate_rotation(a1, a2);
    expect_vec_near(r * a1, {-1, 0, 0}, 1e-10);
    expect_vec_near(r * a2, {0, -1, 0}, 1e-10);
    if (i < 20) {
      EXPECT_NEAR(calibration_objective(r.matrix(), a1, a2),
                  oracle::minimize_objective(a1, a2, rng, 4), 1e-8);
    }
  }
}

TEST(EstimateRotation, ProperRotationAndRightHandCondition) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a1{n(rng), n(rng), n(rng)};
    const Vec3 a2{n(rng), n(rng), n(rng)};
    const auto r = estimate_rotation(a1, a2);
    const Mat3& m = r.matrix();
    expect_matrix_near(m * m.transposed(), Mat3::identity(), 1e-12);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
    EXPECT_GT(dot(kE3, r * cross(a1, a2)), 0.0);
  }
}

TEST(EstimateRotation, BeatsRandomRotationsAndMinimizer) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 a1{n(rng), n(rng), n(rng)};
    const Vec3 a2{n(rng), n(rng), n(rng)};
    const double closed = calibration_objective(estimate_rotation(a1, a2).matrix(), a1, a2);
    double best_random = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) {
      best_random = std::min(best_random, oracle::objective(random_rotation(rng).matrix(), a1, a2));
    }
    const double numeric = oracle::minimize_objective(a1, a2, rng);
    EXPECT_LE(closed, best_random + 1e-8);
    EXPECT_LE(closed, numeric + 1e-8);
    EXPECT_NEAR(closed, numeric, 1e-8);
  }
}

TEST(EstimateRotation, DegenerateInputs) {
  for (const auto& [a1, a2] : std::vector<std::pair<Vec3, Vec3>>{
           {{-1, 0, 0}, {-2, 0, 0}}, {{0, 0, 0}, {0, -1, 0}}, {{1, 1, 0}, {1, 1, 1e-8}}}) {
    try {
      estimate_rotation(a1, a2);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kDegenerateCalibration);
    }
  }
}

TEST(EstimateTransform, StandardMeans) {
  const auto t = transform_from_means({-1, 0, 0}, {0, -1, 0});
  expect_matrix_near(t.rotation.matrix(), Mat3::identity(), 1e-15);
  expect_vec_near(t.bias, {0, 0, 0}, 1e-15);
}

TEST(EstimateTransform, InflatedFlippedStanding) {
  const Vec3 a1{1.03, 0, 0};
  const auto t = transform_from_means(a1, {0, -1, 0});
  expect_matrix_near(t.rotation.matrix(), Mat3{{-1, 0, 0, 0, 1, 0, 0, 0, -1}}, 1e-15);
  // R a1 = (-1.03, 0, 0), so b = R a1 + e1 carries the 0.03 excess.
  expect_vec_near(t.bias, {-0.03, 0, 0}, 1e-15);
  EXPECT_NEAR(std::abs(t.bias.x1), 0.03, 1e-15);
  expect_vec_near(t.apply(a1), {-1, 0, 0}, 1e-15);
}

TEST(EstimateTransform, RecoversSyntheticTruth) {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SubjectConfig cfg = draw_subject_config(seed, "S", {});
    cfg.noise_sigma = 0.0;
    const auto s = generate_subject(cfg);
    const auto t = estimate_transform(s.raw, s.standing, s.lying);
    expect_matrix_near(t.rotation.matrix(), s.truth_transform.rotation.matrix(), 1e-9);
    expect_vec_near(t.bias, s.truth_transform.bias, 1e-9);
  }
}

TEST(EstimateTransform, Errors) {
  const TriaxialSeries s(std::vector<Vec3>(10, Vec3{-1, 0, 0}), 80.0);
  try {
    estimate_transform(s, {0, 5}, {5, 10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateCalibration);
  }
  try {
    estimate_transform(s, {0, 0}, {5, 10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySegment);
  }
}

TEST(ApplyTransform, IdentityAndTranslation) {
  const TriaxialSeries s({{1.05, 0, 0}, {1.05, 0, 0}}, 80.0, 1.5);
  EXPECT_EQ(apply_transform(s, NormalizationTransform{}), s);
  const auto out = apply_transform(s, NormalizationTransform{RotationMatrix(), {0.05, 0, 0}});
  EXPECT_EQ(out.size(), 2u);
  EXPECT_EQ(out.fs(), 80.0);
  EXPECT_EQ(out.start_time(), 1.5);
  for (const Vec3& v : out.samples()) expect_vec_near(v, {1, 0, 0}, 1e-15);
}

TEST(ApplyTransform, RecoversNormalizedTruth) {
  SubjectConfig cfg = draw_subject_config(42, "S01", {});
  cfg.program = {{"normalWalk", 5.0}};
  const auto s = generate_subject(cfg);
  const auto out = apply_transform(s.raw, s.truth_transform);
  for (std::size_t k = 0; k < out.size(); ++k) {
    expect_vec_near(out[k], s.normalized_truth[k], 1e-9);
  }
}

TEST(ApplyTransform, Isometry) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Vec3> u(40);
  for (auto& v : u) v = {n(rng), n(rng), n(rng)};
  const NormalizationTransform t{random_rotation(rng), {0.04, -0.02, 0.01}};
  const auto x = apply_transform(TriaxialSeries(u, 80.0), t);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j)
      EXPECT_NEAR(magnitude(x[i] - x[j]), magnitude(u[i] - u[j]), 1e-12);
}

TEST(Normalize, StandingMeanExactAndLyingSigns) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = generate_subject(draw_subject_config(seed, "S", {}));
    const auto t = estimate_transform(s.raw, s.standing, s.lying);
    const auto x = apply_transform(s.raw, t);
    expect_vec_near(segment_mean(x, s.standing), {-1, 0, 0}, 1e-12);
    const Vec3 lying = segment_mean(x, s.lying);
    EXPECT_LE(lying.x1, 0.1);
    EXPECT_LT(lying.x2, 0.0);
  }
}

TEST(RotationMatrix, Validation) {
  EXPECT_THROW(RotationMatrix::from_matrix(Mat3{{2, 0, 0, 0, 1, 0, 0, 0, 1}}), Error);
  try {
    RotationMatrix::from_matrix(Mat3{{-1, 0, 0, 0, 1, 0, 0, 0, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidRotation);
  }
  const auto r = axis_angle_rotation({0, 0, 1}, std::numbers::pi / 2);
  expect_vec_near(r * Vec3{1, 0, 0}, {0, 1, 0}, 1e-15);
  expect_matrix_near((r * r.inverse()).matrix(), Mat3::identity(), 1e-15);
}

TEST(SymmetricEigenvalues, MatchJacobi) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Mat3 b;
    for (auto& v : b.m) v = n(rng);
    const Mat3 a = b * b.transposed();  // symmetric positive semidefinite
    const auto got = symmetric_eigenvalues(a);
    const auto want = oracle::jacobi_eigenvalues(a);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(got[k], want[k], 1e-9 * (1.0 + want[0]));
  }
  const auto diag = symmetric_eigenvalues(Mat3{{2, 0, 0, 0, 5, 0, 0, 0, 3}});
  EXPECT_DOUBLE_EQ(diag[0], 5.0);
  EXPECT_DOUBLE_EQ(diag[1], 3.0);
  EXPECT_DOUBLE_EQ(diag[2], 2.0);
}

TEST(SampleCovariance, UnbiasedEstimator) {
  const TriaxialSeries s({{1, 0, 0}, {3, 0, 0}, {2, 0, 1}}, 80.0);
  const Mat3 c = sample_covariance(s, {0, 3});
  EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c(2, 2), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(c(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(c(1, 1), 0.0);
}

TEST(BiasStatistic, HandCalculation) {
  // |1.0404 - 1| / sqrt(6 / 240 * 0.0025) = 0.0404 / 0.0079057 ~ 5.11024.
  const double t = bias_statistic(1.0404, 0.0025, 240);
  EXPECT_NEAR(t, 0.0404 / std::sqrt(6.0 / 240.0 * 0.0025), 1e-12);
  EXPECT_NEAR(t, 5.1102407, 1e-6);
  EXPECT_DOUBLE_EQ(bias_statistic(1.0, 0.3, 10), 0.0);
  EXPECT_THROW(bias_statistic(1.0, 0.3, 1), Error);
  try {
    bias_statistic(1.1, 0.0, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularCovariance);
  }
}

TEST(BiasTest, UnitNormMeanNotRejected) {
  // Symmetric pairs around (-1, 0, 0) give a mean of exactly unit norm.
  std::vector<Vec3> v;
  for (int k = 0; k < 60; ++k) {
    const double d = 0.01 * (k % 7 + 1);
    v.push_back({-1.0 + d, d, -d});
    v.push_back({-1.0 - d, -d, d});
  }
  const auto r = bias_test(TriaxialSeries(v, 80.0), {0, 120});
  EXPECT_EQ(r.mean_norm_sq, 1.0);
  EXPECT_EQ(r.statistic_T, 0.0);
  EXPECT_FALSE(r.rejected);
  EXPECT_TRUE(r.singular_covariance);  // points lie on one line
}

TEST(BiasTest, CriticalValueAndMonotone) {
  EXPECT_NEAR(normal_critical_value(0.05), 1.959963984540054, 1e-12);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 0.02);
  std::vector<Vec3> base(240);
  for (auto& v : base) v = {n(rng), n(rng), n(rng)};
  // A constant shift leaves the covariance and n unchanged.
  std::vector<std::pair<double, BiasTestResult>> runs;
  for (int i = 0; i <= 40; ++i) {
    std::vector<Vec3> v = base;
    for (auto& x : v) x += Vec3{-0.96 - 0.002 * i, 0, 0};
    const auto r = bias_test(TriaxialSeries(v, 80.0), {0, 240});
    EXPECT_EQ(r.rejected, r.statistic_T > r.critical_value);
    runs.emplace_back(std::abs(r.mean_norm_sq - 1.0), r);
  }
  std::sort(runs.begin(), runs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < runs.size(); ++i) {
    EXPECT_GE(runs[i].second.statistic_T, runs[i - 1].second.statistic_T);
    if (runs[i - 1].second.rejected) EXPECT_TRUE(runs[i].second.rejected);
  }
  EXPECT_FALSE(runs.front().second.rejected);
  EXPECT_TRUE(runs.back().second.rejected);
}

TEST(BiasTest, TooFewSamples) {
  const TriaxialSeries s(std::vector<Vec3>(3, Vec3{-1, 0, 0}), 80.0);
  try {
    bias_test(s, {0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSamples);
  }
}

}  // namespace
}  // namespace movelet
