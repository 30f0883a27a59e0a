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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 4-6 use the 10-subject synthetic cohort
// (seed 7, first 6 subjects train, last 4 test).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "movelet/eval.hpp"
#include "movelet/movelets.hpp"
#include "movelet/normalize.hpp"
#include "movelet/synth.hpp"
#include "oracles.hpp"

namespace {

using namespace movelet;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

constexpr std::uint64_t kCohortSeed = 7;
constexpr std::size_t kCohortSize = 10;
constexpr std::size_t kTrainCount = 6;
constexpr double kH = 0.75;

const std::vector<SyntheticSubject>& cohort() {
  static const auto c = generate_cohort(kCohortSize, kCohortSeed);
  return c;
}

TriaxialSeries normalized_series(const SyntheticSubject& s) {
  return apply_transform(s.raw, estimate_transform(s.raw, s.standing, s.lying));
}

Outcome rotation_recovery() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> beta(-0.06, 0.0);
  double max_err = 0.0;
  double max_gap = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto r0 = random_rotation(rng);
    const double b = beta(rng);
    const Vec3 b0{b, b, 0.0};
    // Noiseless standing and lying means under x = R0 u - b0.
    const Vec3 a1 = r0.inverse() * (Vec3{-1, 0, 0} + b0);
    const Vec3 a2 = r0.inverse() * (Vec3{0, -1, 0} + b0);
    const auto t = transform_from_means(a1, a2);
    for (std::size_t k = 0; k < 9; ++k) {
      max_err = std::max(max_err, std::abs(t.rotation.matrix().m[k] - r0.matrix().m[k]));
    }
    for (std::size_t d = 0; d < 3; ++d) max_err = std::max(max_err, std::abs(t.bias[d] - b0[d]));
    const double closed = calibration_objective(t.rotation.matrix(), a1, a2);
    const double numeric = oracle::minimize_objective(a1, a2, rng, 3);
    max_gap = std::max(max_gap, closed - numeric);
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = max_err <= 1e-9 && max_gap <= 1e-8 && secs < 5.0;
  o.detail = "max abs error " + fmt("%.3g", max_err) + " (<= 1e-9), closed minus numeric objective " +
             fmt("%.3g", max_gap) + " (<= 1e-8), " + fmt("%.2f", secs) + " s (< 5 s)";
  return o;
}

Outcome normalization_postcondition() {
  double max_err = 0.0;
  double max_mag_err = 0.0;
  double max_raw_mag = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = generate_subject(draw_subject_config(seed, "S"));
    const auto x = normalized_series(s);
    const Vec3 m = segment_mean(x, s.standing);
    max_err = std::max({max_err, std::abs(m.x1 + 1.0), std::abs(m.x2), std::abs(m.x3)});
    max_mag_err = std::max(max_mag_err, std::abs(magnitude(m) - 1.0));
    max_raw_mag = std::max(max_raw_mag, magnitude(segment_mean(s.raw, s.standing)));
  }
  Outcome o;
  o.pass = max_err <= 1e-12 && max_mag_err <= 1e-12;
  o.detail = "100 subjects, standing mean error " + fmt("%.3g", max_err) + ", magnitude error " +
             fmt("%.3g", max_mag_err) + " (<= 1e-12); raw standing magnitude up to " +
             fmt("%.4f", max_raw_mag);
  return o;
}

Outcome nearest_neighbor_exactness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::normal_distribution<double> n(0.0, 1.0);
  double max_dist_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<Vec3> a(60), b(60);
    for (auto& v : a) v = {n(rng), n(rng), n(rng)};
    for (auto& v : b) v = {n(rng), n(rng), n(rng)};
    max_dist_err = std::max(max_dist_err, std::abs(window_distance(a, b) - oracle::distance(a, b)));
  }

  // 5000 entries from normalized synthetic subjects. Every 50th query is a
  // dictionary window itself.
  SynthOptions opts;
  MoveletDictionary::Builder builder(kH, 80.0);
  std::vector<oracle::Entry> entries;
  for (std::uint64_t s = 0; entries.size() < 5000; ++s) {
    const auto subj = generate_subject(draw_subject_config(500 + s, "D" + std::to_string(s), opts));
    const auto x = normalized_series(subj);
    const auto ex = extract_movelets(x, subj.timeline, kH, subj.subject_id, 4);
    for (const auto& m : ex.movelets) {
      if (entries.size() == 5000) break;
      builder.add(m);
      entries.push_back({m.window, m.subject_id, m.start_index, m.label->name});
    }
  }
  const auto dict = std::move(builder).build();
  const auto query_subject = generate_subject(draw_subject_config(900, "Q", opts));
  const auto qx = normalized_series(query_subject);
  const std::size_t H = dict.window_length();
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    std::vector<Vec3> q;
    if (i % 50 == 0) {
      q = entries[(i * 37) % entries.size()].window;
    } else {
      const std::size_t start = (i * 4) % (qx.size() - H);
      q.assign(qx.samples().begin() + static_cast<std::ptrdiff_t>(start),
               qx.samples().begin() + static_cast<std::ptrdiff_t>(start + H));
    }
    const auto& want = entries[oracle::nearest(q, entries)];
    const auto got = nearest_match(q, dict, SearchOptions{true, true});
    if (got.subject_id != want.subject_id || got.start_index != want.start_index) ++mismatches;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = max_dist_err <= 1e-12 && mismatches == 0 && secs < 30.0;
  o.detail = "distance error " + fmt("%.3g", max_dist_err) + " (<= 1e-12), " +
             std::to_string(mismatches) + " of 1000 queries differ from linear scan over " +
             std::to_string(dict.size()) + " entries, " + fmt("%.2f", secs) + " s (< 30 s)";
  return o;
}

struct ExperimentResult {
  PredictionReport report;
  double seconds = 0.0;
};

// Train on the first 6 subjects, predict the last 4; grouped scoring with H
// samples excluded on each side of every transition.
ExperimentResult population_experiment(bool normalize) {
  const auto t0 = Clock::now();
  const auto& subjects = cohort();
  const auto budget = TrainingBudget::protocol_default();
  const auto grouping = GroupingMap::protocol_default();
  std::vector<TrainingRecord> train;
  for (std::size_t i = 0; i < kTrainCount; ++i) {
    const auto& s = subjects[i];
    const auto x = normalize ? normalized_series(s) : s.raw;
    train.push_back({x, select_training(x, s.timeline, budget), s.subject_id});
  }
  const auto dict = build_dictionary(train, kH, 80.0);
  std::vector<SubjectPrediction> preds;
  for (std::size_t i = kTrainCount; i < subjects.size(); ++i) {
    const auto& s = subjects[i];
    const auto x = normalize ? normalized_series(s) : s.raw;
    const auto truth = group_labels(s.timeline, grouping);
    preds.push_back({s.subject_id, group_labels(predict_labels(x, dict), grouping), truth,
                     transition_mask(truth, dict.window_length())});
  }
  return {build_report(preds), seconds_since(t0)};
}

const ExperimentResult& normalized_experiment() {
  static const auto r = population_experiment(true);
  return r;
}

Outcome population_prediction() {
  const auto& r = normalized_experiment();
  Outcome o;
  const double t = r.report.mean_true_rate.value_or(0.0);
  const double f = r.report.mean_false_rate.value_or(1.0);
  o.pass = t >= 0.90 && f <= 0.20 && r.seconds < 120.0;
  o.detail = "mean true rate " + fmt("%.4f", t) + " (>= 0.90), mean false rate " + fmt("%.4f", f) +
             " (<= 0.20), " + std::to_string(r.report.activities.size()) + " grouped activities, " +
             fmt("%.1f", r.seconds) + " s (< 120 s)";
  return o;
}

Outcome raw_ablation() {
  const auto& norm = normalized_experiment();
  const auto raw = population_experiment(false);
  const double tn = norm.report.mean_true_rate.value_or(0.0);
  const double tr = raw.report.mean_true_rate.value_or(0.0);
  Outcome o;
  o.pass = tn - tr >= 0.15;
  o.detail = "raw mean true rate " + fmt("%.4f", tr) + " vs normalized " + fmt("%.4f", tn) +
             ", gap " + fmt("%.4f", tn - tr) + " (>= 0.15)";
  return o;
}

Outcome h_selection() {
  const auto t0 = Clock::now();
  const auto& subjects = cohort();
  std::vector<TrainingRecord> train;
  for (std::size_t i = 0; i < kTrainCount; ++i) {
    train.push_back({normalized_series(subjects[i]), subjects[i].timeline, subjects[i].subject_id});
  }
  const std::vector<double> grid{0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  LosoOptions opts;
  opts.grouping = GroupingMap::protocol_default();
  const auto r = loso_select_h(train, grid, opts);
  const double secs = seconds_since(t0);
  std::string curve;
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = r.mean_accuracy[i].value_or(-1.0);
    curve += (i ? ", " : "") + fmt("%.2f", grid[i]) + ":" + fmt("%.4f", v);
    if (grid[i] == r.chosen) best = v;
  }
  // Determinism: rerunning the chosen candidate reproduces its score.
  const auto again = loso_select_h(train, std::vector<double>{r.chosen}, opts);
  const bool deterministic = again.mean_accuracy[0] == std::optional<double>(best);
  Outcome o;
  o.pass = best >= 0.85 && deterministic && r.warnings.empty() && secs < 300.0;
  o.detail = "h* = " + fmt("%.2f", r.chosen) + " with mean true rate " + fmt("%.4f", best) +
             " (>= 0.85), repeat run " + (deterministic ? "identical" : "DIFFERENT") + ", curve {" +
             curve + "}, " + fmt("%.1f", secs) + " s (< 300 s)";
  return o;
}

// Series of n = 6m points X-bar +/- d e_k. Its mean is exactly X-bar and its
// unbiased covariance is diag(2 m d^2 / (n - 1)).
TriaxialSeries star_segment(const Vec3& mean, double d, std::size_t m) {
  std::vector<Vec3> v;
  for (std::size_t i = 0; i < m; ++i) {
    for (const Vec3& e : {kE1, kE2, kE3}) {
      v.push_back(mean + d * e);
      v.push_back(mean - d * e);
    }
  }
  return TriaxialSeries(v, 80.0);
}

Outcome bias_test_checks() {
  const auto t0 = Clock::now();
  bool ok = true;
  // (a) hand calculation.
  const std::size_t m = 40, n = 6 * m;
  const double d = 0.05;
  const Vec3 mean{-1.02, 0.0, 0.0};
  const auto seg = star_segment(mean, d, m);
  const auto r = bias_test(seg, {0, n});
  const double op = 2.0 * m * d * d / (n - 1.0);
  const double hand = std::abs(1.02 * 1.02 - 1.0) / std::sqrt(6.0 / n * op);
  const double err_a = std::abs(r.statistic_T - hand);
  ok = ok && err_a <= 1e-9;

  // (b) segments engineered to give T = 0.65 and T = 209.38.
  std::string fixtures;
  for (const auto& [target, expect_reject] : {std::pair{0.65, false}, std::pair{209.38, true}}) {
    const double norm_sq = 1.0 + target * std::sqrt(6.0 / n * op);
    const auto fx = star_segment({-std::sqrt(norm_sq), 0.0, 0.0}, d, m);
    const auto fr = bias_test(fx, {0, n});
    const bool good = std::abs(fr.statistic_T - target) <= 1e-9 * target && fr.rejected == expect_reject;
    ok = ok && good;
    fixtures += fmt("%.2f", fr.statistic_T) + (fr.rejected ? " rejected" : " not rejected") + ", ";
  }

  // (c) null Monte Carlo with mu on the largest-variance axis, where the
  // operator-norm bound is tight.
  std::mt19937_64 rng(303);
  std::normal_distribution<double> z(0.0, 1.0);
  const Vec3 sd{0.05, 0.03, 0.02};
  int rejected = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    std::vector<Vec3> v(n);
    for (auto& x : v) x = {-1.0 + sd.x1 * z(rng), sd.x2 * z(rng), sd.x3 * z(rng)};
    rejected += bias_test(TriaxialSeries(v, 80.0), {0, n}).rejected;
  }
  const double rate = static_cast<double>(rejected) / trials;
  const double secs = seconds_since(t0);
  ok = ok && rate <= 0.07 && secs < 30.0;
  Outcome o;
  o.pass = ok;
  o.detail = "hand-calculation error " + fmt("%.3g", err_a) + " (<= 1e-9); fixtures " + fixtures +
             "null rejection rate " + fmt("%.4f", rate) + " over 2000 trials (<= 0.07), " +
             fmt("%.2f", secs) + " s (< 30 s)";
  return o;
}

Outcome metric_identities() {
  bool ok = true;
  std::size_t pairs = 0;
  const auto grouping = GroupingMap::protocol_default();
  for (const auto& s : cohort()) {
    for (const auto& t : {s.timeline, group_labels(s.timeline, grouping)}) {
      for (const auto& act : label_union(t, t)) {
        ok = ok && true_prediction_rate(t, t, act) == 1.0 && false_prediction_rate(t, t, act) == 0.0;
        ++pairs;
      }
    }
  }
  // Confusion-derived rates against direct counts on the real predictions.
  std::size_t checked = 0;
  const auto& report = normalized_experiment().report;
  for (std::size_t i = 0; i < report.subjects.size(); ++i) {
    const auto& sr = report.subjects[i];
    const auto& cm = sr.confusion;
    for (std::size_t j = 0; j < cm.labels.size(); ++j) {
      std::size_t row = 0, col = 0;
      for (std::size_t p = 0; p < cm.labels.size(); ++p) {
        row += cm.counts[j][p];
        col += cm.counts[p][j];
      }
      ok = ok && row + cm.unpredicted[j] == sr.activities[j].truth_count &&
           col == sr.activities[j].predicted_count && cm.counts[j][j] == sr.activities[j].correct;
      if (row > 0) ok = ok && sr.activities[j].true_rate == static_cast<double>(cm.counts[j][j]) / row;
      ++checked;
    }
  }
  Outcome o;
  o.pass = ok;
  o.detail = std::to_string(pairs) + " perfect-prediction (subject, activity) pairs give r = 1, w = 0; " +
             std::to_string(checked) + " confusion-derived rates equal direct counts";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 rotation recovery", rotation_recovery},
      {"2 normalization postcondition", normalization_postcondition},
      {"3 distance and nearest-neighbor exactness", nearest_neighbor_exactness},
      {"4 population prediction on synthetic cohort", population_prediction},
      {"5 raw versus normalized gap", raw_ablation},
      {"6 leave-one-subject-out h selection", h_selection},
      {"7 bias test", bias_test_checks},
      {"8 metric identities", metric_identities},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
