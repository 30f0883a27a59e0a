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

// Prediction-quality metrics, activity grouping, training-data budgets and
// leave-one-subject-out selection of the movelet length.
//
// Only samples whose ground truth is labeled are evaluated. For subject i and
// activity j the true rate r_ij is the share of truth-j samples predicted as
// j; the false rate w_ij is the share of predicted-j samples whose truth is
// not j. A rate with a zero denominator is undefined (nullopt) and is left
// out of every average.

#ifndef MOVELET_EVAL_HPP_
#define MOVELET_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "movelet/core.hpp"
#include "movelet/error.hpp"
#include "movelet/movelets.hpp"

namespace movelet {

namespace detail {

inline void check_same_length(const LabelTimeline& pred,
                              const LabelTimeline& truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "predicted and true timelines differ in length");
  }
}

inline void check_mask(const std::vector<bool>& mask, std::size_t n) {
  if (!mask.empty() && mask.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "mask length differs from timeline");
  }
}

inline bool included(const std::vector<bool>& mask, std::size_t k) {
  return mask.empty() || mask[k];
}

}  // namespace detail

// Share of samples with truth == act that are predicted as act. An empty
// mask evaluates every sample.
inline std::optional<double> true_prediction_rate(const LabelTimeline& pred,
                                                  const LabelTimeline& truth,
                                                  const ActivityLabel& act,
                                                  const std::vector<bool>& mask = {}) {
  detail::check_same_length(pred, truth);
  detail::check_mask(mask, truth.size());
  std::size_t denom = 0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (!detail::included(mask, k) || truth[k] != act) continue;
    ++denom;
    if (pred[k] == act) ++hits;
  }
  if (denom == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(denom);
}

// Share of (truth-labeled) samples predicted as act whose truth is not act.
inline std::optional<double> false_prediction_rate(const LabelTimeline& pred,
                                                   const LabelTimeline& truth,
                                                   const ActivityLabel& act,
                                                   const std::vector<bool>& mask = {}) {
  detail::check_same_length(pred, truth);
  detail::check_mask(mask, truth.size());
  std::size_t denom = 0;
  std::size_t misses = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (!detail::included(mask, k) || !truth[k] || pred[k] != act) continue;
    ++denom;
    if (truth[k] != act) ++misses;
  }
  if (denom == 0) return std::nullopt;
  return static_cast<double>(misses) / static_cast<double>(denom);
}

// Evaluation mask that drops unlabeled truth samples and every sample within
// `radius` samples of a label change: for a change between b-1 and b, the
// samples b-radius .. b+radius-1 are excluded.
inline std::vector<bool> transition_mask(const LabelTimeline& truth,
                                         std::size_t radius) {
  const std::size_t n = truth.size();
  std::vector<bool> mask(n);
  for (std::size_t k = 0; k < n; ++k) mask[k] = truth[k].has_value();
  for (std::size_t b = 1; b < n; ++b) {
    if (truth[b] == truth[b - 1]) continue;
    const std::size_t lo = b >= radius ? b - radius : 0;
    const std::size_t hi = std::min(n, b + radius);
    for (std::size_t k = lo; k < hi; ++k) mask[k] = false;
  }
  return mask;
}

// counts[t][p]: samples with truth labels[t] predicted as labels[p].
// unpredicted[t]: truth labels[t] samples with no prediction.
struct ConfusionMatrix {
  std::vector<ActivityLabel> labels;
  std::vector<std::vector<std::size_t>> counts;
  std::vector<std::size_t> unpredicted;

  std::size_t row_sum(std::size_t t) const {
    std::size_t s = unpredicted[t];
    for (auto c : counts[t]) s += c;
    return s;
  }
  std::size_t column_sum(std::size_t p) const {
    std::size_t s = 0;
    for (const auto& row : counts) s += row[p];
    return s;
  }
  std::optional<double> true_rate(std::size_t j) const {
    const std::size_t d = row_sum(j);
    if (d == 0) return std::nullopt;
    return static_cast<double>(counts[j][j]) / static_cast<double>(d);
  }
  std::optional<double> false_rate(std::size_t j) const {
    const std::size_t d = column_sum(j);
    if (d == 0) return std::nullopt;
    return static_cast<double>(d - counts[j][j]) / static_cast<double>(d);
  }
};

// Label set of a pair of timelines, sorted.
inline std::vector<ActivityLabel> label_union(const LabelTimeline& a,
                                              const LabelTimeline& b) {
  std::set<ActivityLabel> s;
  for (const auto& l : a.labels())
    if (l) s.insert(*l);
  for (const auto& l : b.labels())
    if (l) s.insert(*l);
  return {s.begin(), s.end()};
}

inline ConfusionMatrix confusion_matrix(const LabelTimeline& pred,
                                        const LabelTimeline& truth,
                                        std::vector<ActivityLabel> labels,
                                        const std::vector<bool>& mask = {}) {
  detail::check_same_length(pred, truth);
  detail::check_mask(mask, truth.size());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::map<ActivityLabel, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], i);
  const std::size_t a = labels.size();
  ConfusionMatrix cm{labels, std::vector<std::vector<std::size_t>>(
                                 a, std::vector<std::size_t>(a, 0)),
                     std::vector<std::size_t>(a, 0)};
  auto find = [&](const ActivityLabel& l) {
    const auto it = index.find(l);
    if (it == index.end()) {
      throw Error(ErrorCode::kUnknownLabel,
                  "label '" + l.name + "' missing from confusion label set");
    }
    return it->second;
  };
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (!detail::included(mask, k) || !truth[k]) continue;
    const std::size_t t = find(*truth[k]);
    if (!pred[k]) {
      ++cm.unpredicted[t];
    } else {
      ++cm.counts[t][find(*pred[k])];
    }
  }
  return cm;
}

struct ActivityStats {
  ActivityLabel activity;
  std::size_t truth_count = 0;
  std::size_t predicted_count = 0;
  std::size_t correct = 0;
  std::optional<double> true_rate;
  std::optional<double> false_rate;
};

struct SubjectReport {
  std::string subject_id;
  std::vector<ActivityStats> activities;
  ConfusionMatrix confusion;
};

struct PredictionReport {
  std::vector<ActivityLabel> activities;
  std::vector<SubjectReport> subjects;
  ConfusionMatrix confusion;
  std::optional<double> mean_true_rate;
  std::optional<double> mean_false_rate;
  std::size_t evaluated_samples = 0;
};

struct SubjectPrediction {
  std::string subject_id;
  LabelTimeline predicted;
  LabelTimeline truth;
  // Optional evaluation mask (see transition_mask); empty means all samples.
  std::vector<bool> mask;
};

namespace detail {

inline std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

// Per-subject, per-activity rates plus their unweighted means over all
// defined (subject, activity) pairs.
inline PredictionReport build_report(std::span<const SubjectPrediction> subjects) {
  std::set<ActivityLabel> all;
  for (const auto& s : subjects) {
    detail::check_same_length(s.predicted, s.truth);
    for (const auto& l : label_union(s.predicted, s.truth)) all.insert(l);
  }
  PredictionReport report;
  report.activities.assign(all.begin(), all.end());
  const std::size_t a = report.activities.size();
  report.confusion = ConfusionMatrix{
      report.activities,
      std::vector<std::vector<std::size_t>>(a, std::vector<std::size_t>(a, 0)),
      std::vector<std::size_t>(a, 0)};
  std::vector<double> trues;
  std::vector<double> falses;
  for (const auto& s : subjects) {
    SubjectReport sr;
    sr.subject_id = s.subject_id;
    sr.confusion = confusion_matrix(s.predicted, s.truth, report.activities, s.mask);
    for (std::size_t j = 0; j < a; ++j) {
      ActivityStats st;
      st.activity = report.activities[j];
      st.truth_count = sr.confusion.row_sum(j);
      st.predicted_count = sr.confusion.column_sum(j);
      st.correct = sr.confusion.counts[j][j];
      st.true_rate = sr.confusion.true_rate(j);
      st.false_rate = sr.confusion.false_rate(j);
      if (st.true_rate) trues.push_back(*st.true_rate);
      if (st.false_rate) falses.push_back(*st.false_rate);
      sr.activities.push_back(st);
      report.evaluated_samples += st.truth_count;
      for (std::size_t p = 0; p < a; ++p) {
        report.confusion.counts[j][p] += sr.confusion.counts[j][p];
      }
      report.confusion.unpredicted[j] += sr.confusion.unpredicted[j];
    }
    report.subjects.push_back(std::move(sr));
  }
  report.mean_true_rate = detail::mean_of(trues);
  report.mean_false_rate = detail::mean_of(falses);
  return report;
}

// Total map from raw activity labels to grouped labels.
class GroupingMap {
 public:
  GroupingMap() = default;
  explicit GroupingMap(std::map<std::string, std::string> mapping)
      : mapping_(std::move(mapping)) {}

  // The 15 protocol activities collapsed onto standing, lying, chairStand,
  // walking and upper-body.
  static GroupingMap protocol_default() {
    return GroupingMap({
        {"lying", "lying"},
        {"standing", "standing"},
        {"washDish", "upper-body"},
        {"knead", "upper-body"},
        {"dressing", "upper-body"},
        {"foldTowel", "upper-body"},
        {"vacuum", "upper-body"},
        {"shop", "upper-body"},
        {"write", "upper-body"},
        {"dealCards", "upper-body"},
        {"chairStand", "chairStand"},
        {"normalWalk", "walking"},
        {"normalWalkNoSwing", "walking"},
        {"fastWalk", "walking"},
        {"fastWalkNoSwing", "walking"},
    });
  }

  const std::map<std::string, std::string>& mapping() const { return mapping_; }

  const std::string& apply(const std::string& raw) const {
    const auto it = mapping_.find(raw);
    if (it == mapping_.end()) {
      throw Error(ErrorCode::kUnmappedLabel, "no group for label '" + raw + "'");
    }
    return it->second;
  }

  std::set<std::string> groups() const {
    std::set<std::string> out;
    for (const auto& [raw, grouped] : mapping_) out.insert(grouped);
    return out;
  }

  friend bool operator==(const GroupingMap&, const GroupingMap&) = default;

 private:
  std::map<std::string, std::string> mapping_;
};

// Replaces every label by its group; unlabeled samples stay unlabeled.
inline LabelTimeline group_labels(const LabelTimeline& timeline,
                                  const GroupingMap& map) {
  std::vector<MaybeLabel> out;
  out.reserve(timeline.size());
  for (const auto& l : timeline.labels()) {
    if (l) {
      out.emplace_back(ActivityLabel{map.apply(l->name)});
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return LabelTimeline(std::move(out), timeline.fs());
}

// How much of a label's first run goes into a training dictionary: either a
// fixed number of seconds or a number of movement cycles ("replicates").
struct BudgetRule {
  double seconds = 5.0;
  std::optional<int> replicates;

  friend bool operator==(const BudgetRule&, const BudgetRule&) = default;
};

struct TrainingBudget {
  BudgetRule default_rule;
  std::map<std::string, BudgetRule> overrides;

  // 5 s per activity; two consecutive replicates for chairStand.
  static TrainingBudget protocol_default() {
    TrainingBudget b;
    b.overrides["chairStand"] = BudgetRule{5.0, 2};
    return b;
  }

  const BudgetRule& rule_for(const std::string& label) const {
    const auto it = overrides.find(label);
    return it == overrides.end() ? default_rule : it->second;
  }

  friend bool operator==(const TrainingBudget&, const TrainingBudget&) = default;
};

// Dominant cycle length in samples of the acceleration magnitude within
// `seg`, from the highest autocorrelation peak at lags in
// [min_seconds, min(max_seconds, len/2)]. nullopt when no peak exists.
inline std::optional<std::size_t> estimate_cycle_samples(
    const TriaxialSeries& series, const Segment& seg, double min_seconds = 0.5,
    double max_seconds = 10.0) {
  check_segment(series, seg);
  const std::size_t n = seg.length();
  std::vector<double> mag(n);
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mag[k] = magnitude(series[seg.start + k]);
    mean += mag[k];
  }
  mean /= static_cast<double>(n);
  for (double& v : mag) v -= mean;
  const std::size_t lo = std::max<std::size_t>(1, samples_for(min_seconds, series.fs()));
  const std::size_t hi = std::min(n / 2, samples_for(max_seconds, series.fs()));
  if (lo + 1 >= hi) return std::nullopt;
  auto acf = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t k = 0; k + lag < n; ++k) s += mag[k] * mag[k + lag];
    return s / static_cast<double>(n - lag);
  };
  std::vector<double> r(hi + 2);
  for (std::size_t lag = lo - 1; lag <= hi + 1 && lag < n; ++lag) r[lag] = acf(lag);
  std::optional<std::size_t> best;
  for (std::size_t lag = lo; lag <= hi; ++lag) {
    if (r[lag] > 0.0 && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1] &&
        (!best || r[lag] > r[*best])) {
      best = lag;
    }
  }
  return best;
}

// Keeps only the budgeted head of each label's first run; everything else
// becomes unlabeled, so the result can feed a dictionary directly.
inline LabelTimeline select_training(const TriaxialSeries& series,
                                     const LabelTimeline& timeline,
                                     const TrainingBudget& budget) {
  check_paired(series, timeline);
  const std::size_t n = timeline.size();
  std::vector<MaybeLabel> out(n);
  std::set<ActivityLabel> seen;
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k + 1;
    while (end < n && timeline[end] == timeline[k]) ++end;
    if (timeline[k] && seen.insert(*timeline[k]).second) {
      const BudgetRule& rule = budget.rule_for(timeline[k]->name);
      std::size_t take = samples_for(rule.seconds, series.fs());
      if (rule.replicates) {
        if (const auto cycle = estimate_cycle_samples(series, Segment{k, end})) {
          take = static_cast<std::size_t>(*rule.replicates) * *cycle;
        }
      }
      take = std::min(take, end - k);
      for (std::size_t j = k; j < k + take; ++j) out[j] = timeline[j];
    }
    k = end;
  }
  return LabelTimeline(std::move(out), timeline.fs());
}

struct LosoOptions {
  TrainingBudget budget = TrainingBudget::protocol_default();
  // When set, predictions and truth are grouped before scoring.
  std::optional<GroupingMap> grouping;
  SearchOptions search;
  std::size_t dict_stride = 1;
};

struct HSelectionResult {
  std::vector<double> candidates;
  // r-bar* per candidate; nullopt when no fold produced a defined rate.
  std::vector<std::optional<double>> mean_accuracy;
  // Per candidate, mean true rate per activity over held-out subjects.
  std::vector<std::map<std::string, double>> activity_accuracy;
  double chosen = 0.0;
  std::vector<std::string> warnings;
};

// Leave-one-subject-out choice of the movelet length: for each candidate h
// and held-out subject i, predict i from the budgeted dictionary of the other
// subjects, average the defined true rates over all (subject, activity)
// pairs and keep the best h (smallest on ties).
inline HSelectionResult loso_select_h(std::span<const TrainingRecord> training,
                                      std::span<const double> candidates,
                                      const LosoOptions& opts = {}) {
  if (training.size() < 2) {
    throw Error(ErrorCode::kInsufficientSubjects,
                "leave-one-subject-out needs at least two subjects");
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no candidate movelet lengths");
  }
  const double fs = training.front().series.fs();
  for (const auto& r : training) {
    check_paired(r.series, r.timeline);
    if (r.series.fs() != fs) {
      throw Error(ErrorCode::kFsMismatch, "training subjects differ in fs");
    }
  }
  for (double h : candidates) window_length(h, fs);

  std::vector<LabelTimeline> budgeted;
  budgeted.reserve(training.size());
  for (const auto& r : training) {
    budgeted.push_back(select_training(r.series, r.timeline, opts.budget));
  }

  HSelectionResult result;
  result.candidates.assign(candidates.begin(), candidates.end());
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double h = candidates[c];
    std::vector<double> rates;
    std::map<std::string, std::vector<double>> per_activity;
    for (std::size_t i = 0; i < training.size(); ++i) {
      try {
        MoveletDictionary::Builder builder(h, fs);
        for (std::size_t o = 0; o < training.size(); ++o) {
          if (o == i) continue;
          builder.add_recording(training[o].series, budgeted[o],
                                training[o].subject_id, opts.dict_stride);
        }
        const auto dict = std::move(builder).build();
        LabelTimeline pred = predict_labels(training[i].series, dict, opts.search);
        LabelTimeline truth = training[i].timeline;
        if (opts.grouping) {
          pred = group_labels(pred, *opts.grouping);
          truth = group_labels(truth, *opts.grouping);
        }
        std::set<ActivityLabel> acts;
        for (const auto& l : truth.labels())
          if (l) acts.insert(*l);
        for (const auto& act : acts) {
          if (const auto r = true_prediction_rate(pred, truth, act)) {
            rates.push_back(*r);
            per_activity[act.name].push_back(*r);
          }
        }
      } catch (const Error& e) {
        result.warnings.push_back("h=" + std::to_string(h) + " subject " +
                                  training[i].subject_id +
                                  " skipped: " + e.what());
      }
    }
    result.mean_accuracy.push_back(detail::mean_of(rates));
    std::map<std::string, double> act_means;
    for (const auto& [name, v] : per_activity) act_means[name] = *detail::mean_of(v);
    result.activity_accuracy.push_back(std::move(act_means));
    const auto& m = result.mean_accuracy.back();
    if (m && (!best || *m > *result.mean_accuracy[*best] ||
              (*m == *result.mean_accuracy[*best] && h < candidates[*best]))) {
      best = c;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kInsufficientSubjects,
                "no fold produced a defined prediction rate");
  }
  result.chosen = candidates[*best];
  return result;
}

}  // namespace movelet

#endif  // MOVELET_EVAL_HPP_
