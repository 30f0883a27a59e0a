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

// Movelets: fixed-length overlapping windows of triaxial acceleration.
//
// A dictionary pools labeled movelets from one or more training subjects.
// Every query window of a new recording is matched to its nearest
// dictionary entry under the mean squared Euclidean distance, and each
// sample then takes the most frequent matched label among all windows that
// cover it.
//
// Search is exact. Two pruning rules are used and neither can change the
// result of a plain linear scan:
//  * early abandon: the partial sum of a distance only grows, so a
//    candidate is dropped as soon as it exceeds the best full sum;
//  * block-mean bound: for any block of aligned samples,
//    sum ||q_k - d_k||^2 >= n ||mean(q) - mean(d)||^2, which gives a cheap
//    lower bound from precomputed block means.

#ifndef MOVELET_MOVELETS_HPP_
#define MOVELET_MOVELETS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "movelet/core.hpp"
#include "movelet/error.hpp"
#include "movelet/parallel.hpp"

namespace movelet {

// Window length H = round(h * fs). Throws InvalidArgument when H < 1.
inline std::size_t window_length(double h_seconds, double fs) {
  if (!(h_seconds > 0.0) || !std::isfinite(h_seconds)) {
    throw Error(ErrorCode::kInvalidArgument, "movelet length must be positive");
  }
  const std::size_t H = samples_for(h_seconds, fs);
  if (H < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "movelet length rounds to zero samples");
  }
  return H;
}

struct Movelet {
  std::vector<Vec3> window;
  std::string subject_id;
  std::size_t start_index = 0;
  MaybeLabel label;

  std::size_t length() const { return window.size(); }
  friend bool operator==(const Movelet&, const Movelet&) = default;
};

struct MoveletExtraction {
  std::vector<Movelet> movelets;
  // Set when the window is longer than the series; `movelets` is empty.
  bool window_too_long = false;
};

// One movelet per start k (stride `stride`) whose window [k, k + H) carries a
// single label throughout. Windows touching an unlabeled sample or spanning a
// label change are dropped.
inline MoveletExtraction extract_movelets(const TriaxialSeries& series,
                                          const LabelTimeline& timeline,
                                          double h_seconds,
                                          const std::string& subject_id = {},
                                          std::size_t stride = 1) {
  check_paired(series, timeline);
  if (stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "stride must be at least 1");
  }
  const std::size_t H = window_length(h_seconds, series.fs());
  MoveletExtraction out;
  const std::size_t n = series.size();
  if (H > n) {
    out.window_too_long = true;
    return out;
  }
  // run_end[k]: first index after k whose label differs from label[k].
  std::vector<std::size_t> run_end(n);
  run_end[n - 1] = n;
  for (std::size_t k = n - 1; k-- > 0;) {
    run_end[k] = timeline[k] == timeline[k + 1] ? run_end[k + 1] : k + 1;
  }
  const auto samples = series.samples();
  for (std::size_t k = 0; k + H <= n; k += stride) {
    if (!timeline[k].has_value() || run_end[k] < k + H) continue;
    out.movelets.push_back(Movelet{
        std::vector<Vec3>(samples.begin() + static_cast<std::ptrdiff_t>(k),
                          samples.begin() + static_cast<std::ptrdiff_t>(k + H)),
        subject_id, k, timeline[k]});
  }
  return out;
}

// Sum over aligned samples of squared Euclidean distance, in index order.
inline double window_sum_sq(std::span<const Vec3> a, std::span<const Vec3> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d1 = a[k].x1 - b[k].x1;
    const double d2 = a[k].x2 - b[k].x2;
    const double d3 = a[k].x3 - b[k].x3;
    sum += d1 * d1 + d2 * d2 + d3 * d3;
  }
  return sum;
}

// Same summation as window_sum_sq but stops once the partial sum exceeds
// `bound`; the returned value is then some partial sum > bound. When the
// full sum is returned it is bit-identical to window_sum_sq.
inline double window_sum_sq_bounded(std::span<const Vec3> a,
                                    std::span<const Vec3> b, double bound) {
  constexpr std::size_t kCheckEvery = 8;
  const std::size_t n = a.size();
  double sum = 0.0;
  std::size_t k = 0;
  while (k < n) {
    const std::size_t stop = std::min(n, k + kCheckEvery);
    for (; k < stop; ++k) {
      const double d1 = a[k].x1 - b[k].x1;
      const double d2 = a[k].x2 - b[k].x2;
      const double d3 = a[k].x3 - b[k].x3;
      sum += d1 * d1 + d2 * d2 + d3 * d3;
    }
    if (sum > bound) return sum;
  }
  return sum;
}

// Mean over the H aligned samples of the squared Euclidean distance.
inline double window_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "movelets differ in length");
  }
  if (a.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "movelets are empty");
  }
  return window_sum_sq(a, b) / static_cast<double>(a.size());
}

inline double movelet_distance(const Movelet& m1, const Movelet& m2) {
  return window_distance(m1.window, m2.window);
}

struct MatchResult {
  std::string subject_id;
  std::size_t start_index = 0;
  double distance = 0.0;
  ActivityLabel label;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

struct SearchOptions {
  bool early_abandon = true;
  bool lower_bound = true;
};

namespace detail {

inline constexpr std::size_t kBoundBlocks = 4;

// Block boundaries for the block-mean bound; fewer blocks for short windows.
inline std::vector<std::size_t> block_edges(std::size_t H) {
  const std::size_t blocks = std::min(kBoundBlocks, H);
  std::vector<std::size_t> edges(blocks + 1);
  for (std::size_t j = 0; j <= blocks; ++j) edges[j] = j * H / blocks;
  return edges;
}

inline void block_means(std::span<const Vec3> w,
                        std::span<const std::size_t> edges, Vec3* out) {
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    Vec3 s{};
    for (std::size_t k = edges[j]; k < edges[j + 1]; ++k) s += w[k];
    out[j] = s * (1.0 / static_cast<double>(edges[j + 1] - edges[j]));
  }
}

}  // namespace detail

// Labeled movelets of a fixed length pooled over training subjects.
// Entries are kept sorted by (subject_id, start_index) so that the entry
// index is also the tie-break rank. Label ids follow lexicographic order of
// the label names. Immutable once built; build through Builder.
class MoveletDictionary {
 public:
  class Builder;

  MoveletDictionary() = default;

  double h_seconds() const { return h_seconds_; }
  double fs() const { return fs_; }
  std::size_t window_length() const { return H_; }
  std::size_t size() const { return starts_.size(); }
  bool empty() const { return starts_.empty(); }

  // Sorted label set.
  std::span<const ActivityLabel> labels() const { return labels_; }

  std::span<const Vec3> window(std::size_t i) const {
    return {data_.data() + i * H_, H_};
  }
  const std::string& subject_id(std::size_t i) const {
    return subjects_[subject_of_[i]];
  }
  std::size_t start_index(std::size_t i) const { return starts_[i]; }
  std::uint32_t label_id(std::size_t i) const { return label_of_[i]; }
  const ActivityLabel& label(std::size_t i) const {
    return labels_[label_of_[i]];
  }

  Movelet movelet(std::size_t i) const {
    const auto w = window(i);
    return Movelet{std::vector<Vec3>(w.begin(), w.end()), subject_id(i),
                   start_index(i), label(i)};
  }

  // Block means of entry i, one per detail::block_edges(H) block.
  std::span<const Vec3> block_means(std::size_t i) const {
    const std::size_t b = edges_.size() - 1;
    return {means_.data() + i * b, b};
  }
  std::span<const std::size_t> block_edges() const { return edges_; }

  friend bool operator==(const MoveletDictionary& a,
                         const MoveletDictionary& b) {
    return a.h_seconds_ == b.h_seconds_ && a.fs_ == b.fs_ && a.H_ == b.H_ &&
           a.labels_ == b.labels_ && a.subjects_ == b.subjects_ &&
           a.subject_of_ == b.subject_of_ && a.starts_ == b.starts_ &&
           a.label_of_ == b.label_of_ && a.data_ == b.data_;
  }

 private:
  double h_seconds_ = 0.0;
  double fs_ = 0.0;
  std::size_t H_ = 0;
  std::vector<ActivityLabel> labels_;
  std::vector<std::string> subjects_;
  std::vector<std::uint32_t> subject_of_;
  std::vector<std::size_t> starts_;
  std::vector<std::uint32_t> label_of_;
  std::vector<Vec3> data_;
  std::vector<std::size_t> edges_;
  std::vector<Vec3> means_;
};

class MoveletDictionary::Builder {
 public:
  Builder(double h_seconds, double fs)
      : h_seconds_(h_seconds), fs_(fs), H_(movelet::window_length(h_seconds, fs)) {}

  std::size_t window_length() const { return H_; }

  // Adds one labeled movelet. Throws on length or label problems.
  Builder& add(Movelet m) {
    if (m.window.size() != H_) {
      throw Error(ErrorCode::kLengthMismatch,
                  "movelet length " + std::to_string(m.window.size()) +
                      " differs from dictionary length " + std::to_string(H_));
    }
    if (!m.label) {
      throw Error(ErrorCode::kInvalidArgument,
                  "dictionary movelets must be labeled");
    }
    for (const Vec3& v : m.window) {
      if (!is_finite(v)) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite movelet sample");
      }
    }
    pending_.push_back(std::move(m));
    return *this;
  }

  // Extracts and adds every pure-label window of a labeled recording.
  // Unlabeled samples never enter the dictionary. Returns the number added.
  std::size_t add_recording(const TriaxialSeries& series,
                            const LabelTimeline& timeline,
                            const std::string& subject_id,
                            std::size_t stride = 1) {
    if (series.fs() != fs_) {
      throw Error(ErrorCode::kFsMismatch,
                  "recording sampling frequency differs from dictionary");
    }
    auto ex = extract_movelets(series, timeline, h_seconds_, subject_id, stride);
    const std::size_t added = ex.movelets.size();
    for (auto& m : ex.movelets) add(std::move(m));
    return added;
  }

  MoveletDictionary build() && {
    std::sort(pending_.begin(), pending_.end(),
              [](const Movelet& a, const Movelet& b) {
                return std::tie(a.subject_id, a.start_index) <
                       std::tie(b.subject_id, b.start_index);
              });
    for (std::size_t i = 1; i < pending_.size(); ++i) {
      if (pending_[i].subject_id == pending_[i - 1].subject_id &&
          pending_[i].start_index == pending_[i - 1].start_index) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate dictionary entry for subject '" +
                        pending_[i].subject_id + "' at start " +
                        std::to_string(pending_[i].start_index));
      }
    }
    MoveletDictionary d;
    d.h_seconds_ = h_seconds_;
    d.fs_ = fs_;
    d.H_ = H_;
    std::map<ActivityLabel, std::uint32_t> label_ids;
    for (const auto& m : pending_) label_ids.emplace(*m.label, 0);
    for (auto& [label, id] : label_ids) {
      id = static_cast<std::uint32_t>(d.labels_.size());
      d.labels_.push_back(label);
    }
    d.edges_ = detail::block_edges(H_);
    const std::size_t blocks = d.edges_.size() - 1;
    const std::size_t n = pending_.size();
    d.subject_of_.reserve(n);
    d.starts_.reserve(n);
    d.label_of_.reserve(n);
    d.data_.reserve(n * H_);
    d.means_.resize(n * blocks);
    for (std::size_t i = 0; i < n; ++i) {
      const Movelet& m = pending_[i];
      if (d.subjects_.empty() || d.subjects_.back() != m.subject_id) {
        d.subjects_.push_back(m.subject_id);
      }
      d.subject_of_.push_back(static_cast<std::uint32_t>(d.subjects_.size() - 1));
      d.starts_.push_back(m.start_index);
      d.label_of_.push_back(label_ids.at(*m.label));
      d.data_.insert(d.data_.end(), m.window.begin(), m.window.end());
      detail::block_means(m.window, d.edges_, d.means_.data() + i * blocks);
    }
    pending_.clear();
    return d;
  }

 private:
  double h_seconds_;
  double fs_;
  std::size_t H_;
  std::vector<Movelet> pending_;
};

// Builds a dictionary from (series, timeline, subject_id) training records.
struct TrainingRecord {
  TriaxialSeries series;
  LabelTimeline timeline;
  std::string subject_id;
};

inline MoveletDictionary build_dictionary(std::span<const TrainingRecord> records,
                                          double h_seconds, double fs,
                                          std::size_t stride = 1) {
  MoveletDictionary::Builder builder(h_seconds, fs);
  for (const auto& r : records) {
    builder.add_recording(r.series, r.timeline, r.subject_id, stride);
  }
  return std::move(builder).build();
}

namespace detail {

struct QueryContext {
  std::span<const Vec3> window;
  std::vector<Vec3> means;
};

inline QueryContext make_query(std::span<const Vec3> window,
                               const MoveletDictionary& dict) {
  QueryContext q{window, std::vector<Vec3>(dict.block_edges().size() - 1)};
  block_means(window, dict.block_edges(), q.means.data());
  return q;
}

// Lower bound on the full distance sum from block means.
inline double block_bound(const QueryContext& q, const MoveletDictionary& dict,
                          std::size_t i) {
  const auto edges = dict.block_edges();
  const auto means = dict.block_means(i);
  double lb = 0.0;
  for (std::size_t j = 0; j < means.size(); ++j) {
    lb += static_cast<double>(edges[j + 1] - edges[j]) *
          squared_norm(q.means[j] - means[j]);
  }
  return lb;
}

// Argmin entry index; ties go to the lowest index. `hint` is evaluated first
// to seed the pruning bound and does not affect the result.
inline std::pair<std::size_t, double> nearest_entry(
    const QueryContext& q, const MoveletDictionary& dict,
    const SearchOptions& opts, std::optional<std::size_t> hint) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::size_t best = dict.size();
  double best_sum = kInf;
  if (hint && *hint < dict.size()) {
    best = *hint;
    best_sum = window_sum_sq(q.window, dict.window(best));
  }
  for (std::size_t i = 0; i < dict.size(); ++i) {
    if (i == best) continue;
    if (opts.lower_bound && best_sum < kInf) {
      // Rounding margin: the bound is only trusted when clearly above.
      if (block_bound(q, dict, i) > best_sum * (1.0 + 1e-9) + 1e-15) continue;
    }
    const double sum = opts.early_abandon
                           ? window_sum_sq_bounded(q.window, dict.window(i), best_sum)
                           : window_sum_sq(q.window, dict.window(i));
    if (sum < best_sum || (sum == best_sum && i < best)) {
      best = i;
      best_sum = sum;
    }
  }
  return {best, best_sum};
}

}  // namespace detail

inline MatchResult make_match(const MoveletDictionary& dict, std::size_t i,
                              double sum) {
  return MatchResult{dict.subject_id(i), dict.start_index(i),
                     sum / static_cast<double>(dict.window_length()),
                     dict.label(i)};
}

// Dictionary entry closest to `query`; ties broken by lowest
// (subject_id, start_index).
inline MatchResult nearest_match(std::span<const Vec3> query,
                                 const MoveletDictionary& dict,
                                 const SearchOptions& opts = {}) {
  if (dict.empty()) {
    throw Error(ErrorCode::kEmptyDictionary, "dictionary has no entries");
  }
  if (query.size() != dict.window_length()) {
    throw Error(ErrorCode::kLengthMismatch,
                "query length differs from dictionary movelet length");
  }
  const auto q = detail::make_query(query, dict);
  const auto [i, sum] = detail::nearest_entry(q, dict, opts, std::nullopt);
  return make_match(dict, i, sum);
}

inline MatchResult nearest_match(const Movelet& query,
                                 const MoveletDictionary& dict,
                                 const SearchOptions& opts = {}) {
  return nearest_match(std::span<const Vec3>(query.window), dict, opts);
}

namespace detail {

inline void check_predictable(const TriaxialSeries& series,
                              const MoveletDictionary& dict) {
  if (dict.empty()) {
    throw Error(ErrorCode::kEmptyDictionary, "dictionary has no entries");
  }
  if (series.fs() != dict.fs()) {
    throw Error(ErrorCode::kFsMismatch,
                "recording sampling frequency differs from dictionary");
  }
  if (series.size() < dict.window_length()) {
    throw Error(ErrorCode::kSeriesTooShort,
                "recording is shorter than one movelet");
  }
}

// Nearest entry index for every query start 0..N-H.
inline std::vector<std::size_t> match_indices(const TriaxialSeries& series,
                                              const MoveletDictionary& dict,
                                              const SearchOptions& opts,
                                              std::vector<double>* sums) {
  check_predictable(series, dict);
  const std::size_t H = dict.window_length();
  const std::size_t starts = series.size() - H + 1;
  std::vector<std::size_t> best(starts);
  if (sums) sums->assign(starts, 0.0);
  const auto samples = series.samples();
  parallel_for_chunks(starts, [&](std::size_t begin, std::size_t end) {
    std::optional<std::size_t> hint;
    for (std::size_t k = begin; k < end; ++k) {
      const auto q = make_query(samples.subspan(k, H), dict);
      const auto [i, sum] = nearest_entry(q, dict, opts, hint);
      best[k] = i;
      if (sums) (*sums)[k] = sum;
      // The successor of the previous match is usually close to the next
      // query window.
      hint = i + 1 < dict.size() ? std::optional<std::size_t>(i + 1)
                                 : std::optional<std::size_t>(i);
    }
  });
  return best;
}

}  // namespace detail

// Nearest dictionary match for every query start k = 0..N-H.
inline std::vector<MatchResult> match_all(const TriaxialSeries& series,
                                          const MoveletDictionary& dict,
                                          const SearchOptions& opts = {}) {
  std::vector<double> sums;
  const auto idx = detail::match_indices(series, dict, opts, &sums);
  std::vector<MatchResult> out;
  out.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.push_back(make_match(dict, idx[k], sums[k]));
  }
  return out;
}

// Sample j takes the label with the most votes among the windows that cover
// it, starts max(0, j-H+1) .. min(j, N-H). Votes are label ids into a sorted
// label set of size `label_count`, so ties go to the smallest label name.
inline std::vector<std::uint32_t> vote_labels(
    std::span<const std::uint32_t> window_labels, std::size_t n,
    std::size_t H, std::size_t label_count) {
  if (window_labels.size() + H != n + 1) {
    throw Error(ErrorCode::kLengthMismatch,
                "window label count must equal N - H + 1");
  }
  std::vector<std::size_t> counts(label_count, 0);
  std::vector<std::uint32_t> out(n);
  const std::size_t last_start = n - H;
  for (std::size_t j = 0; j < n; ++j) {
    if (j <= last_start) ++counts[window_labels[j]];
    if (j >= H) --counts[window_labels[j - H]];
    std::uint32_t best = 0;
    for (std::uint32_t a = 1; a < label_count; ++a) {
      if (counts[a] > counts[best]) best = a;
    }
    out[j] = best;
  }
  return out;
}

// Samples with j < H - 1 or j > N - H are covered by fewer than H windows.
inline bool fully_covered(std::size_t j, std::size_t n, std::size_t H) {
  return j + 1 >= H && j + H <= n;
}

// Per-sample predicted labels for `series` using nearest-match votes.
inline LabelTimeline predict_labels(const TriaxialSeries& series,
                                    const MoveletDictionary& dict,
                                    const SearchOptions& opts = {}) {
  const auto idx = detail::match_indices(series, dict, opts, nullptr);
  std::vector<std::uint32_t> window_labels(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    window_labels[k] = dict.label_id(idx[k]);
  }
  const auto votes = vote_labels(window_labels, series.size(),
                                 dict.window_length(), dict.labels().size());
  std::vector<MaybeLabel> labels;
  labels.reserve(votes.size());
  for (const auto v : votes) labels.emplace_back(dict.labels()[v]);
  return LabelTimeline(std::move(labels), series.fs());
}

// Subject-level prediction: the dictionary comes from the labeled part of the
// same recording (`training` marks it; other samples are unlabeled).
inline LabelTimeline predict_within_subject(const TriaxialSeries& series,
                                            const LabelTimeline& training,
                                            double h_seconds,
                                            const std::string& subject_id,
                                            const SearchOptions& opts = {}) {
  MoveletDictionary::Builder builder(h_seconds, series.fs());
  builder.add_recording(series, training, subject_id);
  return predict_labels(series, std::move(builder).build(), opts);
}

}  // namespace movelet

#endif  // MOVELET_MOVELETS_HPP_
