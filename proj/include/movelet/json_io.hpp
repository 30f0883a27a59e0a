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

// JSON forms of the reports and the pipeline configuration.
//
// Undefined rates are written as null. Doubles are written by nlohmann::json
// with round-trip precision, so from_json(to_json(x)) == x.

#ifndef MOVELET_JSON_IO_HPP_
#define MOVELET_JSON_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "movelet/error.hpp"
#include "movelet/eval.hpp"
#include "movelet/io.hpp"
#include "movelet/normalize.hpp"

namespace movelet::io {

using nlohmann::json;

namespace detail {

inline json opt(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

inline std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline json labels_json(const std::vector<ActivityLabel>& labels) {
  json out = json::array();
  for (const auto& l : labels) out.push_back(l.name);
  return out;
}

inline std::vector<ActivityLabel> labels_from(const json& j) {
  std::vector<ActivityLabel> out;
  for (const auto& v : j) out.push_back(ActivityLabel{v.get<std::string>()});
  return out;
}

inline json confusion_json(const ConfusionMatrix& cm) {
  return json{{"labels", labels_json(cm.labels)},
              {"counts", cm.counts},
              {"unpredicted", cm.unpredicted}};
}

inline ConfusionMatrix confusion_from(const json& j) {
  return ConfusionMatrix{
      labels_from(j.at("labels")),
      j.at("counts").get<std::vector<std::vector<std::size_t>>>(),
      j.at("unpredicted").get<std::vector<std::size_t>>()};
}

}  // namespace detail

inline json to_json(const PredictionReport& r) {
  json subjects = json::array();
  for (const auto& s : r.subjects) {
    json acts = json::array();
    for (const auto& a : s.activities) {
      acts.push_back(json{{"activity", a.activity.name},
                          {"truth_count", a.truth_count},
                          {"predicted_count", a.predicted_count},
                          {"correct", a.correct},
                          {"true_rate", detail::opt(a.true_rate)},
                          {"false_rate", detail::opt(a.false_rate)}});
    }
    subjects.push_back(json{{"subject_id", s.subject_id},
                            {"activities", std::move(acts)},
                            {"confusion", detail::confusion_json(s.confusion)}});
  }
  return json{{"activities", detail::labels_json(r.activities)},
              {"mean_true_rate", detail::opt(r.mean_true_rate)},
              {"mean_false_rate", detail::opt(r.mean_false_rate)},
              {"evaluated_samples", r.evaluated_samples},
              {"confusion", detail::confusion_json(r.confusion)},
              {"subjects", std::move(subjects)}};
}

inline PredictionReport prediction_report_from_json(const json& j) {
  PredictionReport r;
  r.activities = detail::labels_from(j.at("activities"));
  r.mean_true_rate = detail::opt_from(j.at("mean_true_rate"));
  r.mean_false_rate = detail::opt_from(j.at("mean_false_rate"));
  r.evaluated_samples = j.at("evaluated_samples").get<std::size_t>();
  r.confusion = detail::confusion_from(j.at("confusion"));
  for (const auto& sj : j.at("subjects")) {
    SubjectReport s;
    s.subject_id = sj.at("subject_id").get<std::string>();
    s.confusion = detail::confusion_from(sj.at("confusion"));
    for (const auto& aj : sj.at("activities")) {
      ActivityStats a;
      a.activity = ActivityLabel{aj.at("activity").get<std::string>()};
      a.truth_count = aj.at("truth_count").get<std::size_t>();
      a.predicted_count = aj.at("predicted_count").get<std::size_t>();
      a.correct = aj.at("correct").get<std::size_t>();
      a.true_rate = detail::opt_from(aj.at("true_rate"));
      a.false_rate = detail::opt_from(aj.at("false_rate"));
      s.activities.push_back(std::move(a));
    }
    r.subjects.push_back(std::move(s));
  }
  return r;
}

inline json to_json(const HSelectionResult& r) {
  json curve = json::array();
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    curve.push_back(json{{"h_seconds", r.candidates[i]},
                         {"mean_true_rate", detail::opt(r.mean_accuracy[i])},
                         {"activity_true_rate", r.activity_accuracy[i]}});
  }
  return json{{"chosen_h_seconds", r.chosen},
              {"curve", std::move(curve)},
              {"warnings", r.warnings}};
}

inline HSelectionResult h_selection_from_json(const json& j) {
  HSelectionResult r;
  r.chosen = j.at("chosen_h_seconds").get<double>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const auto& c : j.at("curve")) {
    r.candidates.push_back(c.at("h_seconds").get<double>());
    r.mean_accuracy.push_back(detail::opt_from(c.at("mean_true_rate")));
    r.activity_accuracy.push_back(
        c.at("activity_true_rate").get<std::map<std::string, double>>());
  }
  return r;
}

inline json to_json(const BiasTestResult& r) {
  return json{{"statistic_T", r.statistic_T},
              {"n", r.n},
              {"mean_norm_sq", r.mean_norm_sq},
              {"sigma_op_norm", r.sigma_op_norm},
              {"alpha", r.alpha},
              {"critical_value", r.critical_value},
              {"rejected", r.rejected},
              {"singular_covariance", r.singular_covariance}};
}

inline BiasTestResult bias_test_from_json(const json& j) {
  BiasTestResult r;
  r.statistic_T = j.at("statistic_T").get<double>();
  r.n = j.at("n").get<std::size_t>();
  r.mean_norm_sq = j.at("mean_norm_sq").get<double>();
  r.sigma_op_norm = j.at("sigma_op_norm").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.critical_value = j.at("critical_value").get<double>();
  r.rejected = j.at("rejected").get<bool>();
  r.singular_covariance = j.at("singular_covariance").get<bool>();
  return r;
}

// Rows are true labels, columns predicted labels; the last column counts
// truth samples left without a prediction.
inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "truth";
  for (const auto& l : cm.labels) out << ',' << l.name;
  out << ",unpredicted\n";
  for (std::size_t t = 0; t < cm.labels.size(); ++t) {
    out << cm.labels[t].name;
    for (std::size_t p = 0; p < cm.labels.size(); ++p) out << ',' << cm.counts[t][p];
    out << ',' << cm.unpredicted[t] << '\n';
  }
}

struct PipelineConfig {
  std::vector<double> h_candidates{0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  // Movelet length used by build-dict when no h is given on the command line.
  double h_seconds = 0.75;
  TrainingBudget budget = TrainingBudget::protocol_default();
  // nullopt disables grouping.
  std::optional<GroupingMap> grouping = GroupingMap::protocol_default();
  double alpha = 0.05;
  std::size_t dict_stride = 1;
  // Length of the standing and lying heads used for calibration.
  double calibration_seconds = 3.0;
  double parallel_epsilon = kParallelEpsilon;
  double rotation_tolerance = kRotationTolerance;
  // Explicit subject split; both empty means first half train, rest test.
  std::vector<std::string> train_subjects;
  std::vector<std::string> test_subjects;
};

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& known,
                           const std::string& where) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, where + " must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw Error(ErrorCode::kInvalidConfig, "unknown key '" + key + "' in " + where);
    }
  }
}

inline BudgetRule rule_from(const json& j, const std::string& where) {
  reject_unknown(j, {"seconds", "replicates"}, where);
  BudgetRule r;
  if (j.contains("seconds")) r.seconds = j.at("seconds").get<double>();
  if (j.contains("replicates") && !j.at("replicates").is_null()) {
    r.replicates = j.at("replicates").get<int>();
  }
  if (!(r.seconds > 0.0) || (r.replicates && *r.replicates < 1)) {
    throw Error(ErrorCode::kInvalidConfig, where + " must be positive");
  }
  return r;
}

inline json rule_json(const BudgetRule& r) {
  json j{{"seconds", r.seconds}};
  j["replicates"] = r.replicates ? json(*r.replicates) : json(nullptr);
  return j;
}

}  // namespace detail

inline json to_json(const PipelineConfig& c) {
  json overrides = json::object();
  for (const auto& [label, rule] : c.budget.overrides) {
    overrides[label] = detail::rule_json(rule);
  }
  json j{{"h_candidates", c.h_candidates},
         {"h_seconds", c.h_seconds},
         {"budget", json{{"default", detail::rule_json(c.budget.default_rule)},
                         {"overrides", std::move(overrides)}}},
         {"alpha", c.alpha},
         {"dict_stride", c.dict_stride},
         {"calibration_seconds", c.calibration_seconds},
         {"parallel_epsilon", c.parallel_epsilon},
         {"rotation_tolerance", c.rotation_tolerance},
         {"train_subjects", c.train_subjects},
         {"test_subjects", c.test_subjects}};
  j["grouping"] = c.grouping ? json(c.grouping->mapping()) : json(nullptr);
  return j;
}

// Keys left out keep their defaults; unknown keys are InvalidConfig.
inline PipelineConfig pipeline_config_from_json(const json& j) {
  detail::reject_unknown(j,
                         {"h_candidates", "h_seconds", "budget", "grouping", "alpha",
                          "dict_stride", "calibration_seconds", "parallel_epsilon",
                          "rotation_tolerance", "train_subjects", "test_subjects"},
                         "config");
  PipelineConfig c;
  try {
    if (j.contains("h_candidates")) {
      c.h_candidates = j.at("h_candidates").get<std::vector<double>>();
    }
    if (j.contains("h_seconds")) c.h_seconds = j.at("h_seconds").get<double>();
    if (j.contains("budget")) {
      const json& b = j.at("budget");
      detail::reject_unknown(b, {"default", "overrides"}, "budget");
      TrainingBudget budget;
      if (b.contains("default")) {
        budget.default_rule = detail::rule_from(b.at("default"), "budget.default");
      }
      if (b.contains("overrides")) {
        const json& o = b.at("overrides");
        if (!o.is_object()) {
          throw Error(ErrorCode::kInvalidConfig, "budget.overrides must be an object");
        }
        for (const auto& [label, rule] : o.items()) {
          budget.overrides[label] = detail::rule_from(rule, "budget.overrides." + label);
        }
      }
      c.budget = budget;
    }
    if (j.contains("grouping")) {
      const json& g = j.at("grouping");
      if (g.is_null()) {
        c.grouping.reset();
      } else if (g.is_string() && g.get<std::string>() == "protocol") {
        c.grouping = GroupingMap::protocol_default();
      } else if (g.is_object()) {
        c.grouping = GroupingMap(g.get<std::map<std::string, std::string>>());
      } else {
        throw Error(ErrorCode::kInvalidConfig,
                    "grouping must be null, \"protocol\" or an object");
      }
    }
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("dict_stride")) c.dict_stride = j.at("dict_stride").get<std::size_t>();
    if (j.contains("calibration_seconds")) {
      c.calibration_seconds = j.at("calibration_seconds").get<double>();
    }
    if (j.contains("parallel_epsilon")) {
      c.parallel_epsilon = j.at("parallel_epsilon").get<double>();
    }
    if (j.contains("rotation_tolerance")) {
      c.rotation_tolerance = j.at("rotation_tolerance").get<double>();
    }
    if (j.contains("train_subjects")) {
      c.train_subjects = j.at("train_subjects").get<std::vector<std::string>>();
    }
    if (j.contains("test_subjects")) {
      c.test_subjects = j.at("test_subjects").get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  if (c.h_candidates.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "h_candidates is empty");
  }
  for (double h : c.h_candidates) {
    if (!(h > 0.0)) throw Error(ErrorCode::kInvalidConfig, "h candidates must be positive");
  }
  if (!(c.h_seconds > 0.0) || !(c.alpha > 0.0 && c.alpha < 1.0) || c.dict_stride == 0 ||
      !(c.calibration_seconds > 0.0) || !(c.parallel_epsilon >= 0.0) ||
      !(c.rotation_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "config value out of range");
  }
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  return pipeline_config_from_json(j);
}

inline void save_json(const std::filesystem::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

inline json load_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

}  // namespace movelet::io

#endif  // MOVELET_JSON_IO_HPP_
