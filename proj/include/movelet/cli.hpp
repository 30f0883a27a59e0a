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

// Command-line surface. run_command() parses one subcommand and calls the
// matching library operation; the tool's main() is a thin wrapper so tests
// can drive the same code in-process.
//
// Exit status: 0 success, 1 data error, 2 usage error. Failures print one
// JSON object to the error stream: {"error": <code>, "message": ..., "line": ...}.

#ifndef MOVELET_CLI_HPP_
#define MOVELET_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "movelet/core.hpp"
#include "movelet/error.hpp"
#include "movelet/eval.hpp"
#include "movelet/io.hpp"
#include "movelet/json_io.hpp"
#include "movelet/movelets.hpp"
#include "movelet/normalize.hpp"
#include "movelet/synth.hpp"

namespace movelet::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

// Heads of the first standing and lying runs, `seconds` long at most.
inline std::pair<Segment, Segment> calibration_segments(const LabelTimeline& timeline,
                                                        double seconds) {
  const auto standing = first_run(timeline, "standing", seconds);
  const auto lying = first_run(timeline, "lying", seconds);
  if (!standing || !lying) {
    throw Error(ErrorCode::kInvalidArgument,
                "recording needs labeled standing and lying segments for calibration");
  }
  return {*standing, *lying};
}

inline NormalizationTransform transform_from_labels(const io::Recording& rec,
                                                    const io::PipelineConfig& cfg) {
  const auto [standing, lying] = calibration_segments(rec.timeline, cfg.calibration_seconds);
  return estimate_transform(rec.series, standing, lying, cfg.parallel_epsilon);
}

inline io::Recording normalized(io::Recording rec, const io::PipelineConfig& cfg) {
  rec.series = apply_transform(rec.series, transform_from_labels(rec, cfg));
  return rec;
}

inline std::string subject_of(const io::Recording& rec, const fs::path& path) {
  return rec.metadata.subject_id.empty() ? path.stem().string() : rec.metadata.subject_id;
}

namespace detail {

inline Segment parse_segment(const std::string& text) {
  const auto colon = text.find(':');
  const auto a = io::parse_index(std::string_view(text).substr(0, colon));
  const auto b = colon == std::string::npos
                     ? std::nullopt
                     : io::parse_index(std::string_view(text).substr(colon + 1));
  if (!a || !b) {
    throw CLI::ValidationError("segment", "expected START:END sample indices, got '" + text + "'");
  }
  return Segment{*a, *b};
}

inline void write_error(std::ostream& err, const std::string& code, const std::string& message,
                        std::optional<std::size_t> line = std::nullopt) {
  nlohmann::json j{{"error", code}, {"message", message}};
  j["line"] = line ? nlohmann::json(*line) : nlohmann::json(nullptr);
  err << j.dump() << '\n';
}

struct Common {
  std::string config_path;
  io::PipelineConfig config;

  void load() {
    if (!config_path.empty()) config = io::load_config(config_path);
  }
};

inline std::vector<TrainingRecord> load_training(const std::vector<std::string>& paths,
                                                 const io::PipelineConfig& cfg,
                                                 bool normalize) {
  std::vector<TrainingRecord> out;
  for (const auto& p : paths) {
    auto rec = io::load_recording(p);
    if (normalize) rec = normalized(std::move(rec), cfg);
    const std::string id = subject_of(rec, p);
    out.push_back(TrainingRecord{std::move(rec.series), std::move(rec.timeline), id});
  }
  return out;
}

}  // namespace detail

inline int run_command(const std::vector<std::string>& args, std::ostream& out,
                       std::ostream& err) {
  CLI::App app{"Movelet activity prediction from triaxial accelerometry", "movelet"};
  app.require_subcommand(1);
  detail::Common common;
  app.add_option("--config", common.config_path, "Pipeline configuration JSON")
      ->check(CLI::ExistingFile);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled cohort");
  std::size_t subjects = 10;
  std::uint64_t seed = 0;
  std::string out_dir;
  SynthOptions synth_opts;
  bool no_rotation = false;
  synth->add_option("--subjects", subjects, "Number of subjects")->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--noise-sigma", synth_opts.noise_sigma, "Noise standard deviation (g)");
  synth->add_option("--max-bias", synth_opts.max_bias, "Largest device bias component (g)");
  synth->add_option("--fs", synth_opts.fs, "Sampling frequency (Hz)");
  synth->add_flag("--no-rotation", no_rotation, "Keep the device frame aligned");

  // normalize
  auto* norm = app.add_subcommand("normalize", "Rotate and shift a recording into the body frame");
  std::string in_path;
  std::string out_path;
  std::string transform_out;
  std::string transform_in;
  std::string standing_arg;
  std::string lying_arg;
  norm->add_option("--in", in_path, "Raw recording")->required()->check(CLI::ExistingFile);
  norm->add_option("--out", out_path, "Normalized recording")->required();
  norm->add_option("--transform-out", transform_out, "Write the estimated transform");
  norm->add_option("--transform", transform_in, "Apply this transform instead of estimating")
      ->check(CLI::ExistingFile);
  norm->add_option("--standing", standing_arg, "Standing segment START:END");
  norm->add_option("--lying", lying_arg, "Lying segment START:END");

  // bias-test
  auto* bias = app.add_subcommand("bias-test", "Test whether the standing magnitude equals 1 g");
  std::optional<double> alpha;
  bias->add_option("--in", in_path, "Recording")->required()->check(CLI::ExistingFile);
  bias->add_option("--standing", standing_arg, "Standing segment START:END");
  bias->add_option("--alpha", alpha, "Significance level");
  bias->add_option("--out", out_path, "Result JSON (default: standard output)");

  // build-dict
  auto* build = app.add_subcommand("build-dict", "Build a movelet dictionary");
  build->set_help_flag("--help", "Print this help message and exit");
  std::vector<std::string> inputs;
  std::optional<double> h;
  bool normalize_flag = false;
  bool no_budget = false;
  build->add_option("--in", inputs, "Training recordings")->required()->check(CLI::ExistingFile);
  build->add_option("--out", out_path, "Dictionary file")->required();
  build->add_option("--h", h, "Movelet length in seconds");
  build->add_flag("--normalize", normalize_flag, "Normalize each recording from its labels");
  build->add_flag("--no-budget", no_budget, "Use every labeled window, not the training budget");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict per-sample activity labels");
  std::string dict_path;
  predict->add_option("--dict", dict_path, "Dictionary file")->required()->check(CLI::ExistingFile);
  predict->add_option("--in", in_path, "Recording")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", out_path, "Predicted label file")->required();
  predict->add_flag("--normalize", normalize_flag, "Normalize the recording from its labels");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against labeled truth");
  std::vector<std::string> pred_paths;
  std::vector<std::string> truth_paths;
  std::string confusion_path;
  bool group = false;
  std::size_t exclude_radius = 0;
  evaluate->add_option("--pred", pred_paths, "Predicted label files")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--truth", truth_paths, "Labeled recordings, same order")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", out_path, "Report JSON")->required();
  evaluate->add_option("--confusion", confusion_path, "Pooled confusion matrix CSV");
  evaluate->add_flag("--group", group, "Group labels before scoring");
  evaluate->add_option("--exclude-radius", exclude_radius,
                       "Ignore this many samples on each side of every transition");

  // select-h
  auto* select = app.add_subcommand("select-h", "Choose the movelet length by leave-one-subject-out");
  std::vector<double> candidates;
  bool no_group = false;
  select->add_option("--in", inputs, "Training recordings")->required()->check(CLI::ExistingFile);
  select->add_option("--out", out_path, "Result JSON")->required();
  select->add_option("--candidates", candidates, "Candidate lengths in seconds");
  select->add_flag("--normalize", normalize_flag, "Normalize each recording from its labels");
  select->add_flag("--no-group", no_group, "Score raw labels instead of groups");

  // plot-data
  auto* plot = app.add_subcommand("plot-data", "Write long-format time/value CSV");
  std::string pred_path;
  plot->add_option("--in", in_path, "Recording")->required()->check(CLI::ExistingFile);
  plot->add_option("--pred", pred_path, "Predicted label file")->check(CLI::ExistingFile);
  plot->add_option("--out", out_path, "CSV output")->required();

  std::vector<const char*> argv{"movelet"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    detail::write_error(err, "Usage", e.what());
    return kExitUsage;
  }

  try {
    common.load();
    const auto& cfg = common.config;

    if (*synth) {
      synth_opts.random_rotation = !no_rotation;
      const auto cohort = generate_cohort(subjects, seed, synth_opts);
      fs::create_directories(out_dir);
      for (const auto& s : cohort) {
        io::RecordingMetadata meta;
        meta.subject_id = s.subject_id;
        meta.declared_labels = io::label_names(s.timeline);
        io::save_recording(fs::path(out_dir) / (s.subject_id + ".csv"), s.raw, s.timeline, meta);
        io::save_transform(fs::path(out_dir) / (s.subject_id + ".transform"), s.truth_transform);
      }
    } else if (*norm) {
      auto rec = io::load_recording(in_path);
      NormalizationTransform t;
      if (!transform_in.empty()) {
        t = io::load_transform(transform_in);
      } else if (!standing_arg.empty() || !lying_arg.empty()) {
        if (standing_arg.empty() || lying_arg.empty()) {
          throw CLI::ValidationError("--standing/--lying", "give both segments or neither");
        }
        t = estimate_transform(rec.series, detail::parse_segment(standing_arg),
                               detail::parse_segment(lying_arg), cfg.parallel_epsilon);
      } else {
        t = transform_from_labels(rec, cfg);
      }
      io::save_recording(out_path, apply_transform(rec.series, t), rec.timeline, rec.metadata);
      if (!transform_out.empty()) io::save_transform(transform_out, t);
    } else if (*bias) {
      const auto rec = io::load_recording(in_path);
      const Segment seg = standing_arg.empty()
                              ? calibration_segments(rec.timeline, cfg.calibration_seconds).first
                              : detail::parse_segment(standing_arg);
      const auto result = bias_test(rec.series, seg, alpha.value_or(cfg.alpha));
      const std::string text = io::to_json(result).dump(2) + "\n";
      if (out_path.empty()) {
        out << text;
      } else {
        io::open_output(out_path) << text;
      }
    } else if (*build) {
      auto records = detail::load_training(inputs, cfg, normalize_flag);
      if (!no_budget) {
        for (auto& r : records) r.timeline = select_training(r.series, r.timeline, cfg.budget);
      }
      const auto dict = build_dictionary(records, h.value_or(cfg.h_seconds),
                                         records.front().series.fs(), cfg.dict_stride);
      io::save_dictionary(out_path, dict);
    } else if (*predict) {
      const auto dict = io::load_dictionary(dict_path);
      auto rec = io::load_recording(in_path);
      if (normalize_flag) rec = normalized(std::move(rec), cfg);
      const auto pred = predict_labels(rec.series, dict);
      auto file = io::open_output(out_path);
      io::write_labels(file, pred, subject_of(rec, in_path));
    } else if (*evaluate) {
      if (pred_paths.size() != truth_paths.size()) {
        throw CLI::ValidationError("--pred/--truth", "need one truth file per prediction file");
      }
      if (group && !cfg.grouping) {
        throw Error(ErrorCode::kInvalidConfig, "--group given but the config disables grouping");
      }
      std::vector<SubjectPrediction> subjects;
      for (std::size_t i = 0; i < pred_paths.size(); ++i) {
        auto in = io::open_input(pred_paths[i]);
        auto pred = io::read_labels(in);
        const auto truth = io::load_recording(truth_paths[i]);
        SubjectPrediction sp{subject_of(truth, truth_paths[i]), std::move(pred.timeline),
                             truth.timeline, {}};
        if (group) {
          sp.predicted = group_labels(sp.predicted, *cfg.grouping);
          sp.truth = group_labels(sp.truth, *cfg.grouping);
        }
        if (exclude_radius > 0) sp.mask = transition_mask(sp.truth, exclude_radius);
        subjects.push_back(std::move(sp));
      }
      const auto report = build_report(subjects);
      io::save_json(out_path, io::to_json(report));
      if (!confusion_path.empty()) {
        auto file = io::open_output(confusion_path);
        io::write_confusion_csv(file, report.confusion);
      }
    } else if (*select) {
      auto records = detail::load_training(inputs, cfg, normalize_flag);
      if (!cfg.train_subjects.empty()) {
        std::erase_if(records, [&](const TrainingRecord& r) {
          return std::find(cfg.train_subjects.begin(), cfg.train_subjects.end(),
                           r.subject_id) == cfg.train_subjects.end();
        });
      }
      LosoOptions opts;
      opts.budget = cfg.budget;
      opts.grouping = no_group ? std::nullopt : cfg.grouping;
      opts.dict_stride = cfg.dict_stride;
      const auto& grid = candidates.empty() ? cfg.h_candidates : candidates;
      const auto result = loso_select_h(records, grid, opts);
      io::save_json(out_path, io::to_json(result));
    } else if (*plot) {
      const auto rec = io::load_recording(in_path);
      std::optional<LabelTimeline> pred;
      if (!pred_path.empty()) {
        auto in = io::open_input(pred_path);
        pred = io::read_labels(in).timeline;
        if (pred->size() != rec.series.size()) {
          throw Error(ErrorCode::kLengthMismatch, "prediction and recording lengths differ");
        }
      }
      auto file = io::open_output(out_path);
      file << "time_s,axis,value,label" << (pred ? ",predicted" : "") << '\n';
      static constexpr const char* kAxes[] = {"x1", "x2", "x3", "magnitude"};
      for (std::size_t k = 0; k < rec.series.size(); ++k) {
        const Vec3& v = rec.series[k];
        const double values[] = {v.x1, v.x2, v.x3, magnitude(v)};
        const std::string t = io::format_double(rec.series.time_of(k));
        for (std::size_t a = 0; a < 4; ++a) {
          file << t << ',' << kAxes[a] << ',' << io::format_double(values[a]) << ','
               << (rec.timeline[k] ? rec.timeline[k]->name : "");
          if (pred) file << ',' << ((*pred)[k] ? (*pred)[k]->name : "");
          file << '\n';
        }
      }
    }
  } catch (const CLI::ValidationError& e) {
    detail::write_error(err, "Usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    detail::write_error(err, std::string(error_code_name(e.code())), e.what(), e.line());
    return kExitData;
  } catch (const std::exception& e) {
    detail::write_error(err, "IoError", e.what());
    return kExitData;
  }
  return kExitOk;
}

}  // namespace movelet::cli

#endif  // MOVELET_CLI_HPP_
