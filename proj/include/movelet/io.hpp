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

// Text file formats. All numbers are written with the shortest
// representation that reads back to the same double (std::to_chars), so
// every artifact round-trips bit-exactly and independent of locale.
//
// Recording (CSV):
//
//   # movelet recording v1
//   # fs: 80
//   # subject_id: S01
//   # start_time: 0
//   # axes: up-down,forward-backward,left-right
//   # labels: lying,standing            (optional declared label set)
//   sample_index,x1,x2,x3,label
//   0,-1.02,0.01,0.003,standing
//   1,-0.98,0.02,-0.01,
//
// An empty label is an unlabeled sample. sample_index must count 0, 1, 2...
//
// Label file: same header with `# movelet labels v1`, columns
// sample_index,label.
//
// Transform: `# movelet transform v1`, then `rotation: ` with the 9 entries
// row-major and `bias: ` with 3 entries, space separated.
//
// Dictionary: `# movelet dictionary v1`, header lines h_seconds, fs, H,
// labels, entries, then one CSV row per entry:
// subject_id,start_index,label,x1,x2,x3,x1,x2,x3,... (H samples).

#ifndef MOVELET_IO_HPP_
#define MOVELET_IO_HPP_

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "movelet/core.hpp"
#include "movelet/error.hpp"
#include "movelet/movelets.hpp"
#include "movelet/normalize.hpp"

namespace movelet::io {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Rejects names that would break the comma separated formats.
inline void check_field(const std::string& value, const char* what) {
  if (value.find_first_of(",\n\r") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must not contain commas or newlines: '" +
                    value + "'");
  }
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

struct RecordingMetadata {
  std::string subject_id;
  std::string axes = "up-down,forward-backward,left-right";
  // Declared label set; empty when the file declares none.
  std::vector<std::string> declared_labels;

  friend bool operator==(const RecordingMetadata&, const RecordingMetadata&) = default;
};

struct Recording {
  TriaxialSeries series;
  LabelTimeline timeline;
  RecordingMetadata metadata;
};

namespace detail {

struct Header {
  std::string magic;
  std::map<std::string, std::string> fields;
};

// Reads `# key: value` lines; stops before the first line not starting with
// '#'. `line_no` is left at the number of lines consumed.
inline Header read_header(std::istream& in, std::size_t& line_no,
                          std::string_view expected_magic) {
  Header h;
  std::string line;
  while (in.peek() == '#') {
    std::getline(in, line);
    ++line_no;
    std::string_view body = trim(std::string_view(line).substr(1));
    if (line_no == 1) {
      h.magic = std::string(body);
      continue;
    }
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::kParseError, "header line without ':'", line_no);
    }
    h.fields[std::string(trim(body.substr(0, colon)))] =
        std::string(trim(body.substr(colon + 1)));
  }
  if (h.magic != expected_magic) {
    throw Error(ErrorCode::kParseError,
                "expected '# " + std::string(expected_magic) + "'", 1);
  }
  return h;
}

inline double header_fs(const Header& h) {
  const auto it = h.fields.find("fs");
  if (it == h.fields.end()) {
    throw Error(ErrorCode::kParseError, "header has no fs");
  }
  const auto fs = parse_double(it->second);
  if (!fs || !(*fs > 0.0) || !std::isfinite(*fs)) {
    throw Error(ErrorCode::kParseError, "fs must be a positive number");
  }
  return *fs;
}

inline std::vector<std::string> split_labels(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  for (auto part : split(s, ',')) out.emplace_back(trim(part));
  return out;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += v[i];
  }
  return out;
}

inline MaybeLabel parse_label(std::string_view field,
                              const std::set<std::string>& declared,
                              bool strict, std::size_t line_no) {
  const auto name = trim(field);
  if (name.empty()) return std::nullopt;
  if (strict && !declared.empty() && !declared.contains(std::string(name))) {
    throw Error(ErrorCode::kUnknownLabel,
                "label '" + std::string(name) + "' not in declared set", line_no);
  }
  return ActivityLabel{std::string(name)};
}

}  // namespace detail

// Parses a recording. In strict mode a label outside the declared set is an
// UnknownLabel error at its line.
inline Recording read_recording(std::istream& in, bool strict = true) {
  std::size_t line_no = 0;
  const auto header = detail::read_header(in, line_no, "movelet recording v1");
  const double fs = detail::header_fs(header);
  Recording rec;
  double start_time = 0.0;
  if (const auto it = header.fields.find("start_time"); it != header.fields.end()) {
    const auto v = parse_double(it->second);
    if (!v) throw Error(ErrorCode::kParseError, "bad start_time");
    start_time = *v;
  }
  if (const auto it = header.fields.find("subject_id"); it != header.fields.end()) {
    rec.metadata.subject_id = it->second;
  }
  if (const auto it = header.fields.find("axes"); it != header.fields.end()) {
    rec.metadata.axes = it->second;
  }
  if (const auto it = header.fields.find("labels"); it != header.fields.end()) {
    rec.metadata.declared_labels = detail::split_labels(it->second);
  }
  const std::set<std::string> declared(rec.metadata.declared_labels.begin(),
                                       rec.metadata.declared_labels.end());
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kParseError, "missing column header", line_no + 1);
  }
  ++line_no;
  if (trim(line) != "sample_index,x1,x2,x3,label" && trim(line) != "sample_index,x1,x2,x3") {
    throw Error(ErrorCode::kParseError, "unexpected column header", line_no);
  }
  std::vector<Vec3> samples;
  std::vector<MaybeLabel> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4 && fields.size() != 5) {
      throw Error(ErrorCode::kParseError, "expected 4 or 5 fields", line_no);
    }
    const auto index = parse_index(fields[0]);
    if (!index) throw Error(ErrorCode::kParseError, "bad sample_index", line_no);
    if (*index != samples.size()) {
      throw Error(ErrorCode::kNonUniformIndex,
                  "sample_index " + std::to_string(*index) + " where " +
                      std::to_string(samples.size()) + " was expected",
                  line_no);
    }
    Vec3 v;
    for (std::size_t a = 0; a < 3; ++a) {
      const auto x = parse_double(fields[a + 1]);
      if (!x || !std::isfinite(*x)) {
        throw Error(ErrorCode::kParseError, "bad acceleration value", line_no);
      }
      v[a] = *x;
    }
    samples.push_back(v);
    labels.push_back(fields.size() == 5
                         ? detail::parse_label(fields[4], declared, strict, line_no)
                         : std::nullopt);
  }
  rec.series = TriaxialSeries(std::move(samples), fs, start_time);
  rec.timeline = LabelTimeline(std::move(labels), fs);
  return rec;
}

inline Recording load_recording(const std::filesystem::path& path, bool strict = true) {
  auto in = open_input(path);
  return read_recording(in, strict);
}

inline void write_recording(std::ostream& out, const TriaxialSeries& series,
                            const LabelTimeline& timeline,
                            const RecordingMetadata& meta) {
  check_paired(series, timeline);
  check_field(meta.subject_id, "subject_id");
  out << "# movelet recording v1\n";
  out << "# fs: " << format_double(series.fs()) << '\n';
  out << "# subject_id: " << meta.subject_id << '\n';
  out << "# start_time: " << format_double(series.start_time()) << '\n';
  out << "# axes: " << meta.axes << '\n';
  if (!meta.declared_labels.empty()) {
    out << "# labels: " << detail::join(meta.declared_labels) << '\n';
  }
  out << "sample_index,x1,x2,x3,label\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Vec3& v = series[k];
    out << k << ',' << format_double(v.x1) << ',' << format_double(v.x2) << ','
        << format_double(v.x3) << ',';
    if (timeline[k]) {
      check_field(timeline[k]->name, "label");
      out << timeline[k]->name;
    }
    out << '\n';
  }
}

inline void save_recording(const std::filesystem::path& path,
                           const TriaxialSeries& series,
                           const LabelTimeline& timeline,
                           const RecordingMetadata& meta) {
  auto out = open_output(path);
  write_recording(out, series, timeline, meta);
}

// Sorted label names present in a timeline, for the `labels` header.
inline std::vector<std::string> label_names(const LabelTimeline& timeline) {
  std::set<std::string> s;
  for (const auto& l : timeline.labels())
    if (l) s.insert(l->name);
  return {s.begin(), s.end()};
}

struct LabelFile {
  LabelTimeline timeline;
  std::string subject_id;
};

inline void write_labels(std::ostream& out, const LabelTimeline& timeline,
                         const std::string& subject_id) {
  check_field(subject_id, "subject_id");
  out << "# movelet labels v1\n";
  out << "# fs: " << format_double(timeline.fs()) << '\n';
  out << "# subject_id: " << subject_id << '\n';
  out << "sample_index,label\n";
  for (std::size_t k = 0; k < timeline.size(); ++k) {
    out << k << ',';
    if (timeline[k]) {
      check_field(timeline[k]->name, "label");
      out << timeline[k]->name;
    }
    out << '\n';
  }
}

inline LabelFile read_labels(std::istream& in) {
  std::size_t line_no = 0;
  const auto header = detail::read_header(in, line_no, "movelet labels v1");
  const double fs = detail::header_fs(header);
  LabelFile lf;
  if (const auto it = header.fields.find("subject_id"); it != header.fields.end()) {
    lf.subject_id = it->second;
  }
  std::string line;
  if (!std::getline(in, line) || trim(line) != "sample_index,label") {
    throw Error(ErrorCode::kParseError, "unexpected column header", line_no + 1);
  }
  ++line_no;
  std::vector<MaybeLabel> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw Error(ErrorCode::kParseError, "expected 2 fields", line_no);
    const auto index = parse_index(fields[0]);
    if (!index) throw Error(ErrorCode::kParseError, "bad sample_index", line_no);
    if (*index != labels.size()) {
      throw Error(ErrorCode::kNonUniformIndex, "sample_index out of sequence", line_no);
    }
    labels.push_back(detail::parse_label(fields[1], {}, false, line_no));
  }
  lf.timeline = LabelTimeline(std::move(labels), fs);
  return lf;
}

inline void write_transform(std::ostream& out, const NormalizationTransform& t) {
  out << "# movelet transform v1\nrotation:";
  for (double v : t.rotation.matrix().m) out << ' ' << format_double(v);
  out << "\nbias: " << format_double(t.bias.x1) << ' ' << format_double(t.bias.x2)
      << ' ' << format_double(t.bias.x3) << '\n';
}

inline NormalizationTransform read_transform(std::istream& in) {
  std::size_t line_no = 0;
  detail::read_header(in, line_no, "movelet transform v1");
  std::optional<Mat3> rotation;
  std::optional<Vec3> bias;
  std::string line;
  auto numbers = [&](std::string_view body, std::size_t count) {
    std::vector<double> out;
    std::istringstream ss{std::string(body)};
    std::string tok;
    while (ss >> tok) {
      const auto v = parse_double(tok);
      if (!v || !std::isfinite(*v)) throw Error(ErrorCode::kParseError, "bad number", line_no);
      out.push_back(*v);
    }
    if (out.size() != count) {
      throw Error(ErrorCode::kParseError,
                  "expected " + std::to_string(count) + " numbers", line_no);
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (body.starts_with("rotation:")) {
      const auto v = numbers(body.substr(9), 9);
      Mat3 m;
      std::copy(v.begin(), v.end(), m.m.begin());
      rotation = m;
    } else if (body.starts_with("bias:")) {
      const auto v = numbers(body.substr(5), 3);
      bias = Vec3{v[0], v[1], v[2]};
    } else {
      throw Error(ErrorCode::kParseError, "unexpected line", line_no);
    }
  }
  if (!rotation || !bias) throw Error(ErrorCode::kParseError, "transform incomplete");
  return NormalizationTransform{RotationMatrix::from_matrix(*rotation, 1e-9), *bias};
}

inline void save_transform(const std::filesystem::path& path,
                           const NormalizationTransform& t) {
  auto out = open_output(path);
  write_transform(out, t);
}

inline NormalizationTransform load_transform(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_transform(in);
}

inline void write_dictionary(std::ostream& out, const MoveletDictionary& dict) {
  std::vector<std::string> names;
  for (const auto& l : dict.labels()) {
    check_field(l.name, "label");
    names.push_back(l.name);
  }
  out << "# movelet dictionary v1\n";
  out << "# h_seconds: " << format_double(dict.h_seconds()) << '\n';
  out << "# fs: " << format_double(dict.fs()) << '\n';
  out << "# H: " << dict.window_length() << '\n';
  out << "# labels: " << detail::join(names) << '\n';
  out << "# entries: " << dict.size() << '\n';
  for (std::size_t i = 0; i < dict.size(); ++i) {
    check_field(dict.subject_id(i), "subject_id");
    out << dict.subject_id(i) << ',' << dict.start_index(i) << ','
        << dict.label(i).name;
    for (const Vec3& v : dict.window(i)) {
      out << ',' << format_double(v.x1) << ',' << format_double(v.x2) << ','
          << format_double(v.x3);
    }
    out << '\n';
  }
}

inline MoveletDictionary read_dictionary(std::istream& in) {
  std::size_t line_no = 0;
  const auto header = detail::read_header(in, line_no, "movelet dictionary v1");
  auto field = [&](const char* key) {
    const auto it = header.fields.find(key);
    if (it == header.fields.end()) {
      throw Error(ErrorCode::kParseError, std::string("header has no ") + key);
    }
    return it->second;
  };
  const auto h = parse_double(field("h_seconds"));
  if (!h) throw Error(ErrorCode::kParseError, "bad h_seconds");
  const double fs = detail::header_fs(header);
  const auto H = parse_index(field("H"));
  const auto count = parse_index(field("entries"));
  if (!H || !count) throw Error(ErrorCode::kParseError, "bad H or entries");
  const auto declared_list = detail::split_labels(field("labels"));
  const std::set<std::string> declared(declared_list.begin(), declared_list.end());
  MoveletDictionary::Builder builder(*h, fs);
  if (builder.window_length() != *H) {
    throw Error(ErrorCode::kParseError, "H does not match round(h_seconds * fs)");
  }
  std::string line;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3 + 3 * *H) {
      throw Error(ErrorCode::kParseError, "wrong number of fields in entry", line_no);
    }
    Movelet m;
    m.subject_id = std::string(fields[0]);
    const auto start = parse_index(fields[1]);
    if (!start) throw Error(ErrorCode::kParseError, "bad start_index", line_no);
    m.start_index = *start;
    m.label = detail::parse_label(fields[2], declared, true, line_no);
    if (!m.label) throw Error(ErrorCode::kParseError, "entry without label", line_no);
    m.window.resize(*H);
    for (std::size_t k = 0; k < *H; ++k) {
      for (std::size_t a = 0; a < 3; ++a) {
        const auto v = parse_double(fields[3 + 3 * k + a]);
        if (!v || !std::isfinite(*v)) {
          throw Error(ErrorCode::kParseError, "bad acceleration value", line_no);
        }
        m.window[k][a] = *v;
      }
    }
    builder.add(std::move(m));
    ++seen;
  }
  if (seen != *count) {
    throw Error(ErrorCode::kParseError, "entry count differs from header");
  }
  return std::move(builder).build();
}

inline void save_dictionary(const std::filesystem::path& path,
                            const MoveletDictionary& dict) {
  auto out = open_output(path);
  write_dictionary(out, dict);
}

inline MoveletDictionary load_dictionary(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_dictionary(in);
}

}  // namespace movelet::io

#endif  // MOVELET_IO_HPP_
