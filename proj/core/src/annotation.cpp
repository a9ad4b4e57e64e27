// Copyright 2026 The unsupseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unsupseg/annotation.hpp"

#include <fstream>
#include <sstream>

#include "unsupseg/errors.hpp"

namespace unsupseg {

Annotation parse_annotation(std::istream& in, const std::string& source) {
  Annotation annotation;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw DataError(source + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    Segment seg;
    if (!(fields >> seg.start >> seg.end >> seg.label)) fail("expected 'start_sample end_sample label'");
    std::string extra;
    if (fields >> extra) fail("unexpected extra column '" + extra + "'");
    if (seg.start < 0) fail("negative start sample");
    if (seg.end <= seg.start) fail("segment end must be greater than its start");
    if (!annotation.segments.empty()) {
      const std::int64_t prev_end = annotation.segments.back().end;
      if (seg.start > prev_end) fail("gap between segments (" + std::to_string(prev_end) + " -> " +
                                     std::to_string(seg.start) + ")");
      if (seg.start < prev_end) fail("segment overlaps the previous one");
    }
    annotation.segments.push_back(std::move(seg));
  }
  return annotation;
}

Annotation parse_annotation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open annotation '" + path.string() + "'");
  return parse_annotation(in, path.string());
}

std::string format_annotation(const Annotation& annotation) {
  std::ostringstream out;
  for (const Segment& s : annotation.segments) out << s.start << ' ' << s.end << ' ' << s.label << '\n';
  return out.str();
}

void write_annotation(const std::filesystem::path& path, const Annotation& annotation) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << format_annotation(annotation);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

BoundarySet gold_boundaries(const Annotation& annotation, std::uint32_t sample_rate, bool include_edges) {
  BoundarySet set;
  const auto& segs = annotation.segments;
  if (segs.empty()) return set;
  const double sr = static_cast<double>(sample_rate);
  if (include_edges) set.times.push_back(static_cast<double>(segs.front().start) / sr);
  for (std::size_t k = 0; k + 1 < segs.size(); ++k) set.times.push_back(static_cast<double>(segs[k].end) / sr);
  if (include_edges) set.times.push_back(static_cast<double>(segs.back().end) / sr);
  return set;
}

}  // namespace unsupseg
