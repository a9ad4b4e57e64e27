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

#ifndef UNSUPSEG_ANNOTATION_HPP_
#define UNSUPSEG_ANNOTATION_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "unsupseg/audio.hpp"
#include "unsupseg/boundaries.hpp"

namespace unsupseg {

struct Segment {
  std::int64_t start = 0;  // samples
  std::int64_t end = 0;    // samples, exclusive
  std::string label;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// TIMIT-style `.phn` content: contiguous segments, `start end label` per line.
struct Annotation {
  std::vector<Segment> segments;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Throws DataError with the 1-based line number on malformed lines, gaps,
// overlaps or empty segments.
Annotation parse_annotation(std::istream& in, const std::string& source = "<stream>");
Annotation parse_annotation(const std::filesystem::path& path);

std::string format_annotation(const Annotation& annotation);
void write_annotation(const std::filesystem::path& path, const Annotation& annotation);

// Junction times end_k / sample_rate for every segment but the last. With
// include_edges the first start and last end are added as well.
BoundarySet gold_boundaries(const Annotation& annotation, std::uint32_t sample_rate = kSampleRate,
                            bool include_edges = false);

}  // namespace unsupseg

#endif  // UNSUPSEG_ANNOTATION_HPP_
