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

#include "unsupseg/manifest.hpp"

#include <fstream>
#include <set>

#include "unsupseg/errors.hpp"

namespace unsupseg {

namespace fs = std::filesystem;

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  const fs::path base = path.parent_path();
  auto resolve = [&base](const std::string& p) {
    fs::path candidate(p);
    return candidate.is_absolute() ? candidate : base / candidate;
  };

  Manifest manifest;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    ManifestRecord record;
    record.key = line.substr(0, tab);
    if (record.key.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty audio path");
    }
    record.audio = resolve(record.key);
    if (tab != std::string::npos) {
      const std::string ann = line.substr(tab + 1);
      if (ann.empty() || ann.find('\t') != std::string::npos) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'audio_path<TAB>annotation_path'");
      }
      record.annotation = resolve(ann);
    }
    if (!seen.insert(record.key).second) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate utterance '" +
                      record.key + "'");
    }
    manifest.push_back(std::move(record));
  }
  return manifest;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  const fs::path base = path.parent_path();
  auto relative = [&base](const fs::path& p) {
    if (base.empty()) return p.generic_string();
    std::error_code ec;
    const fs::path rel = fs::relative(p, base, ec);
    // Paths outside the manifest's directory stay as given.
    if (ec || rel.empty() || *rel.begin() == "..") return p.generic_string();
    return rel.generic_string();
  };
  for (const ManifestRecord& r : manifest) {
    out << relative(r.audio);
    if (r.annotation) out << '\t' << relative(*r.annotation);
    out << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void require_annotations(const Manifest& manifest) {
  for (const ManifestRecord& r : manifest) {
    if (!r.annotation) throw DataError("utterance '" + r.key + "' has no annotation");
  }
}

}  // namespace unsupseg
