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

#ifndef UNSUPSEG_MANIFEST_HPP_
#define UNSUPSEG_MANIFEST_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace unsupseg {

struct ManifestRecord {
  std::filesystem::path audio;
  std::optional<std::filesystem::path> annotation;

  // Key identifying the utterance in reports: the audio path as written.
  std::string key;
};

using Manifest = std::vector<ManifestRecord>;

// UTF-8 text, one `audio_path[<TAB>annotation_path]` record per line. Blank
// lines and lines starting with '#' are ignored. Relative paths are resolved
// against the manifest's directory. Throws DataError.
Manifest read_manifest(const std::filesystem::path& path);

// Paths are written relative to the manifest's directory where possible.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

// Throws DataError naming the first record without an annotation.
void require_annotations(const Manifest& manifest);

}  // namespace unsupseg

#endif  // UNSUPSEG_MANIFEST_HPP_
