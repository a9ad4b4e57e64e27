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

#ifndef UNSUPSEG_AUDIO_HPP_
#define UNSUPSEG_AUDIO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace unsupseg {

inline constexpr std::uint32_t kSampleRate = 16000;

// Mono audio scaled to [-1, 1].
struct Waveform {
  std::vector<float> samples;
  std::uint32_t sample_rate = kSampleRate;

  std::size_t size() const noexcept { return samples.size(); }
  double duration() const noexcept {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

// RIFF/WAVE, PCM 16-bit, mono, 16 kHz only. Samples are divided by 32768.
Waveform load_wav(const std::filesystem::path& path);

// Writes PCM 16-bit mono; samples are scaled by 32768, rounded to nearest
// and clamped to [-32768, 32767].
void save_wav(const std::filesystem::path& path, const Waveform& wave);

}  // namespace unsupseg

#endif  // UNSUPSEG_AUDIO_HPP_
