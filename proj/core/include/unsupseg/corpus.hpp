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

#ifndef UNSUPSEG_CORPUS_HPP_
#define UNSUPSEG_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "unsupseg/annotation.hpp"
#include "unsupseg/audio.hpp"
#include "unsupseg/manifest.hpp"
#include "unsupseg/rng.hpp"

namespace unsupseg {

// Receptive field plus one hop: the shortest input giving two frames.
inline constexpr std::size_t kMinTrainSamples = 465 + 160;

// floor(len / crop) random-start crops of exactly crop_seconds; an utterance
// shorter than one crop is returned whole if it has at least kMinTrainSamples
// samples and dropped otherwise. ContractError if the crop itself is shorter
// than kMinTrainSamples.
std::vector<Waveform> make_crops(const Waveform& wave, double crop_seconds, Rng& rng);

struct SynthOptions {
  std::size_t utterances = 100;
  std::uint64_t seed = 0;
  double segment_ms_min = 50.0;
  double segment_ms_max = 200.0;
  std::size_t segments_min = 4;
  std::size_t segments_max = 10;
  // Partials per segment in the sum-of-sinusoids band-limited noise.
  std::size_t partials = 24;
  double rms = 0.1;
};

// Center frequencies (Hz) of the well-separated bands used by synth_corpus;
// each band spans ±12% around its center.
const std::vector<double>& synth_bands();

// Sum of `options.partials` sinusoids with random frequency within the band
// around center_hz, random phase and amplitude, scaled to options.rms.
void band_noise(std::span<float> out, double center_hz, const SynthOptions& options, Rng& rng);

// Generates one utterance: consecutive segments of band-limited noise from
// distinct bands, each scaled to the same RMS.
struct SynthUtterance {
  Waveform wave;
  Annotation annotation;
};
SynthUtterance synth_utterance(const SynthOptions& options, std::size_t index);

// Writes utt_NNNNN.wav / utt_NNNNN.phn under out_dir and returns the records.
// Deterministic given the options.
Manifest synth_corpus(const SynthOptions& options, const std::filesystem::path& out_dir);

}  // namespace unsupseg

#endif  // UNSUPSEG_CORPUS_HPP_
