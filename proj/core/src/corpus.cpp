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

#include "unsupseg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <cstdio>
#include <numbers>
#include <string>

#include "unsupseg/errors.hpp"

namespace unsupseg {

std::vector<Waveform> make_crops(const Waveform& wave, double crop_seconds, Rng& rng) {
  const double crop_samples_real = crop_seconds * static_cast<double>(wave.sample_rate);
  if (!(crop_samples_real >= static_cast<double>(kMinTrainSamples))) {
    throw ContractError("crop of " + std::to_string(crop_seconds) + " s is shorter than the " +
                        std::to_string(kMinTrainSamples) + "-sample minimum");
  }
  const auto crop = static_cast<std::size_t>(std::llround(crop_samples_real));
  std::vector<Waveform> crops;
  if (wave.size() < kMinTrainSamples) return crops;
  if (wave.size() <= crop) {
    crops.push_back(wave);
    return crops;
  }
  const std::size_t count = wave.size() / crop;
  const std::size_t max_start = wave.size() - crop;
  for (std::size_t n = 0; n < count; ++n) {
    const auto start = static_cast<std::size_t>(rng.below(max_start + 1));
    Waveform piece;
    piece.sample_rate = wave.sample_rate;
    piece.samples.assign(wave.samples.begin() + static_cast<std::ptrdiff_t>(start),
                         wave.samples.begin() + static_cast<std::ptrdiff_t>(start + crop));
    crops.push_back(std::move(piece));
  }
  return crops;
}

const std::vector<double>& synth_bands() {
  static const std::vector<double> bands{250.0, 500.0, 900.0, 1500.0, 2400.0, 3600.0, 5200.0};
  return bands;
}

namespace {
constexpr double kBandHalfWidth = 0.12;
}  // namespace

void band_noise(std::span<float> out, double center_hz, const SynthOptions& options, Rng& rng) {
  const double sr = static_cast<double>(kSampleRate);
  std::vector<double> buffer(out.size(), 0.0);
  for (std::size_t p = 0; p < options.partials; ++p) {
    const double freq = center_hz * rng.uniform(1.0 - kBandHalfWidth, 1.0 + kBandHalfWidth);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amp = rng.uniform(0.5, 1.0);
    const double step = 2.0 * std::numbers::pi * freq / sr;
    for (std::size_t n = 0; n < buffer.size(); ++n)
      buffer[n] += amp * std::sin(phase + step * static_cast<double>(n));
  }
  double energy = 0.0;
  for (double v : buffer) energy += v * v;
  const double rms = std::sqrt(energy / static_cast<double>(buffer.size()));
  const double gain = rms > 0.0 ? options.rms / rms : 0.0;
  for (std::size_t n = 0; n < buffer.size(); ++n)
    out[n] = static_cast<float>(std::clamp(buffer[n] * gain, -1.0, 32767.0 / 32768.0));
}

SynthUtterance synth_utterance(const SynthOptions& options, std::size_t index) {
  if (options.segments_min < 1 || options.segments_max < options.segments_min) {
    throw ContractError("synth: invalid segments-per-utterance range");
  }
  if (!(options.segment_ms_min > 0.0) || options.segment_ms_max < options.segment_ms_min) {
    throw ContractError("synth: invalid segment duration range");
  }
  Rng rng(derive_seed(options.seed, "synth", index));
  const auto& bands = synth_bands();
  const auto min_len = static_cast<std::int64_t>(std::ceil(options.segment_ms_min * kSampleRate / 1000.0));
  const auto max_len = static_cast<std::int64_t>(std::floor(options.segment_ms_max * kSampleRate / 1000.0));
  const auto segments = static_cast<std::size_t>(
      rng.between(static_cast<std::int64_t>(options.segments_min), static_cast<std::int64_t>(options.segments_max)));

  SynthUtterance utt;
  std::size_t previous_band = bands.size();
  std::int64_t cursor = 0;
  for (std::size_t s = 0; s < segments; ++s) {
    std::size_t band;
    do {
      band = static_cast<std::size_t>(rng.below(bands.size()));
    } while (band == previous_band);
    previous_band = band;
    const std::int64_t length = rng.between(min_len, max_len);
    utt.annotation.segments.push_back({cursor, cursor + length, "b" + std::to_string(band)});
    const std::size_t offset = utt.wave.samples.size();
    utt.wave.samples.resize(offset + static_cast<std::size_t>(length));
    band_noise(std::span<float>(utt.wave.samples).subspan(offset), bands[band], options, rng);
    cursor += length;
  }
  // Round-trip through PCM16 so the in-memory waveform equals the file.
  for (float& v : utt.wave.samples) {
    const double q = std::clamp(std::nearbyint(static_cast<double>(v) * 32768.0), -32768.0, 32767.0);
    v = static_cast<float>(q / 32768.0);
  }
  return utt;
}

Manifest synth_corpus(const SynthOptions& options, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create '" + out_dir.string() + "': " + ec.message());
  Manifest manifest;
  manifest.reserve(options.utterances);
  for (std::size_t i = 0; i < options.utterances; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "utt_%05zu", i);
    SynthUtterance utt = synth_utterance(options, i);
    ManifestRecord record;
    record.key = std::string(stem) + ".wav";
    record.audio = out_dir / record.key;
    record.annotation = out_dir / (std::string(stem) + ".phn");
    save_wav(record.audio, utt.wave);
    write_annotation(*record.annotation, utt.annotation);
    manifest.push_back(std::move(record));
  }
  return manifest;
}

}  // namespace unsupseg
