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

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "files.hpp"
#include "unsupseg/checkpoint.hpp"
#include "unsupseg/corpus.hpp"
#include "unsupseg/manifest.hpp"
#include "unsupseg/segmenter.hpp"
#include "unsupseg/trainer.hpp"

using namespace unsupseg;

namespace {

// One model trained on a synthetic corpus, with delta tuned on its val split.
struct Trained {
  testing::TempDir dir{"pipeline"};
  TrainResult result;
  double delta = 0.5;

  Trained() {
    SynthOptions options;
    options.utterances = 100;
    options.seed = 11;
    const Manifest all = synth_corpus(options, dir.path);
    const Manifest train_m(all.begin(), all.begin() + 80);
    const Manifest val_m(all.begin() + 80, all.begin() + 90);
    TrainConfig config;
    config.epochs = 5;
    config.seed = 11;
    const auto train_set = load_waveforms(train_m);
    const auto val_set = load_waveforms(val_m);
    result = train(train_set, val_set, config);
    const auto grid = parse_grid("0:1:0.05");
    delta = tune_delta(result.checkpoint.state, val_m, grid, 0.02, TuneObjective::kRValue).best_delta;
  }

  static Trained& get() {
    static Trained t;
    return t;
  }
};

Waveform two_bands(double first_hz, double second_hz, std::uint64_t seed) {
  SynthOptions options;
  Rng rng(seed);
  Waveform w;
  w.samples.resize(16000);
  band_noise(std::span<float>(w.samples).first(8000), first_hz, options, rng);
  band_noise(std::span<float>(w.samples).subspan(8000), second_hz, options, rng);
  for (float& v : w.samples) v = static_cast<float>(std::nearbyint(static_cast<double>(v) * 32768.0) / 32768.0);
  return w;
}

}  // namespace

// Default threshold: the tuned one suits utterances with many boundaries and
// lets through in-band ripples on a single long change.
TEST_CASE("a trained model finds the single change between two bands") {
  Trained& t = Trained::get();
  const auto& bands = synth_bands();
  const std::pair<std::size_t, std::size_t> pairs[] = {{1, 4}, {0, 3}, {5, 2}};
  for (const auto& [a, b] : pairs) {
    CAPTURE(bands[a]);
    CAPTURE(bands[b]);
    const Segmentation seg = segment(t.result.checkpoint.state, two_bands(bands[a], bands[b], a * 10 + b),
                                     PeakParams{});
    REQUIRE(seg.boundaries.size() == 1);
    CHECK(std::fabs(seg.boundaries.times[0] - 0.5) <= 0.02);
  }
}

TEST_CASE("segmentation output is reproducible") {
  Trained& t = Trained::get();
  const Waveform w = two_bands(500.0, 2400.0, 3);
  const Segmentation a = segment(t.result.checkpoint.state, w, PeakParams{t.delta});
  const Segmentation b = segment(t.result.checkpoint.state, w, PeakParams{t.delta});
  CHECK(a.boundaries == b.boundaries);
  CHECK(a.raw.scores == b.raw.scores);
}

TEST_CASE("training improved on the untrained loss") {
  Trained& t = Trained::get();
  const auto& epochs = t.result.history.epochs;
  REQUIRE_FALSE(epochs.empty());
  CHECK(epochs.back().train_loss < epochs.front().train_loss);
  CHECK(t.result.history.best_val_loss < std::log(6.0));
  MESSAGE("tuned delta " << t.delta << ", best epoch " << t.result.history.best_epoch);
}
