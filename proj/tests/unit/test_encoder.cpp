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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "checks.hpp"
#include "files.hpp"
#include "unsupseg/checkpoint.hpp"
#include "unsupseg/encoder.hpp"
#include "unsupseg/errors.hpp"
#include "unsupseg/rng.hpp"

using namespace unsupseg;
using testing::read_bytes;
using testing::TempDir;
using testing::write_bytes;
namespace fs = std::filesystem;

namespace {

Waveform noise(std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.samples.resize(samples);
  for (float& s : w.samples) s = static_cast<float>(rng.uniform(-0.5, 0.5));
  return w;
}

Waveform slice(const Waveform& w, std::size_t begin, std::size_t end) {
  Waveform out;
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

bool same_row(const FrameEmbeddings& a, std::size_t ra, const FrameEmbeddings& b, std::size_t rb) {
  const auto x = a.vectors.row(ra);
  const auto y = b.vectors.row(rb);
  return std::equal(x.begin(), x.end(), y.begin(), y.end());
}

// Trained-looking state: perturbed parameters and non-trivial running stats.
EncoderState<float> busy_state(std::uint64_t seed) {
  EncoderState<float> s = init_encoder<float>(EncoderConfig{}, seed);
  std::vector<numkit::Tensor<float>> batch{waveform_tensor<float>(s.config, noise(4000, seed + 1))};
  forward_batch(s, batch, numkit::Mode::kTrain);
  Rng rng(seed + 2);
  for (auto& g : s.bn_gamma)
    for (float& v : g.value.data()) v = static_cast<float>(rng.uniform(0.5, 1.5));
  return s;
}

std::size_t find_text(const std::vector<std::uint8_t>& bytes, const std::string& text) {
  const auto it = std::search(bytes.begin(), bytes.end(), text.begin(), text.end());
  REQUIRE(it != bytes.end());
  return static_cast<std::size_t>(it - bytes.begin());
}

std::string data_error_message(const fs::path& p) {
  try {
    load_checkpoint(p);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("one second of audio gives 98 frames") {
  CHECK(out_length(16000) == 98);
  CHECK(out_length(465) == 1);
  CHECK(out_length(32000) == 198);
  CHECK_THROWS_AS(out_length(464), InputTooShortError);
  const EncoderConfig c;
  CHECK(c.hop_samples() == 160);
  CHECK(c.receptive_field() == 465);
}

TEST_CASE("frame count grows by one every hop") {
  for (std::size_t n = 465; n < 465 + 160 * 20; ++n) {
    const std::size_t frames = out_length(n);
    REQUIRE(frames == (n - 465) / 160 + 1);
  }
}

TEST_CASE("encode returns one embedding row per frame") {
  const EncoderState<float> s = init_encoder<float>(EncoderConfig{}, 0);
  const FrameEmbeddings z = encode(s, noise(16000, 1));
  CHECK(z.frames() == 98);
  CHECK(z.dim() == 64);
  CHECK(z.hop_samples == 160);
  CHECK(z.vectors.all_finite());
}

TEST_CASE("short or resampled audio is rejected") {
  const EncoderState<float> s = init_encoder<float>(EncoderConfig{}, 0);
  CHECK_THROWS_AS(encode(s, noise(400, 1)), InputTooShortError);
  Waveform w = noise(16000, 1);
  w.sample_rate = 8000;
  CHECK_THROWS_AS(encode(s, w), ContractError);
}

TEST_CASE("parameter count of the default encoder") {
  const EncoderState<float> s = init_encoder<float>(EncoderConfig{}, 0);
  std::size_t conv = 256 * 1 * 10 + 256 * 256 * (8 + 4 + 4 + 4);
  std::size_t bn = 5 * 256 * 4;  // gamma, beta, running mean and variance
  std::size_t proj = 64 * 256 + 64;
  CHECK(s.parameter_count() == conv + bn + proj);
  CHECK(s.parameter_count() == 1334848);
}

TEST_CASE("initialization is seeded and bounded by the fan-in") {
  const EncoderState<float> a = init_encoder<float>(EncoderConfig{}, 7);
  const EncoderState<float> b = init_encoder<float>(EncoderConfig{}, 7);
  const EncoderState<float> c = init_encoder<float>(EncoderConfig{}, 8);
  CHECK(a.conv_weight[2].value == b.conv_weight[2].value);
  CHECK_FALSE(a.conv_weight[2].value == c.conv_weight[2].value);
  const double bound = std::sqrt(1.0 / (256.0 * 4.0));
  for (float v : a.conv_weight[2].value.data()) REQUIRE(std::fabs(v) <= bound);
}

TEST_CASE("config validation") {
  EncoderConfig c;
  c.strides = {5, 4, 2, 2, 1};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = EncoderConfig{};
  c.channels = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(EncoderConfig{}.validate());
}

TEST_CASE("shifting the input by one hop shifts the frames by one") {
  const EncoderState<float> s = busy_state(3);
  const Waveform w = noise(16000, 4);
  const FrameEmbeddings full = encode(s, w);
  const FrameEmbeddings shifted = encode(s, slice(w, 160, 16000));
  REQUIRE(shifted.frames() == full.frames() - 1);
  for (std::size_t i = 0; i < shifted.frames(); ++i) REQUIRE(same_row(shifted, i, full, i + 1));
  const FrameEmbeddings prefix = encode(s, slice(w, 0, 8000));
  for (std::size_t i = 0; i < prefix.frames(); ++i) REQUIRE(same_row(prefix, i, full, i));
}

TEST_CASE("each frame only sees its 465-sample window") {
  const EncoderState<float> s = busy_state(5);
  const Waveform w = noise(8000, 6);
  const FrameEmbeddings base = encode(s, w);
  const std::size_t frame = 20;
  for (std::size_t pos : {frame * 160 - 1, frame * 160 + 465}) {
    Waveform v = w;
    v.samples[pos] += 0.25f;
    const FrameEmbeddings moved = encode(s, v);
    CHECK(same_row(moved, frame, base, frame));
  }
  for (std::size_t pos : {frame * 160, frame * 160 + 464}) {
    Waveform v = w;
    v.samples[pos] += 0.25f;
    CHECK_FALSE(same_row(encode(s, v), frame, base, frame));
  }
}

TEST_CASE("eval forward does not touch running statistics") {
  EncoderState<float> s = busy_state(9);
  const auto before = s.bn_stats[3].running_var;
  encode(s, noise(3000, 1), numkit::Mode::kEval);
  CHECK(s.bn_stats[3].running_var == before);
  encode(s, noise(3000, 1), numkit::Mode::kTrain);
  CHECK_FALSE(s.bn_stats[3].running_var == before);
}

TEST_CASE("narrow encoder plus contrastive loss matches central differences") {
  // Batch norm over a few dozen elements curves hard; a smaller step keeps
  // the truncation error of the difference well below the tolerance.
  testing::EncoderCheckSetup small;
  small.h = 1e-5;
  small.channels = 6;
  small.projection_dim = 4;
  small.items = 2;
  small.samples = 0;
  small.neg_k = 3;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    CAPTURE(seed);
    const auto report = testing::check_encoder_nce(seed, small);
    CHECK(report.max_rel_error() < 1e-3);
    CHECK(report.checked() > 0);
  }
}

TEST_CASE("full-width encoder gradient on a sample of coordinates") {
  testing::EncoderCheckSetup full;
  full.max_coords_per_param = 4;
  const auto report = testing::check_encoder_nce(1, full);
  CHECK(report.max_rel_error() < 1e-3);
  CHECK(report.kinked() == 0);
}

TEST_CASE("checkpoint round trip is bitwise") {
  TempDir dir("ckpt_roundtrip");
  Checkpoint ck{busy_state(11), TrainingMetadata{4, 1.25, 99}};
  const fs::path p = dir.path / "model.ckpt";
  save_checkpoint(ck, p);
  CHECK_FALSE(fs::exists(dir.path / "model.ckpt.tmp"));
  const Checkpoint back = load_checkpoint(p);
  CHECK(back.meta.epoch == 4);
  CHECK(back.meta.best_val_loss == 1.25);
  CHECK(back.meta.seed == 99);
  CHECK(back.state.config == ck.state.config);
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(ck));
  CHECK(read_bytes(p) == serialize_checkpoint(ck));
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    CHECK(back.state.conv_weight[l].value == ck.state.conv_weight[l].value);
    CHECK(back.state.bn_stats[l].running_mean == ck.state.bn_stats[l].running_mean);
    CHECK(back.state.bn_stats[l].updates == ck.state.bn_stats[l].updates);
  }
  const Waveform w = noise(5000, 3);
  const FrameEmbeddings a = encode(ck.state, w);
  const FrameEmbeddings b = encode(back.state, w);
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("checkpoint keeps a NaN best loss") {
  Checkpoint ck{init_encoder<float>(EncoderConfig{}, 1), TrainingMetadata{}};
  CHECK(std::isnan(parse_checkpoint(serialize_checkpoint(ck)).meta.best_val_loss));
}

TEST_CASE("damaged checkpoints are rejected with a reason") {
  TempDir dir("ckpt_damaged");
  const Checkpoint ck{init_encoder<float>(EncoderConfig{}, 2), TrainingMetadata{}};
  const std::vector<std::uint8_t> good = serialize_checkpoint(ck);
  const fs::path p = dir.path / "bad.ckpt";

  SUBCASE("truncated") {
    write_bytes(p, std::vector<std::uint8_t>(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(good.size() / 2)));
    CHECK(data_error_message(p).find("truncated") != std::string::npos);
  }
  SUBCASE("bad magic") {
    auto bytes = good;
    bytes[0] = 'X';
    write_bytes(p, bytes);
    CHECK(data_error_message(p).find("magic") != std::string::npos);
  }
  SUBCASE("unknown version") {
    auto bytes = good;
    bytes[8] = 2;
    write_bytes(p, bytes);
    CHECK(data_error_message(p).find("format_version 2") != std::string::npos);
  }
  SUBCASE("missing tensor") {
    auto bytes = good;
    const std::string last = "bn4.running_var";
    const std::size_t start = find_text(bytes, last) - 2;
    bytes.erase(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end() - 4);
    const std::size_t count_at = find_text(bytes, "conv0.weight") - 2 - 4;
    bytes[count_at] -= 1;
    write_bytes(p, bytes);
    const std::string msg = data_error_message(p);
    CHECK(msg.find("missing") != std::string::npos);
    CHECK(msg.find(last) != std::string::npos);
  }
  SUBCASE("trailing bytes") {
    auto bytes = good;
    bytes.push_back(0);
    write_bytes(p, bytes);
    CHECK_FALSE(data_error_message(p).empty());
  }
  SUBCASE("absent file") { CHECK_THROWS_AS(load_checkpoint(dir.path / "nope.ckpt"), DataError); }
}

TEST_CASE("checkpoint with another projection size is refused") {
  TempDir dir("ckpt_arch");
  EncoderConfig small;
  small.projection_dim = 32;
  const fs::path p = dir.path / "small.ckpt";
  save_checkpoint(Checkpoint{init_encoder<float>(small, 0), TrainingMetadata{}}, p);
  CHECK(load_checkpoint(p).state.config.projection_dim == 32);
  try {
    load_checkpoint(p, EncoderConfig{});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("projection_dim 32 (expected 64)") != std::string::npos);
  }
}
