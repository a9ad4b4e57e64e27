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

#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "unsupseg/contrastive.hpp"
#include "unsupseg/encoder.hpp"
#include "unsupseg/metrics.hpp"
#include "unsupseg/numkit/layers.hpp"
#include "unsupseg/rng.hpp"
#include "unsupseg/segmenter.hpp"

namespace {

using unsupseg::Rng;
using unsupseg::numkit::Tensor;

Tensor<float> random_tensor(const unsupseg::numkit::Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t(shape);
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

unsupseg::Waveform noise(std::size_t samples) {
  Rng rng(1);
  unsupseg::Waveform w;
  w.samples.resize(samples);
  for (float& v : w.samples) v = static_cast<float>(rng.uniform(-0.3, 0.3));
  return w;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor<float> a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  std::vector<float> c(n * n);
  for (auto _ : state) {
    std::fill(c.begin(), c.end(), 0.0f);
    unsupseg::numkit::matmul_accumulate<float>(a.data(), b.data(), c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

// Second conv block of the encoder on one second of audio.
void BM_Conv1dLayer2(benchmark::State& state) {
  const Tensor<float> x = random_tensor({256, 3199}, 3), w = random_tensor({256, 256, 8}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(unsupseg::numkit::conv1d_forward(x, w, 4));
}
BENCHMARK(BM_Conv1dLayer2)->Unit(benchmark::kMillisecond);

void BM_EncodeOneSecond(benchmark::State& state) {
  const auto enc = unsupseg::init_encoder<float>(unsupseg::EncoderConfig{}, 0);
  const unsupseg::Waveform w = noise(16000);
  unsupseg::numkit::set_warning_handler([](std::string_view) {});
  for (auto _ : state) benchmark::DoNotOptimize(unsupseg::encode(enc, w));
}
BENCHMARK(BM_EncodeOneSecond)->Unit(benchmark::kMillisecond);

void BM_TrainStepBatch8(benchmark::State& state) {
  auto enc = unsupseg::init_encoder<float>(unsupseg::EncoderConfig{}, 0);
  std::vector<Tensor<float>> batch;
  for (int i = 0; i < 8; ++i) batch.push_back(random_tensor({1, 16000}, 10 + i));
  Rng rng(5);
  for (auto _ : state) {
    unsupseg::EncoderCache<float> cache;
    const auto out = unsupseg::forward_batch(enc, batch, unsupseg::numkit::Mode::kTrain, &cache);
    std::vector<Tensor<float>> grads;
    for (const auto& o : out) {
      const Tensor<float> z = unsupseg::numkit::transpose(o);
      Tensor<float> gz(z.shape());
      const auto neg = unsupseg::sample_all_negatives(z.dim(0), 5, rng);
      unsupseg::nce_loss_sum<float>(z, neg, &gz, 1.0 / 776.0);
      grads.push_back(unsupseg::numkit::transpose(gz));
    }
    unsupseg::backward_batch(enc, cache, grads);
    enc.zero_grad();
  }
}
BENCHMARK(BM_TrainStepBatch8)->Unit(benchmark::kMillisecond);

void BM_DetectPeaks(benchmark::State& state) {
  Rng rng(6);
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  for (double& v : s) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(unsupseg::detect_peaks(s, 0.2));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_DetectPeaks)->Arg(100)->Arg(10000);

void BM_MatchBoundaries(benchmark::State& state) {
  Rng rng(7);
  const auto n = static_cast<std::size_t>(state.range(0));
  unsupseg::BoundarySet pred, gold;
  for (std::size_t i = 0; i < n; ++i) {
    gold.times.push_back(0.08 * static_cast<double>(i + 1));
    pred.times.push_back(gold.times.back() + rng.uniform(-0.03, 0.03));
  }
  std::sort(pred.times.begin(), pred.times.end());
  for (auto _ : state) benchmark::DoNotOptimize(unsupseg::match_boundaries(pred, gold, 0.02));
}
BENCHMARK(BM_MatchBoundaries)->Arg(10)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
