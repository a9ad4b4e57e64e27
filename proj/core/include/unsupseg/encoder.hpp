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

#ifndef UNSUPSEG_ENCODER_HPP_
#define UNSUPSEG_ENCODER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "unsupseg/audio.hpp"
#include "unsupseg/numkit/adam.hpp"
#include "unsupseg/numkit/layers.hpp"
#include "unsupseg/numkit/tensor.hpp"

namespace unsupseg {

inline constexpr std::size_t kConvLayers = 5;

// Five strided conv blocks (conv -> batch norm -> leaky ReLU) followed by a
// per-frame linear projection. There is no context network on top.
struct EncoderConfig {
  std::array<std::size_t, kConvLayers> kernel_sizes{10, 8, 4, 4, 4};
  std::array<std::size_t, kConvLayers> strides{5, 4, 2, 2, 2};
  std::size_t channels = 256;
  std::size_t projection_dim = 64;
  double leaky_slope = 0.01;
  std::uint32_t sample_rate = kSampleRate;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  // Throws ConfigError. The strides must multiply to the 160-sample hop.
  void validate() const;

  std::size_t hop_samples() const;
  std::size_t receptive_field() const;
  // Number of frames for `samples` input samples; InputTooShortError below
  // the receptive field.
  std::size_t out_length(std::size_t samples) const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

inline constexpr std::size_t kHopSamples = 160;
inline constexpr std::size_t kReceptiveField = 465;

// Default-architecture frame count.
std::size_t out_length(std::size_t samples);

template <typename T>
struct EncoderState {
  EncoderConfig config;
  std::vector<numkit::Parameter<T>> conv_weight;  // [C_out x C_in x k], no bias
  std::vector<numkit::Parameter<T>> bn_gamma;
  std::vector<numkit::Parameter<T>> bn_beta;
  std::vector<numkit::BatchNormState<T>> bn_stats;
  numkit::Parameter<T> proj_weight;  // [N x C]
  numkit::Parameter<T> proj_bias;    // [N]

  std::vector<numkit::Parameter<T>*> parameters();
  std::vector<const numkit::Parameter<T>*> parameters() const;
  void zero_grad();

  // Trainable elements plus batch-norm running statistics.
  std::size_t parameter_count() const;

  template <typename U>
  EncoderState<U> cast() const;
};

// Uniform ±sqrt(1/fan_in) weights, gamma = 1, beta = 0, running stats (0, 1).
template <typename T>
EncoderState<T> init_encoder(const EncoderConfig& config, std::uint64_t seed);

// Intermediate values kept by a forward pass for the backward pass.
template <typename T>
struct EncoderCache {
  // activations[0] is the input; activations[l + 1] the output of block l.
  std::vector<std::vector<numkit::Tensor<T>>> activations;
  std::vector<numkit::BatchNormCache<T>> bn;
};

// inputs: [1 x T] tensors. Returns [N x L] tensors. Train mode pools batch
// norm statistics over the whole batch and updates the running statistics.
template <typename T>
std::vector<numkit::Tensor<T>> forward_batch(EncoderState<T>& state,
                                             const std::vector<numkit::Tensor<T>>& inputs,
                                             numkit::Mode mode, EncoderCache<T>* cache = nullptr);

template <typename T>
std::vector<numkit::Tensor<T>> forward_eval(const EncoderState<T>& state,
                                            const std::vector<numkit::Tensor<T>>& inputs);

// Accumulates parameter gradients for grad_outputs ([N x L] per item).
template <typename T>
void backward_batch(EncoderState<T>& state, const EncoderCache<T>& cache,
                    const std::vector<numkit::Tensor<T>>& grad_outputs);

// z = f(x): one row per frame. Rows are the raw projection output.
struct FrameEmbeddings {
  numkit::Tensor<float> vectors;  // [L x N]
  std::size_t hop_samples = kHopSamples;
  std::size_t window_samples = kReceptiveField;
  std::uint32_t sample_rate = kSampleRate;

  std::size_t frames() const { return vectors.empty() ? 0 : vectors.dim(0); }
  std::size_t dim() const { return vectors.empty() ? 0 : vectors.dim(1); }
};

// Checks sample rate and minimum length and converts to a [1 x T] tensor.
template <typename T>
numkit::Tensor<T> waveform_tensor(const EncoderConfig& config, const Waveform& wave);

FrameEmbeddings encode(const EncoderState<float>& state, const Waveform& wave);
FrameEmbeddings encode(EncoderState<float>& state, const Waveform& wave, numkit::Mode mode);

}  // namespace unsupseg

#endif  // UNSUPSEG_ENCODER_HPP_
