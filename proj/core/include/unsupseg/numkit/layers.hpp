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

#ifndef UNSUPSEG_NUMKIT_LAYERS_HPP_
#define UNSUPSEG_NUMKIT_LAYERS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "unsupseg/numkit/tensor.hpp"

namespace unsupseg::numkit {

// Layer primitives of the waveform encoder. Activations are [channels x time]
// tensors; a batch is a list of such tensors that may differ in length.
//
// Reduction order (forward and backward) is fixed and does not depend on the
// sequence length or on where an element sits inside a tile:
//   conv/linear forward: out[c][t] = bias[c] + (sum over (c', j) ascending)
//   grad weight:         sum over t ascending
//   grad input:          sum over output channels ascending, then col2im
//                        scatter in ascending (c', j) order
//   batch norm stats:    64-bit accumulation over (batch item, t) ascending

enum class Mode { kTrain, kEval };

// Called for warning-level conditions (e.g. eval with untracked statistics).
using WarningHandler = std::function<void(std::string_view)>;
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

// Valid-convolution output length; throws InputTooShortError when length < kernel.
std::size_t conv_out_length(std::size_t length, std::size_t kernel, std::size_t stride);

// ---- 1-D strided convolution -------------------------------------------------

// input [C_in x T], weight [C_out x C_in x k], bias [C_out] -> [C_out x T_out].
template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                         std::size_t stride);

// Bias-free variant (the encoder's convolutions feed batch norm).
template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& input, const Tensor<T>& weight, std::size_t stride);

template <typename T>
struct Conv1dGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
Conv1dGrads<T> conv1d_backward(const Tensor<T>& grad_out, const Tensor<T>& saved_input,
                               const Tensor<T>& weight, std::size_t stride);

// ---- batch normalization -----------------------------------------------------

struct BatchNormOptions {
  double momentum = 0.1;
  double eps = 1e-5;
};

template <typename T>
struct BatchNormState {
  Tensor<T> running_mean;
  Tensor<T> running_var;
  std::uint64_t updates = 0;

  static BatchNormState fresh(std::size_t channels) {
    return {Tensor<T>({channels}, T(0)), Tensor<T>({channels}, T(1)), 0};
  }
};

template <typename T>
struct BatchNormCache {
  std::vector<Tensor<T>> normalized;  // x_hat per batch item
  std::vector<T> inv_std;             // per channel
  Mode mode = Mode::kTrain;
};

// Train mode: per-channel statistics pooled over every (item, t) of the batch;
// running stats updated by EMA with the unbiased variance.
template <typename T>
std::vector<Tensor<T>> batchnorm_train(std::span<const Tensor<T>> batch, const Tensor<T>& gamma,
                                       const Tensor<T>& beta, BatchNormState<T>& stats,
                                       const BatchNormOptions& options, BatchNormCache<T>* cache);

// Eval mode: running statistics. Warns and uses (0, 1) when none were tracked.
template <typename T>
std::vector<Tensor<T>> batchnorm_eval(std::span<const Tensor<T>> batch, const Tensor<T>& gamma,
                                      const Tensor<T>& beta, const BatchNormState<T>& stats,
                                      const BatchNormOptions& options, BatchNormCache<T>* cache);

// Single-tensor convenience over the two modes.
template <typename T>
Tensor<T> batchnorm(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta,
                    BatchNormState<T>& stats, Mode mode, const BatchNormOptions& options,
                    BatchNormCache<T>* cache = nullptr);

template <typename T>
struct BatchNormGrads {
  std::vector<Tensor<T>> input;
  Tensor<T> gamma;
  Tensor<T> beta;
};

template <typename T>
BatchNormGrads<T> batchnorm_backward(std::span<const Tensor<T>> grad_out, const Tensor<T>& gamma,
                                     const BatchNormCache<T>& cache);

// ---- leaky ReLU --------------------------------------------------------------

template <typename T>
Tensor<T> leaky_relu_forward(const Tensor<T>& input, T slope = T(0.01));

// `saved` may be the forward input or output; only its sign is used.
template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& grad_out, const Tensor<T>& saved, T slope = T(0.01));

// ---- per-frame linear projection ---------------------------------------------

// input [C x T], weight [N x C], bias [N] -> [N x T].
template <typename T>
Tensor<T> linear_forward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
struct LinearGrads {
  Tensor<T> input;
  Tensor<T> weight;
  Tensor<T> bias;
};

template <typename T>
LinearGrads<T> linear_backward(const Tensor<T>& grad_out, const Tensor<T>& saved_input,
                               const Tensor<T>& weight);

// C[M x N] += A[M x K] * B[K x N], all row-major. Each output element is
// accumulated over k ascending in a private accumulator and then added to C,
// so the result for an element does not depend on M, N or its position.
template <typename T>
void matmul_accumulate(std::span<const T> a, std::span<const T> b, std::span<T> c, std::size_t m,
                       std::size_t k, std::size_t n);

}  // namespace unsupseg::numkit

#endif  // UNSUPSEG_NUMKIT_LAYERS_HPP_
