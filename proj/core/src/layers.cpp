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

#include "unsupseg/numkit/layers.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>

namespace unsupseg::numkit {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << " x ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace {

std::mutex g_warning_mutex;
WarningHandler g_warning_handler;

// Register tile of the matmul micro-kernel: kRows broadcast rows of A times
// two SIMD vectors of B columns.
#if defined(__AVX512F__)
constexpr std::size_t kVecBytes = 64;
#else
constexpr std::size_t kVecBytes = 32;
#endif
constexpr std::size_t kTileRows = 6;
constexpr std::size_t kDepthBlock = 256;

template <typename T>
constexpr std::size_t tile_cols() {
  return 2 * kVecBytes / sizeof(T);
}

// Continues the accumulation held in `tile` over `depth` more k steps. The
// accumulators are stored and reloaded exactly, so splitting k into blocks
// does not change any element's reduction order.
template <typename T>
void micro_kernel(const T* __restrict a_panel, const T* __restrict b_panel, std::size_t depth,
                  T* __restrict tile) {
  typedef T Vec __attribute__((vector_size(kVecBytes), aligned(alignof(T)), may_alias));
  constexpr std::size_t kLanes = kVecBytes / sizeof(T);
  constexpr std::size_t kCols = tile_cols<T>();
  static_assert(kCols == 2 * kLanes);
  Vec acc[kTileRows][2];
  for (std::size_t r = 0; r < kTileRows; ++r) {
    acc[r][0] = *reinterpret_cast<const Vec*>(tile + r * kCols);
    acc[r][1] = *reinterpret_cast<const Vec*>(tile + r * kCols + kLanes);
  }
  for (std::size_t k = 0; k < depth; ++k) {
    const Vec b0 = *reinterpret_cast<const Vec*>(b_panel + k * kCols);
    const Vec b1 = *reinterpret_cast<const Vec*>(b_panel + k * kCols + kLanes);
    const T* a = a_panel + k * kTileRows;
#pragma GCC unroll 6
    for (std::size_t r = 0; r < kTileRows; ++r) {
      acc[r][0] += b0 * a[r];
      acc[r][1] += b1 * a[r];
    }
  }
  for (std::size_t r = 0; r < kTileRows; ++r) {
    *reinterpret_cast<Vec*>(tile + r * kCols) = acc[r][0];
    *reinterpret_cast<Vec*>(tile + r * kCols + kLanes) = acc[r][1];
  }
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

void require_rank(const Shape& shape, std::size_t rank, const char* what) {
  require(shape.size() == rank, std::string(what) + " must have rank " + std::to_string(rank) +
                                    ", got " + shape_to_string(shape));
}

// col[(ci * k + j) * t_out + t] = input[ci][t * stride + j]
template <typename T>
std::vector<T> im2col(const Tensor<T>& input, std::size_t kernel, std::size_t stride,
                      std::size_t t_out) {
  const std::size_t c_in = input.dim(0);
  std::vector<T> col(c_in * kernel * t_out);
  for (std::size_t ci = 0; ci < c_in; ++ci) {
    const T* src = input.raw() + ci * input.dim(1);
    for (std::size_t j = 0; j < kernel; ++j) {
      T* dst = col.data() + (ci * kernel + j) * t_out;
      for (std::size_t t = 0; t < t_out; ++t) dst[t] = src[t * stride + j];
    }
  }
  return col;
}

// Transposed layout: colT[t * (c_in * k) + ci * k + j] = input[ci][t * stride + j]
template <typename T>
std::vector<T> im2col_transposed(const Tensor<T>& input, std::size_t kernel, std::size_t stride,
                                 std::size_t t_out) {
  const std::size_t c_in = input.dim(0);
  const std::size_t width = c_in * kernel;
  std::vector<T> col(width * t_out);
  for (std::size_t t = 0; t < t_out; ++t) {
    T* dst = col.data() + t * width;
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      const T* src = input.raw() + ci * input.dim(1) + t * stride;
      for (std::size_t j = 0; j < kernel; ++j) dst[ci * kernel + j] = src[j];
    }
  }
  return col;
}

template <typename T>
std::vector<T> transpose_buffer(std::span<const T> m, std::size_t rows, std::size_t cols) {
  std::vector<T> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = m[r * cols + c];
  return out;
}

// Row sums accumulated in double, t ascending.
template <typename T>
Tensor<T> row_sums(const Tensor<T>& m) {
  Tensor<T> out({m.dim(0)});
  for (std::size_t r = 0; r < m.dim(0); ++r) {
    double s = 0.0;
    for (T v : m.row(r)) s += static_cast<double>(v);
    out[r] = static_cast<T>(s);
  }
  return out;
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(g_warning_mutex);
  g_warning_handler = std::move(handler);
}

void warn(std::string_view message) {
  std::lock_guard<std::mutex> lock(g_warning_mutex);
  if (g_warning_handler) {
    g_warning_handler(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

std::size_t conv_out_length(std::size_t length, std::size_t kernel, std::size_t stride) {
  require(kernel >= 1, "kernel size must be >= 1");
  require(stride >= 1, "stride must be >= 1");
  if (length < kernel) {
    throw InputTooShortError("input of length " + std::to_string(length) +
                                 " is too short: at least " + std::to_string(kernel) +
                                 " samples required",
                             kernel);
  }
  return (length - kernel) / stride + 1;
}

template <typename T>
void matmul_accumulate(std::span<const T> a, std::span<const T> b, std::span<T> c, std::size_t m,
                       std::size_t k, std::size_t n) {
  require(a.size() == m * k && b.size() == k * n && c.size() == m * n,
          "matmul_accumulate: buffer sizes do not match m/k/n");
  if (m == 0 || n == 0) return;
  constexpr std::size_t kCols = tile_cols<T>();
  const std::size_t row_blocks = (m + kTileRows - 1) / kTileRows;

  // A packed per row block as k-major panels, zero padded.
  std::vector<T> packed_a(row_blocks * k * kTileRows, T(0));
  for (std::size_t rb = 0; rb < row_blocks; ++rb) {
    T* panel = packed_a.data() + rb * k * kTileRows;
    for (std::size_t r = 0; r < kTileRows; ++r) {
      const std::size_t row = rb * kTileRows + r;
      if (row >= m) break;
      const T* src = a.data() + row * k;
      for (std::size_t kk = 0; kk < k; ++kk) panel[kk * kTileRows + r] = src[kk];
    }
  }

  std::vector<T> packed_b(k * kCols);
  std::vector<T> tiles(row_blocks * kTileRows * kCols);
  for (std::size_t j0 = 0; j0 < n; j0 += kCols) {
    const std::size_t width = std::min(kCols, n - j0);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const T* src = b.data() + kk * n + j0;
      T* dst = packed_b.data() + kk * kCols;
      std::size_t j = 0;
      for (; j < width; ++j) dst[j] = src[j];
      for (; j < kCols; ++j) dst[j] = T(0);
    }
    std::fill(tiles.begin(), tiles.end(), T(0));
    for (std::size_t k0 = 0; k0 < k; k0 += kDepthBlock) {
      const std::size_t depth = std::min(kDepthBlock, k - k0);
      for (std::size_t rb = 0; rb < row_blocks; ++rb) {
        micro_kernel(packed_a.data() + (rb * k + k0) * kTileRows, packed_b.data() + k0 * kCols, depth,
                     tiles.data() + rb * kTileRows * kCols);
      }
    }
    for (std::size_t rb = 0; rb < row_blocks; ++rb) {
      const std::size_t rows = std::min(kTileRows, m - rb * kTileRows);
      const T* tile = tiles.data() + rb * kTileRows * kCols;
      for (std::size_t r = 0; r < rows; ++r) {
        T* dst = c.data() + (rb * kTileRows + r) * n + j0;
        for (std::size_t j = 0; j < width; ++j) dst[j] += tile[r * kCols + j];
      }
    }
  }
}

template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& input, const Tensor<T>& weight, std::size_t stride) {
  require_rank(input.shape(), 2, "conv1d input");
  require_rank(weight.shape(), 3, "conv1d weight");
  require(weight.dim(1) == input.dim(0),
          "conv1d: weight expects " + std::to_string(weight.dim(1)) + " input channels, input has " +
              std::to_string(input.dim(0)));
  const std::size_t c_out = weight.dim(0), c_in = input.dim(0), kernel = weight.dim(2);
  const std::size_t t_out = conv_out_length(input.dim(1), kernel, stride);
  const std::vector<T> col = im2col(input, kernel, stride, t_out);
  Tensor<T> out({c_out, t_out});
  matmul_accumulate<T>(weight.data(), col, out.data(), c_out, c_in * kernel, t_out);
  return out;
}

template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                         std::size_t stride) {
  require_rank(weight.shape(), 3, "conv1d weight");
  require(bias.rank() == 1 && bias.dim(0) == weight.dim(0), "conv1d: bias must have shape [C_out]");
  // Bias is added after the (c', j) reduction.
  Tensor<T> out = conv1d_forward(input, weight, stride);
  for (std::size_t c = 0; c < out.dim(0); ++c)
    for (T& v : out.row(c)) v = bias[c] + v;
  return out;
}

template <typename T>
Conv1dGrads<T> conv1d_backward(const Tensor<T>& grad_out, const Tensor<T>& saved_input,
                               const Tensor<T>& weight, std::size_t stride) {
  require_rank(grad_out.shape(), 2, "conv1d grad_out");
  require_rank(saved_input.shape(), 2, "conv1d saved input");
  require_rank(weight.shape(), 3, "conv1d weight");
  const std::size_t c_out = weight.dim(0), c_in = weight.dim(1), kernel = weight.dim(2);
  require(saved_input.dim(0) == c_in, "conv1d_backward: input channel mismatch");
  const std::size_t t_out = conv_out_length(saved_input.dim(1), kernel, stride);
  require(grad_out.dim(0) == c_out && grad_out.dim(1) == t_out,
          "conv1d_backward: grad_out shape " + shape_to_string(grad_out.shape()) +
              " does not match forward output [" + std::to_string(c_out) + " x " +
              std::to_string(t_out) + "]");
  const std::size_t width = c_in * kernel;

  Conv1dGrads<T> grads{Tensor<T>(saved_input.shape()), Tensor<T>(weight.shape()), row_sums(grad_out)};

  const std::vector<T> col_t = im2col_transposed(saved_input, kernel, stride, t_out);
  matmul_accumulate<T>(grad_out.data(), col_t, grads.weight.data(), c_out, t_out, width);

  const std::vector<T> weight_t = transpose_buffer<T>(weight.data(), c_out, width);
  std::vector<T> grad_col(width * t_out, T(0));
  matmul_accumulate<T>(weight_t, grad_out.data(), grad_col, width, c_out, t_out);

  const std::size_t t_in = saved_input.dim(1);
  for (std::size_t ci = 0; ci < c_in; ++ci) {
    T* dst = grads.input.raw() + ci * t_in;
    for (std::size_t j = 0; j < kernel; ++j) {
      const T* src = grad_col.data() + (ci * kernel + j) * t_out;
      for (std::size_t t = 0; t < t_out; ++t) dst[t * stride + j] += src[t];
    }
  }
  return grads;
}

template <typename T>
std::vector<Tensor<T>> batchnorm_train(std::span<const Tensor<T>> batch, const Tensor<T>& gamma,
                                       const Tensor<T>& beta, BatchNormState<T>& stats,
                                       const BatchNormOptions& options, BatchNormCache<T>* cache) {
  require(!batch.empty(), "batchnorm: empty batch");
  require(options.eps > 0.0, "batchnorm: eps must be positive");
  const std::size_t channels = batch.front().dim(0);
  require(gamma.size() == channels && beta.size() == channels &&
              stats.running_mean.size() == channels && stats.running_var.size() == channels,
          "batchnorm: parameter shapes do not match " + std::to_string(channels) + " channels");
  std::size_t count = 0;
  for (const auto& item : batch) {
    require_rank(item.shape(), 2, "batchnorm input");
    require(item.dim(0) == channels, "batchnorm: channel count differs across the batch");
    count += item.dim(1);
  }

  std::vector<double> mean(channels, 0.0), var(channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    double s = 0.0;
    for (const auto& item : batch)
      for (T v : item.row(c)) s += static_cast<double>(v);
    mean[c] = s / static_cast<double>(count);
    double q = 0.0;
    for (const auto& item : batch)
      for (T v : item.row(c)) {
        const double d = static_cast<double>(v) - mean[c];
        q += d * d;
      }
    var[c] = q / static_cast<double>(count);
  }

  std::vector<T> inv_std(channels);
  for (std::size_t c = 0; c < channels; ++c)
    inv_std[c] = static_cast<T>(1.0 / std::sqrt(var[c] + options.eps));

  std::vector<Tensor<T>> out;
  out.reserve(batch.size());
  if (cache) {
    cache->normalized.clear();
    cache->normalized.reserve(batch.size());
    cache->mode = Mode::kTrain;
    cache->inv_std = inv_std;
  }
  for (const auto& item : batch) {
    Tensor<T> x_hat(item.shape());
    Tensor<T> y(item.shape());
    for (std::size_t c = 0; c < channels; ++c) {
      const T m = static_cast<T>(mean[c]);
      const T is = inv_std[c];
      const T g = gamma[c], b = beta[c];
      auto src = item.row(c);
      auto xh = x_hat.row(c);
      auto dst = y.row(c);
      for (std::size_t t = 0; t < src.size(); ++t) {
        xh[t] = (src[t] - m) * is;
        dst[t] = g * xh[t] + b;
      }
    }
    out.push_back(std::move(y));
    if (cache) cache->normalized.push_back(std::move(x_hat));
  }

  const double unbias = count > 1 ? static_cast<double>(count) / static_cast<double>(count - 1) : 1.0;
  for (std::size_t c = 0; c < channels; ++c) {
    stats.running_mean[c] = static_cast<T>((1.0 - options.momentum) * stats.running_mean[c] +
                                           options.momentum * mean[c]);
    stats.running_var[c] = static_cast<T>((1.0 - options.momentum) * stats.running_var[c] +
                                          options.momentum * var[c] * unbias);
  }
  ++stats.updates;
  return out;
}

template <typename T>
std::vector<Tensor<T>> batchnorm_eval(std::span<const Tensor<T>> batch, const Tensor<T>& gamma,
                                      const Tensor<T>& beta, const BatchNormState<T>& stats,
                                      const BatchNormOptions& options, BatchNormCache<T>* cache) {
  require(options.eps > 0.0, "batchnorm: eps must be positive");
  require(!batch.empty(), "batchnorm: empty batch");
  const std::size_t channels = batch.front().dim(0);
  require(gamma.size() == channels && beta.size() == channels &&
              stats.running_mean.size() == channels && stats.running_var.size() == channels,
          "batchnorm: parameter shapes do not match " + std::to_string(channels) + " channels");

  std::vector<T> mean(channels, T(0)), inv_std(channels);
  if (stats.updates == 0) {
    warn("batchnorm eval mode without tracked running statistics; using mean 0, variance 1");
    for (auto& v : inv_std) v = static_cast<T>(1.0 / std::sqrt(1.0 + options.eps));
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mean[c] = stats.running_mean[c];
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(stats.running_var[c]) + options.eps));
    }
  }

  std::vector<Tensor<T>> out;
  out.reserve(batch.size());
  if (cache) {
    cache->normalized.clear();
    cache->mode = Mode::kEval;
    cache->inv_std = inv_std;
  }
  for (const auto& item : batch) {
    require_rank(item.shape(), 2, "batchnorm input");
    require(item.dim(0) == channels, "batchnorm: channel count differs across the batch");
    Tensor<T> x_hat(item.shape());
    Tensor<T> y(item.shape());
    for (std::size_t c = 0; c < channels; ++c) {
      auto src = item.row(c);
      auto xh = x_hat.row(c);
      auto dst = y.row(c);
      for (std::size_t t = 0; t < src.size(); ++t) {
        xh[t] = (src[t] - mean[c]) * inv_std[c];
        dst[t] = gamma[c] * xh[t] + beta[c];
      }
    }
    out.push_back(std::move(y));
    if (cache) cache->normalized.push_back(std::move(x_hat));
  }
  return out;
}

template <typename T>
Tensor<T> batchnorm(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta,
                    BatchNormState<T>& stats, Mode mode, const BatchNormOptions& options,
                    BatchNormCache<T>* cache) {
  std::span<const Tensor<T>> one(&input, 1);
  auto out = mode == Mode::kTrain ? batchnorm_train(one, gamma, beta, stats, options, cache)
                                  : batchnorm_eval(one, gamma, beta, stats, options, cache);
  return std::move(out.front());
}

template <typename T>
BatchNormGrads<T> batchnorm_backward(std::span<const Tensor<T>> grad_out, const Tensor<T>& gamma,
                                     const BatchNormCache<T>& cache) {
  require(grad_out.size() == cache.normalized.size(), "batchnorm_backward: batch size mismatch");
  const std::size_t channels = cache.inv_std.size();
  require(gamma.size() == channels, "batchnorm_backward: gamma shape mismatch");
  std::size_t count = 0;
  for (std::size_t b = 0; b < grad_out.size(); ++b) {
    require(grad_out[b].shape() == cache.normalized[b].shape(),
            "batchnorm_backward: grad_out shape " + shape_to_string(grad_out[b].shape()) +
                " does not match cached " + shape_to_string(cache.normalized[b].shape()));
    count += grad_out[b].dim(1);
  }

  BatchNormGrads<T> grads{{}, Tensor<T>({channels}), Tensor<T>({channels})};
  std::vector<double> sum_dy(channels, 0.0), sum_dy_xhat(channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t b = 0; b < grad_out.size(); ++b) {
      auto dy = grad_out[b].row(c);
      auto xh = cache.normalized[b].row(c);
      for (std::size_t t = 0; t < dy.size(); ++t) {
        sum_dy[c] += static_cast<double>(dy[t]);
        sum_dy_xhat[c] += static_cast<double>(dy[t]) * static_cast<double>(xh[t]);
      }
    }
    grads.gamma[c] = static_cast<T>(sum_dy_xhat[c]);
    grads.beta[c] = static_cast<T>(sum_dy[c]);
  }

  grads.input.reserve(grad_out.size());
  const double n = static_cast<double>(count);
  for (std::size_t b = 0; b < grad_out.size(); ++b) {
    Tensor<T> dx(grad_out[b].shape());
    for (std::size_t c = 0; c < channels; ++c) {
      auto dy = grad_out[b].row(c);
      auto xh = cache.normalized[b].row(c);
      auto dst = dx.row(c);
      const T scale = gamma[c] * cache.inv_std[c];
      if (cache.mode == Mode::kEval) {
        for (std::size_t t = 0; t < dy.size(); ++t) dst[t] = scale * dy[t];
      } else {
        const T mean_dy = static_cast<T>(sum_dy[c] / n);
        const T mean_dy_xhat = static_cast<T>(sum_dy_xhat[c] / n);
        for (std::size_t t = 0; t < dy.size(); ++t)
          dst[t] = scale * (dy[t] - mean_dy - xh[t] * mean_dy_xhat);
      }
    }
    grads.input.push_back(std::move(dx));
  }
  return grads;
}

template <typename T>
Tensor<T> leaky_relu_forward(const Tensor<T>& input, T slope) {
  Tensor<T> out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= T(0) ? src[i] : slope * src[i];
  return out;
}

template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& grad_out, const Tensor<T>& saved, T slope) {
  require(grad_out.shape() == saved.shape(), "leaky_relu_backward: shape mismatch");
  Tensor<T> out(grad_out.shape());
  auto g = grad_out.data();
  auto s = saved.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] = s[i] >= T(0) ? g[i] : slope * g[i];
  return out;
}

template <typename T>
Tensor<T> linear_forward(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank(input.shape(), 2, "linear input");
  require_rank(weight.shape(), 2, "linear weight");
  require(weight.dim(1) == input.dim(0),
          "linear: weight " + shape_to_string(weight.shape()) + " incompatible with input " +
              shape_to_string(input.shape()));
  require(bias.rank() == 1 && bias.dim(0) == weight.dim(0), "linear: bias must have shape [N]");
  const std::size_t n = weight.dim(0), c = weight.dim(1), frames = input.dim(1);
  Tensor<T> out({n, frames});
  matmul_accumulate<T>(weight.data(), input.data(), out.data(), n, c, frames);
  for (std::size_t r = 0; r < n; ++r)
    for (T& v : out.row(r)) v = bias[r] + v;
  return out;
}

template <typename T>
LinearGrads<T> linear_backward(const Tensor<T>& grad_out, const Tensor<T>& saved_input,
                               const Tensor<T>& weight) {
  require_rank(grad_out.shape(), 2, "linear grad_out");
  require_rank(saved_input.shape(), 2, "linear saved input");
  require_rank(weight.shape(), 2, "linear weight");
  const std::size_t n = weight.dim(0), c = weight.dim(1), frames = saved_input.dim(1);
  require(saved_input.dim(0) == c && grad_out.dim(0) == n && grad_out.dim(1) == frames,
          "linear_backward: grad_out " + shape_to_string(grad_out.shape()) + " / input " +
              shape_to_string(saved_input.shape()) + " inconsistent with weight " +
              shape_to_string(weight.shape()));
  LinearGrads<T> grads{Tensor<T>(saved_input.shape()), Tensor<T>(weight.shape()), row_sums(grad_out)};
  const std::vector<T> input_t = transpose_buffer<T>(saved_input.data(), c, frames);
  matmul_accumulate<T>(grad_out.data(), input_t, grads.weight.data(), n, frames, c);
  const std::vector<T> weight_t = transpose_buffer<T>(weight.data(), n, c);
  matmul_accumulate<T>(weight_t, grad_out.data(), grads.input.data(), c, n, frames);
  return grads;
}

#define UNSUPSEG_INSTANTIATE_LAYERS(T)                                                             \
  template void matmul_accumulate<T>(std::span<const T>, std::span<const T>, std::span<T>,        \
                                     std::size_t, std::size_t, std::size_t);                      \
  template Tensor<T> conv1d_forward<T>(const Tensor<T>&, const Tensor<T>&, std::size_t);          \
  template Tensor<T> conv1d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,      \
                                       std::size_t);                                              \
  template Conv1dGrads<T> conv1d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                             std::size_t);                                        \
  template std::vector<Tensor<T>> batchnorm_train<T>(std::span<const Tensor<T>>, const Tensor<T>&, \
                                                     const Tensor<T>&, BatchNormState<T>&,         \
                                                     const BatchNormOptions&, BatchNormCache<T>*); \
  template std::vector<Tensor<T>> batchnorm_eval<T>(std::span<const Tensor<T>>, const Tensor<T>&,  \
                                                    const Tensor<T>&, const BatchNormState<T>&,    \
                                                    const BatchNormOptions&, BatchNormCache<T>*);  \
  template Tensor<T> batchnorm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,           \
                                  BatchNormState<T>&, Mode, const BatchNormOptions&,              \
                                  BatchNormCache<T>*);                                            \
  template BatchNormGrads<T> batchnorm_backward<T>(std::span<const Tensor<T>>, const Tensor<T>&,  \
                                                   const BatchNormCache<T>&);                     \
  template Tensor<T> leaky_relu_forward<T>(const Tensor<T>&, T);                                  \
  template Tensor<T> leaky_relu_backward<T>(const Tensor<T>&, const Tensor<T>&, T);               \
  template Tensor<T> linear_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);     \
  template LinearGrads<T> linear_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);

UNSUPSEG_INSTANTIATE_LAYERS(float)
UNSUPSEG_INSTANTIATE_LAYERS(double)

#undef UNSUPSEG_INSTANTIATE_LAYERS

}  // namespace unsupseg::numkit
