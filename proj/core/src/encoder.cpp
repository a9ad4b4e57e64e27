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

#include "unsupseg/encoder.hpp"

#include <cmath>
#include <string>

#include "unsupseg/errors.hpp"
#include "unsupseg/rng.hpp"

namespace unsupseg {

using numkit::Mode;
using numkit::Tensor;

void EncoderConfig::validate() const {
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    if (kernel_sizes[l] == 0) throw ConfigError("kernel size of layer " + std::to_string(l) + " must be >= 1");
    if (strides[l] == 0) throw ConfigError("stride of layer " + std::to_string(l) + " must be >= 1");
  }
  if (hop_samples() != kHopSamples) {
    throw ConfigError("strides must multiply to " + std::to_string(kHopSamples) + ", got " +
                      std::to_string(hop_samples()));
  }
  if (channels == 0) throw ConfigError("channels must be >= 1");
  if (projection_dim == 0) throw ConfigError("projection_dim must be >= 1");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("leaky_slope must lie in (0, 1)");
  if (sample_rate != kSampleRate) {
    throw ConfigError("sample_rate must be " + std::to_string(kSampleRate) + " Hz");
  }
  if (!(bn_eps > 0.0)) throw ConfigError("bn_eps must be positive");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) throw ConfigError("bn_momentum must lie in (0, 1]");
}

std::size_t EncoderConfig::hop_samples() const {
  std::size_t hop = 1;
  for (std::size_t s : strides) hop *= s;
  return hop;
}

std::size_t EncoderConfig::receptive_field() const {
  std::size_t field = 1;
  for (std::size_t l = kConvLayers; l-- > 0;) field = (field - 1) * strides[l] + kernel_sizes[l];
  return field;
}

std::size_t EncoderConfig::out_length(std::size_t samples) const {
  if (samples < receptive_field()) {
    throw InputTooShortError("input of " + std::to_string(samples) +
                                 " samples is too short: the encoder needs at least " +
                                 std::to_string(receptive_field()) + " samples",
                             receptive_field());
  }
  std::size_t length = samples;
  for (std::size_t l = 0; l < kConvLayers; ++l)
    length = numkit::conv_out_length(length, kernel_sizes[l], strides[l]);
  return length;
}

std::size_t out_length(std::size_t samples) { return EncoderConfig{}.out_length(samples); }

template <typename T>
std::vector<numkit::Parameter<T>*> EncoderState<T>::parameters() {
  std::vector<numkit::Parameter<T>*> out;
  for (std::size_t l = 0; l < conv_weight.size(); ++l) {
    out.push_back(&conv_weight[l]);
    out.push_back(&bn_gamma[l]);
    out.push_back(&bn_beta[l]);
  }
  out.push_back(&proj_weight);
  out.push_back(&proj_bias);
  return out;
}

template <typename T>
std::vector<const numkit::Parameter<T>*> EncoderState<T>::parameters() const {
  std::vector<const numkit::Parameter<T>*> out;
  for (auto* p : const_cast<EncoderState*>(this)->parameters()) out.push_back(p);
  return out;
}

template <typename T>
void EncoderState<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
std::size_t EncoderState<T>::parameter_count() const {
  std::size_t count = 0;
  for (const auto* p : parameters()) count += p->value.size();
  for (const auto& s : bn_stats) count += s.running_mean.size() + s.running_var.size();
  return count;
}

template <typename T>
template <typename U>
EncoderState<U> EncoderState<T>::cast() const {
  auto convert = [](const numkit::Parameter<T>& p) {
    numkit::Parameter<U> q(p.name, p.value.template cast<U>());
    q.m = p.m.template cast<U>();
    q.v = p.v.template cast<U>();
    q.step_count = p.step_count;
    return q;
  };
  EncoderState<U> out;
  out.config = config;
  for (std::size_t l = 0; l < conv_weight.size(); ++l) {
    out.conv_weight.push_back(convert(conv_weight[l]));
    out.bn_gamma.push_back(convert(bn_gamma[l]));
    out.bn_beta.push_back(convert(bn_beta[l]));
    out.bn_stats.push_back({bn_stats[l].running_mean.template cast<U>(),
                            bn_stats[l].running_var.template cast<U>(), bn_stats[l].updates});
  }
  out.proj_weight = convert(proj_weight);
  out.proj_bias = convert(proj_bias);
  return out;
}

template <typename T>
EncoderState<T> init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, "init"));
  auto uniform_tensor = [&rng](numkit::Shape shape, std::size_t fan_in) {
    Tensor<T> t(std::move(shape));
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (T& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
    return t;
  };

  EncoderState<T> state;
  state.config = config;
  std::size_t in_channels = 1;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const std::string idx = std::to_string(l);
    const std::size_t k = config.kernel_sizes[l];
    state.conv_weight.emplace_back("conv" + idx + ".weight",
                                   uniform_tensor({config.channels, in_channels, k}, in_channels * k));
    state.bn_gamma.emplace_back("bn" + idx + ".gamma", Tensor<T>({config.channels}, T(1)));
    state.bn_beta.emplace_back("bn" + idx + ".beta", Tensor<T>({config.channels}, T(0)));
    state.bn_stats.push_back(numkit::BatchNormState<T>::fresh(config.channels));
    in_channels = config.channels;
  }
  state.proj_weight = numkit::Parameter<T>(
      "proj.weight", uniform_tensor({config.projection_dim, config.channels}, config.channels));
  state.proj_bias =
      numkit::Parameter<T>("proj.bias", uniform_tensor({config.projection_dim}, config.channels));
  return state;
}

namespace {

template <typename T>
std::vector<Tensor<T>> run_forward(const EncoderState<T>& state,
                                   std::vector<numkit::BatchNormState<T>>* train_stats,
                                   const std::vector<Tensor<T>>& inputs, EncoderCache<T>* cache) {
  if (inputs.empty()) throw ContractError("forward_batch: empty batch");
  const EncoderConfig& cfg = state.config;
  const numkit::BatchNormOptions bn_options{cfg.bn_momentum, cfg.bn_eps};
  const T slope = static_cast<T>(cfg.leaky_slope);
  for (const auto& x : inputs) {
    if (x.rank() != 2 || x.dim(0) != 1) {
      throw ContractError("encoder input must be [1 x T], got " + numkit::shape_to_string(x.shape()));
    }
    cfg.out_length(x.dim(1));
  }

  if (cache) {
    cache->activations.assign(kConvLayers + 1, {});
    cache->bn.assign(kConvLayers, {});
    cache->activations[0] = inputs;
  }

  std::vector<Tensor<T>> current = inputs;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    std::vector<Tensor<T>> conv;
    conv.reserve(current.size());
    for (const auto& x : current)
      conv.push_back(numkit::conv1d_forward(x, state.conv_weight[l].value, cfg.strides[l]));
    numkit::BatchNormCache<T>* bn_cache = cache ? &cache->bn[l] : nullptr;
    std::vector<Tensor<T>> normed =
        train_stats ? numkit::batchnorm_train<T>(conv, state.bn_gamma[l].value, state.bn_beta[l].value,
                                                 (*train_stats)[l], bn_options, bn_cache)
                    : numkit::batchnorm_eval<T>(conv, state.bn_gamma[l].value, state.bn_beta[l].value,
                                                state.bn_stats[l], bn_options, bn_cache);
    current.clear();
    for (const auto& y : normed) current.push_back(numkit::leaky_relu_forward(y, slope));
    if (cache) cache->activations[l + 1] = current;
  }

  std::vector<Tensor<T>> out;
  out.reserve(current.size());
  for (const auto& h : current)
    out.push_back(numkit::linear_forward(h, state.proj_weight.value, state.proj_bias.value));
  return out;
}

}  // namespace

template <typename T>
std::vector<Tensor<T>> forward_batch(EncoderState<T>& state, const std::vector<Tensor<T>>& inputs,
                                     Mode mode, EncoderCache<T>* cache) {
  return run_forward(state, mode == Mode::kTrain ? &state.bn_stats : nullptr, inputs, cache);
}

template <typename T>
std::vector<Tensor<T>> forward_eval(const EncoderState<T>& state, const std::vector<Tensor<T>>& inputs) {
  return run_forward<T>(state, nullptr, inputs, nullptr);
}

template <typename T>
void backward_batch(EncoderState<T>& state, const EncoderCache<T>& cache,
                    const std::vector<Tensor<T>>& grad_outputs) {
  if (cache.activations.size() != kConvLayers + 1 ||
      grad_outputs.size() != cache.activations[0].size()) {
    throw ContractError("backward_batch: cache does not match grad_outputs");
  }
  const EncoderConfig& cfg = state.config;
  const T slope = static_cast<T>(cfg.leaky_slope);

  std::vector<Tensor<T>> grad(grad_outputs.size());
  const auto& proj_in = cache.activations[kConvLayers];
  for (std::size_t b = 0; b < grad_outputs.size(); ++b) {
    auto g = numkit::linear_backward(grad_outputs[b], proj_in[b], state.proj_weight.value);
    state.proj_weight.grad += g.weight;
    state.proj_bias.grad += g.bias;
    grad[b] = std::move(g.input);
  }

  for (std::size_t l = kConvLayers; l-- > 0;) {
    const auto& activated = cache.activations[l + 1];
    for (std::size_t b = 0; b < grad.size(); ++b)
      grad[b] = numkit::leaky_relu_backward(grad[b], activated[b], slope);
    auto bn = numkit::batchnorm_backward<T>(grad, state.bn_gamma[l].value, cache.bn[l]);
    state.bn_gamma[l].grad += bn.gamma;
    state.bn_beta[l].grad += bn.beta;
    const auto& inputs = cache.activations[l];
    for (std::size_t b = 0; b < grad.size(); ++b) {
      auto c = numkit::conv1d_backward(bn.input[b], inputs[b], state.conv_weight[l].value, cfg.strides[l]);
      state.conv_weight[l].grad += c.weight;
      grad[b] = std::move(c.input);
    }
  }
}

template <typename T>
Tensor<T> waveform_tensor(const EncoderConfig& config, const Waveform& wave) {
  if (wave.sample_rate != config.sample_rate) {
    throw ContractError("waveform sample rate " + std::to_string(wave.sample_rate) +
                        " Hz does not match encoder rate " + std::to_string(config.sample_rate) +
                        " Hz (no resampling is performed)");
  }
  config.out_length(wave.size());
  Tensor<T> x({1, wave.size()});
  for (std::size_t i = 0; i < wave.size(); ++i) x[i] = static_cast<T>(wave.samples[i]);
  return x;
}

namespace {

FrameEmbeddings to_embeddings(const EncoderConfig& config, const Tensor<float>& projected) {
  FrameEmbeddings z;
  z.vectors = numkit::transpose(projected);
  z.hop_samples = config.hop_samples();
  z.window_samples = config.receptive_field();
  z.sample_rate = config.sample_rate;
  return z;
}

}  // namespace

FrameEmbeddings encode(const EncoderState<float>& state, const Waveform& wave) {
  auto out = forward_eval(state, {waveform_tensor<float>(state.config, wave)});
  return to_embeddings(state.config, out.front());
}

FrameEmbeddings encode(EncoderState<float>& state, const Waveform& wave, Mode mode) {
  auto out = forward_batch(state, {waveform_tensor<float>(state.config, wave)}, mode);
  return to_embeddings(state.config, out.front());
}

#define UNSUPSEG_INSTANTIATE_ENCODER(T)                                                           \
  template struct EncoderState<T>;                                                               \
  template EncoderState<T> init_encoder<T>(const EncoderConfig&, std::uint64_t);                 \
  template std::vector<Tensor<T>> forward_batch<T>(EncoderState<T>&, const std::vector<Tensor<T>>&, \
                                                   Mode, EncoderCache<T>*);                       \
  template std::vector<Tensor<T>> forward_eval<T>(const EncoderState<T>&,                        \
                                                  const std::vector<Tensor<T>>&);                \
  template void backward_batch<T>(EncoderState<T>&, const EncoderCache<T>&,                      \
                                  const std::vector<Tensor<T>>&);                                \
  template Tensor<T> waveform_tensor<T>(const EncoderConfig&, const Waveform&);

UNSUPSEG_INSTANTIATE_ENCODER(float)
UNSUPSEG_INSTANTIATE_ENCODER(double)

template EncoderState<double> EncoderState<float>::cast<double>() const;
template EncoderState<float> EncoderState<double>::cast<float>() const;
template EncoderState<float> EncoderState<float>::cast<float>() const;

#undef UNSUPSEG_INSTANTIATE_ENCODER

}  // namespace unsupseg
