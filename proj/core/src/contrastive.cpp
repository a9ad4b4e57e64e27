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

#include "unsupseg/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unsupseg/errors.hpp"

namespace unsupseg {

NegativeSample sample_negatives(std::size_t frames, std::size_t reference, std::size_t k, Rng& rng) {
  if (frames < 2) throw ContractError("sample_negatives: need at least 2 frames, got " + std::to_string(frames));
  if (reference + 1 >= frames) {
    throw ContractError("sample_negatives: reference " + std::to_string(reference) +
                        " out of range [0, " + std::to_string(frames - 1) + ")");
  }
  if (k == 0) throw ContractError("sample_negatives: K must be >= 1");

  std::vector<std::size_t> candidates;
  candidates.reserve(frames);
  for (std::size_t j = 0; j < frames; ++j) {
    const std::size_t distance = j > reference ? j - reference : reference - j;
    if (distance > 1) candidates.push_back(j);
  }

  NegativeSample sample{reference, {}};
  if (candidates.empty()) return sample;
  sample.negatives.reserve(k);
  if (candidates.size() >= k) {
    // Partial Fisher-Yates.
    for (std::size_t n = 0; n < k; ++n) {
      const std::size_t pick = n + static_cast<std::size_t>(rng.below(candidates.size() - n));
      std::swap(candidates[n], candidates[pick]);
      sample.negatives.push_back(candidates[n]);
    }
  } else {
    for (std::size_t n = 0; n < k; ++n)
      sample.negatives.push_back(candidates[static_cast<std::size_t>(rng.below(candidates.size()))]);
  }
  return sample;
}

std::vector<NegativeSample> sample_all_negatives(std::size_t frames, std::size_t k, Rng& rng) {
  std::vector<NegativeSample> out;
  if (frames < 2) return out;
  out.reserve(frames - 1);
  for (std::size_t i = 0; i + 1 < frames; ++i) {
    NegativeSample s = sample_negatives(frames, i, k, rng);
    if (!s.negatives.empty()) out.push_back(std::move(s));
  }
  return out;
}

template <typename T>
NceResult nce_loss_sum(const numkit::Tensor<T>& z, std::span<const NegativeSample> negatives,
                       numkit::Tensor<T>* grad_z, double grad_scale) {
  if (z.rank() != 2) throw ContractError("nce_loss: embeddings must be [L x N]");
  const std::size_t frames = z.dim(0), dim = z.dim(1);
  if (frames < 2) throw ContractError("nce_loss: need at least 2 frames");
  if (grad_z && grad_z->shape() != z.shape()) throw ContractError("nce_loss: grad_z shape mismatch");

  std::vector<double> norm(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double s = 0.0;
    for (T v : z.row(i)) s += static_cast<double>(v) * static_cast<double>(v);
    norm[i] = std::sqrt(s);
    if (!(norm[i] > 0.0)) {
      throw ContractError("nce_loss: frame " + std::to_string(i) +
                          " has zero norm; cosine similarity is undefined");
    }
  }

  auto dot = [&](std::size_t a, std::size_t b) {
    auto ra = z.row(a);
    auto rb = z.row(b);
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += static_cast<double>(ra[d]) * static_cast<double>(rb[d]);
    return s;
  };

  NceResult result;
  std::vector<std::size_t> targets;
  std::vector<double> sims, weights;
  for (const NegativeSample& sample : negatives) {
    const std::size_t i = sample.reference;
    if (i + 1 >= frames) throw ContractError("nce_loss: reference frame " + std::to_string(i) + " out of range");
    if (sample.negatives.empty()) continue;
    targets.assign(1, i + 1);
    for (std::size_t j : sample.negatives) {
      if (j >= frames) throw ContractError("nce_loss: negative index " + std::to_string(j) + " out of range");
      targets.push_back(j);
    }
    sims.resize(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t)
      sims[t] = dot(i, targets[t]) / (norm[i] * norm[targets[t]]);
    const double peak = *std::max_element(sims.begin(), sims.end());
    double denom = 0.0;
    for (double s : sims) denom += std::exp(s - peak);
    const double log_denom = peak + std::log(denom);
    result.loss_sum += log_denom - sims[0];
    ++result.terms;

    if (!grad_z) continue;
    // d loss / d sim_t = softmax_t - [t == 0]
    weights.resize(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t)
      weights[t] = (std::exp(sims[t] - log_denom) - (t == 0 ? 1.0 : 0.0)) * grad_scale;
    auto gi = grad_z->row(i);
    auto zi = z.row(i);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const std::size_t j = targets[t];
      const double w = weights[t];
      auto zj = z.row(j);
      auto gj = grad_z->row(j);
      const double inv = 1.0 / (norm[i] * norm[j]);
      const double ci = sims[t] / (norm[i] * norm[i]);
      const double cj = sims[t] / (norm[j] * norm[j]);
      for (std::size_t d = 0; d < dim; ++d) {
        const double ui = zi[d], vj = zj[d];
        gi[d] += static_cast<T>(w * (vj * inv - ci * ui));
        gj[d] += static_cast<T>(w * (ui * inv - cj * vj));
      }
    }
  }
  return result;
}

template <typename T>
double nce_loss(const numkit::Tensor<T>& z, std::span<const NegativeSample> negatives,
                numkit::Tensor<T>* grad_z) {
  std::size_t terms = 0;
  for (const auto& s : negatives) terms += s.negatives.empty() ? 0 : 1;
  if (grad_z) *grad_z = numkit::Tensor<T>(z.shape());
  const double scale = terms ? 1.0 / static_cast<double>(terms) : 0.0;
  return nce_loss_sum(z, negatives, grad_z, scale).mean();
}

double nce_loss(const FrameEmbeddings& z, std::span<const NegativeSample> negatives) {
  return nce_loss<float>(z.vectors, negatives, nullptr);
}

template NceResult nce_loss_sum<float>(const numkit::Tensor<float>&, std::span<const NegativeSample>,
                                       numkit::Tensor<float>*, double);
template NceResult nce_loss_sum<double>(const numkit::Tensor<double>&, std::span<const NegativeSample>,
                                        numkit::Tensor<double>*, double);
template double nce_loss<float>(const numkit::Tensor<float>&, std::span<const NegativeSample>,
                                numkit::Tensor<float>*);
template double nce_loss<double>(const numkit::Tensor<double>&, std::span<const NegativeSample>,
                                 numkit::Tensor<double>*);

}  // namespace unsupseg
