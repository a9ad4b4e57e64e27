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

#ifndef UNSUPSEG_CONTRASTIVE_HPP_
#define UNSUPSEG_CONTRASTIVE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "unsupseg/encoder.hpp"
#include "unsupseg/numkit/tensor.hpp"
#include "unsupseg/rng.hpp"

namespace unsupseg {

// Distractors for one reference frame i: frames j of the same sequence with
// |i - j| > 1.
struct NegativeSample {
  std::size_t reference = 0;
  std::vector<std::size_t> negatives;
};

// K indices drawn uniformly from {j : |i - j| > 1, 0 <= j < frames}; without
// replacement when at least K candidates exist, with replacement otherwise.
// Returns an empty negative list when there is no candidate.
NegativeSample sample_negatives(std::size_t frames, std::size_t reference, std::size_t k, Rng& rng);

// One sample per reference frame 0..frames-2 that has at least one candidate.
std::vector<NegativeSample> sample_all_negatives(std::size_t frames, std::size_t k, Rng& rng);

// Sum over reference frames of
//   -log( exp(cos(z_i, z_{i+1})) / sum_{j in {i+1} ∪ D_K(i)} exp(cos(z_i, z_j)) ).
struct NceResult {
  double loss_sum = 0.0;
  std::size_t terms = 0;

  double mean() const { return terms ? loss_sum / static_cast<double>(terms) : 0.0; }
};

// z is [L x N]. When grad_z is non-null, grad_scale * d(loss_sum)/dz is added
// into it. Throws ContractError naming the frame if a row has zero norm.
template <typename T>
NceResult nce_loss_sum(const numkit::Tensor<T>& z, std::span<const NegativeSample> negatives,
                       numkit::Tensor<T>* grad_z = nullptr, double grad_scale = 1.0);

// Mean over terms; the gradient written to grad_z (overwritten) is that of the mean.
template <typename T>
double nce_loss(const numkit::Tensor<T>& z, std::span<const NegativeSample> negatives,
                numkit::Tensor<T>* grad_z = nullptr);

double nce_loss(const FrameEmbeddings& z, std::span<const NegativeSample> negatives);

}  // namespace unsupseg

#endif  // UNSUPSEG_CONTRASTIVE_HPP_
