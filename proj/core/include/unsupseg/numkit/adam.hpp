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

#ifndef UNSUPSEG_NUMKIT_ADAM_HPP_
#define UNSUPSEG_NUMKIT_ADAM_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "unsupseg/numkit/tensor.hpp"

namespace unsupseg::numkit {

// A trainable tensor with its gradient and Adam moments. All four tensors
// share one shape.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> m;
  Tensor<T> v;
  std::uint64_t step_count = 0;

  Parameter() = default;
  Parameter(std::string name_, Tensor<T> value_)
      : name(std::move(name_)),
        value(std::move(value_)),
        grad(value.shape()),
        m(value.shape()),
        v(value.shape()) {}

  void zero_grad() { grad.fill(T(0)); }
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam update in place, then clears the gradients. If any
// gradient is non-finite nothing is updated and NumericError names the
// offending parameter.
template <typename T>
void adam_step(std::span<Parameter<T>* const> params, const AdamOptions& options);

}  // namespace unsupseg::numkit

#endif  // UNSUPSEG_NUMKIT_ADAM_HPP_
