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

#include "unsupseg/numkit/adam.hpp"

#include <cmath>

namespace unsupseg::numkit {

template <typename T>
void adam_step(std::span<Parameter<T>* const> params, const AdamOptions& options) {
  for (const Parameter<T>* p : params) {
    if (!p->grad.all_finite()) {
      throw NumericError("non-finite gradient in parameter '" + p->name + "'; optimizer step aborted");
    }
  }
  for (Parameter<T>* p : params) {
    ++p->step_count;
    const double step = static_cast<double>(p->step_count);
    const double correction1 = 1.0 - std::pow(options.beta1, step);
    const double correction2 = 1.0 - std::pow(options.beta2, step);
    auto value = p->value.data();
    auto grad = p->grad.data();
    auto m = p->m.data();
    auto v = p->v.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      const double mi = options.beta1 * m[i] + (1.0 - options.beta1) * g;
      const double vi = options.beta2 * v[i] + (1.0 - options.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double m_hat = mi / correction1;
      const double v_hat = vi / correction2;
      value[i] = static_cast<T>(value[i] - options.lr * m_hat / (std::sqrt(v_hat) + options.eps));
    }
    p->zero_grad();
  }
}

template void adam_step<float>(std::span<Parameter<float>* const>, const AdamOptions&);
template void adam_step<double>(std::span<Parameter<double>* const>, const AdamOptions&);

}  // namespace unsupseg::numkit
