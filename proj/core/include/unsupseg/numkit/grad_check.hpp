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

#ifndef UNSUPSEG_NUMKIT_GRAD_CHECK_HPP_
#define UNSUPSEG_NUMKIT_GRAD_CHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "unsupseg/numkit/adam.hpp"

namespace unsupseg::numkit {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  std::size_t refined = 0;  // compared with a fallback step after ±h straddled a kink
  std::size_t kinked = 0;   // straddled a kink at every step; not compared
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;

  double max_rel_error() const;
  std::size_t checked() const;
  std::size_t refined() const;
  std::size_t kinked() const;
  bool passed() const { return max_rel_error() < tolerance; }
  const GradCheckEntry* find(const std::string& name) const;
};

struct GradCheckOptions {
  double h = 1e-3;
  double tol = 1e-5;
  // Errors are |a - n| / max(|a|, |n|, abs_floor); the floor keeps
  // coordinates whose gradient is ~0 from dominating the report.
  double abs_floor = 1e-8;
  // Also floor the denominator at this fraction of the largest analytic
  // |gradient| in the same tensor, so a coordinate whose gradient is ~0
  // relative to its neighbours is judged on the tensor's scale.
  double scale_floor = 0.0;
  // Check at most this many coordinates per parameter (0 = all), chosen
  // deterministically and spread evenly over the tensor.
  std::size_t max_coords_per_param = 0;
  // Optional, for piecewise-smooth objectives: identifies the smooth piece
  // (for example a hash of activation signs) that the most recent loss()
  // call evaluated in. A coordinate whose +h and -h evaluations fall in
  // different pieces straddles a kink, where the central difference does not
  // estimate the derivative. It is retried with each of `fallback_steps` in
  // turn and counted in `kinked` if every step straddles a kink.
  std::function<std::uint64_t()> region;
  std::vector<double> fallback_steps;
};

// Compares analytic gradients against central differences
// (f(θ+h) − f(θ−h)) / 2h. `analytic` must fill every parameter's grad at the
// current values; `loss` evaluates the scalar objective without touching
// gradients. Parameter values are restored on exit.
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& analytic,
                           std::span<Parameter<double>* const> params,
                           const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric, double abs_floor);

}  // namespace unsupseg::numkit

#endif  // UNSUPSEG_NUMKIT_GRAD_CHECK_HPP_
