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

#include "unsupseg/numkit/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace unsupseg::numkit {

double relative_error(double analytic, double numeric, double abs_floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
  return std::abs(analytic - numeric) / denom;
}

double GradCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
  return worst;
}

std::size_t GradCheckReport::checked() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.checked;
  return n;
}

std::size_t GradCheckReport::refined() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.refined;
  return n;
}

std::size_t GradCheckReport::kinked() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.kinked;
  return n;
}

const GradCheckEntry* GradCheckReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& analytic,
                           std::span<Parameter<double>* const> params,
                           const GradCheckOptions& options) {
  for (Parameter<double>* p : params) p->zero_grad();
  analytic();

  GradCheckReport report;
  report.tolerance = options.tol;
  for (Parameter<double>* p : params) {
    GradCheckEntry entry;
    entry.name = p->name;
    const std::size_t n = p->value.size();
    double largest = 0.0;
    for (std::size_t i = 0; i < n; ++i) largest = std::max(largest, std::abs(p->grad[i]));
    const double floor = std::max(options.abs_floor, options.scale_floor * largest);
    std::size_t count = n;
    if (options.max_coords_per_param != 0) count = std::min(n, options.max_coords_per_param);
    for (std::size_t c = 0; c < count; ++c) {
      const std::size_t i = count == n ? c : (c * n) / count;
      const double original = p->value[i];
      // Central difference at step h; nullopt when ±h land in different pieces.
      auto central = [&](double h) -> std::optional<double> {
        p->value[i] = original + h;
        const double plus = loss();
        const std::uint64_t plus_region = options.region ? options.region() : 0;
        p->value[i] = original - h;
        const double minus = loss();
        const std::uint64_t minus_region = options.region ? options.region() : 0;
        p->value[i] = original;
        if (plus_region != minus_region) return std::nullopt;
        return (plus - minus) / (2.0 * h);
      };
      std::optional<double> estimate = central(options.h);
      if (!estimate) {
        for (double h : options.fallback_steps) {
          if ((estimate = central(h))) break;
        }
        if (!estimate) {
          ++entry.kinked;
          continue;
        }
        ++entry.refined;
      }
      const double numeric = *estimate;
      const double err = relative_error(p->grad[i], numeric, floor);
      if (err > entry.max_rel_error || entry.checked == 0) {
        entry.max_rel_error = err;
        entry.worst_index = i;
      }
      ++entry.checked;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace unsupseg::numkit
