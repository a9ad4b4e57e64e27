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

#ifndef UNSUPSEG_BOUNDARIES_HPP_
#define UNSUPSEG_BOUNDARIES_HPP_

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace unsupseg {

// Boundary times in seconds, strictly increasing and non-negative.
struct BoundarySet {
  std::vector<double> times;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }

  // Throws ContractError when the invariant does not hold.
  void validate() const;

  friend bool operator==(const BoundarySet&, const BoundarySet&) = default;
};

// One time per line with six decimals.
void write_boundaries(std::ostream& out, const BoundarySet& boundaries);
void write_boundaries(const std::filesystem::path& path, const BoundarySet& boundaries);
BoundarySet read_boundaries(std::istream& in);
BoundarySet read_boundaries(const std::filesystem::path& path);

}  // namespace unsupseg

#endif  // UNSUPSEG_BOUNDARIES_HPP_
