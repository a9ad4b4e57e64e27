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

#include "unsupseg/boundaries.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "unsupseg/errors.hpp"

namespace unsupseg {

void BoundarySet::validate() const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0) {
      throw ContractError("boundary " + std::to_string(i) + " is negative or not finite");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ContractError("boundary times must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

void write_boundaries(std::ostream& out, const BoundarySet& boundaries) {
  char buf[64];
  for (double t : boundaries.times) {
    std::snprintf(buf, sizeof(buf), "%.6f\n", t);
    out << buf;
  }
}

void write_boundaries(const std::filesystem::path& path, const BoundarySet& boundaries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_boundaries(out, boundaries);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

BoundarySet read_boundaries(std::istream& in) {
  BoundarySet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    double t;
    if (!(fields >> t)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw DataError("boundary file line " + std::to_string(line_no) + ": expected a time in seconds");
    }
    set.times.push_back(t);
  }
  try {
    set.validate();
  } catch (const ContractError& e) {
    throw DataError(std::string("invalid boundary file: ") + e.what());
  }
  return set;
}

BoundarySet read_boundaries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open boundary file '" + path.string() + "'");
  return read_boundaries(in);
}

}  // namespace unsupseg
