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

#ifndef UNSUPSEG_CHECKPOINT_HPP_
#define UNSUPSEG_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "unsupseg/encoder.hpp"

namespace unsupseg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingMetadata {
  std::uint32_t epoch = 0;
  double best_val_loss = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
};

struct Checkpoint {
  EncoderState<float> state;
  TrainingMetadata meta;
};

// Binary layout, all integers and floats little-endian:
//   "USEGCKPT"                         8 bytes
//   format_version                     u32
//   n_layers, kernels[n], strides[n]   u32
//   channels, projection_dim, rate     u32
//   leaky_slope, bn_momentum, bn_eps   f64
//   epoch u32, best_val_loss f64, seed u64
//   bn running-stat update counts      u64 x n_layers
//   tensor count                       u32
//   per tensor: u16 name length, name bytes, u8 dtype (1 = f32), u8 rank,
//               u32 dims[rank], f32 payload (row-major)
//   "END!"                             4 bytes
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
// Throws DataError for bad magic, unknown version, truncation, missing or
// misshapen tensors. `source` only labels messages.
Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& source = "checkpoint");

// Writes to a temporary sibling then renames it into place.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Also rejects a stored architecture that differs from `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const EncoderConfig& expected);

}  // namespace unsupseg

#endif  // UNSUPSEG_CHECKPOINT_HPP_
