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

#ifndef UNSUPSEG_TRAINER_HPP_
#define UNSUPSEG_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "unsupseg/audio.hpp"
#include "unsupseg/checkpoint.hpp"
#include "unsupseg/encoder.hpp"
#include "unsupseg/manifest.hpp"
#include "unsupseg/numkit/layers.hpp"

namespace unsupseg {

struct TrainConfig {
  std::size_t batch_size = 8;
  double lr = 1e-4;
  std::size_t epochs = 50;
  std::size_t neg_k = 5;
  double crop_seconds = 1.0;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  EncoderConfig encoder;

  // Throws ConfigError.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
  std::size_t skipped_train = 0;
  std::size_t skipped_val = 0;
};

// Tracks the best validation loss. update() returns true once more than
// `patience` consecutive epochs have passed without a strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  bool update(std::size_t epoch, double val_loss);
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t since_best_ = 0;
  std::size_t best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
  bool improved_ = false;
};

struct TrainResult {
  Checkpoint checkpoint;  // weights of the best validation epoch
  TrainHistory history;
};

struct TrainLogging {
  std::vector<std::ostream*> epochs;       // `epoch\ttrain_loss\tval_loss\tseconds`
  std::vector<std::ostream*> diagnostics;  // free-form notes such as skip counts
};

// Throws DataError when either set is empty or has no usable utterance and
// NumericError on a non-finite loss or gradient.
TrainResult train(std::span<const Waveform> train_set, std::span<const Waveform> val_set,
                  const TrainConfig& config, const TrainLogging& logging = {});

// Mean NCE loss over all reference frames of the given utterances, each
// encoded whole. kTrain uses per-utterance batch statistics on a copy of the
// state; kEval uses the running statistics. Utterances too short for two
// frames are skipped.
double corpus_loss(const EncoderState<float>& state, std::span<const Waveform> waves, std::size_t neg_k,
                   std::uint64_t seed, numkit::Mode mode);

std::vector<Waveform> load_waveforms(const Manifest& manifest);

// Header line then one row per epoch, best epoch flagged in the last column.
void write_history(std::ostream& out, const TrainHistory& history);
void write_epoch_line(std::ostream& out, const EpochRecord& record);

}  // namespace unsupseg

#endif  // UNSUPSEG_TRAINER_HPP_
