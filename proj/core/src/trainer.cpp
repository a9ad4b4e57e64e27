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

#include "unsupseg/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "unsupseg/contrastive.hpp"
#include "unsupseg/corpus.hpp"
#include "unsupseg/errors.hpp"
#include "unsupseg/numkit/adam.hpp"
#include "unsupseg/rng.hpp"

namespace unsupseg {

using numkit::Mode;
using numkit::Tensor;

void TrainConfig::validate() const {
  encoder.validate();
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be a positive finite number");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (neg_k < 1) throw ConfigError("neg_k must be >= 1");
  const double crop_samples = crop_seconds * static_cast<double>(encoder.sample_rate);
  const double min_samples = static_cast<double>(encoder.receptive_field() + encoder.hop_samples());
  if (!(crop_samples >= min_samples)) {
    throw ConfigError("crop_seconds must cover at least " + std::to_string(static_cast<std::size_t>(min_samples)) +
                      " samples (two frames)");
  }
}

bool EarlyStopping::update(std::size_t epoch, double val_loss) {
  improved_ = val_loss < best_loss_;
  if (improved_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch;
    since_best_ = 0;
  } else {
    ++since_best_;
  }
  return since_best_ > patience_;
}

namespace {

std::size_t min_samples(const EncoderConfig& config) { return config.receptive_field() + config.hop_samples(); }

void note(const TrainLogging& logging, const std::string& message) {
  for (std::ostream* out : logging.diagnostics) *out << message << '\n';
}

void check_finite(double loss, const char* where) {
  if (!std::isfinite(loss)) throw NumericError(std::string("non-finite loss during ") + where);
}

// Loss sum and term count over `waves`, one utterance at a time.
NceResult sum_loss(EncoderState<float>& state, std::span<const Waveform> waves, std::size_t neg_k, Rng& rng,
                   Mode mode) {
  NceResult total;
  const std::size_t shortest = min_samples(state.config);
  for (const Waveform& wave : waves) {
    if (wave.size() < shortest) continue;
    std::vector<Tensor<float>> input{waveform_tensor<float>(state.config, wave)};
    const auto out = mode == Mode::kEval ? forward_eval(state, input) : forward_batch(state, input, mode);
    const Tensor<float> z = numkit::transpose(out.front());
    const auto negatives = sample_all_negatives(z.dim(0), neg_k, rng);
    const NceResult r = nce_loss_sum(z, negatives);
    total.loss_sum += r.loss_sum;
    total.terms += r.terms;
  }
  return total;
}

}  // namespace

double corpus_loss(const EncoderState<float>& state, std::span<const Waveform> waves, std::size_t neg_k,
                   std::uint64_t seed, Mode mode) {
  EncoderState<float> scratch = state;
  Rng rng(derive_seed(seed, "validation"));
  const NceResult r = sum_loss(scratch, waves, neg_k, rng, mode);
  if (r.terms == 0) throw DataError("no utterance long enough to compute a loss");
  return r.mean();
}

TrainResult train(std::span<const Waveform> train_set, std::span<const Waveform> val_set, const TrainConfig& config,
                  const TrainLogging& logging) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  if (val_set.empty()) throw DataError("validation set is empty");

  const std::size_t shortest = min_samples(config.encoder);
  TrainHistory history;
  for (const Waveform& w : train_set) {
    if (w.sample_rate != config.encoder.sample_rate) throw DataError("training audio must be 16000 Hz");
    if (w.size() < shortest) ++history.skipped_train;
  }
  for (const Waveform& w : val_set) {
    if (w.sample_rate != config.encoder.sample_rate) throw DataError("validation audio must be 16000 Hz");
    if (w.size() < shortest) ++history.skipped_val;
  }
  if (history.skipped_train == train_set.size()) {
    throw DataError("every training utterance is shorter than " + std::to_string(shortest) + " samples");
  }
  if (history.skipped_val == val_set.size()) {
    throw DataError("every validation utterance is shorter than " + std::to_string(shortest) + " samples");
  }
  if (history.skipped_train)
    note(logging, "skipped " + std::to_string(history.skipped_train) + " training utterances shorter than " +
                      std::to_string(shortest) + " samples");
  if (history.skipped_val)
    note(logging, "skipped " + std::to_string(history.skipped_val) + " validation utterances shorter than " +
                      std::to_string(shortest) + " samples");

  EncoderState<float> state = init_encoder<float>(config.encoder, config.seed);
  TrainResult result;
  result.checkpoint.state = state;
  result.checkpoint.meta.seed = config.seed;

  const numkit::AdamOptions adam{config.lr};
  Rng negative_rng(derive_seed(config.seed, "negatives"));
  EarlyStopping stopper(config.patience);
  EncoderCache<float> cache;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    Rng crop_rng(derive_seed(config.seed, "crop", epoch));
    Rng shuffle_rng(derive_seed(config.seed, "shuffle", epoch));

    std::vector<Waveform> crops;
    for (const Waveform& w : train_set) {
      for (Waveform& c : make_crops(w, config.crop_seconds, crop_rng)) crops.push_back(std::move(c));
    }
    shuffle_rng.shuffle(crops.begin(), crops.end());

    NceResult epoch_loss;
    for (std::size_t start = 0; start < crops.size(); start += config.batch_size) {
      const std::size_t stop = std::min(crops.size(), start + config.batch_size);
      std::vector<Tensor<float>> inputs;
      for (std::size_t b = start; b < stop; ++b) inputs.push_back(waveform_tensor<float>(state.config, crops[b]));

      const auto outputs = forward_batch(state, inputs, Mode::kTrain, &cache);
      std::vector<Tensor<float>> z;
      std::vector<std::vector<NegativeSample>> negatives;
      std::size_t terms = 0;
      for (const auto& out : outputs) {
        z.push_back(numkit::transpose(out));
        negatives.push_back(sample_all_negatives(z.back().dim(0), config.neg_k, negative_rng));
        for (const auto& n : negatives.back()) terms += n.negatives.empty() ? 0 : 1;
      }
      if (terms == 0) continue;

      std::vector<Tensor<float>> grads;
      NceResult batch_loss;
      for (std::size_t b = 0; b < z.size(); ++b) {
        Tensor<float> grad_z(z[b].shape());
        const NceResult r = nce_loss_sum(z[b], negatives[b], &grad_z, 1.0 / static_cast<double>(terms));
        batch_loss.loss_sum += r.loss_sum;
        batch_loss.terms += r.terms;
        grads.push_back(numkit::transpose(grad_z));
      }
      check_finite(batch_loss.loss_sum, "training");
      backward_batch(state, cache, grads);
      auto params = state.parameters();
      numkit::adam_step<float>(params, adam);
      epoch_loss.loss_sum += batch_loss.loss_sum;
      epoch_loss.terms += batch_loss.terms;
    }

    Rng val_rng(derive_seed(config.seed, "validation"));
    const NceResult val = sum_loss(state, val_set, config.neg_k, val_rng, Mode::kEval);
    check_finite(val.loss_sum, "validation");

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = epoch_loss.mean();
    record.val_loss = val.mean();
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    history.epochs.push_back(record);
    for (std::ostream* out : logging.epochs) write_epoch_line(*out, record);

    const bool stop = stopper.update(epoch, record.val_loss);
    if (stopper.improved()) {
      result.checkpoint.state = state;
      result.checkpoint.meta.epoch = static_cast<std::uint32_t>(epoch);
      result.checkpoint.meta.best_val_loss = record.val_loss;
    }
    if (stop) {
      history.stopped_early = epoch < config.epochs;
      note(logging, "early stop after epoch " + std::to_string(epoch) + "; best epoch " +
                        std::to_string(stopper.best_epoch()));
      break;
    }
  }
  history.best_epoch = stopper.best_epoch();
  history.best_val_loss = stopper.best_loss();
  result.history = std::move(history);
  return result;
}

std::vector<Waveform> load_waveforms(const Manifest& manifest) {
  std::vector<Waveform> out;
  out.reserve(manifest.size());
  for (const ManifestRecord& r : manifest) out.push_back(load_wav(r.audio));
  return out;
}

void write_epoch_line(std::ostream& out, const EpochRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t%.6f\t%.2f\n", r.epoch, r.train_loss, r.val_loss, r.seconds);
  out << buf << std::flush;
}

void write_history(std::ostream& out, const TrainHistory& history) {
  out << "epoch\ttrain_loss\tval_loss\tseconds\tbest\n";
  char buf[160];
  for (const EpochRecord& r : history.epochs) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.9g\t%.9g\t%.3f\t%d\n", r.epoch, r.train_loss, r.val_loss, r.seconds,
                  r.epoch == history.best_epoch ? 1 : 0);
    out << buf;
  }
}

}  // namespace unsupseg
