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

#ifndef UNSUPSEG_SEGMENTER_HPP_
#define UNSUPSEG_SEGMENTER_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "unsupseg/boundaries.hpp"
#include "unsupseg/encoder.hpp"
#include "unsupseg/manifest.hpp"
#include "unsupseg/metrics.hpp"

namespace unsupseg {

// scores[i] belongs to the junction between frames i and i + 1.
struct ScoreTrack {
  std::vector<double> scores;
  bool normalized = false;
};

struct PeakParams {
  double delta = 0.5;
  bool normalize = true;
  double time_offset = 0.0;

  // Throws ConfigError: delta >= 0, and delta <= 1 when normalizing.
  void validate() const;
};

// scores[i] = -cos(z_i, z_{i+1}). Throws ContractError for fewer than two
// frames or a zero-norm row.
ScoreTrack boundary_scores(const FrameEmbeddings& z);
ScoreTrack boundary_scores(const numkit::Tensor<float>& vectors);

// Min-max scaling to [0, 1]; a constant track maps to zeros.
ScoreTrack normalize_scores(const ScoreTrack& track);

// Interior local maxima (scores[p] > scores[p-1] and scores[p] >= scores[p+1],
// so a plateau reports its leftmost sample) whose prominence is >= delta.
// Prominence is scores[p] minus the higher of the two bases, each base being
// the minimum between p and the nearest strictly higher sample on that side
// (or the array end).
std::vector<std::size_t> detect_peaks(std::span<const double> scores, double delta);

// Prominence of each candidate peak, same definition as detect_peaks.
std::vector<std::pair<std::size_t, double>> peak_prominences(std::span<const double> scores);

// time = (index + 1) * hop / sample_rate + offset: the trailing edge of frame index.
BoundarySet frames_to_times(std::span<const std::size_t> indices, std::size_t hop_samples,
                            std::uint32_t sample_rate, double time_offset = 0.0);

struct Segmentation {
  BoundarySet boundaries;
  ScoreTrack raw;
  std::vector<std::size_t> peaks;
};

// Peak picking on an existing raw score track.
Segmentation segment_scores(const ScoreTrack& raw, const PeakParams& params,
                            std::size_t hop_samples = kHopSamples,
                            std::uint32_t sample_rate = kSampleRate);

// Eval-mode encode, scores, optional normalization, peaks, times.
Segmentation segment(const EncoderState<float>& state, const Waveform& wave, const PeakParams& params);

// Lines `index<TAB>raw_score<TAB>normalized_score`.
void write_score_dump(std::ostream& out, const ScoreTrack& raw);

// ---- delta tuning --------------------------------------------------------------

enum class TuneObjective { kRValue, kF1 };

TuneObjective parse_objective(std::string_view name);
std::string_view objective_name(TuneObjective objective);

// `start:stop:step`, both endpoints inclusive.
std::vector<double> parse_grid(std::string_view text);

struct ScoredUtterance {
  std::string key;
  ScoreTrack raw;
  BoundarySet gold;
  double duration = 0.0;
  std::size_t hop_samples = kHopSamples;
  std::uint32_t sample_rate = kSampleRate;
};

// Encodes every record (annotation required) once.
std::vector<ScoredUtterance> score_manifest(const EncoderState<float>& state, const Manifest& manifest,
                                            bool include_edges = false);

// Predicted boundaries of every utterance, with utterance edges added when
// include_edges is set so both sides are treated alike.
BoundaryMap predict_corpus(std::span<const ScoredUtterance> utterances, const PeakParams& params,
                           bool include_edges = false);

EvalReport evaluate_scored(std::span<const ScoredUtterance> utterances, const PeakParams& params,
                           double tolerance, bool include_edges = false);

struct TuneRow {
  double delta = 0.0;
  EvalReport report;
};

struct TuneResult {
  double best_delta = 0.0;
  std::size_t best_index = 0;
  std::vector<TuneRow> rows;  // grid order
};

double objective_value(const EvalReport& report, TuneObjective objective);

// Argmax of the objective over the grid; ties go to the smallest delta.
TuneResult tune_delta(std::span<const ScoredUtterance> utterances, std::span<const double> grid,
                      double tolerance, TuneObjective objective, const PeakParams& base = {},
                      bool include_edges = false);

TuneResult tune_delta(const EncoderState<float>& state, const Manifest& validation,
                      std::span<const double> grid, double tolerance, TuneObjective objective,
                      const PeakParams& base = {}, bool include_edges = false);

BoundarySet with_edges(const BoundarySet& boundaries, double duration);

}  // namespace unsupseg

#endif  // UNSUPSEG_SEGMENTER_HPP_
