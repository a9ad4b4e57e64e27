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

#include "unsupseg/segmenter.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "unsupseg/annotation.hpp"
#include "unsupseg/audio.hpp"
#include "unsupseg/errors.hpp"

namespace unsupseg {

void PeakParams::validate() const {
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
  if (normalize && delta > 1.0) throw ConfigError("delta must lie in [0, 1] when scores are normalized");
  if (!std::isfinite(time_offset)) throw ConfigError("time offset must be finite");
}

ScoreTrack boundary_scores(const numkit::Tensor<float>& vectors) {
  if (vectors.rank() != 2 || vectors.dim(0) < 2) {
    throw ContractError("boundary_scores: need at least two frames");
  }
  const std::size_t frames = vectors.dim(0);
  std::vector<double> norm(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double s = 0.0;
    for (float v : vectors.row(i)) s += static_cast<double>(v) * v;
    norm[i] = std::sqrt(s);
    if (!(norm[i] > 0.0)) throw ContractError("boundary_scores: frame " + std::to_string(i) + " has zero norm");
  }
  ScoreTrack track;
  track.scores.resize(frames - 1);
  for (std::size_t i = 0; i + 1 < frames; ++i) {
    auto a = vectors.row(i);
    auto b = vectors.row(i + 1);
    double dot = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) dot += static_cast<double>(a[d]) * b[d];
    track.scores[i] = std::clamp(-dot / (norm[i] * norm[i + 1]), -1.0, 1.0);
  }
  return track;
}

ScoreTrack boundary_scores(const FrameEmbeddings& z) { return boundary_scores(z.vectors); }

ScoreTrack normalize_scores(const ScoreTrack& track) {
  ScoreTrack out{track.scores, true};
  if (out.scores.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.scores.begin(), out.scores.end());
  const double min = *lo, range = *hi - *lo;
  for (double& s : out.scores) s = range > 0.0 ? (s - min) / range : 0.0;
  return out;
}

std::vector<std::pair<std::size_t, double>> peak_prominences(std::span<const double> s) {
  std::vector<std::pair<std::size_t, double>> out;
  const std::size_t n = s.size();
  if (n < 3) return out;

  // Nearest strictly greater neighbour on each side (n = none).
  std::vector<std::size_t> prev_greater(n, n), next_greater(n, n), stack;
  for (std::size_t i = 0; i < n; ++i) {
    while (!stack.empty() && s[stack.back()] <= s[i]) stack.pop_back();
    if (!stack.empty()) prev_greater[i] = stack.back();
    stack.push_back(i);
  }
  stack.clear();
  for (std::size_t i = n; i-- > 0;) {
    while (!stack.empty() && s[stack.back()] <= s[i]) stack.pop_back();
    if (!stack.empty()) next_greater[i] = stack.back();
    stack.push_back(i);
  }

  // Sparse table for range minima.
  const std::size_t levels = std::bit_width(n);
  std::vector<std::vector<double>> table(levels, std::vector<double>(n));
  table[0].assign(s.begin(), s.end());
  for (std::size_t l = 1; l < levels; ++l)
    for (std::size_t i = 0; i + (std::size_t{1} << l) <= n; ++i)
      table[l][i] = std::min(table[l - 1][i], table[l - 1][i + (std::size_t{1} << (l - 1))]);
  auto range_min = [&](std::size_t lo, std::size_t hi) {  // inclusive
    const std::size_t l = std::bit_width(hi - lo + 1) - 1;
    return std::min(table[l][lo], table[l][hi + 1 - (std::size_t{1} << l)]);
  };

  for (std::size_t p = 1; p + 1 < n; ++p) {
    if (!(s[p] > s[p - 1] && s[p] >= s[p + 1])) continue;
    const std::size_t left_lo = prev_greater[p] == n ? 0 : prev_greater[p] + 1;
    const std::size_t right_hi = next_greater[p] == n ? n - 1 : next_greater[p] - 1;
    const double left_base = range_min(left_lo, p - 1);
    const double right_base = range_min(p + 1, right_hi);
    out.emplace_back(p, s[p] - std::max(left_base, right_base));
  }
  return out;
}

std::vector<std::size_t> detect_peaks(std::span<const double> scores, double delta) {
  if (!(delta >= 0.0)) throw ContractError("detect_peaks: delta must be >= 0");
  std::vector<std::size_t> peaks;
  for (const auto& [p, prominence] : peak_prominences(scores))
    if (prominence >= delta) peaks.push_back(p);
  return peaks;
}

BoundarySet frames_to_times(std::span<const std::size_t> indices, std::size_t hop_samples,
                            std::uint32_t sample_rate, double time_offset) {
  BoundarySet set;
  set.times.reserve(indices.size());
  for (std::size_t i : indices) {
    set.times.push_back(static_cast<double>((i + 1) * hop_samples) / static_cast<double>(sample_rate) +
                        time_offset);
  }
  return set;
}

Segmentation segment_scores(const ScoreTrack& raw, const PeakParams& params, std::size_t hop_samples,
                            std::uint32_t sample_rate) {
  params.validate();
  Segmentation out;
  out.raw = raw;
  const ScoreTrack used = params.normalize ? normalize_scores(raw) : raw;
  out.peaks = detect_peaks(used.scores, params.delta);
  out.boundaries = frames_to_times(out.peaks, hop_samples, sample_rate, params.time_offset);
  std::erase_if(out.boundaries.times, [](double t) { return t < 0.0; });
  return out;
}

Segmentation segment(const EncoderState<float>& state, const Waveform& wave, const PeakParams& params) {
  params.validate();
  const FrameEmbeddings z = encode(state, wave);
  return segment_scores(boundary_scores(z), params, z.hop_samples, z.sample_rate);
}

void write_score_dump(std::ostream& out, const ScoreTrack& raw) {
  const ScoreTrack normalized = normalize_scores(raw);
  char buf[96];
  for (std::size_t i = 0; i < raw.scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t%.6f\n", i, raw.scores[i], normalized.scores[i]);
    out << buf;
  }
}

TuneObjective parse_objective(std::string_view name) {
  if (name == "rval" || name == "r_value" || name == "rvalue") return TuneObjective::kRValue;
  if (name == "f1") return TuneObjective::kF1;
  throw ConfigError("unknown tuning metric '" + std::string(name) + "' (expected rval or f1)");
}

std::string_view objective_name(TuneObjective objective) {
  return objective == TuneObjective::kF1 ? "f1" : "rval";
}

std::vector<double> parse_grid(std::string_view text) {
  double parts[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find(':', pos) : text.size();
    if (end == std::string_view::npos) throw ConfigError("grid must be 'start:stop:step', got '" + std::string(text) + "'");
    const std::string_view field = text.substr(pos, end - pos);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), parts[i]);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw ConfigError("grid must be 'start:stop:step', got '" + std::string(text) + "'");
    }
    pos = end + 1;
  }
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0.0) || stop < start) throw ConfigError("grid needs step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  for (std::size_t i = 0; i < count; ++i)
    grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
  return grid;
}

std::vector<ScoredUtterance> score_manifest(const EncoderState<float>& state, const Manifest& manifest,
                                            bool include_edges) {
  require_annotations(manifest);
  std::vector<ScoredUtterance> out;
  out.reserve(manifest.size());
  for (const ManifestRecord& record : manifest) {
    const Waveform wave = load_wav(record.audio);
    const FrameEmbeddings z = encode(state, wave);
    ScoredUtterance utt;
    utt.key = record.key;
    utt.raw = boundary_scores(z);
    utt.gold = gold_boundaries(parse_annotation(*record.annotation), wave.sample_rate, include_edges);
    utt.duration = wave.duration();
    utt.hop_samples = z.hop_samples;
    utt.sample_rate = z.sample_rate;
    out.push_back(std::move(utt));
  }
  return out;
}

BoundarySet with_edges(const BoundarySet& boundaries, double duration) {
  BoundarySet out;
  out.times.reserve(boundaries.size() + 2);
  out.times.push_back(0.0);
  for (double t : boundaries.times)
    if (t > 0.0 && t < duration) out.times.push_back(t);
  out.times.push_back(duration);
  return out;
}

BoundaryMap predict_corpus(std::span<const ScoredUtterance> utterances, const PeakParams& params,
                           bool include_edges) {
  BoundaryMap pred;
  for (const ScoredUtterance& utt : utterances) {
    BoundarySet b = segment_scores(utt.raw, params, utt.hop_samples, utt.sample_rate).boundaries;
    pred[utt.key] = include_edges ? with_edges(b, utt.duration) : std::move(b);
  }
  return pred;
}

EvalReport evaluate_scored(std::span<const ScoredUtterance> utterances, const PeakParams& params,
                           double tolerance, bool include_edges) {
  BoundaryMap gold;
  for (const ScoredUtterance& utt : utterances) gold[utt.key] = utt.gold;
  return evaluate_corpus(predict_corpus(utterances, params, include_edges), gold, tolerance);
}

double objective_value(const EvalReport& report, TuneObjective objective) {
  return objective == TuneObjective::kF1 ? report.f1 : report.r_value;
}

TuneResult tune_delta(std::span<const ScoredUtterance> utterances, std::span<const double> grid,
                      double tolerance, TuneObjective objective, const PeakParams& base,
                      bool include_edges) {
  if (utterances.empty()) throw ContractError("tune_delta: empty validation set");
  if (grid.empty()) throw ContractError("tune_delta: empty delta grid");
  TuneResult result;
  bool have_best = false;
  double best_value = 0.0;
  for (double delta : grid) {
    PeakParams params = base;
    params.delta = delta;
    TuneRow row{delta, evaluate_scored(utterances, params, tolerance, include_edges)};
    const double value = objective_value(row.report, objective);
    if (!have_best || value > best_value || (value == best_value && delta < result.best_delta)) {
      have_best = true;
      best_value = value;
      result.best_delta = delta;
      result.best_index = result.rows.size();
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

TuneResult tune_delta(const EncoderState<float>& state, const Manifest& validation,
                      std::span<const double> grid, double tolerance, TuneObjective objective,
                      const PeakParams& base, bool include_edges) {
  if (validation.empty()) throw ContractError("tune_delta: empty validation manifest");
  const auto scored = score_manifest(state, validation, include_edges);
  return tune_delta(scored, grid, tolerance, objective, base, include_edges);
}

}  // namespace unsupseg
