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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "unsupseg/annotation.hpp"
#include "unsupseg/audio.hpp"
#include "unsupseg/boundaries.hpp"
#include "unsupseg/checkpoint.hpp"
#include "unsupseg/corpus.hpp"
#include "unsupseg/errors.hpp"
#include "unsupseg/manifest.hpp"
#include "unsupseg/metrics.hpp"
#include "unsupseg/segmenter.hpp"
#include "unsupseg/trainer.hpp"
#include "unsupseg/version.hpp"

namespace unsupseg::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kUsage =
    "usage: unsupseg <command> [options]\n"
    "\n"
    "commands:\n"
    "  train     train an encoder on a manifest of 16 kHz mono WAV files\n"
    "  segment   write predicted boundaries for one WAV file\n"
    "  tune      sweep the peak threshold on an annotated manifest\n"
    "  eval      score predictions against an annotated manifest\n"
    "  synth     write a synthetic annotated corpus with train/val/test manifests\n"
    "\n"
    "Run `unsupseg <command> --help` for the options of a command. Every command\n"
    "accepts --config FILE with flat key=value lines named after its long options.\n";

void add_config(CLI::App& app) {
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
}

// False when help was requested; the help text has then been written.
bool parse(CLI::App& app, const std::vector<std::string>& args, std::ostream& out) {
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return false;
  }
  return true;
}

void echo_header(std::ostream& err, const CLI::App& app, std::uint64_t seed) {
  err << "unsupseg " << kVersion << " seed=" << seed << '\n';
  err << app.config_to_str(true, false);
}

fs::path ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  return path;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(ensure_parent(path));
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void check_tolerance(double tolerance) {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw ConfigError("tolerance must be a positive number of seconds");
}

struct PeakFlags {
  double delta = 0.5;
  bool no_normalize = false;
  double time_offset = 0.0;

  void add(CLI::App& app, bool with_delta) {
    if (with_delta) app.add_option("--delta", delta, "peak prominence threshold")->capture_default_str();
    app.add_flag("--no-normalize", no_normalize, "skip min-max normalization of the score track");
    app.add_option("--time-offset", time_offset, "seconds added to every boundary time")->capture_default_str();
  }

  PeakParams params() const {
    PeakParams p;
    p.delta = delta;
    p.normalize = !no_normalize;
    p.time_offset = time_offset;
    p.validate();
    return p;
  }
};

// ---- train ----------------------------------------------------------------------

int cmd_train(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train the encoder with the contrastive objective", "unsupseg train"};
  TrainConfig config;
  std::string manifest, val_manifest, out_path, log_path, history_path;
  app.add_option("--manifest", manifest, "training manifest")->required();
  app.add_option("--val-manifest", val_manifest, "validation manifest for early stopping")->required();
  app.add_option("--out", out_path, "checkpoint path")->required();
  app.add_option("--epochs", config.epochs)->capture_default_str();
  app.add_option("--batch-size", config.batch_size)->capture_default_str();
  app.add_option("--lr", config.lr)->capture_default_str();
  app.add_option("--neg-k", config.neg_k, "distractors per reference frame")->capture_default_str();
  app.add_option("--crop-sec", config.crop_seconds, "training crop length in seconds")->capture_default_str();
  app.add_option("--patience", config.patience, "epochs without improvement before stopping")->capture_default_str();
  app.add_option("--proj-dim", config.encoder.projection_dim, "embedding width")->capture_default_str();
  app.add_option("--seed", config.seed)->capture_default_str();
  app.add_option("--log", log_path, "training log (default: <out>.log)");
  app.add_option("--history", history_path, "history table (default: <out>.history.tsv)");
  add_config(app);
  if (!parse(app, args, out)) return kOk;

  if (log_path.empty()) log_path = out_path + ".log";
  if (history_path.empty()) history_path = out_path + ".history.tsv";

  config.validate();
  std::ofstream log = open_output(log_path);
  echo_header(err, app, config.seed);
  echo_header(log, app, config.seed);

  const Manifest train_manifest = read_manifest(manifest);
  const Manifest validation = read_manifest(val_manifest);
  const std::vector<Waveform> train_set = load_waveforms(train_manifest);
  const std::vector<Waveform> val_set = load_waveforms(validation);
  err << "training on " << train_set.size() << " utterances, validating on " << val_set.size() << '\n';

  TrainLogging logging{{&err, &log}, {&err, &log}};
  const TrainResult result = train(train_set, val_set, config, logging);

  save_checkpoint(result.checkpoint, ensure_parent(out_path));
  std::ofstream history = open_output(history_path);
  write_history(history, result.history);
  if (!history) throw DataError("failed writing " + history_path);

  out << "checkpoint\t" << out_path << '\n';
  out << "best_epoch\t" << result.history.best_epoch << '\n';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", result.history.best_val_loss);
  out << "best_val_loss\t" << buf << '\n';
  return kOk;
}

// ---- segment --------------------------------------------------------------------

int cmd_segment(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predict boundaries for one WAV file", "unsupseg segment"};
  std::string model, wav, dump_path, out_path;
  PeakFlags peak;
  app.add_option("--model", model, "checkpoint")->required();
  app.add_option("--wav", wav, "16 kHz mono PCM WAV")->required();
  peak.add(app, true);
  app.add_option("--dump-scores", dump_path, "write index, raw and normalized score per frame pair");
  app.add_option("--out", out_path, "boundary file (default: stdout)");
  add_config(app);
  if (!parse(app, args, out)) return kOk;

  const PeakParams params = peak.params();
  const Checkpoint ckpt = load_checkpoint(model);
  echo_header(err, app, ckpt.meta.seed);

  const Waveform wave = load_wav(wav);
  const Segmentation seg = segment(ckpt.state, wave, params);
  if (!dump_path.empty()) {
    std::ofstream dump = open_output(dump_path);
    write_score_dump(dump, seg.raw);
  }
  if (out_path.empty()) {
    write_boundaries(out, seg.boundaries);
  } else {
    write_boundaries(ensure_parent(out_path), seg.boundaries);
  }
  err << seg.boundaries.size() << " boundaries from " << seg.raw.scores.size() + 1 << " frames\n";
  return kOk;
}

// ---- tune -----------------------------------------------------------------------

int cmd_tune(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Choose the peak threshold on an annotated manifest", "unsupseg tune"};
  std::string model, manifest, grid_spec = "0:1:0.05", metric = "rval";
  double tolerance = kDefaultTolerance;
  bool include_edges = false;
  PeakFlags peak;
  app.add_option("--model", model, "checkpoint")->required();
  app.add_option("--manifest", manifest, "annotated manifest")->required();
  app.add_option("--grid", grid_spec, "start:stop:step, both ends inclusive")->capture_default_str();
  app.add_option("--metric", metric, "rval or f1")->capture_default_str();
  app.add_option("--tolerance", tolerance, "match tolerance in seconds")->capture_default_str();
  app.add_flag("--include-edges", include_edges, "count utterance start and end as boundaries");
  peak.add(app, false);
  add_config(app);
  if (!parse(app, args, out)) return kOk;

  const std::vector<double> grid = parse_grid(grid_spec);
  const TuneObjective objective = parse_objective(metric);
  check_tolerance(tolerance);
  PeakParams base = peak.params();
  const Checkpoint ckpt = load_checkpoint(model);
  echo_header(err, app, ckpt.meta.seed);

  const Manifest records = read_manifest(manifest);
  if (records.empty()) throw DataError(manifest + ": manifest is empty");
  const TuneResult result = tune_delta(ckpt.state, records, grid, tolerance, objective, base, include_edges);

  out << "delta\tprecision\trecall\tf1\tr_value\n";
  char buf[160];
  for (const TuneRow& row : result.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f\t%.2f\t%.2f\t%.2f\t%.2f\n", row.delta, row.report.precision,
                  row.report.recall, row.report.f1, row.report.r_value);
    out << buf;
  }
  const TuneRow& best = result.rows[result.best_index];
  std::snprintf(buf, sizeof(buf), "best_delta\t%.6f\nbest_%s\t%.2f\n", best.delta,
                std::string(objective_name(objective)).c_str(), objective_value(best.report, objective));
  out << buf;
  return kOk;
}

// ---- eval -----------------------------------------------------------------------

BoundaryMap gold_map(const Manifest& records, bool include_edges) {
  BoundaryMap gold;
  for (const ManifestRecord& r : records) {
    gold[r.key] = gold_boundaries(parse_annotation(*r.annotation), kSampleRate, include_edges);
  }
  return gold;
}

// One boundary file per line, in the same order as the gold manifest.
BoundaryMap read_prediction_manifest(const fs::path& path, const Manifest& gold, bool include_edges) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<fs::path> files;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fs::path p(line);
    files.push_back(p.is_relative() ? path.parent_path() / p : p);
  }
  if (files.size() != gold.size()) {
    throw DataError(path.string() + ": " + std::to_string(files.size()) + " prediction files for " +
                    std::to_string(gold.size()) + " manifest records");
  }
  BoundaryMap pred;
  for (std::size_t i = 0; i < files.size(); ++i) {
    BoundarySet b = read_boundaries(files[i]);
    pred[gold[i].key] = include_edges ? with_edges(b, load_wav(gold[i].audio).duration()) : std::move(b);
  }
  return pred;
}

int cmd_eval(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score boundaries against an annotated manifest", "unsupseg eval"};
  std::string model, manifest, pred_manifest;
  double tolerance = kDefaultTolerance;
  bool include_edges = false;
  PeakFlags peak;
  auto* model_opt = app.add_option("--model", model, "checkpoint to segment with");
  auto* pred_opt = app.add_option("--pred-manifest", pred_manifest,
                                  "boundary files, one per line in manifest order, instead of --model");
  model_opt->excludes(pred_opt);
  app.add_option("--manifest", manifest, "annotated manifest")->required();
  peak.add(app, true);
  app.add_option("--tolerance", tolerance, "match tolerance in seconds")->capture_default_str();
  app.add_flag("--include-edges", include_edges, "count utterance start and end as boundaries");
  add_config(app);
  if (!parse(app, args, out)) return kOk;

  if (model.empty() == pred_manifest.empty()) throw ConfigError("give exactly one of --model and --pred-manifest");
  check_tolerance(tolerance);
  const PeakParams params = peak.params();
  std::optional<Checkpoint> ckpt;
  if (!model.empty()) ckpt = load_checkpoint(model);
  echo_header(err, app, ckpt ? ckpt->meta.seed : 0);

  const Manifest records = read_manifest(manifest);
  if (records.empty()) throw DataError(manifest + ": manifest is empty");
  require_annotations(records);

  EvalReport report;
  if (ckpt) {
    const auto scored = score_manifest(ckpt->state, records, include_edges);
    report = evaluate_scored(scored, params, tolerance, include_edges);
  } else {
    report = evaluate_corpus(read_prediction_manifest(pred_manifest, records, include_edges),
                             gold_map(records, include_edges), tolerance);
  }
  write_report_table(out, report);
  write_report_lines(out, report);
  return kOk;
}

// ---- synth ----------------------------------------------------------------------

int cmd_synth(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Write a synthetic corpus with exact boundaries", "unsupseg synth"};
  std::string out_dir;
  SynthOptions options;
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--n", options.utterances, "number of utterances")->capture_default_str();
  app.add_option("--seed", options.seed)->capture_default_str();
  add_config(app);
  if (!parse(app, args, out)) return kOk;

  echo_header(err, app, options.seed);
  if (options.utterances == 0) throw ConfigError("--n must be >= 1");

  fs::create_directories(out_dir);
  const Manifest all = synth_corpus(options, out_dir);
  const std::size_t n_train = all.size() * 8 / 10;
  const std::size_t n_val = all.size() / 10;
  const auto split = [&](std::size_t begin, std::size_t end) {
    return Manifest(all.begin() + static_cast<std::ptrdiff_t>(begin), all.begin() + static_cast<std::ptrdiff_t>(end));
  };
  const std::pair<const char*, Manifest> parts[] = {
      {"all", all},
      {"train", split(0, n_train)},
      {"val", split(n_train, n_train + n_val)},
      {"test", split(n_train + n_val, all.size())},
  };
  for (const auto& [name, part] : parts) {
    const fs::path path = fs::path(out_dir) / (std::string(name) + ".lst");
    write_manifest(path, part);
    out << name << '\t' << path.string() << '\t' << part.size() << '\n';
  }
  return kOk;
}

using Command = int (*)(const std::vector<std::string>&, std::ostream&, std::ostream&);

int guarded(Command command, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return command(args, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ContractError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << kUsage;
    return kConfigError;
  }
  const std::string& name = args.front();
  if (name == "--help" || name == "-h" || name == "help") {
    out << kUsage;
    return kOk;
  }
  if (name == "--version") {
    out << "unsupseg " << kVersion << '\n';
    return kOk;
  }
  Command command = nullptr;
  if (name == "train") command = cmd_train;
  else if (name == "segment") command = cmd_segment;
  else if (name == "tune") command = cmd_tune;
  else if (name == "eval") command = cmd_eval;
  else if (name == "synth") command = cmd_synth;
  if (!command) {
    err << "unknown command '" << name << "'\n" << kUsage;
    return kConfigError;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  return guarded(command, rest, out, err);
}

}  // namespace unsupseg::cli
