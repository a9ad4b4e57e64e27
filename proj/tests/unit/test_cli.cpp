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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "files.hpp"
#include "unsupseg/annotation.hpp"
#include "unsupseg/boundaries.hpp"
#include "unsupseg/manifest.hpp"
#include "unsupseg/metrics.hpp"

using namespace unsupseg;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, '\t');) out.push_back(f);
  return out;
}

// A small corpus and a one-epoch model shared by the tests below.
struct Workspace {
  testing::TempDir dir{"cli"};
  fs::path corpus = dir.path / "corpus";
  fs::path model = dir.path / "model.ckpt";

  Workspace() {
    const Result s = run({"synth", "--out", corpus.string(), "--n", "20", "--seed", "3"});
    REQUIRE(s.code == 0);
    const Result t = run({"train", "--manifest", (corpus / "train.lst").string(), "--val-manifest",
                          (corpus / "val.lst").string(), "--out", model.string(), "--epochs", "1", "--seed", "3"});
    REQUIRE(t.code == 0);
  }

  static Workspace& get() {
    static Workspace w;
    return w;
  }
};

}  // namespace

TEST_CASE("usage, help and version") {
  const Result none = run({});
  CHECK(none.code == 1);
  CHECK(none.err.find("usage: unsupseg") != std::string::npos);
  const Result help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("synth") != std::string::npos);
  const Result sub_help = run({"train", "--help"});
  CHECK(sub_help.code == 0);
  CHECK(sub_help.out.find("--val-manifest") != std::string::npos);
  CHECK(run({"--version"}).out == "unsupseg 0.1.0\n");
  CHECK(run({"frobnicate"}).code == 1);
}

TEST_CASE("flag errors exit with 1") {
  CHECK(run({"segment", "--wav", "x.wav"}).code == 1);
  CHECK(run({"synth", "--out", "/tmp/x", "--bogus", "1"}).code == 1);
  CHECK(run({"synth", "--out", "/tmp/x", "--n", "abc"}).code == 1);
  CHECK(run({"tune", "--model", "m", "--manifest", "a", "--grid", "0:1"}).code == 1);
  CHECK(run({"tune", "--model", "m", "--manifest", "a", "--metric", "accuracy"}).code == 1);
  CHECK(run({"segment", "--model", "m", "--wav", "w", "--delta", "1.5"}).code == 1);
}

TEST_CASE("a rejected training config writes nothing") {
  testing::TempDir dir("cli_epochs");
  const fs::path model = dir / "m.ckpt";
  CHECK(run({"train", "--manifest", "a", "--val-manifest", "b", "--out", model.string(), "--epochs", "0"}).code == 1);
  CHECK(fs::is_empty(dir.path));
}

TEST_CASE("missing inputs exit with 2") {
  testing::TempDir dir("cli_missing");
  const Result r = run({"segment", "--model", (dir / "none.ckpt").string(), "--wav", "x.wav"});
  CHECK(r.code == 2);
  CHECK(r.err.find("data error") != std::string::npos);
  CHECK(run({"train", "--manifest", (dir / "no.lst").string(), "--val-manifest", (dir / "no.lst").string(), "--out",
             (dir / "m.ckpt").string()})
            .code == 2);
}

TEST_CASE("synth writes an 80/10/10 split") {
  testing::TempDir dir("cli_synth");
  const Result r = run({"synth", "--out", dir.path.string(), "--n", "100", "--seed", "1"});
  REQUIRE(r.code == 0);
  const std::map<std::string, std::size_t> expected{{"all", 100}, {"train", 80}, {"val", 10}, {"test", 10}};
  const auto out = lines(r.out);
  REQUIRE(out.size() == 4);
  for (const std::string& line : out) {
    const auto f = split_tabs(line);
    REQUIRE(f.size() == 3);
    CHECK(std::stoul(f[2]) == expected.at(f[0]));
    const Manifest m = read_manifest(f[1]);
    CHECK(m.size() == expected.at(f[0]));
    for (const auto& rec : m) {
      CHECK(fs::exists(rec.audio));
      CHECK(fs::exists(*rec.annotation));
    }
  }
  CHECK(r.err.rfind("unsupseg 0.1.0 seed=1\n", 0) == 0);

  testing::TempDir again("cli_synth_again");
  REQUIRE(run({"synth", "--out", again.path.string(), "--n", "100", "--seed", "1"}).code == 0);
  for (const char* name : {"utt_00000.wav", "utt_00057.phn", "utt_00099.wav"})
    CHECK(testing::read_bytes(dir / name) == testing::read_bytes(again / name));
}

TEST_CASE("config file values sit between defaults and flags") {
  testing::TempDir dir("cli_config");
  testing::write_text(dir / "synth.cfg", "n=3\nseed=7\n");
  const Result from_file = run({"synth", "--config", (dir / "synth.cfg").string(), "--out", (dir / "a").string()});
  REQUIRE(from_file.code == 0);
  CHECK(from_file.err.find("seed=7") != std::string::npos);
  CHECK(read_manifest(dir / "a/all.lst").size() == 3);

  const Result flag_wins =
      run({"synth", "--config", (dir / "synth.cfg").string(), "--out", (dir / "b").string(), "--n", "2"});
  REQUIRE(flag_wins.code == 0);
  CHECK(read_manifest(dir / "b/all.lst").size() == 2);
  CHECK(flag_wins.err.find("n=2") != std::string::npos);

  testing::write_text(dir / "typo.cfg", "n=3\nsede=7\n");
  CHECK(run({"synth", "--config", (dir / "typo.cfg").string(), "--out", (dir / "c").string()}).code == 1);
  CHECK_FALSE(fs::exists(dir / "c"));
}

TEST_CASE("training writes checkpoint, history and log") {
  Workspace& w = Workspace::get();
  CHECK(fs::exists(w.model));
  const auto history = lines(testing::read_text(w.model.string() + ".history.tsv"));
  REQUIRE(history.size() == 2);
  CHECK(history[0] == "epoch\ttrain_loss\tval_loss\tseconds\tbest");
  const std::string log = testing::read_text(w.model.string() + ".log");
  CHECK(log.rfind("unsupseg 0.1.0 seed=3\n", 0) == 0);
  CHECK(log.find("epochs=1") != std::string::npos);
  CHECK(log.find("batch-size=8") != std::string::npos);
}

TEST_CASE("segment writes increasing times and a score dump") {
  Workspace& w = Workspace::get();
  const fs::path wav = w.corpus / "utt_00000.wav";
  const fs::path dump = w.dir / "scores.tsv";
  const fs::path out = w.dir / "bounds.txt";
  const Result r = run({"segment", "--model", w.model.string(), "--wav", wav.string(), "--delta", "0.1",
                        "--dump-scores", dump.string(), "--out", out.string()});
  REQUIRE(r.code == 0);
  const BoundarySet b = read_boundaries(out);
  CHECK_NOTHROW(b.validate());
  for (const std::string& line : lines(testing::read_text(out))) {
    const auto dot = line.find('.');
    REQUIRE(dot != std::string::npos);
    CHECK(line.size() - dot - 1 == 6);
  }
  const std::size_t samples = static_cast<std::size_t>(fs::file_size(wav) - 44) / 2;
  const std::size_t frames = (samples - 465) / 160 + 1;
  CHECK(lines(testing::read_text(dump)).size() == frames - 1);

  const Result strict = run({"segment", "--model", w.model.string(), "--wav", wav.string(), "--delta", "1.0"});
  REQUIRE(strict.code == 0);
  CHECK(lines(strict.out).size() <= 1);
  CHECK(run({"segment", "--model", w.model.string(), "--wav", (w.dir / "nope.wav").string()}).code == 2);
}

TEST_CASE("tune prints one row per grid value and the best") {
  Workspace& w = Workspace::get();
  for (const char* metric : {"rval", "f1"}) {
    const Result r = run({"tune", "--model", w.model.string(), "--manifest", (w.corpus / "val.lst").string(),
                          "--metric", metric});
    REQUIRE(r.code == 0);
    const auto out = lines(r.out);
    REQUIRE(out.size() == 1 + 21 + 2);
    const std::size_t column = std::string(metric) == "f1" ? 3 : 4;
    double best = -1.0;
    std::string best_delta;
    for (std::size_t i = 1; i <= 21; ++i) {
      const auto f = split_tabs(out[i]);
      if (std::stod(f[column]) > best) {
        best = std::stod(f[column]);
        best_delta = f[0];
      }
    }
    CHECK(out[22] == "best_delta\t" + best_delta);
    CHECK(split_tabs(out[23])[0] == std::string("best_") + metric);
    CHECK(std::stod(split_tabs(out[23])[1]) == doctest::Approx(best).epsilon(1e-9));
  }
  const Result unannotated = run({"tune", "--model", w.model.string(), "--manifest", (w.dir / "bare.lst").string()});
  CHECK(unannotated.code == 2);
  testing::write_text(w.dir / "bare.lst", (w.corpus / "utt_00000.wav").string() + "\n");
  CHECK(run({"tune", "--model", w.model.string(), "--manifest", (w.dir / "bare.lst").string()}).code == 2);
}

TEST_CASE("eval of gold against itself is perfect") {
  Workspace& w = Workspace::get();
  const Manifest test = read_manifest(w.corpus / "test.lst");
  std::string pred_list;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const fs::path p = w.dir / ("gold_" + std::to_string(i) + ".txt");
    write_boundaries(p, gold_boundaries(parse_annotation(*test[i].annotation)));
    pred_list += p.filename().string() + "\n";
  }
  testing::write_text(w.dir / "pred.lst", pred_list);
  const Result r =
      run({"eval", "--pred-manifest", (w.dir / "pred.lst").string(), "--manifest", (w.corpus / "test.lst").string()});
  REQUIRE(r.code == 0);
  for (const char* metric : {"precision\t100.00", "recall\t100.00", "f1\t100.00", "r_value\t100.00"})
    CHECK(r.out.find(metric) != std::string::npos);
  CHECK(r.err.find("tolerance=0.02") != std::string::npos);

  const auto out = lines(r.out);
  const auto first = std::find_if(out.begin(), out.end(), [](const std::string& l) { return l.rfind("precision\t", 0) == 0; });
  REQUIRE(first != out.end());
  std::string machine;
  for (auto it = first; it != out.end(); ++it) machine += *it + "\n";
  std::istringstream in(machine);
  const EvalReport back = parse_report_lines(in);
  CHECK(back.hits == back.gold_count);
  CHECK(back.r_value == 100.0);

  const Result model = run({"eval", "--model", w.model.string(), "--manifest", (w.corpus / "test.lst").string()});
  CHECK(model.code == 0);
  CHECK(run({"eval", "--manifest", (w.corpus / "test.lst").string()}).code == 1);
  CHECK(run({"eval", "--model", w.model.string(), "--pred-manifest", (w.dir / "pred.lst").string(), "--manifest",
             (w.corpus / "test.lst").string()})
            .code == 1);
  testing::write_text(w.dir / "short.lst", "gold_0.txt\n");
  CHECK(run({"eval", "--pred-manifest", (w.dir / "short.lst").string(), "--manifest",
             (w.corpus / "test.lst").string()})
            .code == 2);
}

TEST_CASE("training twice with one seed gives identical checkpoints") {
  Workspace& w = Workspace::get();
  const fs::path again = w.dir / "again.ckpt";
  REQUIRE(run({"train", "--manifest", (w.corpus / "train.lst").string(), "--val-manifest",
               (w.corpus / "val.lst").string(), "--out", again.string(), "--epochs", "1", "--seed", "3"})
              .code == 0);
  CHECK(testing::read_bytes(again) == testing::read_bytes(w.model));
}
