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

#include "unsupseg/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "unsupseg/errors.hpp"

namespace unsupseg {

namespace {

// Absorbs representation error of decimal times at the tolerance edge.
constexpr double kTimeSlack = 1e-9;

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::size_t match_boundaries(const BoundarySet& pred, const BoundarySet& gold, double tolerance) {
  if (tolerance < 0.0) throw ContractError("match_boundaries: tolerance must be >= 0");
  const auto& p = pred.times;
  std::vector<bool> used(p.size(), false);
  std::size_t hits = 0;
  std::size_t first = 0;  // predictions before this index are too early for every later gold
  for (double g : gold.times) {
    while (first < p.size() && p[first] < g - tolerance - kTimeSlack) ++first;
    for (std::size_t j = first; j < p.size() && p[j] <= g + tolerance + kTimeSlack; ++j) {
      if (!used[j]) {
        used[j] = true;
        ++hits;
        break;
      }
    }
  }
  return hits;
}

PrecisionRecall precision_recall_f1(std::size_t hits, std::size_t pred_count, std::size_t gold_count) {
  if (hits > pred_count || hits > gold_count) {
    throw ContractError("precision_recall_f1: hits exceed prediction or gold count");
  }
  if (pred_count == 0 && gold_count == 0) return {1.0, 1.0, 1.0};
  if (pred_count == 0 || gold_count == 0) return {0.0, 0.0, 0.0};
  PrecisionRecall out;
  out.precision = static_cast<double>(hits) / static_cast<double>(pred_count);
  out.recall = static_cast<double>(hits) / static_cast<double>(gold_count);
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

RValue r_value(double precision, double recall) {
  if (!(precision > 0.0)) return {0.0, 0.0, false};
  const double os = recall / precision - 1.0;
  const double r1 = std::sqrt((1.0 - recall) * (1.0 - recall) + os * os);
  const double r2 = (-os + recall - 1.0) / std::numbers::sqrt2;
  return {1.0 - (std::abs(r1) + std::abs(r2)) / 2.0, os, true};
}

EvalReport make_report(std::size_t hits, std::size_t pred_count, std::size_t gold_count) {
  const PrecisionRecall prf = precision_recall_f1(hits, pred_count, gold_count);
  const RValue rv = r_value(prf.precision, prf.recall);
  EvalReport report;
  report.precision = 100.0 * prf.precision;
  report.recall = 100.0 * prf.recall;
  report.f1 = 100.0 * prf.f1;
  report.os = rv.os;
  report.os_defined = rv.os_defined;
  report.r_value = 100.0 * rv.value;
  report.hits = hits;
  report.pred_count = pred_count;
  report.gold_count = gold_count;
  return report;
}

namespace {

void check_keys(const BoundaryMap& pred, const BoundaryMap& gold) {
  std::string missing_pred, missing_gold;
  for (const auto& [key, _] : gold)
    if (!pred.count(key)) missing_pred += (missing_pred.empty() ? "" : ", ") + key;
  for (const auto& [key, _] : pred)
    if (!gold.count(key)) missing_gold += (missing_gold.empty() ? "" : ", ") + key;
  if (missing_pred.empty() && missing_gold.empty()) return;
  std::string msg = "utterance keys differ between predictions and gold";
  if (!missing_pred.empty()) msg += "; missing predictions: " + missing_pred;
  if (!missing_gold.empty()) msg += "; missing gold: " + missing_gold;
  throw ContractError(msg);
}

}  // namespace

EvalReport evaluate_corpus(const BoundaryMap& pred, const BoundaryMap& gold, double tolerance) {
  check_keys(pred, gold);
  std::size_t hits = 0, n_pred = 0, n_gold = 0;
  for (const auto& [key, g] : gold) {
    const BoundarySet& p = pred.at(key);
    hits += match_boundaries(p, g, tolerance);
    n_pred += p.size();
    n_gold += g.size();
  }
  return make_report(hits, n_pred, n_gold);
}

std::vector<std::pair<std::string, EvalReport>> evaluate_utterances(const BoundaryMap& pred,
                                                                    const BoundaryMap& gold,
                                                                    double tolerance) {
  check_keys(pred, gold);
  std::vector<std::pair<std::string, EvalReport>> out;
  for (const auto& [key, g] : gold) {
    const BoundarySet& p = pred.at(key);
    out.emplace_back(key, make_report(match_boundaries(p, g, tolerance), p.size(), g.size()));
  }
  return out;
}

EvalReport macro_average(std::span<const std::pair<std::string, EvalReport>> reports) {
  EvalReport avg;
  if (reports.empty()) return avg;
  for (const auto& [_, r] : reports) {
    avg.precision += r.precision;
    avg.recall += r.recall;
    avg.f1 += r.f1;
    avg.r_value += r.r_value;
    avg.hits += r.hits;
    avg.pred_count += r.pred_count;
    avg.gold_count += r.gold_count;
  }
  const double n = static_cast<double>(reports.size());
  avg.precision /= n;
  avg.recall /= n;
  avg.f1 /= n;
  avg.r_value /= n;
  avg.os_defined = avg.precision > 0.0;
  avg.os = avg.os_defined ? avg.recall / avg.precision - 1.0 : 0.0;
  return avg;
}

void write_report_table(std::ostream& out, const EvalReport& report) {
  out << "  Precision   Recall       F1       OS  R-value\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%11.2f %8.2f %8.2f %8s %8.2f\n", report.precision, report.recall,
                report.f1, report.os_defined ? fixed2(100.0 * report.os).c_str() : "n/a",
                report.r_value);
  out << buf;
  out << "  hits " << report.hits << ", predicted " << report.pred_count << ", gold "
      << report.gold_count << '\n';
}

void write_report_lines(std::ostream& out, const EvalReport& report) {
  out << "precision\t" << fixed2(report.precision) << '\n';
  out << "recall\t" << fixed2(report.recall) << '\n';
  out << "f1\t" << fixed2(report.f1) << '\n';
  out << "os\t" << (report.os_defined ? fixed2(100.0 * report.os) : std::string("nan")) << '\n';
  out << "r_value\t" << fixed2(report.r_value) << '\n';
  out << "hits\t" << report.hits << '\n';
  out << "pred_count\t" << report.pred_count << '\n';
  out << "gold_count\t" << report.gold_count << '\n';
}

EvalReport parse_report_lines(std::istream& in) {
  EvalReport report;
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    const std::string key = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    if (key == "precision") report.precision = std::stod(value);
    else if (key == "recall") report.recall = std::stod(value);
    else if (key == "f1") report.f1 = std::stod(value);
    else if (key == "os") {
      report.os_defined = value != "nan";
      report.os = report.os_defined ? std::stod(value) / 100.0 : 0.0;
    } else if (key == "r_value") report.r_value = std::stod(value);
    else if (key == "hits") report.hits = std::stoul(value);
    else if (key == "pred_count") report.pred_count = std::stoul(value);
    else if (key == "gold_count") report.gold_count = std::stoul(value);
  }
  return report;
}

}  // namespace unsupseg
