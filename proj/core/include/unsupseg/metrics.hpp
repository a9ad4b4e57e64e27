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

#ifndef UNSUPSEG_METRICS_HPP_
#define UNSUPSEG_METRICS_HPP_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "unsupseg/boundaries.hpp"

namespace unsupseg {

inline constexpr double kDefaultTolerance = 0.02;

// One-to-one matching at a time tolerance. Gold boundaries are walked in time
// order and each takes the earliest unused prediction within tolerance. For
// equal-width tolerance windows this yields a maximum matching.
std::size_t match_boundaries(const BoundarySet& pred, const BoundarySet& gold, double tolerance);

// Fractions in [0, 1]. No predictions with non-empty gold (or vice versa)
// gives 0/0/0; both empty gives 1/1/1.
struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

PrecisionRecall precision_recall_f1(std::size_t hits, std::size_t pred_count, std::size_t gold_count);

struct RValue {
  double value = 0.0;  // fraction
  double os = 0.0;     // over-segmentation R/P - 1
  bool os_defined = true;
};

// R-value = 1 - (|r1| + |r2|) / 2 with r1 = sqrt((1-R)^2 + OS^2),
// r2 = (-OS + R - 1) / sqrt(2), OS = R/P - 1. P == 0 yields value 0 with
// os_defined = false.
RValue r_value(double precision, double recall);

// P, R, F1 and R-value in percent; OS as a fraction.
struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double os = 0.0;
  double r_value = 0.0;
  bool os_defined = true;
  std::size_t hits = 0;
  std::size_t pred_count = 0;
  std::size_t gold_count = 0;
};

EvalReport make_report(std::size_t hits, std::size_t pred_count, std::size_t gold_count);

using BoundaryMap = std::map<std::string, BoundarySet>;

// Micro-averaged: counts pooled over utterances, metrics computed once.
// Throws ContractError listing utterances present on one side only.
EvalReport evaluate_corpus(const BoundaryMap& pred, const BoundaryMap& gold, double tolerance);

// Per-utterance reports in key order.
std::vector<std::pair<std::string, EvalReport>> evaluate_utterances(const BoundaryMap& pred,
                                                                    const BoundaryMap& gold,
                                                                    double tolerance);

// Unweighted mean of per-utterance P, R, F1, R-value (counts are summed).
EvalReport macro_average(std::span<const std::pair<std::string, EvalReport>> reports);

void write_report_table(std::ostream& out, const EvalReport& report);

// `metric<TAB>value` lines: precision, recall, f1, os, r_value (percent, two
// decimals) followed by hits, pred_count, gold_count.
void write_report_lines(std::ostream& out, const EvalReport& report);
EvalReport parse_report_lines(std::istream& in);

}  // namespace unsupseg

#endif  // UNSUPSEG_METRICS_HPP_
