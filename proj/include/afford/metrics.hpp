// Copyright 2026 The Afford Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "afford/core.hpp"
#include "afford/maskops.hpp"
#include "afford/predict.hpp"
#include "afford/wire.hpp"

namespace afford::metrics {

struct EvalSample {
  std::string record_id;
  mask::RleMask gt;
  mask::RleMask pred;
  core::CategoryLabel category;
  core::SplitTag splits;
};

/// Per-sample outcome. A failed sample has iou 0, intersection 0 and union
/// equal to the ground-truth area.
struct SampleScore {
  std::string record_id;
  std::string category;
  std::string split;
  mask::IouResult iou;
  bool failed = false;
  std::string failure;
};

struct MetricPair {
  double giou = 0.0;
  double ciou = 0.0;
  std::size_t samples = 0;
  friend bool operator==(const MetricPair&, const MetricPair&) = default;
};

struct EvalReport {
  MetricPair overall;
  std::map<std::string, MetricPair> per_category;
  std::map<std::string, MetricPair> per_split;
  std::size_t sample_count = 0;
  std::vector<std::string> failures;  // record ids, in manifest order
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Mean of per-sample IoU. Throws EmptyEvaluation on an empty list.
double compute_giou(std::span<const EvalSample> samples);
/// Summed intersections over summed unions; 1.0 when the total union is 0.
/// Throws EmptyEvaluation on an empty list.
double compute_ciou(std::span<const EvalSample> samples);

SampleScore score_sample(const EvalSample& sample);
MetricPair aggregate(std::span<const SampleScore> scores);

/// "category=<seen|zero-shot>,domain=<seen|zero-shot>,reasoning=<kind>"
std::string split_descriptor(const core::SplitTag& tag);

/// Queries the predictor once per record (all must be split = val and carry
/// a ground-truth mask) and aggregates overall, per category and per split
/// descriptor. `jobs` > 1 runs records concurrently when the predictor
/// allows it; the report does not depend on scheduling.
EvalReport evaluate_benchmark(const core::DatasetManifest& manifest,
                              predict::MaskPredictor& predictor, std::size_t jobs = 1);

wire::Json report_to_json(const EvalReport& report);
/// Aligned plain-text table, metrics in percent.
std::string report_table(const EvalReport& report);

}  // namespace afford::metrics
