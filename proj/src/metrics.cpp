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
#include "afford/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "afford/errors.hpp"
#include "afford/parallel.hpp"

namespace afford::metrics {

namespace {

std::vector<SampleScore> score_all(std::span<const EvalSample> samples) {
  if (samples.empty()) throw EmptyEvaluation("no samples to evaluate");
  std::vector<SampleScore> scores;
  scores.reserve(samples.size());
  for (const auto& s : samples) scores.push_back(score_sample(s));
  return scores;
}

SampleScore failed_score(const core::AffordanceRecord& r, std::string why) {
  SampleScore s;
  s.record_id = r.id;
  s.category = r.category.name;
  s.split = split_descriptor(r.splits);
  s.iou = {0, r.mask->area(), 0.0};
  s.failed = true;
  s.failure = std::move(why);
  return s;
}

std::string percent(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

}  // namespace

SampleScore score_sample(const EvalSample& sample) {
  SampleScore s;
  s.record_id = sample.record_id;
  s.category = sample.category.name;
  s.split = split_descriptor(sample.splits);
  s.iou = mask::iou(sample.gt, sample.pred);
  return s;
}

MetricPair aggregate(std::span<const SampleScore> scores) {
  if (scores.empty()) throw EmptyEvaluation("no samples to evaluate");
  MetricPair m;
  double sum = 0.0;
  std::uint64_t inter = 0, uni = 0;
  for (const auto& s : scores) {
    sum += s.iou.iou;
    inter += s.iou.intersection;
    uni += s.iou.union_area;
  }
  m.samples = scores.size();
  m.giou = sum / static_cast<double>(scores.size());
  m.ciou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  return m;
}

double compute_giou(std::span<const EvalSample> samples) {
  const auto scores = score_all(samples);
  return aggregate(scores).giou;
}

double compute_ciou(std::span<const EvalSample> samples) {
  const auto scores = score_all(samples);
  return aggregate(scores).ciou;
}

std::string split_descriptor(const core::SplitTag& tag) {
  std::string d = "category=";
  d += tag.zero_shot_category ? "zero-shot" : "seen";
  d += ",domain=";
  d += tag.zero_shot_domain ? "zero-shot" : "seen";
  d += ",reasoning=";
  d += core::to_string(tag.reasoning);
  return d;
}

EvalReport evaluate_benchmark(const core::DatasetManifest& manifest,
                              predict::MaskPredictor& predictor, std::size_t jobs) {
  for (const auto& r : manifest.records) {
    if (r.splits.split != core::Split::kVal)
      throw UsageError("record " + r.id + " is not in the val split");
    if (!r.mask) throw UsageError("record " + r.id + " has no ground-truth mask");
    if (mask::check_rle(*r.mask)) throw BadRle("record " + r.id + " has an invalid mask");
  }
  if (manifest.records.empty()) throw EmptyEvaluation("manifest has no records");

  std::vector<SampleScore> scores(manifest.records.size());
  const std::size_t workers = predictor.concurrent() ? std::max<std::size_t>(1, jobs) : 1;
  parallel_for(manifest.records.size(), workers, [&](std::size_t i) {
    const auto& rec = manifest.records[i];
    try {
      const auto response = predictor.predict(predict::compose_query(rec, manifest.header));
      const auto& pred = predict::select_mask(response);
      if (auto why = mask::check_rle(pred)) {
        scores[i] = failed_score(rec, "invalid mask: " + *why);
        return;
      }
      scores[i] = score_sample({rec.id, *rec.mask, pred, rec.category, rec.splits});
    } catch (const SizeMismatch&) {
      scores[i] = failed_score(rec, "predicted mask size differs from ground truth");
    } catch (const std::exception& e) {
      scores[i] = failed_score(rec, e.what());
    }
  });

  EvalReport report;
  report.sample_count = scores.size();
  report.overall = aggregate(scores);
  std::map<std::string, std::vector<SampleScore>> by_cat, by_split;
  for (const auto& s : scores) {
    by_cat[s.category].push_back(s);
    by_split[s.split].push_back(s);
    if (s.failed) report.failures.push_back(s.record_id);
  }
  for (const auto& [k, v] : by_cat) report.per_category[k] = aggregate(v);
  for (const auto& [k, v] : by_split) report.per_split[k] = aggregate(v);
  return report;
}

wire::Json report_to_json(const EvalReport& report) {
  using wire::Json;
  const auto pair = [](const MetricPair& m, bool with_count) {
    Json j;
    j["giou"] = m.giou;
    j["ciou"] = m.ciou;
    if (with_count) j["samples"] = m.samples;
    return j;
  };
  Json j;
  j["overall"] = pair(report.overall, false);
  Json cats = Json::object();
  for (const auto& [k, v] : report.per_category) cats[k] = pair(v, true);
  j["perCategory"] = std::move(cats);
  Json splits = Json::object();
  for (const auto& [k, v] : report.per_split) splits[k] = pair(v, true);
  j["perSplit"] = std::move(splits);
  j["samples"] = report.sample_count;
  j["failures"] = report.failures;
  return j;
}

std::string report_table(const EvalReport& report) {
  std::vector<std::array<std::string, 4>> rows;
  rows.push_back({"Subset", "gIoU", "cIoU", "N"});
  rows.push_back({"overall", percent(report.overall.giou), percent(report.overall.ciou),
                  std::to_string(report.sample_count)});
  for (const auto& [k, v] : report.per_split)
    rows.push_back({k, percent(v.giou), percent(v.ciou), std::to_string(v.samples)});
  for (const auto& [k, v] : report.per_category)
    rows.push_back({"  " + k, percent(v.giou), percent(v.ciou), std::to_string(v.samples)});

  std::array<std::size_t, 4> width{};
  for (const auto& r : rows)
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], r[c].size());

  std::ostringstream out;
  const auto rule = [&] {
    for (std::size_t c = 0; c < 4; ++c) out << std::string(width[c] + (c ? 3 : 0), '-');
    out << '\n';
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << r[0] << std::string(width[0] - r[0].size(), ' ');
    for (std::size_t c = 1; c < 4; ++c)
      out << " | " << std::string(width[c] - r[c].size(), ' ') << r[c];
    out << '\n';
    if (i == 0 || i == 1 || i == 1 + report.per_split.size()) rule();
  }
  if (!report.failures.empty())
    out << report.failures.size() << " failed prediction(s) scored as IoU 0\n";
  return out.str();
}

}  // namespace afford::metrics
