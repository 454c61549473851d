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
#include "afford/predict.hpp"

#include <algorithm>
#include <cmath>

#include "afford/errors.hpp"

namespace afford::predict {

std::string_view to_string(SlotToken t) { return t == SlotToken::kAff ? "AFF" : "SEG"; }

std::optional<SlotToken> parse_slot_token(std::string_view s) {
  if (s == "AFF") return SlotToken::kAff;
  if (s == "SEG") return SlotToken::kSeg;
  return std::nullopt;
}

PredictorQuery compose_query(const core::AffordanceRecord& record,
                             const core::ManifestHeader& header) {
  PredictorQuery q;
  q.record_id = record.id;
  q.image_path = core::resolve(header, record.image).string();
  q.system_prompt = std::string(kEmbodiedSystemPrompt);
  q.instruction = record.instruction ? record.instruction->text : std::string();
  if (auto it = header.image_sizes.find(record.image); it != header.image_sizes.end()) {
    q.height = it->second.height;
    q.width = it->second.width;
  } else if (record.mask) {
    q.height = record.mask->height;
    q.width = record.mask->width;
  }
  return q;
}

const mask::RleMask& select_mask(const PredictorResponse& response) {
  const auto& slots = response.slots;
  auto it = std::find_if(slots.begin(), slots.end(),
                         [](const MaskSlot& s) { return s.token == SlotToken::kAff; });
  if (it == slots.end())
    it = std::find_if(slots.begin(), slots.end(),
                      [](const MaskSlot& s) { return s.token == SlotToken::kSeg; });
  if (it == slots.end()) throw NoMaskToken("response carries no <AFF> or <SEG> mask");
  return it->mask;
}

std::vector<std::string> check_response(const PredictorResponse& response) {
  std::vector<std::string> problems;
  for (std::size_t i = 1; i < response.slots.size(); ++i)
    if (response.slots[i].position <= response.slots[i - 1].position)
      problems.push_back("slot positions are not strictly increasing at index " +
                         std::to_string(i));

  std::vector<SlotToken> in_text;
  const std::string& t = response.text;
  for (std::size_t p = t.find('<'); p != std::string::npos; p = t.find('<', p + 1)) {
    if (t.compare(p, 5, "<AFF>") == 0) in_text.push_back(SlotToken::kAff);
    if (t.compare(p, 5, "<SEG>") == 0) in_text.push_back(SlotToken::kSeg);
  }
  if (in_text.size() != response.slots.size()) {
    problems.push_back("text has " + std::to_string(in_text.size()) + " mask tokens but " +
                       std::to_string(response.slots.size()) + " slots");
  } else {
    for (std::size_t i = 0; i < in_text.size(); ++i)
      if (in_text[i] != response.slots[i].token)
        problems.push_back("slot " + std::to_string(i) + " token does not match the text");
  }
  return problems;
}

OraclePredictor::OraclePredictor(const core::DatasetManifest& manifest) {
  for (const auto& r : manifest.records)
    if (r.mask) truth_[r.id] = *r.mask;
}

PredictorResponse OraclePredictor::predict(const PredictorQuery& query) {
  auto it = truth_.find(query.record_id);
  if (it == truth_.end()) throw PredictorFailure("no ground truth for " + query.record_id);
  return {"<AFF>", {{SlotToken::kAff, 0, it->second}}};
}

PredictorResponse EmptyPredictor::predict(const PredictorQuery& /*query*/) {
  return {"No affordance found.", {}};
}

CenterBoxPredictor::CenterBoxPredictor(double area_fraction) : fraction_(area_fraction) {
  if (!(area_fraction > 0 && area_fraction <= 1))
    throw UsageError("centerbox area fraction must be in (0, 1]");
}

mask::BBox center_box(int width, int height, double area_fraction) {
  const double scale = std::sqrt(area_fraction);
  const int bw = std::clamp(static_cast<int>(std::lround(width * scale)), 1, width);
  const int bh = std::clamp(static_cast<int>(std::lround(height * scale)), 1, height);
  const int x0 = (width - bw) / 2;
  const int y0 = (height - bh) / 2;
  return {x0, y0, x0 + bw, y0 + bh};
}

PredictorResponse CenterBoxPredictor::predict(const PredictorQuery& query) {
  if (query.width < 1 || query.height < 1)
    throw PredictorFailure("image size unknown for " + query.record_id);
  const auto box = center_box(query.width, query.height, fraction_);
  return {"<SEG>",
          {{SlotToken::kSeg, 0,
            mask::rle_encode(mask::rasterize_box(box, query.width, query.height))}}};
}

}  // namespace afford::predict
