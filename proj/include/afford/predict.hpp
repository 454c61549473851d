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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afford/core.hpp"
#include "afford/maskops.hpp"

namespace afford::predict {

/// Prepended to every affordance instruction at query time.
inline constexpr std::string_view kEmbodiedSystemPrompt = "You are an embodied robot.";

struct PredictorQuery {
  std::string record_id;
  std::string image_path;  // resolved against the manifest image root
  std::string system_prompt;
  std::string instruction;
  /// Image size the answer mask must have; known from the ground truth or the
  /// manifest header.
  int height = 0;
  int width = 0;
};

enum class SlotToken { kAff, kSeg };

std::string_view to_string(SlotToken t);
std::optional<SlotToken> parse_slot_token(std::string_view s);

struct MaskSlot {
  SlotToken token = SlotToken::kSeg;
  int position = 0;
  mask::RleMask mask;
};

struct PredictorResponse {
  std::string text;
  std::vector<MaskSlot> slots;
};

/// Builds the query for a record: the embodied system prompt plus the
/// record's instruction verbatim. Image size comes from the header when
/// declared, else from the ground-truth mask.
PredictorQuery compose_query(const core::AffordanceRecord& record,
                             const core::ManifestHeader& header);

/// First AFF slot, else first SEG slot. Throws NoMaskToken when there are
/// no slots.
const mask::RleMask& select_mask(const PredictorResponse& response);

/// Every violated PredictorResponse invariant (positions strictly
/// increasing; slot tokens match the "<AFF>"/"<SEG>" occurrences in text).
std::vector<std::string> check_response(const PredictorResponse& response);

/// Model boundary used by the evaluation harness.
class MaskPredictor {
 public:
  virtual ~MaskPredictor() = default;
  virtual PredictorResponse predict(const PredictorQuery& query) = 0;
  /// Whether predict() may be called from several threads at once.
  virtual bool concurrent() const { return true; }
  virtual std::string name() const = 0;
};

/// Answers with the ground-truth mask in an AFF slot.
class OraclePredictor : public MaskPredictor {
 public:
  explicit OraclePredictor(const core::DatasetManifest& manifest);
  PredictorResponse predict(const PredictorQuery& query) override;
  std::string name() const override { return "oracle"; }

 private:
  std::map<std::string, mask::RleMask> truth_;
};

/// Answers with no mask token at all.
class EmptyPredictor : public MaskPredictor {
 public:
  PredictorResponse predict(const PredictorQuery& query) override;
  std::string name() const override { return "empty"; }
};

/// Answers with a centered box covering `area_fraction` of the image in a
/// SEG slot.
class CenterBoxPredictor : public MaskPredictor {
 public:
  explicit CenterBoxPredictor(double area_fraction = 0.25);
  PredictorResponse predict(const PredictorQuery& query) override;
  std::string name() const override { return "centerbox"; }

 private:
  double fraction_;
};

mask::BBox center_box(int width, int height, double area_fraction);

}  // namespace afford::predict
