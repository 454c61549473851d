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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afford/core.hpp"
#include "afford/maskops.hpp"

namespace afford::annotate {

/// The five annotation tools, in priority order.
enum class ToolId {
  kOriginal,               // original dataset mask
  kSegmenter,              // box-prompted segmenter
  kGroundingSegmenter,     // language grounding + segmenter
  kPartGroundingSegmenter, // part grounding + segmenter
  kHuman,
};

std::string_view to_string(ToolId t);
std::optional<ToolId> parse_tool(std::string_view s);
core::ProvenanceTool provenance_of(ToolId t);

struct CompositionRule {
  std::vector<std::string> categories;
  std::vector<ToolId> tools;
};

/// Per-dataset tool chains. Categories without a rule use `fallback`.
struct ToolComposition {
  std::string dataset;
  std::vector<CompositionRule> rules;
  std::vector<ToolId> fallback;

  const std::vector<ToolId>& tools_for(const std::string& category) const;
};

/// Invariant violations: a category in two rules, an empty tool list, or
/// T5 anywhere but last.
std::vector<std::string> check_composition(const ToolComposition& comp);

/// Category -> part name for categories the part-grounding backend knows.
using PartVocabulary = std::map<std::string, std::string>;

struct CompositionConfig {
  std::map<std::string, ToolComposition> datasets;
  ToolComposition default_composition;
  PartVocabulary parts;

  /// Composition for a dataset name, or the default one.
  const ToolComposition& for_dataset(const std::optional<std::string>& dataset) const;
};

/// Throws ParseError on a malformed file or a composition that breaks its
/// invariants.
CompositionConfig load_composition_config(const std::filesystem::path& path);
std::filesystem::path default_composition_path();

struct AnnotationTask {
  std::string record_id;
  std::string image_path;  // resolved
  std::string relative_image_path;
  core::CategoryLabel category;
  std::optional<mask::RleMask> original_mask;
  std::optional<mask::BBox> gt_box;
  std::optional<std::string> language;
  /// Image size if known; needed by the box rasterizer fallback.
  int height = 0;
  int width = 0;
};

AnnotationTask task_from_record(const core::AffordanceRecord& record,
                                const core::ManifestHeader& header);

/// The composition's chain for the task's category, keeping only tools whose
/// inputs exist: T1 needs an original mask, T2 a box, T3 a language
/// instruction, T4 a category in `parts`; T5 always qualifies. T5 is
/// appended when nothing else survives.
std::vector<ToolId> plan_tools(const AnnotationTask& task, const ToolComposition& comp,
                               const PartVocabulary& parts);

enum class OutcomeStatus { kSuccess, kFailed, kSkipped };
std::string_view to_string(OutcomeStatus s);

struct ToolOutcome {
  ToolId tool = ToolId::kHuman;
  OutcomeStatus status = OutcomeStatus::kSkipped;
  std::optional<mask::RleMask> mask;
  std::string note;
};

// Backend interfaces. Implementations throw BackendError on failure and must
// be callable from several threads.
class GroundingBackend {
 public:
  virtual ~GroundingBackend() = default;
  virtual std::vector<mask::BBox> ground(const std::string& image_bytes,
                                         const std::string& text) = 0;
};

class PartGroundingBackend {
 public:
  virtual ~PartGroundingBackend() = default;
  virtual std::vector<mask::BBox> ground_part(const std::string& image_bytes,
                                              const std::string& category,
                                              const std::string& part) = 0;
};

class SegmenterBackend {
 public:
  virtual ~SegmenterBackend() = default;
  virtual mask::RleMask segment_box(const std::string& image_bytes, const mask::BBox& box) = 0;
  virtual mask::RleMask segment_polygon(const std::string& image_bytes,
                                        const mask::Polygon& polygon) = 0;
};

struct BackendSet {
  std::shared_ptr<GroundingBackend> grounding;
  std::shared_ptr<PartGroundingBackend> part_grounding;
  /// When null, boxes are rasterized directly.
  std::shared_ptr<SegmenterBackend> segmenter;
  PartVocabulary parts;
  /// Automated masks below this area count as failures.
  std::uint64_t min_area = 25;
};

struct HumanTask {
  std::string record_id;
  std::string image_path;
  std::string category;
  friend bool operator==(const HumanTask&, const HumanTask&) = default;
};

/// Pending human work. Appends are serialized; `tasks()` is in arrival order.
class HumanQueue {
 public:
  void enqueue(HumanTask task);
  std::vector<HumanTask> tasks() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<HumanTask> tasks_;
};

/// One JSON line per task: {"recordId":..,"imagePath":..,"category":..}
std::vector<HumanTask> read_human_spool(const std::filesystem::path& path);
std::string format_human_spool(const std::vector<HumanTask>& tasks);

struct HumanResult {
  mask::RleMask mask;
  bool with_segmenter = false;
};

/// Companion results file: {"recordId":..,"mask":{...}[,"segmenter":bool]}
/// per line. Later lines win.
std::map<std::string, HumanResult> read_human_results(const std::filesystem::path& path);

struct CascadeResult {
  std::optional<mask::RleMask> final_mask;
  std::optional<core::ProvenanceTag> provenance;
  std::vector<ToolOutcome> trace;
  bool sent_to_human = false;
};

/// Runs `plan` in order and stops at the first success. A missing or
/// erroring backend is a failed outcome and the cascade moves on. T5 queues
/// a human task, records a skipped "pending" outcome and yields no mask.
CascadeResult run_cascade(const AnnotationTask& task, const std::vector<ToolId>& plan,
                          const BackendSet& backends, HumanQueue& humans);

}  // namespace afford::annotate
