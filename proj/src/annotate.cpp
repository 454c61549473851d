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
#include "afford/annotate.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "afford/errors.hpp"
#include "afford/io.hpp"
#include "afford/wire.hpp"

namespace afford::annotate {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<ToolId, std::string_view> kToolNames[] = {
    {ToolId::kOriginal, "T1_original"},
    {ToolId::kSegmenter, "T2_segmenter"},
    {ToolId::kGroundingSegmenter, "T3_grounding_segmenter"},
    {ToolId::kPartGroundingSegmenter, "T4_part_grounding_segmenter"},
    {ToolId::kHuman, "T5_human"},
};

std::vector<ToolId> parse_tools(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(0, where + ": tools must be an array");
  std::vector<ToolId> tools;
  for (const auto& t : j) {
    if (!t.is_string()) throw ParseError(0, where + ": tool names must be strings");
    auto id = parse_tool(t.get<std::string>());
    if (!id) throw ParseError(0, where + ": unknown tool \"" + t.get<std::string>() + "\"");
    tools.push_back(*id);
  }
  return tools;
}

ToolComposition parse_composition(const std::string& name, const json& j) {
  ToolComposition comp;
  comp.dataset = name;
  if (j.contains("rules")) {
    for (const auto& r : j.at("rules")) {
      CompositionRule rule;
      for (const auto& c : r.at("categories")) rule.categories.push_back(c.get<std::string>());
      rule.tools = parse_tools(r.at("tools"), name);
      comp.rules.push_back(std::move(rule));
    }
  }
  const char* key = j.contains("default") ? "default" : "tools";
  comp.fallback = j.contains(key) ? parse_tools(j.at(key), name)
                                  : std::vector<ToolId>{ToolId::kHuman};
  if (auto problems = check_composition(comp); !problems.empty())
    throw ParseError(0, "composition \"" + name + "\": " + problems.front());
  return comp;
}

bool valid_box(const mask::BBox& b, int width, int height) {
  return 0 <= b.x0 && b.x0 < b.x1 && b.x1 <= width && 0 <= b.y0 && b.y0 < b.y1 &&
         b.y1 <= height;
}

mask::BBox clip(mask::BBox b, int width, int height) {
  b.x0 = std::clamp(b.x0, 0, width);
  b.x1 = std::clamp(b.x1, 0, width);
  b.y0 = std::clamp(b.y0, 0, height);
  b.y1 = std::clamp(b.y1, 0, height);
  return b;
}

// Per-cascade state: the image is read at most once, only if a backend
// needs it.
class ToolRunner {
 public:
  ToolRunner(const AnnotationTask& task, const BackendSet& backends)
      : task_(task), backends_(backends) {}

  ToolOutcome run(ToolId tool) {
    ToolOutcome out{tool, OutcomeStatus::kFailed, std::nullopt, {}};
    try {
      out.mask = produce(tool);
      if (auto why = mask::check_rle(*out.mask)) throw BackendError("invalid mask: " + *why);
      if (task_.height > 0 &&
          (out.mask->height != task_.height || out.mask->width != task_.width))
        throw BackendError("mask size differs from the image");
      if (out.mask->area() == 0) throw BackendError("empty mask");
      if (out.mask->area() < backends_.min_area)
        throw BackendError("mask area " + std::to_string(out.mask->area()) +
                           " below minimum " + std::to_string(backends_.min_area));
      out.status = OutcomeStatus::kSuccess;
      out.note = "ok";
    } catch (const Error& e) {
      out.mask.reset();
      out.note = e.kind() + ": " + e.what();
    } catch (const std::exception& e) {
      out.mask.reset();
      out.note = std::string("BackendError: ") + e.what();
    }
    return out;
  }

 private:
  mask::RleMask produce(ToolId tool) {
    switch (tool) {
      case ToolId::kOriginal:
        if (!task_.original_mask) throw BackendUnavailable("no original mask");
        return *task_.original_mask;
      case ToolId::kSegmenter:
        if (!task_.gt_box) throw BackendUnavailable("no ground-truth box");
        return segment(*task_.gt_box);
      case ToolId::kGroundingSegmenter: {
        if (!task_.language) throw BackendUnavailable("no language instruction");
        if (!backends_.grounding) throw BackendUnavailable("no grounding backend configured");
        return segment_first(backends_.grounding->ground(image(), *task_.language));
      }
      case ToolId::kPartGroundingSegmenter: {
        auto part = backends_.parts.find(task_.category.name);
        if (part == backends_.parts.end())
          throw BackendUnavailable("category not in the part vocabulary");
        if (!backends_.part_grounding)
          throw BackendUnavailable("no part-grounding backend configured");
        return segment_first(
            backends_.part_grounding->ground_part(image(), task_.category.name, part->second));
      }
      case ToolId::kHuman:
        break;
    }
    throw BackendUnavailable("tool has no automated backend");
  }

  mask::RleMask segment_first(const std::vector<mask::BBox>& boxes) {
    if (boxes.empty()) throw BackendError("grounding returned no boxes");
    return segment(boxes.front());
  }

  mask::RleMask segment(const mask::BBox& box) {
    if (backends_.segmenter) return backends_.segmenter->segment_box(image(), box);
    if (task_.height < 1 || task_.width < 1)
      throw BackendUnavailable("no segmenter configured and image size unknown");
    const auto clipped = clip(box, task_.width, task_.height);
    if (!valid_box(clipped, task_.width, task_.height))
      throw BackendError("box lies outside the image");
    return mask::rle_encode(mask::rasterize_box(clipped, task_.width, task_.height));
  }

  const std::string& image() {
    if (!image_) image_ = io::read_file(task_.image_path);
    return *image_;
  }

  const AnnotationTask& task_;
  const BackendSet& backends_;
  std::optional<std::string> image_;
};

}  // namespace

std::string_view to_string(ToolId t) {
  for (const auto& [id, name] : kToolNames)
    if (id == t) return name;
  return {};
}

std::optional<ToolId> parse_tool(std::string_view s) {
  for (const auto& [id, name] : kToolNames)
    if (name == s) return id;
  return std::nullopt;
}

core::ProvenanceTool provenance_of(ToolId t) {
  switch (t) {
    case ToolId::kOriginal: return core::ProvenanceTool::kOriginalMask;
    case ToolId::kSegmenter: return core::ProvenanceTool::kSegmenter;
    case ToolId::kGroundingSegmenter: return core::ProvenanceTool::kGroundingSegmenter;
    case ToolId::kPartGroundingSegmenter: return core::ProvenanceTool::kPartGroundingSegmenter;
    case ToolId::kHuman: return core::ProvenanceTool::kHuman;
  }
  return core::ProvenanceTool::kHuman;
}

std::string_view to_string(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::kSuccess: return "success";
    case OutcomeStatus::kFailed: return "failed";
    case OutcomeStatus::kSkipped: return "skipped";
  }
  return {};
}

const std::vector<ToolId>& ToolComposition::tools_for(const std::string& category) const {
  for (const auto& rule : rules)
    if (std::find(rule.categories.begin(), rule.categories.end(), category) !=
        rule.categories.end())
      return rule.tools;
  return fallback;
}

std::vector<std::string> check_composition(const ToolComposition& comp) {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  const auto check_tools = [&](const std::vector<ToolId>& tools, const std::string& where) {
    if (tools.empty()) problems.push_back(where + ": empty tool list");
    for (std::size_t i = 0; i + 1 < tools.size(); ++i)
      if (tools[i] == ToolId::kHuman) problems.push_back(where + ": T5_human must be last");
  };
  for (std::size_t r = 0; r < comp.rules.size(); ++r) {
    const auto where = "rule " + std::to_string(r);
    for (const auto& c : comp.rules[r].categories)
      if (!seen.insert(c).second)
        problems.push_back(where + ": category \"" + c + "\" appears in more than one rule");
    check_tools(comp.rules[r].tools, where);
  }
  check_tools(comp.fallback, "default");
  return problems;
}

const ToolComposition& CompositionConfig::for_dataset(
    const std::optional<std::string>& dataset) const {
  if (dataset) {
    if (auto it = datasets.find(*dataset); it != datasets.end()) return it->second;
  }
  return default_composition;
}

fs::path default_composition_path() {
  return fs::path(AFFORD_CONFIG_DIR) / "tool_composition.json";
}

CompositionConfig load_composition_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
  CompositionConfig cfg;
  try {
    if (j.contains("datasets"))
      for (const auto& [name, comp] : j.at("datasets").items())
        cfg.datasets[name] = parse_composition(name, comp);
    cfg.default_composition =
        j.contains("default") ? parse_composition("default", j.at("default"))
                              : ToolComposition{"default", {}, {ToolId::kHuman}};
    if (j.contains("partVocabulary"))
      for (const auto& [cat, part] : j.at("partVocabulary").items())
        cfg.parts[cat] = part.get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
  return cfg;
}

AnnotationTask task_from_record(const core::AffordanceRecord& record,
                                const core::ManifestHeader& header) {
  AnnotationTask t;
  t.record_id = record.id;
  t.relative_image_path = record.image;
  t.image_path = core::resolve(header, record.image).string();
  t.category = record.category;
  t.original_mask = record.inputs.original_mask;
  t.gt_box = record.inputs.gt_box;
  t.language = record.inputs.language;
  if (auto it = header.image_sizes.find(record.image); it != header.image_sizes.end()) {
    t.height = it->second.height;
    t.width = it->second.width;
  } else if (record.inputs.original_mask) {
    t.height = record.inputs.original_mask->height;
    t.width = record.inputs.original_mask->width;
  } else if (auto info = io::png_info(t.image_path)) {
    t.height = info->height;
    t.width = info->width;
  }
  return t;
}

std::vector<ToolId> plan_tools(const AnnotationTask& task, const ToolComposition& comp,
                               const PartVocabulary& parts) {
  std::vector<ToolId> plan;
  for (ToolId tool : comp.tools_for(task.category.name)) {
    bool usable = false;
    switch (tool) {
      case ToolId::kOriginal: usable = task.original_mask.has_value(); break;
      case ToolId::kSegmenter: usable = task.gt_box.has_value(); break;
      case ToolId::kGroundingSegmenter: usable = task.language.has_value(); break;
      case ToolId::kPartGroundingSegmenter: usable = parts.contains(task.category.name); break;
      case ToolId::kHuman: usable = true; break;
    }
    if (usable) plan.push_back(tool);
  }
  if (plan.empty()) plan.push_back(ToolId::kHuman);
  return plan;
}

void HumanQueue::enqueue(HumanTask task) {
  std::lock_guard lock(mu_);
  tasks_.push_back(std::move(task));
}

std::vector<HumanTask> HumanQueue::tasks() const {
  std::lock_guard lock(mu_);
  return tasks_;
}

std::size_t HumanQueue::size() const {
  std::lock_guard lock(mu_);
  return tasks_.size();
}

std::vector<HumanTask> read_human_spool(const fs::path& path) {
  std::vector<HumanTask> tasks;
  std::ifstream in(path);
  if (!in) return tasks;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      tasks.push_back({j.at("recordId").get<std::string>(), j.at("imagePath").get<std::string>(),
                       j.at("category").get<std::string>()});
    } catch (const json::exception& e) {
      throw ParseError(n, path.string() + ": " + e.what());
    }
  }
  return tasks;
}

std::string format_human_spool(const std::vector<HumanTask>& tasks) {
  std::string out;
  for (const auto& t : tasks) {
    wire::Json j;
    j["recordId"] = t.record_id;
    j["imagePath"] = t.image_path;
    j["category"] = t.category;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::map<std::string, HumanResult> read_human_results(const fs::path& path) {
  std::map<std::string, HumanResult> results;
  std::ifstream in(path);
  if (!in) return results;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      HumanResult r;
      r.mask = wire::rle_from_json(j.at("mask"));
      r.with_segmenter = j.value("segmenter", false);
      results[j.at("recordId").get<std::string>()] = std::move(r);
    } catch (const json::exception& e) {
      throw ParseError(n, path.string() + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(n, path.string() + ": " + e.reason());
    }
  }
  return results;
}

CascadeResult run_cascade(const AnnotationTask& task, const std::vector<ToolId>& plan,
                          const BackendSet& backends, HumanQueue& humans) {
  if (plan.empty()) throw UsageError("annotation plan is empty");
  CascadeResult result;
  ToolRunner runner(task, backends);
  for (ToolId tool : plan) {
    if (tool == ToolId::kHuman) {
      humans.enqueue({task.record_id, task.relative_image_path, task.category.name});
      result.trace.push_back({tool, OutcomeStatus::kSkipped, std::nullopt, "pending"});
      result.sent_to_human = true;
      break;
    }
    ToolOutcome outcome = runner.run(tool);
    const bool success = outcome.status == OutcomeStatus::kSuccess;
    if (success) {
      result.final_mask = outcome.mask;
      result.provenance = core::ProvenanceTag{provenance_of(tool), std::string(to_string(tool))};
    }
    result.trace.push_back(std::move(outcome));
    if (success) break;
  }
  return result;
}

}  // namespace afford::annotate
