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
#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "afford/core.hpp"
#include "afford/errors.hpp"
#include "afford/instructions.hpp"
#include "afford/io.hpp"
#include "afford/wire.hpp"

namespace afford::core {

namespace fs = std::filesystem;
using wire::Json;
using nlohmann::json;

namespace {

template <typename E, std::size_t N>
struct Names {
  std::array<std::pair<E, std::string_view>, N> entries;
  std::string_view name(E e) const {
    for (const auto& [k, v] : entries)
      if (k == e) return v;
    return {};
  }
  std::optional<E> parse(std::string_view s) const {
    for (const auto& [k, v] : entries)
      if (v == s) return k;
    return std::nullopt;
  }
};

constexpr Names<Domain, 4> kDomains{{{{Domain::kWild, "wild"},
                                      {Domain::kRobot, "robot"},
                                      {Domain::kEgo, "ego"},
                                      {Domain::kSimulation, "simulation"}}}};
constexpr Names<Split, 2> kSplits{{{{Split::kTrain, "train"}, {Split::kVal, "val"}}}};
constexpr Names<ReasoningKind, 4> kReasoning{{{{ReasoningKind::kNone, "none"},
                                               {ReasoningKind::kTemplate, "template"},
                                               {ReasoningKind::kEasy, "easy"},
                                               {ReasoningKind::kHard, "hard"}}}};
constexpr Names<InstructionKind, 3> kInstructionKinds{{{{InstructionKind::kTemplate, "template"},
                                                        {InstructionKind::kEasy, "easy"},
                                                        {InstructionKind::kHard, "hard"}}}};
constexpr Names<ProvenanceTool, 6> kTools{
    {{{ProvenanceTool::kOriginalMask, "original_mask"},
      {ProvenanceTool::kSegmenter, "segmenter"},
      {ProvenanceTool::kGroundingSegmenter, "grounding_segmenter"},
      {ProvenanceTool::kPartGroundingSegmenter, "part_grounding_segmenter"},
      {ProvenanceTool::kHuman, "human"},
      {ProvenanceTool::kHumanSegmenter, "human_segmenter"}}}};

const std::set<std::string, std::less<>> kRecordKeys = {
    "id", "image", "depth", "camera", "category", "aliases", "domain", "split",
    "zeroShotCategory", "zeroShotDomain", "reasoningKind", "instructionKind", "instruction",
    "mask", "provenance", "dataset", "originalMask", "gtBox", "language"};

// Field readers raise ParseError with the caller's line number.
struct Reader {
  const json& obj;
  std::size_t line;

  [[noreturn]] void fail(const std::string& why) const { throw ParseError(line, why); }

  bool has(const char* key) const { return obj.contains(key) && !obj.at(key).is_null(); }

  const json& need(const char* key) const {
    if (!has(key)) fail(std::string("missing key \"") + key + "\"");
    return obj.at(key);
  }
  std::string str(const char* key) const {
    const auto& v = need(key);
    if (!v.is_string()) fail(std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
  }
  std::optional<std::string> opt_str(const char* key) const {
    if (!has(key)) return std::nullopt;
    return str(key);
  }
  bool boolean(const char* key) const {
    const auto& v = need(key);
    if (!v.is_boolean()) fail(std::string("\"") + key + "\" must be a boolean");
    return v.get<bool>();
  }
  double number(const json& v, const char* what) const {
    if (!v.is_number()) fail(std::string(what) + " must be a number");
    return v.get<double>();
  }
  template <typename E, std::size_t N>
  E enumerated(const char* key, const Names<E, N>& names) const {
    const auto s = str(key);
    if (auto e = names.parse(s)) return *e;
    fail(std::string("unknown ") + key + " \"" + s + "\"");
  }
  mask::RleMask rle(const char* key) const {
    try {
      return wire::rle_from_json(need(key));
    } catch (const ParseError& e) {
      fail(std::string("\"") + key + "\": " + e.reason());
    }
  }
};

Camera parse_camera(const Reader& r) {
  const json& c = r.need("camera");
  if (!c.is_object()) r.fail("\"camera\" must be an object");
  Reader cr{c, r.line};
  Camera cam;
  cam.intrinsics.fx = cr.number(cr.need("fx"), "camera.fx");
  cam.intrinsics.fy = cr.number(cr.need("fy"), "camera.fy");
  cam.intrinsics.cx = cr.number(cr.need("cx"), "camera.cx");
  cam.intrinsics.cy = cr.number(cr.need("cy"), "camera.cy");
  const json& e = cr.need("extrinsics");
  if (!e.is_array() || e.size() != 16) r.fail("camera.extrinsics must be 16 numbers");
  for (int i = 0; i < 16; ++i)
    cam.extrinsics.camera_to_world(i / 4, i % 4) = cr.number(e[i], "camera.extrinsics entry");
  return cam;
}

Json camera_to_json(const Camera& c) {
  Json j;
  j["fx"] = c.intrinsics.fx;
  j["fy"] = c.intrinsics.fy;
  j["cx"] = c.intrinsics.cx;
  j["cy"] = c.intrinsics.cy;
  Json e = Json::array();
  for (int i = 0; i < 16; ++i) e.push_back(c.extrinsics.camera_to_world(i / 4, i % 4));
  j["extrinsics"] = std::move(e);
  return j;
}

AffordanceRecord record_from(const json& obj, std::size_t line) {
  Reader r{obj, line};
  if (!obj.is_object()) r.fail("record must be a JSON object");
  for (const auto& [key, _] : obj.items())
    if (!kRecordKeys.contains(key)) r.fail("unknown key \"" + key + "\"");

  AffordanceRecord rec;
  rec.id = r.str("id");
  rec.image = r.str("image");
  rec.depth = r.opt_str("depth");
  if (r.has("camera")) rec.camera = parse_camera(r);
  rec.category.name = r.str("category");
  if (r.has("aliases")) {
    const auto& a = obj.at("aliases");
    if (!a.is_array()) r.fail("\"aliases\" must be an array");
    for (const auto& s : a) {
      if (!s.is_string()) r.fail("aliases must be strings");
      rec.category.aliases.push_back(s.get<std::string>());
    }
  }
  rec.domain = r.enumerated("domain", kDomains);
  rec.splits.split = r.enumerated("split", kSplits);
  rec.splits.zero_shot_category = r.boolean("zeroShotCategory");
  rec.splits.zero_shot_domain = r.boolean("zeroShotDomain");
  rec.splits.reasoning = r.enumerated("reasoningKind", kReasoning);
  if (r.has("instruction") || r.has("instructionKind")) {
    rec.instruction = InstructionSpec{r.enumerated("instructionKind", kInstructionKinds),
                                      r.str("instruction")};
  }
  if (r.has("mask")) rec.mask = r.rle("mask");
  if (r.has("provenance")) {
    const json& p = obj.at("provenance");
    if (!p.is_object()) r.fail("\"provenance\" must be an object");
    Reader pr{p, line};
    ProvenanceTag tag;
    tag.tool = pr.enumerated("tool", kTools);
    tag.detail = pr.opt_str("detail").value_or("");
    rec.provenance = tag;
  }
  rec.inputs.dataset = r.opt_str("dataset");
  if (r.has("originalMask")) rec.inputs.original_mask = r.rle("originalMask");
  if (r.has("gtBox")) {
    try {
      rec.inputs.gt_box = wire::box_from_json(obj.at("gtBox"));
    } catch (const ParseError& e) {
      r.fail("\"gtBox\": " + e.reason());
    }
  }
  rec.inputs.language = r.opt_str("language");
  return rec;
}

Json record_to_json(const AffordanceRecord& rec) {
  Json j;
  j["id"] = rec.id;
  j["image"] = rec.image;
  if (rec.depth) j["depth"] = *rec.depth;
  if (rec.camera) j["camera"] = camera_to_json(*rec.camera);
  j["category"] = rec.category.name;
  j["aliases"] = rec.category.aliases;
  j["domain"] = to_string(rec.domain);
  j["split"] = to_string(rec.splits.split);
  j["zeroShotCategory"] = rec.splits.zero_shot_category;
  j["zeroShotDomain"] = rec.splits.zero_shot_domain;
  j["reasoningKind"] = to_string(rec.splits.reasoning);
  if (rec.instruction) {
    j["instructionKind"] = to_string(rec.instruction->kind);
    j["instruction"] = rec.instruction->text;
  }
  if (rec.mask) j["mask"] = wire::rle_to_json(*rec.mask);
  if (rec.provenance) {
    j["provenance"] = {{"tool", to_string(rec.provenance->tool)},
                       {"detail", rec.provenance->detail}};
  }
  if (rec.inputs.dataset) j["dataset"] = *rec.inputs.dataset;
  if (rec.inputs.original_mask) j["originalMask"] = wire::rle_to_json(*rec.inputs.original_mask);
  if (rec.inputs.gt_box) j["gtBox"] = wire::box_to_json(*rec.inputs.gt_box);
  if (rec.inputs.language) j["language"] = *rec.inputs.language;
  return j;
}

ManifestHeader header_from(const json& obj, std::size_t line) {
  Reader r{obj, line};
  if (!obj.is_object()) r.fail("header must be a JSON object");
  const json& v = r.need("formatVersion");
  if (!v.is_number_integer()) r.fail("formatVersion must be an integer");
  ManifestHeader h;
  h.format_version = v.get<std::int64_t>();
  if (h.format_version != 1) throw UnsupportedVersion(h.format_version);
  h.image_root = r.str("imageRoot");
  if (r.has("imageSizes")) {
    const json& sizes = obj.at("imageSizes");
    if (!sizes.is_object()) r.fail("imageSizes must be an object");
    for (const auto& [path, hw] : sizes.items()) {
      if (!hw.is_array() || hw.size() != 2 || !hw[0].is_number_integer() ||
          !hw[1].is_number_integer())
        r.fail("imageSizes entries must be [h, w]");
      h.image_sizes[path] = {hw[0].get<int>(), hw[1].get<int>()};
    }
  }
  for (const auto& [key, _] : obj.items())
    if (key != "formatVersion" && key != "imageRoot" && key != "imageSizes")
      r.fail("unknown header key \"" + key + "\"");
  return h;
}

Json header_to_json(const ManifestHeader& h) {
  Json j;
  j["formatVersion"] = h.format_version;
  j["imageRoot"] = h.image_root;
  if (!h.image_sizes.empty()) {
    Json sizes = Json::object();
    for (const auto& [path, s] : h.image_sizes) sizes[path] = {s.height, s.width};
    j["imageSizes"] = std::move(sizes);
  }
  return j;
}

json parse_line(std::string_view text, std::size_t line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
}

bool is_lower_trimmed(const std::string& s, bool& lower, bool& trimmed) {
  lower = std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isupper(c); });
  trimmed = s.empty() || (!std::isspace(static_cast<unsigned char>(s.front())) &&
                          !std::isspace(static_cast<unsigned char>(s.back())));
  return lower && trimmed;
}

}  // namespace

std::string_view to_string(Domain d) { return kDomains.name(d); }
std::string_view to_string(Split s) { return kSplits.name(s); }
std::string_view to_string(ReasoningKind k) { return kReasoning.name(k); }
std::string_view to_string(InstructionKind k) { return kInstructionKinds.name(k); }
std::string_view to_string(ProvenanceTool t) { return kTools.name(t); }
std::optional<Domain> parse_domain(std::string_view s) { return kDomains.parse(s); }
std::optional<Split> parse_split(std::string_view s) { return kSplits.parse(s); }
std::optional<ReasoningKind> parse_reasoning_kind(std::string_view s) {
  return kReasoning.parse(s);
}
std::optional<InstructionKind> parse_instruction_kind(std::string_view s) {
  return kInstructionKinds.parse(s);
}
std::optional<ProvenanceTool> parse_provenance_tool(std::string_view s) {
  return kTools.parse(s);
}

DatasetManifest parse_manifest(std::istream& in) {
  DatasetManifest m;
  std::unordered_set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    const json obj = parse_line(text, line);
    if (!have_header) {
      m.header = header_from(obj, line);
      have_header = true;
      continue;
    }
    auto rec = record_from(obj, line);
    if (!ids.insert(rec.id).second) throw DuplicateId(rec.id);
    m.records.push_back(std::move(rec));
  }
  if (!have_header) throw ParseError(line + 1, "missing header line");
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  return parse_manifest(in);
}

AffordanceRecord parse_record(std::string_view json_line, std::size_t line) {
  return record_from(parse_line(json_line, line), line);
}

std::string serialize_record(const AffordanceRecord& r) { return record_to_json(r).dump(); }

std::string serialize_manifest(const DatasetManifest& m) {
  std::string out = header_to_json(m.header).dump();
  out += '\n';
  for (const auto& r : m.records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

fs::path resolve(const ManifestHeader& header, const std::string& relative) {
  return fs::path(header.image_root) / relative;
}

ValidationReport validate_manifest(const DatasetManifest& m, bool strict) {
  ValidationReport report;
  const auto add = [&](const std::string& id, std::string inv, std::string msg) {
    report.push_back({id, std::move(inv), std::move(msg)});
  };

  if (m.header.format_version != 1)
    add("", "DatasetManifest.formatVersion",
        "formatVersion is " + std::to_string(m.header.format_version) + ", expected 1");

  std::unordered_set<std::string> ids;
  for (const auto& r : m.records) {
    const std::string& id = r.id;
    if (id.empty()) add(id, "AffordanceRecord.id", "record id is empty");
    if (!ids.insert(id).second)
      add(id, "DatasetManifest.uniqueIds", "record id \"" + id + "\" is not unique");

    if (r.image.empty() || fs::path(r.image).is_absolute())
      add(id, "AffordanceRecord.imagePath", "image path must be a non-empty relative path");
    if (r.depth && (r.depth->empty() || fs::path(*r.depth).is_absolute()))
      add(id, "AffordanceRecord.depthPath", "depth path must be a non-empty relative path");

    // CategoryLabel
    const auto& cat = r.category;
    bool lower = true, trimmed = true;
    if (cat.name.empty()) add(id, "CategoryLabel.name", "category name is empty");
    is_lower_trimmed(cat.name, lower, trimmed);
    bool all_lower = lower, all_trimmed = trimmed;
    for (const auto& a : cat.aliases) {
      is_lower_trimmed(a, lower, trimmed);
      all_lower = all_lower && lower;
      all_trimmed = all_trimmed && trimmed && !a.empty();
    }
    if (!all_lower)
      add(id, "CategoryLabel.lowercase", "category name and aliases must be lowercase");
    if (!all_trimmed)
      add(id, "CategoryLabel.whitespace",
          "category name and aliases must not have leading/trailing whitespace");
    if (std::find(cat.aliases.begin(), cat.aliases.end(), cat.name) != cat.aliases.end())
      add(id, "CategoryLabel.aliases", "aliases contain the category name");

    if (r.splits.split != Split::kVal &&
        (r.splits.zero_shot_category || r.splits.zero_shot_domain))
      add(id, "SplitTag.zeroShot", "zero-shot flags require split = val");

    if (!r.instruction) {
      add(id, "AffordanceRecord.instruction", "record has no instruction");
    } else {
      if (r.instruction->text.empty())
        add(id, "InstructionSpec.text", "instruction text is empty");
      if (r.instruction->kind == InstructionKind::kHard) {
        if (auto check = instr::check_hard_constraint(r.instruction->text, cat); !check.pass)
          add(id, "InstructionSpec.hard",
              "hard instruction fails check_hard_constraint: mentions \"" + check.offending +
                  "\"");
      }
    }

    if (!r.mask) {
      add(id, "AffordanceRecord.mask", "record has no mask");
    } else if (auto why = mask::check_rle(*r.mask)) {
      add(id, "RleMask.invariants", "mask: " + *why);
    } else if (auto it = m.header.image_sizes.find(r.image); it != m.header.image_sizes.end()) {
      if (it->second.height != r.mask->height || it->second.width != r.mask->width)
        add(id, "AffordanceRecord.maskSize",
            "mask is " + std::to_string(r.mask->height) + "x" + std::to_string(r.mask->width) +
                " but image is declared " + std::to_string(it->second.height) + "x" +
                std::to_string(it->second.width));
    }
    if (r.inputs.original_mask) {
      if (auto why = mask::check_rle(*r.inputs.original_mask))
        add(id, "RleMask.invariants", "originalMask: " + *why);
    }

    if (r.camera) {
      if (!r.camera->intrinsics.valid())
        add(id, "CameraIntrinsics", "intrinsics need finite values and fx, fy > 0");
      if (!r.camera->extrinsics.valid())
        add(id, "CameraExtrinsics", "extrinsics are not a rigid transform");
    }

    if (strict) {
      const fs::path image = resolve(m.header, r.image);
      if (!fs::is_regular_file(image)) {
        add(id, "DatasetManifest.files", "image not found: " + image.string());
      } else if (r.mask && !mask::check_rle(*r.mask)) {
        if (auto info = io::png_info(image);
            info && (info->height != r.mask->height || info->width != r.mask->width))
          add(id, "AffordanceRecord.maskSize",
              "mask is " + std::to_string(r.mask->height) + "x" +
                  std::to_string(r.mask->width) + " but image file is " +
                  std::to_string(info->height) + "x" + std::to_string(info->width));
      }
      if (r.depth && !fs::is_regular_file(resolve(m.header, *r.depth)))
        add(id, "DatasetManifest.files",
            "depth not found: " + resolve(m.header, *r.depth).string());
    }
  }
  return report;
}

DatasetManifest sample_subset(const DatasetManifest& m, std::size_t n, std::uint64_t seed) {
  const std::size_t total = m.records.size();
  if (n > total) throw SampleTooLarge(n, total);
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());

  DatasetManifest out;
  out.header = m.header;
  out.records.reserve(n);
  for (auto i : idx) out.records.push_back(m.records[i]);
  return out;
}

}  // namespace afford::core
