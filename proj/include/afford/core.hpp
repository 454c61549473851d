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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afford/maskops.hpp"
#include "afford/projection.hpp"

namespace afford::core {

struct CategoryLabel {
  std::string name;
  std::vector<std::string> aliases;
  friend bool operator==(const CategoryLabel&, const CategoryLabel&) = default;
};

enum class Domain { kWild, kRobot, kEgo, kSimulation };
enum class Split { kTrain, kVal };
enum class ReasoningKind { kNone, kTemplate, kEasy, kHard };
enum class InstructionKind { kTemplate, kEasy, kHard };

/// Which annotation tool produced a mask.
enum class ProvenanceTool {
  kOriginalMask,
  kSegmenter,
  kGroundingSegmenter,
  kPartGroundingSegmenter,
  kHuman,
  kHumanSegmenter,
};

struct SplitTag {
  Split split = Split::kTrain;
  bool zero_shot_category = false;
  bool zero_shot_domain = false;
  ReasoningKind reasoning = ReasoningKind::kNone;
  friend bool operator==(const SplitTag&, const SplitTag&) = default;
};

struct InstructionSpec {
  InstructionKind kind = InstructionKind::kTemplate;
  std::string text;
  friend bool operator==(const InstructionSpec&, const InstructionSpec&) = default;
};

struct ProvenanceTag {
  ProvenanceTool tool = ProvenanceTool::kOriginalMask;
  std::string detail;
  friend bool operator==(const ProvenanceTag&, const ProvenanceTag&) = default;
};

struct Camera {
  geom::CameraIntrinsics<double> intrinsics;
  geom::CameraExtrinsics<double> extrinsics;
  friend bool operator==(const Camera& a, const Camera& b) {
    return a.intrinsics.fx == b.intrinsics.fx && a.intrinsics.fy == b.intrinsics.fy &&
           a.intrinsics.cx == b.intrinsics.cx && a.intrinsics.cy == b.intrinsics.cy &&
           a.extrinsics.camera_to_world == b.extrinsics.camera_to_world;
  }
};

/// Annotation-time inputs a source dataset offers for a record. They drive
/// tool planning and are absent from finished benchmark manifests.
struct AnnotationInputs {
  std::optional<std::string> dataset;
  std::optional<mask::RleMask> original_mask;
  std::optional<mask::BBox> gt_box;
  std::optional<std::string> language;
  friend bool operator==(const AnnotationInputs&, const AnnotationInputs&) = default;
};

/// One image / instruction / affordance-mask sample. `instruction`, `mask`
/// and `provenance` are optional only so that raw manifests can flow through
/// annotation and instruction generation; validation flags their absence.
struct AffordanceRecord {
  std::string id;
  std::string image;
  std::optional<std::string> depth;
  std::optional<Camera> camera;
  CategoryLabel category;
  Domain domain = Domain::kWild;
  SplitTag splits;
  std::optional<InstructionSpec> instruction;
  std::optional<mask::RleMask> mask;
  std::optional<ProvenanceTag> provenance;
  AnnotationInputs inputs;
  friend bool operator==(const AffordanceRecord&, const AffordanceRecord&) = default;
};

struct ImageSize {
  int height = 0;
  int width = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct ManifestHeader {
  std::int64_t format_version = 1;
  std::string image_root;
  /// Declared image dimensions keyed by record image path.
  std::map<std::string, ImageSize> image_sizes;
  friend bool operator==(const ManifestHeader&, const ManifestHeader&) = default;
};

struct DatasetManifest {
  ManifestHeader header;
  std::vector<AffordanceRecord> records;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Enumeration spellings used on the wire.
std::string_view to_string(Domain d);
std::string_view to_string(Split s);
std::string_view to_string(ReasoningKind k);
std::string_view to_string(InstructionKind k);
std::string_view to_string(ProvenanceTool t);
std::optional<Domain> parse_domain(std::string_view s);
std::optional<Split> parse_split(std::string_view s);
std::optional<ReasoningKind> parse_reasoning_kind(std::string_view s);
std::optional<InstructionKind> parse_instruction_kind(std::string_view s);
std::optional<ProvenanceTool> parse_provenance_tool(std::string_view s);

/// Throws ParseError, DuplicateId or UnsupportedVersion.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::istream& in);

/// One JSON line per object, header first. Byte-stable for equal manifests.
std::string serialize_manifest(const DatasetManifest& m);
std::string serialize_record(const AffordanceRecord& r);
/// Parses a single record line; `line` is used for error reporting.
AffordanceRecord parse_record(std::string_view json_line, std::size_t line = 0);

/// Resolves a manifest-relative path against the image root.
std::filesystem::path resolve(const ManifestHeader& header, const std::string& relative);

struct Violation {
  std::string record_id;  // empty for manifest-level violations
  std::string invariant;  // e.g. "CategoryLabel.name"
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

/// Every violated type invariant. `strict` additionally requires referenced
/// files to exist under the image root and, for PNG images, to have the
/// declared dimensions.
ValidationReport validate_manifest(const DatasetManifest& m, bool strict);

/// Draws n records without replacement via a partial Fisher-Yates shuffle
/// driven by SplitMix64(seed). Chosen records keep their relative order.
/// Throws SampleTooLarge when n exceeds the record count.
DatasetManifest sample_subset(const DatasetManifest& m, std::size_t n, std::uint64_t seed);

/// SplitMix64; the reference stream for every seeded operation.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

 private:
  std::uint64_t state_;
};

}  // namespace afford::core
