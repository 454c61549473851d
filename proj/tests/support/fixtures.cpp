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
#include "support/fixtures.hpp"

#include <atomic>
#include <cmath>
#include <mutex>

#include "afford/errors.hpp"
#include "afford/io.hpp"
#include "afford/wire.hpp"

namespace afford::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("afford_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<std::uint8_t> random_pixels(std::mt19937_64& rng, int width, int height,
                                        double density) {
  std::bernoulli_distribution bit(density);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height);
  for (auto& p : px) p = bit(rng) ? 1 : 0;
  return px;
}

mask::BinaryMask random_mask(std::mt19937_64& rng, int width, int height, double density) {
  return mask::BinaryMask(width, height, random_pixels(rng, width, height, density));
}

BruteIou brute_iou(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  BruteIou r;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) ++r.intersection;
    if (a[i] || b[i]) ++r.union_area;
  }
  return r;
}

std::vector<std::uint32_t> brute_rle_counts(const std::vector<std::uint8_t>& pixels, int width,
                                            int height) {
  std::vector<std::uint32_t> counts{0};
  int value = 0;
  for (int col = 0; col < width; ++col) {
    for (int row = 0; row < height; ++row) {
      const int p = pixels[static_cast<std::size_t>(row) * width + col];
      if (p != value) {
        counts.push_back(0);
        value = p;
      }
      ++counts.back();
    }
  }
  return counts;
}

BruteMetrics brute_metrics(const std::vector<BruteIou>& samples) {
  BruteMetrics m;
  double sum = 0;
  std::uint64_t inter = 0, uni = 0;
  for (const auto& s : samples) {
    sum += s.union_area == 0 ? 1.0
                             : static_cast<double>(s.intersection) / static_cast<double>(s.union_area);
    inter += s.intersection;
    uni += s.union_area;
  }
  m.giou = sum / static_cast<double>(samples.size());
  m.ciou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  return m;
}

core::AffordanceRecord make_record(const std::string& id, const std::string& category,
                                   const mask::RleMask& mask) {
  core::AffordanceRecord r;
  r.id = id;
  r.image = "images/" + id + ".png";
  r.category.name = category;
  r.domain = core::Domain::kWild;
  r.splits.split = core::Split::kVal;
  r.splits.reasoning = core::ReasoningKind::kTemplate;
  r.instruction = core::InstructionSpec{
      core::InstructionKind::kTemplate,
      "Please segment the affordance map of " + category + " in this image"};
  r.mask = mask;
  r.provenance = core::ProvenanceTag{core::ProvenanceTool::kOriginalMask, ""};
  return r;
}

geom::AffordanceCloud<double> cylinder_cloud(std::uint64_t seed, double radius, double length,
                                             std::size_t n, bool visible_half,
                                             const Eigen::Vector3d& center) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> along(-length / 2, length / 2);
  std::uniform_real_distribution<double> angle(0.0, visible_half ? M_PI : 2 * M_PI);
  geom::AffordanceCloud<double> cloud;
  cloud.points.resize(3, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double a = angle(rng);
    cloud.points.col(static_cast<Eigen::Index>(i)) =
        center + Eigen::Vector3d(along(rng), radius * std::cos(a), radius * std::sin(a));
    cloud.pixels.push_back({static_cast<int>(i), 0});
  }
  return cloud;
}

Eigen::Matrix4d random_rigid(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  std::uniform_real_distribution<double> t(-1, 1);
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = q.toRotationMatrix();
  m.topRightCorner<3, 1>() = Eigen::Vector3d(t(rng), t(rng), t(rng));
  return m;
}

geom::CameraExtrinsics<double> top_down_camera(double height) {
  geom::CameraExtrinsics<double> e;
  e.camera_to_world << 1, 0, 0, 0,  //
      0, -1, 0, 0,                  //
      0, 0, -1, height,             //
      0, 0, 0, 1;
  return e;
}

namespace {

struct Script {
  std::map<annotate::ToolId, bool> succeed;
  int width, height;
  std::shared_ptr<std::vector<std::string>> calls;
  std::mutex mu;

  bool ok(annotate::ToolId t) const {
    auto it = succeed.find(t);
    return it != succeed.end() && it->second;
  }
  void log(const char* what) {
    if (!calls) return;
    std::lock_guard lock(mu);
    calls->push_back(what);
  }
};

class ScriptedGrounding : public annotate::GroundingBackend,
                          public annotate::PartGroundingBackend {
 public:
  explicit ScriptedGrounding(std::shared_ptr<Script> s) : s_(std::move(s)) {}
  std::vector<mask::BBox> ground(const std::string&, const std::string&) override {
    s_->log("ground");
    if (!s_->ok(annotate::ToolId::kGroundingSegmenter)) throw BackendError("scripted failure");
    return {{5, 5, 15, 15}};
  }
  std::vector<mask::BBox> ground_part(const std::string&, const std::string&,
                                      const std::string&) override {
    s_->log("ground_part");
    if (!s_->ok(annotate::ToolId::kPartGroundingSegmenter))
      throw BackendError("scripted failure");
    return {{10, 10, 20, 20}};
  }

 private:
  std::shared_ptr<Script> s_;
};

class ScriptedSegmenter : public annotate::SegmenterBackend {
 public:
  explicit ScriptedSegmenter(std::shared_ptr<Script> s) : s_(std::move(s)) {}
  mask::RleMask segment_box(const std::string&, const mask::BBox& box) override {
    s_->log("segment");
    if (box == kScriptedGtBox && !s_->ok(annotate::ToolId::kSegmenter))
      throw BackendError("scripted failure");
    return mask::rle_encode(mask::rasterize_box(box, s_->width, s_->height));
  }
  mask::RleMask segment_polygon(const std::string&, const mask::Polygon& p) override {
    s_->log("segment");
    return mask::rle_encode(mask::rasterize_polygon(p, s_->width, s_->height));
  }

 private:
  std::shared_ptr<Script> s_;
};

}  // namespace

annotate::BackendSet scripted_backends(const std::map<annotate::ToolId, bool>& succeed,
                                       int width, int height,
                                       std::shared_ptr<std::vector<std::string>> calls) {
  auto script = std::make_shared<Script>();
  script->succeed = succeed;
  script->width = width;
  script->height = height;
  script->calls = std::move(calls);
  auto grounding = std::make_shared<ScriptedGrounding>(script);
  annotate::BackendSet set;
  set.grounding = grounding;
  set.part_grounding = grounding;
  set.segmenter = std::make_shared<ScriptedSegmenter>(script);
  set.parts = {{"mug", "handle"}};
  return set;
}

annotate::AnnotationTask scripted_task(const fs::path& image, bool original_ok) {
  annotate::AnnotationTask t;
  t.record_id = "scripted";
  t.image_path = image.string();
  t.relative_image_path = image.filename().string();
  t.category.name = "mug";
  t.original_mask = original_ok ? mask::rle_encode(mask::rasterize_box({20, 20, 30, 30}, 32, 32))
                                : mask::rle_empty(32, 32);
  t.gt_box = kScriptedGtBox;
  t.language = "the mug";
  t.height = 32;
  t.width = 32;
  return t;
}

fs::path write_cylinder_rig(const fs::path& dir, double radius, double length,
                            double camera_height) {
  constexpr int kW = 640, kH = 480;
  constexpr double fx = 600, fy = 600, cx = 320, cy = 240;
  std::vector<std::uint16_t> depth_mm(static_cast<std::size_t>(kW) * kH, 0);
  mask::BinaryMask m(kW, kH);
  // Camera frame: x right, y down, z forward (world -z). A world point is
  // (xn * z, -yn * z, H - z); the cylinder is y^2 + z^2 = r^2, |x| <= L/2.
  for (int v = 0; v < kH; ++v) {
    for (int u = 0; u < kW; ++u) {
      const double xn = (u - cx) / fx, yn = (v - cy) / fy;
      const double a = yn * yn + 1.0;
      const double disc = camera_height * camera_height -
                          a * (camera_height * camera_height - radius * radius);
      if (disc < 0) continue;
      const double z = (camera_height - std::sqrt(disc)) / a;
      if (std::abs(xn * z) > length / 2) continue;
      depth_mm[static_cast<std::size_t>(v) * kW + u] =
          static_cast<std::uint16_t>(std::lround(z * 1000.0));
      m.set(v, u);
    }
  }
  fs::create_directories(dir / "images");
  io::write_png_gray16(dir / "images" / "rig_depth.png", kW, kH, depth_mm);

  core::DatasetManifest manifest;
  manifest.header.image_root = dir.string();
  manifest.header.image_sizes["images/rig.png"] = {kH, kW};
  auto rec = make_record("rig", "cylinder", mask::rle_encode(m));
  rec.image = "images/rig.png";
  rec.depth = "images/rig_depth.png";
  core::Camera cam;
  cam.intrinsics = {fx, fy, cx, cy};
  cam.extrinsics = top_down_camera(camera_height);
  rec.camera = cam;
  rec.domain = core::Domain::kRobot;
  manifest.records.push_back(rec);
  const fs::path path = dir / "rig.jsonl";
  io::write_file_atomic(path, core::serialize_manifest(manifest));
  return path;
}

}  // namespace afford::testing
