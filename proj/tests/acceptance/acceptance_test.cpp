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
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "afford/annotate.hpp"
#include "afford/cli.hpp"
#include "afford/core.hpp"
#include "afford/errors.hpp"
#include "afford/graspgen.hpp"
#include "afford/instructions.hpp"
#include "afford/io.hpp"
#include "afford/maskops.hpp"
#include "afford/metrics.hpp"
#include "afford/predict.hpp"
#include "afford/projection.hpp"
#include "support/fixtures.hpp"
#include "support/golden.hpp"
#include "support/hard_cases.hpp"

namespace {

using namespace afford;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

geom::CameraIntrinsics<double> random_intrinsics(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> f(200, 1500), c(0, 800);
  return {f(rng), f(rng), c(rng), c(rng)};
}

// 1. Back-projection round trip.
Outcome round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pix(0, 1280), depth(0.05, 20);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto k = random_intrinsics(rng);
    geom::CameraExtrinsics<double> t;
    t.camera_to_world = testing::random_rigid(rng);
    const Eigen::Vector3d want(pix(rng), pix(rng), depth(rng));
    const auto back =
        geom::project_point(geom::backproject_pixel(want.x(), want.y(), want.z(), k, t), k, t);
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(back(j) - want(j)) / std::max(1.0, std::abs(want(j))));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && secs < 1.0,
          fmt("1000 cases, max relative error %.3g, %.3f s", worst, secs)};
}

// 2. Rigid equivariance of the masked cloud.
Outcome rigid_equivariance() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> depth(0.5, 2.0);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const int w = 16 + static_cast<int>(rng() % 17), h = 12 + static_cast<int>(rng() % 13);
    std::vector<double> values(static_cast<std::size_t>(w) * h);
    for (auto& v : values) v = rng() % 7 == 0 ? 0.0 : depth(rng);
    const auto d = geom::DepthImage<double>::from_values(w, h, values);
    const auto m = testing::random_mask(rng, w, h, 0.5);
    geom::CameraIntrinsics<double> k{static_cast<double>(w), static_cast<double>(w), w / 2.0, h / 2.0};
    geom::CameraExtrinsics<double> t, rt;
    t.camera_to_world = testing::random_rigid(rng);
    const Eigen::Matrix4d r = testing::random_rigid(rng);
    rt.camera_to_world = r * t.camera_to_world;
    const auto base = geom::backproject_masked(m, d, k, t);
    const auto moved = geom::backproject_masked(m, d, k, rt);
    if (moved.size() != base.size()) return {false, "cloud sizes differ"};
    if (base.empty()) continue;
    const Eigen::Matrix3Xd want =
        (r.topLeftCorner<3, 3>() * base.points).colwise() + r.topRightCorner<3, 1>();
    worst = std::max(worst, (moved.points - want).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-9, fmt("100 cases, max error %.3g", worst)};
}

// 3. Mask codec.
Outcome codec() {
  const auto t0 = Clock::now();
  std::size_t bad = 0;
  for (unsigned bits = 0; bits < (1u << 16); ++bits) {
    std::vector<std::uint8_t> px(16);
    for (int i = 0; i < 16; ++i) px[i] = (bits >> i) & 1;
    const mask::BinaryMask m(4, 4, px);
    const auto r = mask::rle_encode(m);
    if (r.counts != testing::brute_rle_counts(px, 4, 4) || !(mask::rle_decode(r) == m)) ++bad;
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> density(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const auto m = testing::random_mask(rng, 64, 64, density(rng));
    const auto r = mask::rle_encode(m);
    if (!(mask::rle_decode(r) == m) || !(mask::rle_encode(mask::rle_decode(r)) == r)) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 5.0,
          fmt("65536 4x4 + 1000 64x64 masks, %.0f mismatches, %.3f s", double(bad), secs)};
}

// 4. Metrics on the run-length path against per-pixel counting.
Outcome metric_oracle() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> density(0, 1);
  std::vector<metrics::EvalSample> samples;
  std::vector<testing::BruteIou> brute;
  std::size_t count_errors = 0;
  for (int i = 0; i < 200; ++i) {
    const int w = 1 + static_cast<int>(rng() % 32), h = 1 + static_cast<int>(rng() % 32);
    const auto pa = testing::random_pixels(rng, w, h, density(rng));
    const auto pb = testing::random_pixels(rng, w, h, density(rng));
    metrics::EvalSample s;
    s.gt = mask::rle_encode({w, h, pa});
    s.pred = mask::rle_encode({w, h, pb});
    const auto want = testing::brute_iou(pa, pb);
    const auto got = mask::iou(s.gt, s.pred);
    if (got.intersection != want.intersection || got.union_area != want.union_area) ++count_errors;
    samples.push_back(std::move(s));
    brute.push_back(want);
  }
  const auto want = testing::brute_metrics(brute);
  const double dg = std::abs(metrics::compute_giou(samples) - want.giou);
  const double dc = std::abs(metrics::compute_ciou(samples) - want.ciou);
  return {count_errors == 0 && dg <= 1e-12 && dc <= 1e-12,
          fmt("200 pairs, %.0f count mismatches, ", double(count_errors)) +
              fmt("gIoU diff %.3g, cIoU diff %.3g", dg, dc)};
}

mask::RleMask rows(int r0, int r1) {
  mask::BinaryMask m(10, 10);
  for (int r = r0; r < r1; ++r)
    for (int c = 0; c < 10; ++c) m.set(r, c);
  return mask::rle_encode(m);
}

// 5. Harness end to end.
Outcome harness() {
  core::DatasetManifest m;
  m.header.image_root = "/data";
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    auto mk = testing::random_mask(rng, 12, 10, 0.4);
    mk.set(0, 0);
    m.records.push_back(testing::make_record("r" + std::to_string(i), i % 3 ? "mug" : "knife",
                                             mask::rle_encode(mk)));
  }
  predict::OraclePredictor oracle(m);
  predict::EmptyPredictor empty;
  const auto good = metrics::evaluate_benchmark(m, oracle, 4);
  const auto bad = metrics::evaluate_benchmark(m, empty, 4);

  std::vector<metrics::EvalSample> two(2);
  two[0].gt = rows(0, 5);
  two[0].pred = rows(3, 8);
  two[1].gt = rows(0, 2);
  two[1].pred = mask::rle_empty(10, 10);
  const double g = metrics::compute_giou(two), c = metrics::compute_ciou(two);

  const bool pass = good.overall.giou == 1.0 && good.overall.ciou == 1.0 &&
                    bad.overall.giou == 0.0 && bad.overall.ciou == 0.0 && g == 0.125 && c == 0.2;
  return {pass, "oracle " + fmt("%.3f/%.3f", good.overall.giou, good.overall.ciou) + ", empty " +
                    fmt("%.3f/%.3f", bad.overall.giou, bad.overall.ciou) + ", fixture gIoU " +
                    fmt("%.3f cIoU %.3f", g, c)};
}

// 6. Mask token selection.
Outcome token_protocol() {
  std::size_t cases = 0, agree = 0;
  for (std::size_t len = 0; len <= 3; ++len)
    for (unsigned bits = 0; bits < (1u << len); ++bits) {
      predict::PredictorResponse r;
      int want = -1;
      for (std::size_t i = 0; i < len; ++i) {
        const bool aff = (bits >> i) & 1;
        r.slots.push_back({aff ? predict::SlotToken::kAff : predict::SlotToken::kSeg,
                           static_cast<int>(i), mask::rle_empty(1, static_cast<int>(i) + 1)});
      }
      for (std::size_t i = 0; i < len && want < 0; ++i)
        if ((bits >> i) & 1) want = static_cast<int>(i);
      if (want < 0 && len > 0) want = 0;
      ++cases;
      try {
        const auto& got = predict::select_mask(r);
        if (want >= 0 && got.width == want + 1) ++agree;
      } catch (const NoMaskToken&) {
        if (want < 0) ++agree;
      }
    }
  return {agree == cases, fmt("%.0f of %.0f sequences agree", double(agree), double(cases))};
}

// 7. Annotation cascade.
Outcome cascade() {
  testing::TempDir dir;
  const auto img = dir / "img.png";
  io::write_file_atomic(img, "image bytes");
  using T = annotate::ToolId;
  const std::vector<T> plan{T::kOriginal, T::kSegmenter, T::kGroundingSegmenter,
                            T::kPartGroundingSegmenter, T::kHuman};
  std::size_t matched = 0, all_fail = 0, all_fail_spooled = 0;
  for (unsigned bits = 0; bits < 16; ++bits) {
    std::map<T, bool> ok;
    for (unsigned i = 0; i < 4; ++i) ok[plan[i]] = (bits >> i) & 1;
    annotate::HumanQueue humans;
    const auto r = annotate::run_cascade(testing::scripted_task(img, ok[T::kOriginal]), plan,
                                         testing::scripted_backends(ok, 32, 32), humans);
    std::size_t first = 4;
    for (std::size_t i = 0; i < 4 && first == 4; ++i)
      if (ok[plan[i]]) first = i;
    bool good = r.trace.size() == first + 1;
    for (std::size_t i = 0; good && i < r.trace.size(); ++i) {
      good = r.trace[i].tool == plan[i];
      const auto want = i < first ? annotate::OutcomeStatus::kFailed
                        : first == 4 ? annotate::OutcomeStatus::kSkipped
                                     : annotate::OutcomeStatus::kSuccess;
      good = good && r.trace[i].status == want;
    }
    good = good && r.final_mask.has_value() == (first < 4);
    if (first == 4) {
      ++all_fail;
      io::write_file_atomic(dir / "spool.jsonl", annotate::format_human_spool(humans.tasks()));
      const auto spool = annotate::read_human_spool(dir / "spool.jsonl");
      if (spool.size() == 1 && spool[0].record_id == "scripted") ++all_fail_spooled;
    } else {
      good = good && humans.size() == 0;
    }
    matched += good;
  }

  // Random plans against backends that always fail: every task must land in
  // the spool.
  std::mt19937_64 rng(7);
  const auto failing = testing::scripted_backends({}, 32, 32);
  annotate::HumanQueue humans;
  for (int i = 0; i < 50; ++i) {
    std::vector<T> p;
    for (unsigned j = 0; j < 4; ++j)
      if (rng() & 1) p.push_back(plan[j]);
    p.push_back(T::kHuman);
    auto task = testing::scripted_task(img, false);
    task.record_id = "task" + std::to_string(i);
    const auto r = annotate::run_cascade(task, p, failing, humans);
    ++all_fail;
    if (r.sent_to_human && !r.final_mask) ++all_fail_spooled;
  }
  io::write_file_atomic(dir / "spool.jsonl", annotate::format_human_spool(humans.tasks()));
  if (annotate::read_human_spool(dir / "spool.jsonl").size() != 50) all_fail_spooled = 0;

  return {matched == 16 && all_fail == all_fail_spooled && all_fail > 0,
          fmt("%.0f of 16 traces match the plan order; ", double(matched)) +
              fmt("all-fail spooled %.0f of %.0f", double(all_fail_spooled), double(all_fail))};
}

// 8. Hard-instruction checker.
Outcome hard_checker() {
  std::size_t errors = 0;
  bool mug_example = false;
  for (const auto& c : testing::hard_cases()) {
    const auto got = instr::check_hard_constraint(c.text, {c.name, c.aliases});
    if (got.pass != c.pass || (!c.pass && got.offending != c.offending)) ++errors;
    if (c.text == "I need something to drink coffee" && c.name == "mug" && got.pass)
      mug_example = true;
  }
  return {errors == 0 && mug_example && testing::hard_cases().size() == 30,
          fmt("%.0f cases, %.0f errors", double(testing::hard_cases().size()), double(errors))};
}

// 9. Grasp geometry on a synthetic cylinder.
Outcome grasp_geometry() {
  const geom::CameraIntrinsics<double> k{600, 600, 320, 240};
  const auto cam = testing::top_down_camera(0.5);
  grasp::GripperSpec<double> spec;
  const auto cloud = testing::cylinder_cloud(9, 0.015, 0.2, 5000, true);
  const auto pose = grasp::propose_grasp(cloud, k, cam, spec);
  // Angle between the closing axis and the cross-section plane (normal x).
  const double off_plane =
      std::asin(std::min(1.0, std::abs(pose.closing().x()))) * 180.0 / M_PI;
  const double width_err = std::abs(pose.width - (0.030 + 2 * spec.finger_margin));

  std::mt19937_64 rng(90);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix4d r = testing::random_rigid(rng);
    auto moved = cloud;
    moved.points = (r.topLeftCorner<3, 3>() * cloud.points).colwise() + r.topRightCorner<3, 1>();
    geom::CameraExtrinsics<double> cam2;
    cam2.camera_to_world = r * cam.camera_to_world;
    const auto got = grasp::propose_grasp(moved, k, cam2, spec);
    const auto want = grasp::transform_grasp(pose, r);
    worst = std::max({worst, (got.position - want.position).cwiseAbs().maxCoeff(),
                      (got.rotation - want.rotation).cwiseAbs().maxCoeff(),
                      std::abs(got.width - want.width)});
  }
  return {off_plane <= 10.0 && width_err <= 0.001 && worst <= 1e-6 &&
              grasp::pose_valid(pose, spec.max_width),
          fmt("closing axis %.2f deg off the cross-section, width %.2f mm", off_plane,
              pose.width * 1000) +
              fmt(", equivariance error %.3g", worst)};
}

// 10. Evaluation output does not depend on --jobs.
Outcome determinism() {
  const auto t0 = Clock::now();
  testing::TempDir dir;
  core::DatasetManifest m;
  m.header.image_root = dir.path().string();
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> density(0.05, 0.6);
  const char* cats[] = {"mug", "knife", "power drill", "spatula", "bottle"};
  for (int i = 0; i < 500; ++i) {
    auto mk = testing::random_mask(rng, 48, 36, density(rng));
    auto rec = testing::make_record("r" + std::to_string(i), cats[i % 5], mask::rle_encode(mk));
    rec.splits.zero_shot_category = i % 7 == 0;
    rec.splits.zero_shot_domain = i % 11 == 0;
    m.records.push_back(rec);
  }
  const auto manifest = (dir / "m.jsonl").string();
  io::write_file_atomic(manifest, core::serialize_manifest(m));
  std::string reports[2], tables[2];
  int codes[2];
  const char* jobs[] = {"1", "8"};
  for (int i = 0; i < 2; ++i) {
    const auto out = (dir / ("report" + std::to_string(i) + ".json")).string();
    std::ostringstream o, e;
    codes[i] = cli::run({"eval", "--manifest", manifest, "--predictor", "centerbox", "--jobs",
                         jobs[i], "--out", out},
                        o, e);
    reports[i] = io::read_file(out);
    tables[i] = io::read_file(out + ".txt");
  }
  const double secs = seconds_since(t0);
  const bool same = reports[0] == reports[1] && tables[0] == tables[1];
  return {codes[0] == 0 && codes[1] == 0 && same && secs < 30.0,
          std::string("500 records, --jobs 1 vs 8 reports ") +
              (same ? "byte-identical" : "differ") + fmt(", %.2f s", secs)};
}

// 11. Prompt scaffolds against the golden transcriptions.
Outcome prompt_fidelity() {
  std::size_t mismatched = 0;
  bool system_ok = true;
  for (auto [file, mode] : {std::pair{"easy_scaffold.json", instr::Mode::kEasy},
                            std::pair{"hard_scaffold.json", instr::Mode::kHard}}) {
    const auto golden = testing::load_golden_scaffold(file);
    const auto got = instr::build_reasoning_prompt({"words", {}}, std::nullopt, mode);
    if (got.messages.size() != golden.messages.size()) {
      ++mismatched;
      continue;
    }
    for (std::size_t i = 0; i < got.messages.size(); ++i)
      if (!(got.messages[i] == golden.messages[i])) ++mismatched;
    system_ok = system_ok && got.messages.front().role == instr::Role::kSystem &&
                got.messages.front().content.rfind("You are a helpful assistant.", 0) == 0;
  }
  return {mismatched == 0 && system_ok,
          fmt("easy and hard scaffolds, %.0f mismatched messages", double(mismatched))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"back-projection round trip", round_trip},
      {"rigid equivariance of masked clouds", rigid_equivariance},
      {"mask codec round trip", codec},
      {"run-length metrics match per-pixel oracle", metric_oracle},
      {"evaluation harness end to end", harness},
      {"mask token selection", token_protocol},
      {"annotation cascade order and human fallback", cascade},
      {"hard-instruction checker", hard_checker},
      {"grasp geometry on a synthetic cylinder", grasp_geometry},
      {"evaluation determinism across --jobs", determinism},
      {"prompt scaffold fidelity", prompt_fidelity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": "
              << criteria[i].first << " (" << o.detail << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
