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
#include "afford/wire.hpp"

#include <cmath>

#include "afford/errors.hpp"

namespace afford::wire {

namespace {

template <typename J>
mask::RleMask rle_from(const J& j) {
  if (!j.is_object() || !j.contains("size") || !j.contains("counts"))
    throw ParseError(0, "mask must be an object with \"size\" and \"counts\"");
  const auto& size = j.at("size");
  const auto& counts = j.at("counts");
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer())
    throw ParseError(0, "mask size must be [h, w] integers");
  if (!counts.is_array()) throw ParseError(0, "mask counts must be an array");
  mask::RleMask r;
  r.height = size[0].template get<int>();
  r.width = size[1].template get<int>();
  r.counts.reserve(counts.size());
  for (const auto& c : counts) {
    if (!c.is_number_unsigned() && !(c.is_number_integer() && c.template get<std::int64_t>() >= 0))
      throw ParseError(0, "mask counts must be non-negative integers");
    r.counts.push_back(c.template get<std::uint32_t>());
  }
  return r;
}

}  // namespace

Json rle_to_json(const mask::RleMask& r) {
  Json j;
  j["size"] = {r.height, r.width};
  j["counts"] = r.counts;
  return j;
}

mask::RleMask rle_from_json(const nlohmann::json& j) { return rle_from(j); }
mask::RleMask rle_from_json(const Json& j) { return rle_from(j); }

Json box_to_json(const mask::BBox& b) { return Json::array({b.x0, b.y0, b.x1, b.y1}); }

mask::BBox box_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4)
    throw ParseError(0, "box must be [x0, y0, x1, y1]");
  for (const auto& v : j)
    if (!v.is_number()) throw ParseError(0, "box coordinates must be numbers");
  // Fractional boxes from detectors are widened to whole pixels.
  return {static_cast<int>(std::floor(j[0].get<double>())),
          static_cast<int>(std::floor(j[1].get<double>())),
          static_cast<int>(std::ceil(j[2].get<double>())),
          static_cast<int>(std::ceil(j[3].get<double>()))};
}

Json pose_to_json(const grasp::GraspPose<double>& p) {
  Json j;
  j["position"] = {p.position.x(), p.position.y(), p.position.z()};
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(p.rotation(r, c));
  j["rotation"] = std::move(rot);
  j["width"] = p.width;
  j["score"] = p.score;
  return j;
}

grasp::GraspPose<double> pose_from_json(const nlohmann::json& j) {
  grasp::GraspPose<double> p;
  const auto& pos = j.at("position");
  const auto& rot = j.at("rotation");
  if (pos.size() != 3 || rot.size() != 9) throw ParseError(0, "malformed pose");
  for (int i = 0; i < 3; ++i) p.position(i) = pos[i].get<double>();
  for (int i = 0; i < 9; ++i) p.rotation(i / 3, i % 3) = rot[i].get<double>();
  p.width = j.at("width").get<double>();
  p.score = j.at("score").get<double>();
  return p;
}

}  // namespace afford::wire
