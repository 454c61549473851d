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

// JSON forms shared by the manifest, the HTTP protocols and the CLI outputs.

#include <json.hpp>

#include "afford/graspgen.hpp"
#include "afford/maskops.hpp"

namespace afford::wire {

using Json = nlohmann::ordered_json;

/// {"size":[h,w],"counts":[...]}
Json rle_to_json(const mask::RleMask& r);
/// Throws ParseError (line 0) on a malformed object. Counts are not
/// validated against the RLE invariants here.
mask::RleMask rle_from_json(const nlohmann::json& j);
mask::RleMask rle_from_json(const Json& j);

Json box_to_json(const mask::BBox& b);
mask::BBox box_from_json(const nlohmann::json& j);

/// {"position":[x,y,z],"rotation":[9 numbers row-major],"width":w,"score":s}
Json pose_to_json(const grasp::GraspPose<double>& p);
grasp::GraspPose<double> pose_from_json(const nlohmann::json& j);

/// Standard base64 of raw bytes, used for image payloads.
std::string base64_encode(const std::string& bytes);

}  // namespace afford::wire
