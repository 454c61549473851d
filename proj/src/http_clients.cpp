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
#include "afford/http_clients.hpp"

#include <httplib.h>

#include <json.hpp>

#include "afford/errors.hpp"
#include "afford/io.hpp"
#include "afford/wire.hpp"

namespace afford::http {

using nlohmann::json;
using wire::Json;

namespace {

std::vector<mask::BBox> parse_boxes(const std::string& body) {
  try {
    const auto j = json::parse(body);
    std::vector<mask::BBox> boxes;
    for (const auto& b : j.at("boxes")) boxes.push_back(wire::box_from_json(b));
    return boxes;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed grounding reply: ") + e.what());
  } catch (const ParseError& e) {
    throw BackendError("malformed grounding reply: " + e.reason());
  }
}

mask::RleMask parse_mask_reply(const std::string& body) {
  try {
    return wire::rle_from_json(json::parse(body).at("mask"));
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed segment reply: ") + e.what());
  } catch (const ParseError& e) {
    throw BackendError("malformed segment reply: " + e.reason());
  }
}

}  // namespace

}  // namespace afford::http

namespace afford::wire {

std::string base64_encode(const std::string& bytes) {
  return httplib::detail::base64_encode(bytes);
}

}  // namespace afford::wire

namespace afford::http {

Endpoint Endpoint::parse(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("endpoint must be a URL: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw UsageError("unsupported endpoint scheme: " + scheme);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) ep.path = url.substr(path_start);
  while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
  if (ep.origin.size() <= scheme_end + 3) throw UsageError("endpoint has no host: " + url);
  return ep;
}

std::string post_json(const Endpoint& ep, const std::string& path, const std::string& body,
                      const std::string& bearer_token) {
  httplib::Client client(ep.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
  auto res = client.Post(ep.path + path, headers, body, "application/json");
  if (!res)
    throw BackendError("POST " + ep.origin + ep.path + path + " failed: " +
                       httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw BackendError("POST " + ep.origin + ep.path + path + " returned HTTP " +
                       std::to_string(res->status));
  return res->body;
}

std::vector<mask::BBox> HttpBackend::ground(const std::string& image_bytes,
                                            const std::string& text) {
  Json req;
  req["image"] = wire::base64_encode(image_bytes);
  req["text"] = text;
  return parse_boxes(post_json(ep_, "/ground", req.dump()));
}

std::vector<mask::BBox> HttpBackend::ground_part(const std::string& image_bytes,
                                                 const std::string& category,
                                                 const std::string& part) {
  Json req;
  req["image"] = wire::base64_encode(image_bytes);
  req["category"] = category;
  req["part"] = part;
  return parse_boxes(post_json(ep_, "/ground_part", req.dump()));
}

mask::RleMask HttpBackend::segment_box(const std::string& image_bytes, const mask::BBox& box) {
  Json req;
  req["image"] = wire::base64_encode(image_bytes);
  req["box"] = wire::box_to_json(box);
  return parse_mask_reply(post_json(ep_, "/segment", req.dump()));
}

mask::RleMask HttpBackend::segment_polygon(const std::string& image_bytes,
                                           const mask::Polygon& polygon) {
  Json req;
  req["image"] = wire::base64_encode(image_bytes);
  Json pts = Json::array();
  for (const auto& v : polygon) pts.push_back({v.x, v.y});
  req["polygon"] = std::move(pts);
  return parse_mask_reply(post_json(ep_, "/segment", req.dump()));
}

predict::PredictorResponse parse_predictor_response(const std::string& body) {
  predict::PredictorResponse out;
  try {
    const auto j = json::parse(body);
    out.text = j.at("text").get<std::string>();
    for (const auto& s : j.at("slots")) {
      auto token = predict::parse_slot_token(s.at("token").get<std::string>());
      if (!token) throw ParseError(0, "unknown slot token " + s.at("token").dump());
      out.slots.push_back({*token, s.at("position").get<int>(), wire::rle_from_json(s.at("mask"))});
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed predictor reply: ") + e.what());
  }
  return out;
}

predict::PredictorResponse RemotePredictor::predict(const predict::PredictorQuery& query) {
  Json req;
  req["image"] = wire::base64_encode(io::read_file(query.image_path));
  req["system"] = query.system_prompt;
  req["instruction"] = query.instruction;
  return parse_predictor_response(post_json(ep_, "/predict", req.dump()));
}

std::string HttpChatClient::complete(const std::string& model,
                                     const std::vector<instr::ChatMessage>& messages) {
  Json req;
  req["model"] = model;
  Json msgs = Json::array();
  for (const auto& m : messages)
    msgs.push_back({{"role", instr::to_string(m.role)}, {"content", m.content}});
  req["messages"] = std::move(msgs);
  const auto body = post_json(ep_, "", req.dump(), key_);
  try {
    return json::parse(body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed chat completion reply: ") + e.what());
  }
}

}  // namespace afford::http
