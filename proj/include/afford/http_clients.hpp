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

#include <string>

#include "afford/annotate.hpp"
#include "afford/instructions.hpp"
#include "afford/predict.hpp"

namespace afford::http {

/// "http://host:port/prefix" split into the client origin and a path prefix.
struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // may be empty, never ends with '/'

  /// Throws UsageError for anything that is not an http(s) URL.
  static Endpoint parse(const std::string& url);
};

/// POST `body` as JSON to origin + path. Throws BackendError on transport
/// errors, non-2xx status or a non-JSON reply.
std::string post_json(const Endpoint& ep, const std::string& path, const std::string& body,
                      const std::string& bearer_token = {});

/// Grounding, part grounding and segmentation over the backend wire
/// protocol: POST /ground, /ground_part and /segment.
class HttpBackend : public annotate::GroundingBackend,
                    public annotate::PartGroundingBackend,
                    public annotate::SegmenterBackend {
 public:
  explicit HttpBackend(const std::string& url) : ep_(Endpoint::parse(url)) {}

  std::vector<mask::BBox> ground(const std::string& image_bytes,
                                 const std::string& text) override;
  std::vector<mask::BBox> ground_part(const std::string& image_bytes,
                                      const std::string& category,
                                      const std::string& part) override;
  mask::RleMask segment_box(const std::string& image_bytes, const mask::BBox& box) override;
  mask::RleMask segment_polygon(const std::string& image_bytes,
                                const mask::Polygon& polygon) override;

 private:
  Endpoint ep_;
};

/// POST /predict {"image":b64,"system":s,"instruction":s}
class RemotePredictor : public predict::MaskPredictor {
 public:
  RemotePredictor(const std::string& url, bool concurrent)
      : ep_(Endpoint::parse(url)), concurrent_(concurrent) {}

  predict::PredictorResponse predict(const predict::PredictorQuery& query) override;
  bool concurrent() const override { return concurrent_; }
  std::string name() const override { return "remote"; }

 private:
  Endpoint ep_;
  bool concurrent_;
};

/// Decodes a /predict reply. Throws ParseError on schema violations.
predict::PredictorResponse parse_predictor_response(const std::string& body);

/// OpenAI-style chat completion: POSTs {"model","messages"} to the endpoint
/// URL as given and reads choices[0].message.content.
class HttpChatClient : public instr::ChatClient {
 public:
  HttpChatClient(const std::string& url, std::string api_key)
      : ep_(Endpoint::parse(url)), key_(std::move(api_key)) {}
  std::string complete(const std::string& model,
                       const std::vector<instr::ChatMessage>& messages) override;

 private:
  Endpoint ep_;
  std::string key_;
};

}  // namespace afford::http
