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

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "afford/core.hpp"

namespace afford::instr {

enum class Mode { kEasy, kHard };
enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Mode m);
std::string_view to_string(Role r);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct PromptScaffold {
  Mode mode = Mode::kEasy;
  std::vector<ChatMessage> messages;
};

struct GeneratedInstructionPair {
  std::string first;   // the instruction, <1>
  std::string second;  // the action / affordance answer, <2>
  core::CategoryLabel category;
  Mode mode = Mode::kEasy;
};

struct HardCheck {
  bool pass = true;
  std::string offending;  // the matched name or alias when !pass
};

/// Lower-cased alphanumeric words; everything else separates.
std::vector<std::string> words(std::string_view text);

/// Case-insensitive whole-word search for the category name and each alias.
/// Multi-word names match as contiguous word runs. No stemming.
HardCheck check_hard_constraint(std::string_view text, const core::CategoryLabel& category);

/// "Please segment the affordance map of <name> in this image"
core::InstructionSpec build_template(const core::CategoryLabel& category);

/// Few-shot chat scaffold for an external LLM. The final user turn is the
/// category name, followed by ", " and the keywords when given.
PromptScaffold build_reasoning_prompt(const core::CategoryLabel& category,
                                      const std::optional<std::string>& keywords, Mode mode);

/// Splits "<1> ... <2> ..." and trims both halves. Hard mode also enforces
/// the hard constraint on the first half. Throws MarkerMissing or
/// HardConstraintViolated.
GeneratedInstructionPair parse_llm_pair(std::string_view response,
                                        const core::CategoryLabel& category, Mode mode);

/// "<1> first <2> second"
std::string format_pair(const GeneratedInstructionPair& pair);

/// Minimal chat-completion client: model name and messages in, text out.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::string& model,
                               const std::vector<ChatMessage>& messages) = 0;
};

/// Offline client with canned responses keyed by the final user message.
/// Unknown keys get a generic response built from the category word.
class StubChatClient : public ChatClient {
 public:
  StubChatClient() = default;
  explicit StubChatClient(std::map<std::string, std::string> canned)
      : canned_(std::move(canned)) {}
  std::string complete(const std::string& model,
                       const std::vector<ChatMessage>& messages) override;

 private:
  std::map<std::string, std::string> canned_;
};

struct GenerationRequest {
  std::string record_id;
  core::CategoryLabel category;
  std::optional<std::string> keywords;
};

struct CategoryGenerationStats {
  std::size_t requested = 0;
  std::size_t accepted = 0;
  std::size_t constraint_violations = 0;
  std::size_t malformed = 0;
  std::size_t client_errors = 0;
  std::size_t duplicates = 0;
};

struct GenerationResult {
  /// Accepted pairs in request order, keyed by record id.
  std::vector<std::pair<std::string, GeneratedInstructionPair>> accepted;
  std::map<std::string, CategoryGenerationStats> per_category;
};

/// One LLM call per request, at most `max_in_flight` concurrently.
/// Constraint-violating and malformed responses are discarded and counted;
/// exact duplicate instructions within a category are dropped.
GenerationResult generate_reasoning(const std::vector<GenerationRequest>& requests, Mode mode,
                                    ChatClient& client, const std::string& model,
                                    std::size_t max_in_flight);

}  // namespace afford::instr
