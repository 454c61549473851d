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
#include "afford/instructions.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>

#include "afford/errors.hpp"
#include "afford/parallel.hpp"

namespace afford::instr {

namespace {

constexpr std::string_view kSystemPrefix =
    "You are a helpful assistant. Based on several words where the first is category "
    "name, please design an instruction <1> and instruction <2> in embodied scenes. ";
constexpr std::string_view kEasyFirstRule =
    "The instruction <1> must include object category name itself. ";
constexpr std::string_view kHardFirstRule =
    "The instruction <1> must not include object category name itself. ";
constexpr std::string_view kSystemSuffix =
    "The instruction <2> must include object category name itself. The instruction <2> "
    "must belongs to embodied manipulation and give action if instruction <1> provides. "
    "The instruction <2>does not exceed 50 words.";

struct Shot {
  std::string_view user;
  std::string_view assistant;
};

constexpr Shot kEasyShots[] = {
    {"mug",
     "<1> I need a drink. Please find a mug to fill water. <2> The mug has a handle as "
     "affordance map. So the robot can hold its handle."},
    {"knife",
     "<1> Please give me a knife to cut apple. <2> The knife has a handle, and you can use "
     "its handle to cut apple."},
    {"hammer",
     "<1> What is the proper way to hold the hammer? <2> The correct method is to hold the "
     "hammer by its handle."},
    {"fork", "<1> Kindly pick up the fork. <2> You will be holding the fork handle."},
    {"screwdriver",
     "<1> I need a tool to tighten or loosen screws. <2> The screwdriver is here, hold its "
     "handle to turn and control screws."},
};

constexpr Shot kHardShots[] = {
    {"microwave, open",
     "<1> Heat up food quickly . <2> The microwave is closed, so it can be open to access "
     "the food inside."},
    {"knife",
     "<1> I want to cut a bread. <2> The knife has a handle, you can use its handle to cut "
     "bread."},
    {"computer mouse",
     "<1> Give me a tool to control the cursor on the screen. <2> The computer mouse is "
     "here. It has not handle, so you can grasp its whole body."},
    {"fork", "<1> Use to pierce and lift food. <2> The fork is here, and its handle can be "
             "grasped."},
    {"screwdriver",
     "<1> I need a tool to tighten or loosen screws. <2> The screwdriver is here, hold its "
     "handle to turn and control screws."},
};

std::string trim(std::string_view s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

bool contains_run(const std::vector<std::string>& text, const std::vector<std::string>& run) {
  if (run.empty() || run.size() > text.size()) return false;
  return std::search(text.begin(), text.end(), run.begin(), run.end()) != text.end();
}

}  // namespace

std::string_view to_string(Mode m) { return m == Mode::kEasy ? "easy" : "hard"; }

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

HardCheck check_hard_constraint(std::string_view text, const core::CategoryLabel& category) {
  const auto text_words = words(text);
  std::vector<const std::string*> names{&category.name};
  for (const auto& a : category.aliases) names.push_back(&a);
  for (const auto* name : names) {
    if (contains_run(text_words, words(*name))) return {false, *name};
  }
  return {};
}

core::InstructionSpec build_template(const core::CategoryLabel& category) {
  return {core::InstructionKind::kTemplate,
          "Please segment the affordance map of " + category.name + " in this image"};
}

PromptScaffold build_reasoning_prompt(const core::CategoryLabel& category,
                                      const std::optional<std::string>& keywords, Mode mode) {
  PromptScaffold s{mode, {}};
  std::string system(kSystemPrefix);
  system += mode == Mode::kEasy ? kEasyFirstRule : kHardFirstRule;
  system += kSystemSuffix;
  s.messages.push_back({Role::kSystem, std::move(system)});
  const auto emit = [&](const auto& shots) {
    for (const Shot& shot : shots) {
      s.messages.push_back({Role::kUser, std::string(shot.user)});
      s.messages.push_back({Role::kAssistant, std::string(shot.assistant)});
    }
  };
  if (mode == Mode::kEasy) {
    emit(kEasyShots);
  } else {
    emit(kHardShots);
  }
  std::string payload = category.name;
  if (keywords && !keywords->empty()) payload += ", " + *keywords;
  s.messages.push_back({Role::kUser, std::move(payload)});
  return s;
}

GeneratedInstructionPair parse_llm_pair(std::string_view response,
                                        const core::CategoryLabel& category, Mode mode) {
  const auto p1 = response.find("<1>");
  if (p1 == std::string_view::npos) throw MarkerMissing("<1>");
  const auto p2 = response.find("<2>", p1 + 3);
  if (p2 == std::string_view::npos) throw MarkerMissing("<2>");

  GeneratedInstructionPair pair;
  pair.first = trim(response.substr(p1 + 3, p2 - (p1 + 3)));
  pair.second = trim(response.substr(p2 + 3));
  pair.category = category;
  pair.mode = mode;
  if (pair.first.empty()) throw MarkerMissing("<1> (empty)");
  if (pair.second.empty()) throw MarkerMissing("<2> (empty)");
  if (mode == Mode::kHard) {
    if (auto check = check_hard_constraint(pair.first, category); !check.pass)
      throw HardConstraintViolated(check.offending);
  }
  return pair;
}

std::string format_pair(const GeneratedInstructionPair& pair) {
  return "<1> " + pair.first + " <2> " + pair.second;
}

std::string StubChatClient::complete(const std::string& /*model*/,
                                     const std::vector<ChatMessage>& messages) {
  const std::string key = messages.empty() ? std::string() : messages.back().content;
  if (auto it = canned_.find(key); it != canned_.end()) return it->second;
  const std::string name = key.substr(0, key.find(','));
  const bool hard = !messages.empty() &&
                    messages.front().content.find("must not include") != std::string::npos;
  if (hard)
    return "<1> I need the tool made for this job. <2> The " + name +
           " is here, hold it firmly to use it.";
  return "<1> Please hand me the " + name + ". <2> The " + name +
         " is here, hold it firmly to use it.";
}

GenerationResult generate_reasoning(const std::vector<GenerationRequest>& requests, Mode mode,
                                    ChatClient& client, const std::string& model,
                                    std::size_t max_in_flight) {
  enum class Outcome { kOk, kViolation, kMalformed, kClientError };
  struct Slot {
    Outcome outcome = Outcome::kClientError;
    GeneratedInstructionPair pair;
  };
  std::vector<Slot> slots(requests.size());

  parallel_for(requests.size(), std::max<std::size_t>(1, max_in_flight), [&](std::size_t i) {
    const auto& req = requests[i];
    std::string text;
    try {
      text = client.complete(model,
                             build_reasoning_prompt(req.category, req.keywords, mode).messages);
    } catch (const std::exception&) {
      slots[i].outcome = Outcome::kClientError;
      return;
    }
    try {
      slots[i].pair = parse_llm_pair(text, req.category, mode);
      slots[i].outcome = Outcome::kOk;
    } catch (const HardConstraintViolated&) {
      slots[i].outcome = Outcome::kViolation;
    } catch (const MarkerMissing&) {
      slots[i].outcome = Outcome::kMalformed;
    }
  });

  GenerationResult result;
  std::map<std::string, std::set<std::string>> seen;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& name = requests[i].category.name;
    auto& stats = result.per_category[name];
    ++stats.requested;
    switch (slots[i].outcome) {
      case Outcome::kViolation: ++stats.constraint_violations; continue;
      case Outcome::kMalformed: ++stats.malformed; continue;
      case Outcome::kClientError: ++stats.client_errors; continue;
      case Outcome::kOk: break;
    }
    if (!seen[name].insert(slots[i].pair.first).second) {
      ++stats.duplicates;
      continue;
    }
    ++stats.accepted;
    result.accepted.emplace_back(requests[i].record_id, std::move(slots[i].pair));
  }
  return result;
}

}  // namespace afford::instr
