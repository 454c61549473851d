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
#include <doctest.h>

#include "afford/errors.hpp"
#include "afford/predict.hpp"
#include "support/fixtures.hpp"

using namespace afford;
using namespace afford::predict;

namespace {

/// Distinct mask per slot index so the chosen slot is identifiable.
mask::RleMask tagged(int i) { return mask::rle_empty(1, i + 1); }

/// Every token sequence of length 0..3.
std::vector<std::vector<SlotToken>> all_sequences() {
  std::vector<std::vector<SlotToken>> out{{}};
  for (std::size_t len = 1; len <= 3; ++len)
    for (unsigned bits = 0; bits < (1u << len); ++bits) {
      std::vector<SlotToken> seq;
      for (std::size_t i = 0; i < len; ++i)
        seq.push_back((bits >> i) & 1 ? SlotToken::kAff : SlotToken::kSeg);
      out.push_back(seq);
    }
  return out;
}

PredictorResponse response_for(const std::vector<SlotToken>& seq) {
  PredictorResponse r;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    r.text += seq[i] == SlotToken::kAff ? "<AFF>" : "<SEG>";
    r.slots.push_back({seq[i], static_cast<int>(3 * i + 2), tagged(static_cast<int>(i))});
  }
  return r;
}

/// Lowest (AFF-first, index) rank.
int brute_choice(const std::vector<SlotToken>& seq) {
  int best = -1, best_rank = 1 << 30;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const int rank = (seq[i] == SlotToken::kAff ? 0 : 100) + static_cast<int>(i);
    if (rank < best_rank) {
      best_rank = rank;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("select_mask examples") {
  PredictorResponse r{"<SEG> <AFF>", {{SlotToken::kSeg, 5, tagged(0)}, {SlotToken::kAff, 9, tagged(1)}}};
  CHECK(select_mask(r) == tagged(1));
  PredictorResponse seg{"<SEG>", {{SlotToken::kSeg, 2, tagged(0)}}};
  CHECK(select_mask(seg) == tagged(0));
  CHECK_THROWS_AS(select_mask(PredictorResponse{}), NoMaskToken);
}

TEST_CASE("select_mask agrees with brute force on every sequence up to length 3") {
  const auto seqs = all_sequences();
  CHECK(seqs.size() == 15);
  for (const auto& seq : seqs) {
    const auto resp = response_for(seq);
    CHECK(check_response(resp).empty());
    const int want = brute_choice(seq);
    if (want < 0) {
      CHECK_THROWS_AS(select_mask(resp), NoMaskToken);
      continue;
    }
    CHECK(select_mask(resp) == tagged(want));
    // Slots after the chosen one do not matter.
    auto truncated = resp;
    truncated.slots.resize(static_cast<std::size_t>(want) + 1);
    CHECK(select_mask(truncated) == tagged(want));
  }
}

TEST_CASE("check_response") {
  PredictorResponse bad_order{"<AFF><SEG>", {{SlotToken::kAff, 4, tagged(0)}, {SlotToken::kSeg, 4, tagged(1)}}};
  CHECK(check_response(bad_order).size() == 1);
  PredictorResponse mismatch{"<SEG>", {{SlotToken::kAff, 0, tagged(0)}}};
  CHECK(check_response(mismatch).size() == 1);
  PredictorResponse count{"<SEG><SEG>", {{SlotToken::kSeg, 0, tagged(0)}}};
  CHECK(check_response(count).size() == 1);
}

TEST_CASE("compose_query") {
  core::ManifestHeader header;
  header.image_root = "/data";
  auto rec = afford::testing::make_record("r", "mug", mask::rle_empty(6, 8));
  const auto q = compose_query(rec, header);
  CHECK(q.system_prompt == "You are an embodied robot.");
  CHECK(q.instruction == "Please segment the affordance map of mug in this image");
  CHECK(q.image_path == "/data/images/r.png");
  CHECK(q.height == 6);
  CHECK(q.width == 8);
  CHECK(q.record_id == "r");

  rec.instruction = core::InstructionSpec{core::InstructionKind::kHard, "I need something to drink coffee"};
  header.image_sizes[rec.image] = {12, 16};
  const auto hard = compose_query(rec, header);
  CHECK(hard.instruction == "I need something to drink coffee");
  CHECK(hard.height == 12);
  CHECK(hard.width == 16);
}

TEST_CASE("built-in predictors") {
  core::DatasetManifest m;
  m.records.push_back(afford::testing::make_record("a", "mug", mask::rle_encode(mask::rasterize_box({1, 1, 3, 3}, 4, 4))));
  OraclePredictor oracle(m);
  PredictorQuery q;
  q.record_id = "a";
  q.width = 4;
  q.height = 4;
  const auto r = oracle.predict(q);
  REQUIRE(r.slots.size() == 1);
  CHECK(r.slots[0].token == SlotToken::kAff);
  CHECK(r.slots[0].mask == *m.records[0].mask);
  q.record_id = "missing";
  CHECK_THROWS_AS(oracle.predict(q), PredictorFailure);

  EmptyPredictor empty;
  CHECK(empty.predict(q).slots.empty());

  CenterBoxPredictor box;
  q.width = 100;
  q.height = 60;
  const auto b = box.predict(q);
  REQUIRE(b.slots.size() == 1);
  CHECK(b.slots[0].token == SlotToken::kSeg);
  CHECK(b.slots[0].mask.area() == 50 * 30);
  CHECK(center_box(100, 60, 0.25) == mask::BBox{25, 15, 75, 45});
  CHECK(center_box(4, 4, 1.0) == mask::BBox{0, 0, 4, 4});
  CHECK_THROWS_AS(CenterBoxPredictor(0.0), UsageError);
}
