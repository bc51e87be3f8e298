// Copyright 2026 The keycov Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "keycov/decoder.h"

#include <cmath>

#include <gtest/gtest.h>

#include "keycov/errors.h"
#include "keycov/random.h"
#include "generators.h"
#include "oracles/oracles.h"

namespace keycov {
namespace {

using testing::RandomLogits;

TEST(AdmissibleEndsTest, DegenerateSoftmaxIsSingleton) {
  std::vector<double> end(8, -10.0);
  end[5] = 10.0;
  EXPECT_EQ(DynamicAdmissibleEnds(0, end, 0.9, 64), (std::vector<int64_t>{5}));
}

TEST(AdmissibleEndsTest, UniformNeedsAllFour) {
  const std::vector<double> end(4, 0.0);
  // Three of four positions hold 0.75 < 0.9.
  EXPECT_EQ(DynamicAdmissibleEnds(0, end, 0.9, 64), (std::vector<int64_t>{0, 1, 2, 3}));
  EXPECT_EQ(DynamicAdmissibleEnds(0, end, 0.75, 64), (std::vector<int64_t>{0, 1, 2}));
}

TEST(AdmissibleEndsTest, CapExcludesDistantEnd) {
  std::vector<double> end(40, -10.0);
  end[30] = 10.0;
  end[3] = 0.0;
  EXPECT_TRUE(DynamicAdmissibleEnds(0, end, 0.9, 16).empty());
  EXPECT_EQ(DynamicAdmissibleEnds(0, end, 0.9, 64), (std::vector<int64_t>{30}));
}

TEST(AdmissibleEndsTest, StartOutsideChunk) {
  EXPECT_THROW(DynamicAdmissibleEnds(3, {0, 0}, 0.9, 4), ValidationError);
}

TEST(DecodeTest, UniqueMaximum) {
  const ChunkLogits l{{5, -5, -5}, {-5, -5, 5}, -10};
  const auto c = DecodeSpans(l, DecodeConfig{}, false);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(*c, (SpanCandidate{0, 3, 10.0}));
}

TEST(DecodeTest, NullDominates) {
  const ChunkLogits l{{5, -5, -5}, {-5, -5, 5}, 20};
  EXPECT_FALSE(DecodeSpans(l, DecodeConfig{}, false).has_value());
}

TEST(DecodeTest, NullOffsetShiftsDecision) {
  const ChunkLogits l{{5, -5, -5}, {-5, -5, 5}, 8};
  DecodeConfig c;
  EXPECT_TRUE(DecodeSpans(l, c, false).has_value());
  c.null_offset = 2.5;
  EXPECT_FALSE(DecodeSpans(l, c, false).has_value());
}

TEST(DecodeTest, ShortFieldCap) {
  std::vector<double> s(30, -5.0), e(30, -5.0);
  s[0] = 5.0;
  e[20] = 5.0;
  const ChunkLogits l{s, e, -20};
  const auto wide = DecodeSpans(l, DecodeConfig{}, false);
  ASSERT_TRUE(wide.has_value());
  EXPECT_EQ(wide->end, 21);
  const auto narrow = DecodeSpans(l, DecodeConfig{}, true);
  ASSERT_TRUE(!narrow || narrow->end - narrow->start <= 16);
}

TEST(DecodeTest, EmptyChunk) {
  EXPECT_FALSE(DecodeSpans(ChunkLogits{}, DecodeConfig{}, false).has_value());
}

TEST(DecodeTest, MatchesExhaustiveEnumeration) {
  Rng rng(2024);
  int answered = 0, null = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int64_t len = rng.UniformInt(1, 64);
    const ChunkLogits l = RandomLogits(rng, len);
    DecodeConfig c;
    c.top_n = static_cast<int>(rng.UniformInt(1, 25));
    c.mass = std::vector<double>{0.5, 0.9, 0.99, 1.0}[rng.UniformInt(0, 3)];
    c.max_span = static_cast<int>(rng.UniformInt(1, 64));
    c.short_max_span = static_cast<int>(rng.UniformInt(1, 16));
    const bool short_field = rng.Bernoulli(0.3);
    const auto got = DecodeSpans(l, c, short_field);
    const auto want = oracle::BruteDecode(l, c, short_field);
    ASSERT_EQ(got, want) << "trial " << trial;
    got ? ++answered : ++null;
  }
  EXPECT_GT(answered, 50);
  EXPECT_GT(null, 50);
}

TEST(DecodeTest, AdmissibleEndsMatchOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int64_t len = rng.UniformInt(1, 40);
    const ChunkLogits l = RandomLogits(rng, len);
    const int64_t start = rng.UniformInt(0, len - 1);
    const int cap = static_cast<int>(rng.UniformInt(1, 40));
    ASSERT_EQ(DynamicAdmissibleEnds(start, l.end_logits, 0.9, cap),
              oracle::BruteAdmissibleEnds(start, l.end_logits, 0.9, cap));
  }
}

TEST(PostprocessTest, TrimsTrailingPunctuationAndSpace) {
  const std::u32string text = U"既往史：高血压。 \n";
  const auto s = PostprocessSpan(text, {4, 9});
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(*s, (Span{4, 7}));
}

TEST(PostprocessTest, CleanSpanUnchanged) {
  const std::u32string text = U"bp: 120/80 mmHg";
  EXPECT_EQ(PostprocessSpan(text, {4, 15}), (Span{4, 15}));
}

TEST(PostprocessTest, SnapsInwardPastPartialWord) {
  const std::u32string text = U"dx: hypertension stage 2";
  // Starts at "ypertension".
  const auto s = PostprocessSpan(text, {5, 24});
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(*s, (Span{17, 24}));
  EXPECT_EQ(text.substr(s->start, s->end - s->start), U"stage 2");
}

TEST(PostprocessTest, NothingLeft) {
  EXPECT_FALSE(PostprocessSpan(U"a 。 b", {1, 4}).has_value());
  EXPECT_THROW(PostprocessSpan(U"abc", {2, 5}), ValidationError);
}

TEST(PostprocessTest, IdempotentOnRandomSpans) {
  const std::u32string alphabet = U"ab12 。，:;高血压\n　.x";
  Rng rng(31);
  for (int trial = 0; trial < 5000; ++trial) {
    std::u32string text;
    const int64_t n = rng.UniformInt(1, 20);
    for (int64_t i = 0; i < n; ++i) {
      text.push_back(alphabet[rng.UniformInt(0, static_cast<int64_t>(alphabet.size()) - 1)]);
    }
    const int64_t a = rng.UniformInt(0, n);
    const int64_t b = rng.UniformInt(a, n);
    const auto once = PostprocessSpan(text, {a, b});
    if (!once) continue;
    ASSERT_GE(once->start, a);
    ASSERT_LE(once->end, b);
    ASSERT_EQ(PostprocessSpan(text, *once), once);
  }
}

TEST(MergeTest, HighestScoreWins) {
  const auto m = MergeChunkCandidates({SpanCandidate{0, 2, 7}, SpanCandidate{5, 6, 9}});
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->score, 9);
}

TEST(MergeTest, AllNoAnswer) {
  EXPECT_FALSE(MergeChunkCandidates({std::nullopt, std::nullopt}).has_value());
  EXPECT_FALSE(MergeChunkCandidates({}).has_value());
}

TEST(MergeTest, SameSpanFromOverlappingChunksCollapses) {
  // Chunks at origins 0 and 4 both see global [5, 7).
  const SpanCandidate first{0 + 5, 0 + 7, 10};
  const SpanCandidate second{4 + 1, 4 + 3, 10};
  const auto m = MergeChunkCandidates({first, std::nullopt, second});
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(*m, (SpanCandidate{5, 7, 10}));
}

TEST(MergeTest, TiesPreferEarlierThenShorter) {
  EXPECT_EQ(*MergeChunkCandidates({SpanCandidate{3, 5, 1}, SpanCandidate{2, 9, 1}}),
            (SpanCandidate{2, 9, 1}));
  EXPECT_EQ(*MergeChunkCandidates({SpanCandidate{2, 9, 1}, SpanCandidate{2, 4, 1}}),
            (SpanCandidate{2, 4, 1}));
}

}  // namespace
}  // namespace keycov
