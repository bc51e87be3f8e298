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

#include "keycov/loss.h"

#include <cmath>

#include <gtest/gtest.h>

#include "keycov/errors.h"
#include "keycov/random.h"
#include "oracles/oracles.h"

namespace keycov {
namespace {

TEST(LossConfigTest, PresetsMatchPublishedHyperparameters) {
  const LossConfig x = LossConfig::Extraction();
  EXPECT_DOUBLE_EQ(x.epsilon, 0.08);
  EXPECT_DOUBLE_EQ(x.margin, 0.10);
  EXPECT_DOUBLE_EQ(x.margin_weight, 0.01);
  EXPECT_DOUBLE_EQ(x.length_weight, 0.1);
  EXPECT_DOUBLE_EQ(x.length_scale, 2.0);
  EXPECT_DOUBLE_EQ(x.short_weight, 2.0);
  const LossConfig c = LossConfig::Canonicalization();
  EXPECT_DOUBLE_EQ(c.epsilon, 0.1);
  EXPECT_DOUBLE_EQ(c.margin, 0.15);
  EXPECT_DOUBLE_EQ(c.margin_weight, 0.05);
  EXPECT_DOUBLE_EQ(c.short_weight, 2.5);
  EXPECT_EQ(LossConfig::ForTask(LossTask::kCanonicalization).task, LossTask::kCanonicalization);
}

TEST(SmoothedCeTest, UniformLogitsGiveLogL) {
  for (double eps : {0.0, 0.08, 0.5}) {
    EXPECT_NEAR(SmoothedSpanCe({0.0, 0.0}, 1, eps).value, std::log(2.0), 1e-12);
    EXPECT_NEAR(SmoothedSpanCe({3.0, 3.0, 3.0, 3.0, 3.0}, 2, eps).value, std::log(5.0), 1e-12);
  }
}

TEST(SmoothedCeTest, ClosedFormTwoLogits) {
  EXPECT_NEAR(SmoothedSpanCe({1.0, 0.0}, 0, 0.0).value, std::log1p(std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(SmoothedSpanCe({1.0, 0.0}, 0, 0.0).value, 0.3133, 5e-5);
}

TEST(SmoothedCeTest, FullSmoothingIgnoresGold) {
  const std::vector<double> x = {0.3, -1.2, 2.0};
  EXPECT_DOUBLE_EQ(SmoothedSpanCe(x, 0, 1.0).value, SmoothedSpanCe(x, 2, 1.0).value);
}

TEST(SmoothedCeTest, GradientIsSoftmaxMinusTarget) {
  const std::vector<double> x = {0.5, -0.5, 1.0};
  const auto r = SmoothedSpanCe(x, 1, 0.1);
  double z = 0.0;
  for (double v : x) z += std::exp(v);
  for (size_t i = 0; i < x.size(); ++i) {
    const double target = (i == 1 ? 0.9 : 0.0) + 0.1 / 3.0;
    EXPECT_NEAR(r.grad[i], std::exp(x[i]) / z - target, 1e-12);
  }
}

TEST(MarginTest, SatisfiedHingeIsZero) {
  const ChunkLogits l{{2.0, 0.0}, {0.0, 2.0}, 1.0};
  EXPECT_DOUBLE_EQ(NoAnswerMargin(l, Span{0, 2}, 0.1).value, 0.0);
}

TEST(MarginTest, LinearRegion) {
  const ChunkLogits l{{0.5, 0.0}, {0.0, 0.5}, 1.0};
  EXPECT_NEAR(NoAnswerMargin(l, Span{0, 2}, 0.10).value, 0.10, 1e-15);
}

TEST(MarginTest, MatchesDirectFormula) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int64_t len = rng.UniformInt(1, 12);
    ChunkLogits l;
    for (int64_t i = 0; i < len; ++i) {
      l.start_logits.push_back(rng.Normal());
      l.end_logits.push_back(rng.Normal());
    }
    l.null_score = rng.Normal();
    std::optional<Span> gold;
    if (rng.Bernoulli(0.6)) {
      const int64_t s = rng.UniformInt(0, len - 1);
      gold = Span{s, rng.UniformInt(s + 1, len)};
    }
    double expected;
    if (gold) {
      expected = 0.1 - (l.start_logits[gold->start] + l.end_logits[gold->end - 1] - l.null_score);
    } else {
      double best = -1e300;
      for (int64_t i = 0; i < len; ++i) {
        for (int64_t j = i; j < len; ++j) best = std::max(best, l.start_logits[i] + l.end_logits[j]);
      }
      expected = 0.1 - (l.null_score - best);
    }
    const MarginResult m = NoAnswerMargin(l, gold, 0.1);
    EXPECT_NEAR(m.slack, expected, 1e-12);
    EXPECT_NEAR(m.value, std::max(0.0, expected), 1e-12);
  }
}

TEST(LengthPenaltyTest, CenteredAtGoldLength) {
  std::vector<double> s(8, -50.0), e(8, -50.0);
  s[2] = 50.0;
  e[5] = 50.0;
  const LengthResult r = LengthPenalty(s, e, 4.0, 2.0);
  EXPECT_NEAR(r.expected_length, 4.0, 1e-9);
  EXPECT_NEAR(r.value, std::log(2.0), 1e-9);
}

TEST(LengthPenaltyTest, ShortPredictionVanishes) {
  std::vector<double> s(60, -50.0), e(60, -50.0);
  s[0] = 50.0;
  e[0] = 50.0;
  EXPECT_LT(LengthPenalty(s, e, 59.0, 2.0).value, 1e-10);
}

TEST(ExampleWeightTest, ShortSpansWeighted) {
  EXPECT_DOUBLE_EQ(ExampleWeight(Span{0, 3}, 10, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(ExampleWeight(Span{0, 10}, 10, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(ExampleWeight(Span{0, 11}, 10, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(ExampleWeight(std::nullopt, 10, 2.0), 1.0);
}

TEST(TotalLossTest, ZeroLogitsMatchIndependentEvaluation) {
  const ChunkLogits l{std::vector<double>(4, 0.0), std::vector<double>(4, 0.0), 0.0};
  const LossConfig c = LossConfig::Extraction();
  const Span gold{1, 2};
  EXPECT_NEAR(TotalLoss(l, gold, c).total, oracle::DirectTotalLoss(l, gold, c), 1e-12);
}

TEST(TotalLossTest, MatchesIndependentEvaluationOnRandomInstances) {
  Rng rng(77);
  for (int i = 0; i < 300; ++i) {
    const LossInstance inst = RandomLossInstance(rng, 20);
    for (const LossConfig& c : {LossConfig::Extraction(), LossConfig::Canonicalization()}) {
      EXPECT_NEAR(TotalLoss(inst.logits, inst.gold, c).total,
                  oracle::DirectTotalLoss(inst.logits, inst.gold, c), 1e-10);
    }
  }
}

TEST(TotalLossTest, NoAuxiliaryTermsLeavesCrossEntropy) {
  Rng rng(1);
  LossConfig c = LossConfig::Extraction();
  c.margin_weight = 0.0;
  c.length_weight = 0.0;
  c.short_weight = 1.0;
  const LossInstance inst = RandomLossInstance(rng, 10, 2.0, 0.0);
  const LossBreakdown b = TotalLoss(inst.logits, inst.gold, c);
  EXPECT_DOUBLE_EQ(b.total, b.ce_start + b.ce_end);
}

TEST(TotalLossTest, RejectsBadInput) {
  const ChunkLogits l{{0.0, 0.0}, {0.0, 0.0}, 0.0};
  EXPECT_THROW(TotalLoss(l, Span{1, 3}, LossConfig{}), ValidationError);
  ChunkLogits bad = l;
  bad.null_score = std::nan("");
  EXPECT_THROW(TotalLoss(bad, std::nullopt, LossConfig{}), ValidationError);
}

double RelativeError(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kRelativeErrorFloor});
}

TEST(GradientTest, MatchesCentralDifferences) {
  Rng rng(42);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const LossInstance inst = RandomLossInstance(rng, 32);
    const LossConfig c = i % 2 ? LossConfig::Canonicalization() : LossConfig::Extraction();
    const MarginResult m = NoAnswerMargin(inst.logits, inst.gold, c.margin);
    if (std::abs(m.slack) < kKinkTolerance) continue;
    const LossBreakdown b = TotalLoss(inst.logits, inst.gold, c);
    std::vector<double> analytic = b.grad_start;
    analytic.insert(analytic.end(), b.grad_end.begin(), b.grad_end.end());
    analytic.push_back(b.grad_null);
    const std::vector<double> numeric = oracle::NumericGradient(inst, c, 1e-5);
    ASSERT_EQ(analytic.size(), numeric.size());
    for (size_t k = 0; k < analytic.size(); ++k) {
      EXPECT_LT(RelativeError(analytic[k], numeric[k]), 1e-4) << "instance " << i << " coord " << k;
    }
    ++checked;
    const GradCheckResult g = GradCheck(inst, c);
    if (!g.skipped) {
      EXPECT_LT(g.max_relative_error, 1e-4);
    }
  }
  EXPECT_GT(checked, 90);
}

TEST(GradientTest, LengthPenaltyGradient) {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const int64_t len = rng.UniformInt(1, 32);
    std::vector<double> s, e;
    for (int64_t k = 0; k < len; ++k) {
      s.push_back(2.0 * rng.Normal());
      e.push_back(2.0 * rng.Normal());
    }
    const double gold = static_cast<double>(rng.UniformInt(1, len));
    const LengthResult r = LengthPenalty(s, e, gold, 2.0);
    const double h = 1e-5;
    for (int64_t k = 0; k < len; ++k) {
      auto sp = s, sm = s, ep = e, em = e;
      sp[k] += h;
      sm[k] -= h;
      ep[k] += h;
      em[k] -= h;
      const double ns = (LengthPenalty(sp, e, gold, 2.0).value - LengthPenalty(sm, e, gold, 2.0).value) / (2 * h);
      const double ne = (LengthPenalty(s, ep, gold, 2.0).value - LengthPenalty(s, em, gold, 2.0).value) / (2 * h);
      EXPECT_LT(RelativeError(r.grad_start[k], ns), 1e-4);
      EXPECT_LT(RelativeError(r.grad_end[k], ne), 1e-4);
    }
  }
}

TEST(BestSpanTest, MatchesEnumeration) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const int64_t len = rng.UniformInt(1, 15);
    std::vector<double> s, e;
    for (int64_t k = 0; k < len; ++k) {
      s.push_back(rng.Normal());
      e.push_back(rng.Normal());
    }
    const BestSpan b = BestSpanScore(s, e);
    double best = -1e300;
    for (int64_t a = 0; a < len; ++a) {
      for (int64_t z = a; z < len; ++z) best = std::max(best, s[a] + e[z]);
    }
    EXPECT_DOUBLE_EQ(b.score, best);
    EXPECT_LE(b.start, b.end_inclusive);
    EXPECT_DOUBLE_EQ(s[b.start] + e[b.end_inclusive], best);
  }
}

}  // namespace
}  // namespace keycov
