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

#include "keycov/canonicalizer.h"

#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "keycov/errors.h"
#include "oracles/oracles.h"
#include "test_util.h"

namespace keycov {
namespace {

using testing::Entry;
using testing::MakeInventory;

double Cosine(const EmbeddingProvider& p, const std::string& a, const std::string& b) {
  return Dot(p.Embed(a), p.Embed(b));
}

TEST(EmbeddingTest, BigramBucketsOfShortKey) {
  const BigramHashEmbedder e;
  const EmbeddingVector v = e.Embed("ab");
  std::set<int> expected = {e.Bucket(BigramHashEmbedder::kBegin, U'a'), e.Bucket(U'a', U'b'),
                            e.Bucket(U'b', BigramHashEmbedder::kEnd)};
  ASSERT_EQ(expected.size(), 3u) << "hash collision in fixture";
  for (int i = 0; i < e.dim(); ++i) EXPECT_EQ(v[i] != 0.0, expected.count(i) > 0) << i;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(EmbeddingTest, Deterministic) {
  const BigramHashEmbedder e;
  EXPECT_EQ(e.Embed("既往史"), e.Embed("既往史"));
}

TEST(EmbeddingTest, RelatedKeysAreCloser) {
  const BigramHashEmbedder e;
  EXPECT_GT(Cosine(e, "既往史", "既往病史"), Cosine(e, "既往史", "手术记录"));
}

TEST(EmbeddingTest, FileProvider) {
  const auto p = FileEmbeddingProvider::Parse(
      "{\"key\":\"a\",\"vector\":[3,4]}\n{\"key\":\"b\",\"vector\":[0,2]}\n");
  EXPECT_EQ(p.dim(), 2);
  EXPECT_NEAR(p.Embed("a")[0], 0.6, 1e-12);
  EXPECT_THROW(p.Embed("c"), NotFoundError);
  EXPECT_THROW(FileEmbeddingProvider::Parse("{\"key\":\"a\",\"vector\":[1]}\n"
                                            "{\"key\":\"b\",\"vector\":[1,2]}\n"),
               ValidationError);
}

TEST(SuggestCanonicalTest, FrequencyThenLengthThenLexicographic) {
  EXPECT_EQ(SuggestCanonical({{"bb", 3}, {"a", 2}}), "bb");
  EXPECT_EQ(SuggestCanonical({{"bbb", 3}, {"cc", 3}}), "cc");
  EXPECT_EQ(SuggestCanonical({{"b", 3}, {"a", 3}}), "a");
}

TEST(AverageLinkageTest, MatchesBruteForceOnRandomMatrices) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = static_cast<int>(rng.UniformInt(1, 14));
    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) sim[i][j] = sim[j][i] = rng.Uniform();
    }
    const double threshold = rng.Uniform();
    EXPECT_EQ(AverageLinkage(sim, threshold), oracle::BruteAverageLinkage(sim, threshold));
  }
}

TEST(ClusterKeysTest, UnreachableThresholdGivesSingletons) {
  const BigramHashEmbedder e;
  const std::vector<KeyCount> keys = {{"既往史", 3}, {"既往病史", 2}, {"手术记录", 1}};
  const auto proposals = ClusterKeys(keys, e, 1.0 + 1e-9);
  ASSERT_EQ(proposals.size(), 3u);
  for (const auto& p : proposals) {
    EXPECT_EQ(p.members.size(), 1u);
    EXPECT_EQ(p.kind, ProposalKind::kNewCanonical);
    EXPECT_EQ(p.status, ProposalStatus::kPending);
  }
}

TEST(ClusterKeysTest, DuplicatesRejected) {
  const BigramHashEmbedder e;
  EXPECT_THROW(ClusterKeys({{"a", 1}, {"a", 2}}, e), ValidationError);
}

TEST(ClusterKeysTest, RecoversPlantedPartitionLikeBruteForce) {
  const BigramHashEmbedder e;
  const auto fixture = testing::MakePlantedGroups(5, 20, 10);
  const auto proposals = ClusterKeys(fixture.keys, e);
  EXPECT_EQ(testing::SortedMemberSets(proposals), fixture.groups);

  std::vector<KeyCount> sorted = fixture.keys;
  SortKeyCounts(sorted);
  std::vector<std::vector<double>> sim(sorted.size(), std::vector<double>(sorted.size()));
  for (size_t i = 0; i < sorted.size(); ++i) {
    for (size_t j = 0; j < sorted.size(); ++j) sim[i][j] = Cosine(e, sorted[i].key, sorted[j].key);
  }
  std::vector<std::vector<std::string>> brute;
  for (const auto& idx : oracle::BruteAverageLinkage(sim, kDefaultClusterThreshold)) {
    std::vector<std::string> g;
    for (int i : idx) g.push_back(sorted[i].key);
    std::sort(g.begin(), g.end());
    brute.push_back(g);
  }
  std::sort(brute.begin(), brute.end());
  EXPECT_EQ(brute, fixture.groups);
}

TEST(ClusterKeysTest, ProposalFields) {
  const BigramHashEmbedder e;
  const auto proposals = ClusterKeys({{"abcdefghijkl", 5}, {"abcdefghijklm", 9}}, e);
  ASSERT_EQ(proposals.size(), 1u);
  const ClusterProposal& p = proposals[0];
  EXPECT_EQ(p.suggested_canonical, "abcdefghijklm");
  EXPECT_EQ(p.total_frequency(), 14);
  ASSERT_EQ(p.pairwise_similarities.size(), 2u);
  EXPECT_NEAR(p.pairwise_similarities[0][1], Cosine(e, "abcdefghijkl", "abcdefghijklm"), 1e-12);
  EXPECT_EQ(p.proposal_id, ProposalContentId(p));
}

TEST(ProposeClustersTest, CloseKeyAttachesToCanonical) {
  const BigramHashEmbedder e;
  const KeyInventory inv = MakeInventory({Entry("abcdefghijkl"), Entry("zyxwvutsrqpo")});
  const auto proposals = ProposeClusters({{"abcdefghijklm", 2}}, inv, e);
  ASSERT_EQ(proposals.size(), 1u);
  EXPECT_EQ(proposals[0].kind, ProposalKind::kAttachAlias);
  EXPECT_EQ(proposals[0].target_canonical, "abcdefghijkl");
  const double expected =
      Dot(CanonicalCentroid(inv.entries()[0], e), e.Embed("abcdefghijklm"));
  EXPECT_NEAR(proposals[0].target_similarities[0], expected, 1e-12);
  EXPECT_GE(expected, kDefaultClusterThreshold);
}

TEST(ProposeClustersTest, EmptyNovelSet) {
  const BigramHashEmbedder e;
  EXPECT_TRUE(ProposeClusters({}, MakeInventory({Entry("a")}), e).empty());
}

TEST(ProposeClustersTest, MutuallyCloseNovelKeysFormOneProposal) {
  const BigramHashEmbedder e;
  const KeyInventory inv = MakeInventory({Entry("既往史"), Entry("手术记录")});
  const std::vector<KeyCount> novel = {{"mnopqrstuvwx", 3}, {"mnopqrstuvwxy", 1}};
  ASSERT_GE(Cosine(e, novel[0].key, novel[1].key), kDefaultClusterThreshold);
  for (const auto& n : novel) {
    for (const auto& c : inv.entries()) {
      ASSERT_LT(Dot(CanonicalCentroid(c, e), e.Embed(n.key)), kDefaultClusterThreshold);
    }
  }
  const auto proposals = ProposeClusters(novel, inv, e);
  ASSERT_EQ(proposals.size(), 1u);
  EXPECT_EQ(proposals[0].kind, ProposalKind::kNewCanonical);
  EXPECT_EQ(proposals[0].members.size(), 2u);
  EXPECT_EQ(proposals[0].suggested_canonical, "mnopqrstuvwx");
}

ClusterProposal Proposal(std::vector<KeyCount> members, ProposalKind kind = ProposalKind::kNewCanonical,
                         std::optional<std::string> target = std::nullopt) {
  ClusterProposal p;
  p.kind = kind;
  p.target_canonical = target;
  p.members = members;
  p.suggested_canonical = SuggestCanonical(members);
  p.proposal_id = ProposalContentId(p);
  return p;
}

ReviewDecision Decide(const ClusterProposal& p, ReviewAction action) {
  ReviewDecision d;
  d.proposal_id = p.proposal_id;
  d.action = action;
  return d;
}

TEST(ReviewTest, AcceptAddsCanonicalAndAliases) {
  const KeyInventory inv = MakeInventory({Entry("既往史")});
  ClusterProposal p = Proposal({{"手术记录", 5}, {"手术经过", 3}, {"术中经过", 1}});
  const KeyInventory next = ApplyReviewDecision(inv, p, Decide(p, ReviewAction::kAccept));
  EXPECT_EQ(next.version(), inv.version() + 1);
  EXPECT_EQ(next.size(), 2u);
  const CanonicalKeyEntry* e = next.Find("手术记录");
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->aliases, (std::set<std::string>{"手术经过", "术中经过"}));
  EXPECT_EQ(e->frequency, 9);
  EXPECT_EQ(p.status, ProposalStatus::kAccepted);
  EXPECT_THROW(ApplyReviewDecision(next, p, Decide(p, ReviewAction::kAccept)), StateError);
}

TEST(ReviewTest, RejectKeepsVersion) {
  const KeyInventory inv = MakeInventory({Entry("既往史")});
  ClusterProposal p = Proposal({{"x", 1}});
  const KeyInventory next = ApplyReviewDecision(inv, p, Decide(p, ReviewAction::kReject));
  EXPECT_EQ(next, inv);
  EXPECT_EQ(p.status, ProposalStatus::kRejected);
}

TEST(ReviewTest, MergeIntoExistingCanonical) {
  const KeyInventory inv = MakeInventory({Entry("专科检查")});
  ClusterProposal p = Proposal({{"专科查体", 4}, {"专科检查所见", 2}, {"专科情况", 1}});
  ReviewDecision d = Decide(p, ReviewAction::kMerge);
  d.target_canonical = "专科检查";
  const KeyInventory next = ApplyReviewDecision(inv, p, d);
  for (const char* k : {"专科查体", "专科检查所见", "专科情况"}) {
    EXPECT_EQ(next.Canonicalize(k), "专科检查") << k;
  }
  EXPECT_EQ(p.status, ProposalStatus::kEdited);
}

TEST(ReviewTest, RenameChoosesReviewerCanonical) {
  const KeyInventory inv = MakeInventory({Entry("既往史")});
  ClusterProposal p = Proposal({{"专科查体", 4}, {"专科情况", 1}});
  ReviewDecision d = Decide(p, ReviewAction::kRename);
  d.new_canonical = "专科检查";
  const KeyInventory next = ApplyReviewDecision(inv, p, d);
  EXPECT_EQ(next.Canonicalize("专科查体"), "专科检查");
  EXPECT_EQ(next.Canonicalize("专科情况"), "专科检查");
}

TEST(ReviewTest, SplitRegistersEachPart) {
  const KeyInventory inv = MakeInventory({Entry("z")});
  ClusterProposal p = Proposal({{"a", 4}, {"a2", 1}, {"b", 3}, {"b2", 2}});
  ReviewDecision d = Decide(p, ReviewAction::kSplit);
  d.parts = {{"a", "a2"}, {"b", "b2"}};
  const KeyInventory next = ApplyReviewDecision(inv, p, d);
  EXPECT_EQ(next.version(), inv.version() + 1);
  EXPECT_EQ(next.Canonicalize("a2"), "a");
  EXPECT_EQ(next.Canonicalize("b2"), "b");

  ClusterProposal q = Proposal({{"a", 4}, {"b", 3}});
  ReviewDecision bad = Decide(q, ReviewAction::kSplit);
  bad.parts = {{"a"}, {"c"}};
  EXPECT_THROW(ApplyReviewDecision(inv, q, bad), ValidationError);
  EXPECT_EQ(q.status, ProposalStatus::kPending);
}

TEST(ReviewTest, ConflictLeavesProposalPending) {
  const KeyInventory inv = MakeInventory({Entry("a", {"x"}), Entry("b")});
  ClusterProposal p = Proposal({{"x", 1}}, ProposalKind::kAttachAlias, "b");
  EXPECT_THROW(ApplyReviewDecision(inv, p, Decide(p, ReviewAction::kAccept)), ConflictError);
  EXPECT_EQ(p.status, ProposalStatus::kPending);
}

TEST(ReviewTest, DecisionJsonRoundTrip) {
  ReviewDecision d;
  d.proposal_id = "p1";
  d.action = ReviewAction::kSplit;
  d.parts = {{"a"}, {"b", "c"}};
  EXPECT_EQ(DecisionFromJson(DecisionToJson(d)), d);
  const ClusterProposal p = Proposal({{"x", 1}, {"y", 2}}, ProposalKind::kAttachAlias, "t");
  EXPECT_EQ(ProposalFromJson(ProposalToJson(p)), p);
}

TEST(ClusterStatsTest, SmallInventory) {
  const KeyInventory inv = MakeInventory({Entry("a"), Entry("b"), Entry("c", {"c2"})});
  const ClusterStats s = ComputeClusterStats(inv);
  EXPECT_DOUBLE_EQ(s.mean_cluster_size, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.compression, 0.25);
  EXPECT_EQ(s.singletons, 2);
  EXPECT_EQ(s.max_cluster_size, 2);
  EXPECT_EQ(s.size_histogram.at(1), 2);
  EXPECT_EQ(s.top_sizes, (std::vector<int64_t>{2, 1, 1}));
}

TEST(ClusterStatsTest, AllSingletons) {
  const ClusterStats s = ComputeClusterStats(MakeInventory({Entry("a"), Entry("b")}));
  EXPECT_DOUBLE_EQ(s.compression, 0.0);
  ASSERT_EQ(s.ccdf.size(), 2u);
  EXPECT_EQ(s.ccdf[1].first, 2);
  EXPECT_DOUBLE_EQ(s.ccdf[1].second, 0.0);
  EXPECT_EQ(s.max_cluster_size, 1);
}

}  // namespace
}  // namespace keycov
