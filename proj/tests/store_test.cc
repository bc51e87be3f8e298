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

#include "keycov/store.h"

#include <fstream>

#include <gtest/gtest.h>

#include "keycov/errors.h"
#include "test_util.h"

namespace keycov {
namespace {

using testing::Entry;
using testing::MakeInventory;
using testing::TempDir;

QueueEntry AttachProposal(const std::string& target, const std::string& alias) {
  QueueEntry e;
  e.proposal.kind = ProposalKind::kAttachAlias;
  e.proposal.target_canonical = target;
  e.proposal.members = {{alias, 3}};
  e.proposal.suggested_canonical = target;
  e.proposal.pairwise_similarities = {{1.0}};
  e.proposal.target_similarities = {0.9};
  e.proposal.proposal_id = ProposalContentId(e.proposal);
  e.snippets[alias] = {"... " + alias + "：1 ..."};
  return e;
}

QueueEntry NewCanonicalProposal(const std::vector<std::string>& keys) {
  QueueEntry e;
  e.proposal.kind = ProposalKind::kNewCanonical;
  for (const auto& k : keys) e.proposal.members.push_back({k, 1});
  e.proposal.suggested_canonical = SuggestCanonical(e.proposal.members);
  e.proposal.pairwise_similarities.assign(keys.size(), std::vector<double>(keys.size(), 1.0));
  e.proposal.proposal_id = ProposalContentId(e.proposal);
  return e;
}

ReviewDecision Accept(const std::string& id) {
  ReviewDecision d;
  d.proposal_id = id;
  d.action = ReviewAction::kAccept;
  return d;
}

TEST(InventoryStoreTest, InMemoryDecisionAdvancesVersion) {
  InventoryStore store(MakeInventory({Entry("血压")}));
  EXPECT_FALSE(store.persistent());
  const auto ids = store.Enqueue({AttachProposal("血压", "BP")});
  ASSERT_EQ(ids.size(), 1u);
  const DecisionOutcome out = store.ApplyDecision(Accept(ids[0]));
  EXPECT_TRUE(out.changed);
  EXPECT_EQ(out.version_before, 1);
  EXPECT_EQ(out.version_after, 2);
  EXPECT_EQ(out.proposal.status, ProposalStatus::kAccepted);
  EXPECT_EQ(store.Current()->Canonicalize("BP"), "血压");
  EXPECT_EQ(store.Versions(), (std::vector<int64_t>{1, 2}));
  EXPECT_EQ(store.Version(1)->Canonicalize("BP"), std::nullopt);
  EXPECT_TRUE(store.SnapshotPath(2).empty());
}

TEST(InventoryStoreTest, RejectKeepsVersion) {
  InventoryStore store(MakeInventory({Entry("血压")}));
  const auto ids = store.Enqueue({AttachProposal("血压", "BP")});
  ReviewDecision d = Accept(ids[0]);
  d.action = ReviewAction::kReject;
  const DecisionOutcome out = store.ApplyDecision(d);
  EXPECT_FALSE(out.changed);
  EXPECT_EQ(store.Current()->version(), 1);
  EXPECT_EQ(store.Proposal(ids[0])->proposal.status, ProposalStatus::kRejected);
  EXPECT_EQ(store.DecisionLog().size(), 1u);
}

TEST(InventoryStoreTest, DecisionErrors) {
  InventoryStore store(MakeInventory({Entry("血压"), Entry("脉搏")}));
  EXPECT_THROW(store.ApplyDecision(Accept("missing")), NotFoundError);
  const auto ids = store.Enqueue({AttachProposal("血压", "BP")});
  store.ApplyDecision(Accept(ids[0]));
  EXPECT_THROW(store.ApplyDecision(Accept(ids[0])), StateError);

  // The alias is now taken, so a second attachment elsewhere conflicts and
  // leaves everything untouched.
  const auto ids2 = store.Enqueue({AttachProposal("脉搏", "BP")});
  const int64_t version = store.Current()->version();
  EXPECT_THROW(store.ApplyDecision(Accept(ids2[0])), ConflictError);
  EXPECT_EQ(store.Current()->version(), version);
  EXPECT_EQ(store.Proposal(ids2[0])->proposal.status, ProposalStatus::kPending);
}

TEST(InventoryStoreTest, DuplicateIdsGetSuffixes) {
  InventoryStore store(MakeInventory({Entry("血压")}));
  const QueueEntry e = AttachProposal("血压", "BP");
  const auto a = store.Enqueue({e, e});
  const auto b = store.Enqueue({e});
  EXPECT_EQ(a[0], e.proposal.proposal_id);
  EXPECT_EQ(a[1], e.proposal.proposal_id + "-2");
  EXPECT_EQ(b[0], e.proposal.proposal_id + "-3");
  EXPECT_EQ(store.Queue().size(), 3u);
  EXPECT_EQ(store.Queue(ProposalStatus::kPending).size(), 3u);
  EXPECT_EQ(store.Queue(ProposalStatus::kAccepted).size(), 0u);
}

TEST(InventoryStoreTest, AdministrativeAlias) {
  InventoryStore store(MakeInventory({Entry("血压")}));
  const DecisionOutcome out = store.RegisterAlias("血压", "BP");
  EXPECT_TRUE(out.changed);
  EXPECT_EQ(store.Current()->version(), 2);
  EXPECT_THROW(store.RegisterAlias("不存在", "x"), NotFoundError);
  EXPECT_EQ(store.DecisionLog().size(), 1u);
}

TEST(InventoryStoreTest, PersistsAndReplays) {
  TempDir dir;
  const auto root = dir / "store";
  std::vector<std::string> ids;
  {
    auto store = InventoryStore::Open(root, MakeInventory({Entry("血压"), Entry("脉搏")}));
    EXPECT_TRUE(store->persistent());
    ids = store->Enqueue({AttachProposal("血压", "BP"), NewCanonicalProposal({"体温", "体温值"}),
                          AttachProposal("脉搏", "HR")});
    store->ApplyDecision(Accept(ids[0]));
    store->ApplyDecision(Accept(ids[1]));
    ReviewDecision reject = Accept(ids[2]);
    reject.action = ReviewAction::kReject;
    store->ApplyDecision(reject);
    store->AppendBatchRecord({{"batch_id", "b1"}});
    EXPECT_TRUE(std::filesystem::exists(store->SnapshotPath(3)));
  }
  auto reopened = InventoryStore::Open(root, std::nullopt);
  EXPECT_EQ(reopened->Current()->version(), 3);
  EXPECT_EQ(reopened->Versions(), (std::vector<int64_t>{1, 2, 3}));
  EXPECT_EQ(reopened->Current()->Canonicalize("体温值"), "体温");
  EXPECT_EQ(reopened->Proposal(ids[0])->proposal.status, ProposalStatus::kAccepted);
  EXPECT_EQ(reopened->Proposal(ids[2])->proposal.status, ProposalStatus::kRejected);
  EXPECT_EQ(reopened->DecisionLog().size(), 3u);
  ASSERT_EQ(reopened->BatchRecords().size(), 1u);
  EXPECT_EQ(reopened->BatchRecords()[0]["batch_id"], "b1");
  EXPECT_EQ(reopened->Proposal(ids[0])->snippets.at("BP").size(), 1u);
}

TEST(InventoryStoreTest, OpenErrors) {
  TempDir dir;
  EXPECT_THROW(InventoryStore::Open(dir / "empty", std::nullopt), Error);
  const auto root = dir / "bad";
  InventoryStore::Open(root, MakeInventory({Entry("a")}));
  for (const auto& f : std::filesystem::directory_iterator(root / "inventory")) {
    if (f.path().extension() == ".json") std::ofstream(f.path()) << "{broken";
  }
  EXPECT_THROW(InventoryStore::Open(root, std::nullopt), ParseError);
}

}  // namespace
}  // namespace keycov
