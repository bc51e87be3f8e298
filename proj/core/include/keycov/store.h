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

// Single-writer persistent store: versioned inventory snapshots, the review
// queue, the decision log and batch records.
//
// Directory layout:
//   inventory/v000001.json ...  one immutable snapshot per version
//   queue.jsonl                 proposals in enqueue order
//   decisions.jsonl             applied decisions and administrative edits
//   batches.jsonl               batch iteration records
// Files are only ever appended to or created; snapshots are written to a
// temporary name and renamed into place.

#ifndef KEYCOV_STORE_H_
#define KEYCOV_STORE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "keycov/canonicalizer.h"
#include "keycov/inventory.h"

namespace keycov {

struct QueueEntry {
  ClusterProposal proposal;
  // Example contexts for each member key, for reviewers.
  std::map<std::string, std::vector<std::string>> snippets;
};

struct DecisionOutcome {
  ClusterProposal proposal;  // with updated status
  int64_t version_before = 0;
  int64_t version_after = 0;
  bool changed = false;
};

class InventoryStore {
 public:
  // In-memory store; nothing is persisted.
  explicit InventoryStore(KeyInventory initial);

  // Opens dir, creating it if needed. An empty directory is seeded with
  // initial (which must then be given); an existing one is loaded and
  // initial is ignored. Throws IoError / ParseError.
  static std::unique_ptr<InventoryStore> Open(const std::filesystem::path& dir,
                                              const std::optional<KeyInventory>& initial);

  bool persistent() const { return !dir_.empty(); }
  const std::filesystem::path& dir() const { return dir_; }

  std::shared_ptr<const KeyInventory> Current() const;
  std::optional<KeyInventory> Version(int64_t version) const;
  std::vector<int64_t> Versions() const;
  // Path of the snapshot file for version, empty for in-memory stores.
  std::filesystem::path SnapshotPath(int64_t version) const;

  // Administrative alias registration outside the review flow; logged.
  DecisionOutcome RegisterAlias(const std::string& canonical, const std::string& alias);

  // Appends proposals, making ids unique by suffixing "-2", "-3", ... when an
  // id is already queued. Returns the stored ids in order.
  std::vector<std::string> Enqueue(std::vector<QueueEntry> entries);
  std::vector<QueueEntry> Queue(std::optional<ProposalStatus> status = std::nullopt) const;
  std::optional<QueueEntry> Proposal(const std::string& proposal_id) const;

  // Applies a decision to a queued proposal. Throws NotFoundError for an
  // unknown proposal, StateError if it is not pending, ConflictError /
  // ValidationError from the registration. Nothing changes on error.
  DecisionOutcome ApplyDecision(const ReviewDecision& decision);

  std::vector<nlohmann::json> DecisionLog() const;

  void AppendBatchRecord(const nlohmann::json& record);
  std::vector<nlohmann::json> BatchRecords() const;

  // Serializes batch iterations (see RunBatchIteration).
  std::mutex& batch_mutex() { return batch_mu_; }

 private:
  InventoryStore() = default;
  void CommitLocked(KeyInventory next);
  void AppendLine(const std::filesystem::path& file, const nlohmann::json& record) const;
  void LoadLocked();

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::mutex batch_mu_;
  std::map<int64_t, std::shared_ptr<const KeyInventory>> versions_;
  std::shared_ptr<const KeyInventory> current_;
  std::vector<QueueEntry> queue_;
  std::map<std::string, size_t> queue_index_;
  std::vector<nlohmann::json> decisions_;
  std::vector<nlohmann::json> batches_;
};

}  // namespace keycov

#endif  // KEYCOV_STORE_H_
