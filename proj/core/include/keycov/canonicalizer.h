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

// Inventory expansion: cluster novel surface keys, turn clusters into review
// proposals and apply reviewer decisions to the inventory.

#ifndef KEYCOV_CANONICALIZER_H_
#define KEYCOV_CANONICALIZER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "keycov/embedding.h"
#include "keycov/inventory.h"

namespace keycov {

inline constexpr double kDefaultClusterThreshold = 0.82;

struct KeyCount {
  std::string key;
  int64_t frequency = 0;
  friend bool operator==(const KeyCount&, const KeyCount&) = default;
};

// Processing order for clustering: frequency descending, then key.
void SortKeyCounts(std::vector<KeyCount>& keys);

// Representative of a group: most frequent, then shortest (in characters),
// then lexicographically least.
std::string SuggestCanonical(const std::vector<KeyCount>& members);

// Average-linkage agglomerative clustering over a symmetric similarity
// matrix. Repeatedly merges the pair of clusters with the highest mean
// pairwise similarity while that mean is >= threshold. Ties go to the pair
// with the smallest (first, second) cluster ids, where a cluster's id is its
// smallest member index. Returns member index lists, each sorted, ordered by
// smallest member.
std::vector<std::vector<int>> AverageLinkage(const std::vector<std::vector<double>>& similarity,
                                             double threshold);

enum class ProposalKind { kNewCanonical, kAttachAlias };
enum class ProposalStatus { kPending, kAccepted, kRejected, kEdited };

struct ClusterProposal {
  std::string proposal_id;
  ProposalKind kind = ProposalKind::kNewCanonical;
  // Existing canonical the members would join (kAttachAlias only).
  std::optional<std::string> target_canonical;
  std::vector<KeyCount> members;
  std::string suggested_canonical;
  std::vector<std::vector<double>> pairwise_similarities;
  // Cosine of each member to the target centroid (kAttachAlias only).
  std::vector<double> target_similarities;
  ProposalStatus status = ProposalStatus::kPending;

  int64_t total_frequency() const;
  friend bool operator==(const ClusterProposal&, const ClusterProposal&) = default;
};

// Deterministic id derived from kind, target and member keys.
std::string ProposalContentId(const ClusterProposal& proposal);

// Clusters keys (normalized, deduplicated; duplicates throw
// ValidationError) into new-canonical proposals, all pending.
std::vector<ClusterProposal> ClusterKeys(std::vector<KeyCount> keys,
                                         const EmbeddingProvider& provider,
                                         double threshold = kDefaultClusterThreshold);

// Unit-renormalized mean embedding of {canonical} + aliases.
EmbeddingVector CanonicalCentroid(const CanonicalKeyEntry& entry,
                                  const EmbeddingProvider& provider);

// Novel keys whose best centroid cosine is >= threshold become alias
// attachment proposals (one per target canonical); the rest are clustered
// among themselves into new-canonical proposals. Attachments come first,
// ordered by target; all proposals are pending.
std::vector<ClusterProposal> ProposeClusters(std::vector<KeyCount> novel, const KeyInventory& inv,
                                             const EmbeddingProvider& provider,
                                             double threshold = kDefaultClusterThreshold);

enum class ReviewAction { kAccept, kReject, kRename, kSplit, kMerge };

struct ReviewDecision {
  std::string proposal_id;
  ReviewAction action = ReviewAction::kAccept;
  std::optional<std::string> new_canonical;      // kRename
  std::optional<std::string> target_canonical;   // kMerge
  std::vector<std::vector<std::string>> parts;   // kSplit
  bool automatic = false;

  // Throws ValidationError if the payload does not match the action.
  void Validate() const;
  friend bool operator==(const ReviewDecision&, const ReviewDecision&) = default;
};

// Applies `decision` to `proposal` and returns the resulting inventory. The
// version advances by one iff the inventory changed. accept registers the
// proposal (new canonical plus aliases, or aliases of the target); rename
// does the same under a reviewer-chosen canonical; merge attaches every
// member to an existing canonical; split registers each part as its own
// canonical; reject changes nothing. Throws StateError if the proposal is
// not pending, ValidationError for a payload that does not fit the
// proposal, and ConflictError/NotFoundError from the registrations. On
// error neither the proposal nor the inventory is modified.
KeyInventory ApplyReviewDecision(const KeyInventory& inv, ClusterProposal& proposal,
                                 const ReviewDecision& decision);

struct ClusterStats {
  int64_t num_canonicals = 0;
  int64_t num_surface_forms = 0;
  double compression = 0.0;  // 1 - canonicals / surface forms
  double mean_cluster_size = 0.0;
  int64_t max_cluster_size = 0;
  int64_t singletons = 0;
  std::map<int64_t, int64_t> size_histogram;
  // (s, fraction of clusters with size >= s) for s = 1..max_cluster_size + 1;
  // the last point is always 0.
  std::vector<std::pair<int64_t, double>> ccdf;
  std::vector<int64_t> top_sizes;  // largest first, at most top_k
};

ClusterStats ComputeClusterStats(const KeyInventory& inv, int top_k = 20);

std::string_view ProposalKindName(ProposalKind kind);
std::string_view ProposalStatusName(ProposalStatus status);
std::optional<ProposalStatus> ParseProposalStatus(std::string_view name);
std::string_view ReviewActionName(ReviewAction action);
std::optional<ReviewAction> ParseReviewAction(std::string_view name);

nlohmann::json ProposalToJson(const ClusterProposal& p);
ClusterProposal ProposalFromJson(const nlohmann::json& j);
nlohmann::json DecisionToJson(const ReviewDecision& d);
ReviewDecision DecisionFromJson(const nlohmann::json& j);
nlohmann::json ClusterStatsToJson(const ClusterStats& s);

}  // namespace keycov

#endif  // KEYCOV_CANONICALIZER_H_
