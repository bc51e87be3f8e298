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

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>

#include "keycov/errors.h"
#include "keycov/text.h"

namespace keycov {

using json = nlohmann::json;

void SortKeyCounts(std::vector<KeyCount>& keys) {
  std::sort(keys.begin(), keys.end(), [](const KeyCount& a, const KeyCount& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.key < b.key;
  });
}

std::string SuggestCanonical(const std::vector<KeyCount>& members) {
  if (members.empty()) throw ValidationError("cannot choose a canonical for an empty group");
  const KeyCount* best = &members.front();
  size_t best_len = Utf8ToU32(best->key).size();
  for (const KeyCount& m : members) {
    const size_t len = Utf8ToU32(m.key).size();
    const bool better = m.frequency != best->frequency ? m.frequency > best->frequency
                        : len != best_len               ? len < best_len
                                                        : m.key < best->key;
    if (better) {
      best = &m;
      best_len = len;
    }
  }
  return best->key;
}

std::vector<std::vector<int>> AverageLinkage(const std::vector<std::vector<double>>& similarity,
                                             double threshold) {
  const int n = static_cast<int>(similarity.size());
  // Cluster i is identified by its smallest member; avg[i][j] (i < j) holds
  // the mean pairwise similarity between active clusters i and j.
  std::vector<std::vector<double>> avg = similarity;
  std::vector<std::vector<int>> members(n);
  std::vector<bool> active(n, true);
  for (int i = 0; i < n; ++i) members[i] = {i};

  for (;;) {
    double best = -std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (avg[i][j] > best) {
          best = avg[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0 || best < threshold) break;
    const double wi = static_cast<double>(members[bi].size());
    const double wj = static_cast<double>(members[bj].size());
    for (int k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double merged = (wi * avg[bi][k] + wj * avg[bj][k]) / (wi + wj);
      avg[bi][k] = avg[k][bi] = merged;
    }
    members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
    std::sort(members[bi].begin(), members[bi].end());
    members[bj].clear();
    active[bj] = false;
  }

  std::vector<std::vector<int>> out;
  for (int i = 0; i < n; ++i) {
    if (active[i]) out.push_back(members[i]);
  }
  return out;
}

int64_t ClusterProposal::total_frequency() const {
  int64_t total = 0;
  for (const auto& m : members) total += m.frequency;
  return total;
}

std::string ProposalContentId(const ClusterProposal& p) {
  std::string material(ProposalKindName(p.kind));
  material.push_back('\x1f');
  if (p.target_canonical) material += *p.target_canonical;
  for (const auto& m : p.members) {
    material.push_back('\x1f');
    material += m.key;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "p%016llx",
                static_cast<unsigned long long>(Fnv1a64(material)));
  return buf;
}

namespace {

std::vector<std::vector<double>> SimilarityMatrix(const std::vector<EmbeddingVector>& vecs) {
  const size_t n = vecs.size();
  std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      sim[i][j] = sim[j][i] = Dot(vecs[i], vecs[j]);
    }
  }
  return sim;
}

ClusterProposal MakeProposal(ProposalKind kind, std::vector<KeyCount> members,
                             const std::vector<EmbeddingVector>& vecs) {
  ClusterProposal p;
  p.kind = kind;
  p.members = std::move(members);
  p.suggested_canonical = SuggestCanonical(p.members);
  p.pairwise_similarities = SimilarityMatrix(vecs);
  return p;
}

std::vector<ClusterProposal> ClusterSorted(const std::vector<KeyCount>& keys,
                                           const std::vector<EmbeddingVector>& vecs,
                                           double threshold) {
  const auto groups = AverageLinkage(SimilarityMatrix(vecs), threshold);
  std::vector<ClusterProposal> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    std::vector<KeyCount> members;
    std::vector<EmbeddingVector> member_vecs;
    for (int idx : g) {
      members.push_back(keys[idx]);
      member_vecs.push_back(vecs[idx]);
    }
    ClusterProposal p = MakeProposal(ProposalKind::kNewCanonical, std::move(members), member_vecs);
    p.proposal_id = ProposalContentId(p);
    out.push_back(std::move(p));
  }
  return out;
}

void RequireDistinct(const std::vector<KeyCount>& sorted) {
  std::set<std::string> seen;
  for (const auto& k : sorted) {
    if (k.key.empty()) throw ValidationError("cannot cluster an empty key");
    if (!seen.insert(k.key).second) {
      throw ValidationError("duplicate key '" + k.key + "' passed to clustering");
    }
  }
}

}  // namespace

std::vector<ClusterProposal> ClusterKeys(std::vector<KeyCount> keys,
                                         const EmbeddingProvider& provider, double threshold) {
  SortKeyCounts(keys);
  RequireDistinct(keys);
  std::vector<EmbeddingVector> vecs;
  vecs.reserve(keys.size());
  for (const auto& k : keys) vecs.push_back(provider.Embed(k.key));
  return ClusterSorted(keys, vecs, threshold);
}

EmbeddingVector CanonicalCentroid(const CanonicalKeyEntry& entry,
                                  const EmbeddingProvider& provider) {
  EmbeddingVector c(provider.dim(), 0.0);
  for (const auto& form : KeyInventory::SurfaceForms(entry)) {
    const EmbeddingVector v = provider.Embed(form);
    for (size_t i = 0; i < c.size() && i < v.size(); ++i) c[i] += v[i];
  }
  NormalizeL2(c);
  return c;
}

std::vector<ClusterProposal> ProposeClusters(std::vector<KeyCount> novel, const KeyInventory& inv,
                                             const EmbeddingProvider& provider,
                                             double threshold) {
  SortKeyCounts(novel);
  RequireDistinct(novel);
  if (novel.empty()) return {};

  std::vector<std::pair<std::string, EmbeddingVector>> centroids;
  centroids.reserve(inv.size());
  for (const auto& e : inv.entries()) centroids.emplace_back(e.canonical, CanonicalCentroid(e, provider));

  struct Attachment {
    std::vector<KeyCount> members;
    std::vector<EmbeddingVector> vecs;
    std::vector<double> scores;
  };
  std::map<std::string, Attachment> attachments;
  std::vector<KeyCount> rest;
  std::vector<EmbeddingVector> rest_vecs;

  for (const auto& k : novel) {
    EmbeddingVector v = provider.Embed(k.key);
    const std::string* best_target = nullptr;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [canonical, centroid] : centroids) {
      const double s = Dot(v, centroid);
      if (s > best || (s == best && best_target != nullptr && canonical < *best_target)) {
        best = s;
        best_target = &canonical;
      }
    }
    if (best_target != nullptr && best >= threshold) {
      auto& a = attachments[*best_target];
      a.members.push_back(k);
      a.vecs.push_back(std::move(v));
      a.scores.push_back(best);
    } else {
      rest.push_back(k);
      rest_vecs.push_back(std::move(v));
    }
  }

  std::vector<ClusterProposal> out;
  for (auto& [target, a] : attachments) {
    ClusterProposal p = MakeProposal(ProposalKind::kAttachAlias, a.members, a.vecs);
    p.target_canonical = target;
    p.target_similarities = a.scores;
    p.proposal_id = ProposalContentId(p);
    out.push_back(std::move(p));
  }
  auto fresh = ClusterSorted(rest, rest_vecs, threshold);
  out.insert(out.end(), std::make_move_iterator(fresh.begin()),
             std::make_move_iterator(fresh.end()));
  return out;
}

// ---------------------------------------------------------------------------

void ReviewDecision::Validate() const {
  if (proposal_id.empty()) throw ValidationError("decision lacks a proposal_id");
  switch (action) {
    case ReviewAction::kAccept:
    case ReviewAction::kReject:
      break;
    case ReviewAction::kRename:
      if (!new_canonical || new_canonical->empty()) {
        throw ValidationError("rename needs a non-empty new_canonical");
      }
      break;
    case ReviewAction::kMerge:
      if (!target_canonical || target_canonical->empty()) {
        throw ValidationError("merge needs a target_canonical");
      }
      break;
    case ReviewAction::kSplit:
      if (parts.size() < 2) throw ValidationError("split needs at least two parts");
      for (const auto& part : parts) {
        if (part.empty()) throw ValidationError("split parts must be non-empty");
      }
      break;
  }
}

namespace {

int64_t MemberFrequency(const ClusterProposal& p, const std::string& key) {
  for (const auto& m : p.members) {
    if (m.key == key) return m.frequency;
  }
  return 0;
}

CanonicalKeyEntry EntryFor(const std::string& canonical, const std::vector<KeyCount>& members) {
  CanonicalKeyEntry e;
  e.canonical = canonical;
  for (const auto& m : members) {
    e.frequency += m.frequency;
    if (m.key == canonical) continue;
    e.aliases.insert(m.key);
    if (m.frequency != 0) e.alias_frequency[m.key] = m.frequency;
  }
  return e;
}

}  // namespace

KeyInventory ApplyReviewDecision(const KeyInventory& inv, ClusterProposal& proposal,
                                 const ReviewDecision& decision) {
  decision.Validate();
  if (decision.proposal_id != proposal.proposal_id) {
    throw ValidationError("decision for '" + decision.proposal_id + "' applied to proposal '" +
                          proposal.proposal_id + "'");
  }
  if (proposal.status != ProposalStatus::kPending) {
    throw StateError("proposal " + proposal.proposal_id + " is already " +
                     std::string(ProposalStatusName(proposal.status)));
  }

  InventoryEdit edit(inv);
  ProposalStatus next = ProposalStatus::kAccepted;
  switch (decision.action) {
    case ReviewAction::kReject:
      next = ProposalStatus::kRejected;
      break;
    case ReviewAction::kAccept:
      if (proposal.kind == ProposalKind::kAttachAlias) {
        for (const auto& m : proposal.members) {
          edit.AddAlias(*proposal.target_canonical, m.key, m.frequency);
        }
      } else {
        edit.AddCanonical(EntryFor(proposal.suggested_canonical, proposal.members));
      }
      break;
    case ReviewAction::kRename:
      edit.AddCanonical(EntryFor(*decision.new_canonical, proposal.members));
      next = ProposalStatus::kEdited;
      break;
    case ReviewAction::kMerge:
      for (const auto& m : proposal.members) {
        if (m.key == *decision.target_canonical) continue;
        edit.AddAlias(*decision.target_canonical, m.key, m.frequency);
      }
      next = ProposalStatus::kEdited;
      break;
    case ReviewAction::kSplit: {
      std::multiset<std::string> given;
      for (const auto& part : decision.parts) given.insert(part.begin(), part.end());
      std::multiset<std::string> expected;
      for (const auto& m : proposal.members) expected.insert(m.key);
      if (given != expected) {
        throw ValidationError("split parts must partition the members of " +
                              proposal.proposal_id);
      }
      for (const auto& part : decision.parts) {
        std::vector<KeyCount> members;
        for (const auto& key : part) members.push_back({key, MemberFrequency(proposal, key)});
        edit.AddCanonical(EntryFor(SuggestCanonical(members), members));
      }
      next = ProposalStatus::kEdited;
      break;
    }
  }
  KeyInventory out = edit.Commit();
  proposal.status = next;
  return out;
}

// ---------------------------------------------------------------------------

ClusterStats ComputeClusterStats(const KeyInventory& inv, int top_k) {
  ClusterStats s;
  if (inv.empty()) return s;
  std::vector<int64_t> sizes;
  sizes.reserve(inv.size());
  for (const auto& e : inv.entries()) sizes.push_back(e.cluster_size());
  s.num_canonicals = static_cast<int64_t>(sizes.size());
  for (int64_t z : sizes) {
    s.num_surface_forms += z;
    ++s.size_histogram[z];
    if (z == 1) ++s.singletons;
  }
  s.max_cluster_size = *std::max_element(sizes.begin(), sizes.end());
  s.compression = 1.0 - static_cast<double>(s.num_canonicals) /
                            static_cast<double>(s.num_surface_forms);
  s.mean_cluster_size =
      static_cast<double>(s.num_surface_forms) / static_cast<double>(s.num_canonicals);
  int64_t at_least = s.num_canonicals;
  for (int64_t z = 1; z <= s.max_cluster_size + 1; ++z) {
    s.ccdf.emplace_back(z, static_cast<double>(at_least) / static_cast<double>(s.num_canonicals));
    auto it = s.size_histogram.find(z);
    if (it != s.size_histogram.end()) at_least -= it->second;
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  if (static_cast<int>(sizes.size()) > top_k) sizes.resize(top_k);
  s.top_sizes = std::move(sizes);
  return s;
}

// ---------------------------------------------------------------------------

std::string_view ProposalKindName(ProposalKind kind) {
  return kind == ProposalKind::kAttachAlias ? "attach_alias" : "new_canonical";
}

std::string_view ProposalStatusName(ProposalStatus status) {
  switch (status) {
    case ProposalStatus::kPending:
      return "pending";
    case ProposalStatus::kAccepted:
      return "accepted";
    case ProposalStatus::kRejected:
      return "rejected";
    case ProposalStatus::kEdited:
      return "edited";
  }
  return "pending";
}

std::optional<ProposalStatus> ParseProposalStatus(std::string_view name) {
  if (name == "pending") return ProposalStatus::kPending;
  if (name == "accepted") return ProposalStatus::kAccepted;
  if (name == "rejected") return ProposalStatus::kRejected;
  if (name == "edited") return ProposalStatus::kEdited;
  return std::nullopt;
}

std::string_view ReviewActionName(ReviewAction action) {
  switch (action) {
    case ReviewAction::kAccept:
      return "accept";
    case ReviewAction::kReject:
      return "reject";
    case ReviewAction::kRename:
      return "rename";
    case ReviewAction::kSplit:
      return "split";
    case ReviewAction::kMerge:
      return "merge";
  }
  return "accept";
}

std::optional<ReviewAction> ParseReviewAction(std::string_view name) {
  if (name == "accept") return ReviewAction::kAccept;
  if (name == "reject") return ReviewAction::kReject;
  if (name == "rename") return ReviewAction::kRename;
  if (name == "split") return ReviewAction::kSplit;
  if (name == "merge") return ReviewAction::kMerge;
  return std::nullopt;
}

json ProposalToJson(const ClusterProposal& p) {
  json members = json::array();
  for (const auto& m : p.members) members.push_back({{"key", m.key}, {"frequency", m.frequency}});
  json j;
  j["proposal_id"] = p.proposal_id;
  j["kind"] = ProposalKindName(p.kind);
  j["target_canonical"] = p.target_canonical ? json(*p.target_canonical) : json(nullptr);
  j["members"] = std::move(members);
  j["suggested_canonical"] = p.suggested_canonical;
  j["pairwise_similarities"] = p.pairwise_similarities;
  j["target_similarities"] = p.target_similarities;
  j["status"] = ProposalStatusName(p.status);
  return j;
}

ClusterProposal ProposalFromJson(const json& j) {
  try {
    ClusterProposal p;
    p.proposal_id = j.at("proposal_id").get<std::string>();
    p.kind = j.value("kind", std::string("new_canonical")) == "attach_alias"
                 ? ProposalKind::kAttachAlias
                 : ProposalKind::kNewCanonical;
    if (j.contains("target_canonical") && !j.at("target_canonical").is_null()) {
      p.target_canonical = j.at("target_canonical").get<std::string>();
    }
    for (const auto& m : j.at("members")) {
      p.members.push_back({m.at("key").get<std::string>(), m.value("frequency", int64_t{0})});
    }
    p.suggested_canonical = j.at("suggested_canonical").get<std::string>();
    p.pairwise_similarities =
        j.value("pairwise_similarities", std::vector<std::vector<double>>{});
    p.target_similarities = j.value("target_similarities", std::vector<double>{});
    const auto status = ParseProposalStatus(j.value("status", std::string("pending")));
    if (!status) throw ParseError("unknown proposal status");
    p.status = *status;
    if (p.members.empty()) throw ValidationError("proposal has no members");
    if (p.kind == ProposalKind::kAttachAlias && !p.target_canonical) {
      throw ValidationError("attach proposal lacks target_canonical");
    }
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("proposal: ") + e.what());
  }
}

json DecisionToJson(const ReviewDecision& d) {
  json j;
  j["proposal_id"] = d.proposal_id;
  j["action"] = ReviewActionName(d.action);
  if (d.new_canonical) j["new_canonical"] = *d.new_canonical;
  if (d.target_canonical) j["target_canonical"] = *d.target_canonical;
  if (!d.parts.empty()) j["parts"] = d.parts;
  j["automatic"] = d.automatic;
  return j;
}

ReviewDecision DecisionFromJson(const json& j) {
  try {
    ReviewDecision d;
    d.proposal_id = j.at("proposal_id").get<std::string>();
    const auto action = ParseReviewAction(j.at("action").get<std::string>());
    if (!action) throw ValidationError("unknown review action");
    d.action = *action;
    if (j.contains("new_canonical")) d.new_canonical = j.at("new_canonical").get<std::string>();
    if (j.contains("target_canonical")) {
      d.target_canonical = j.at("target_canonical").get<std::string>();
    }
    if (j.contains("parts")) d.parts = j.at("parts").get<std::vector<std::vector<std::string>>>();
    d.automatic = j.value("automatic", false);
    d.Validate();
    return d;
  } catch (const json::exception& e) {
    throw ParseError(std::string("decision: ") + e.what());
  }
}

json ClusterStatsToJson(const ClusterStats& s) {
  json hist = json::object();
  for (const auto& [size, count] : s.size_histogram) hist[std::to_string(size)] = count;
  json ccdf = json::array();
  for (const auto& [size, frac] : s.ccdf) ccdf.push_back({size, frac});
  return json{{"num_canonicals", s.num_canonicals},
              {"num_surface_forms", s.num_surface_forms},
              {"compression", s.compression},
              {"mean_cluster_size", s.mean_cluster_size},
              {"max_cluster_size", s.max_cluster_size},
              {"singletons", s.singletons},
              {"size_histogram", hist},
              {"ccdf", ccdf},
              {"top_sizes", s.top_sizes}};
}

}  // namespace keycov
