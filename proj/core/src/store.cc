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

#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "keycov/errors.h"

namespace keycov {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string SnapshotName(int64_t version) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "v%06lld.json", static_cast<long long>(version));
  return buf;
}

std::vector<json> ReadJsonLines(const fs::path& file) {
  std::vector<json> out;
  if (!fs::exists(file)) return out;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(file.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

json QueueEntryToJson(const QueueEntry& e) {
  json snippets = json::object();
  for (const auto& [key, list] : e.snippets) snippets[key] = list;
  return {{"proposal", ProposalToJson(e.proposal)}, {"snippets", snippets}};
}

QueueEntry QueueEntryFromJson(const json& j) {
  QueueEntry e;
  e.proposal = ProposalFromJson(j.at("proposal"));
  if (j.contains("snippets")) {
    e.snippets = j.at("snippets").get<std::map<std::string, std::vector<std::string>>>();
  }
  return e;
}

}  // namespace

InventoryStore::InventoryStore(KeyInventory initial) {
  current_ = std::make_shared<const KeyInventory>(std::move(initial));
  versions_[current_->version()] = current_;
}

std::unique_ptr<InventoryStore> InventoryStore::Open(const fs::path& dir,
                                                     const std::optional<KeyInventory>& initial) {
  std::unique_ptr<InventoryStore> store(new InventoryStore());
  store->dir_ = dir;
  std::error_code ec;
  fs::create_directories(dir / "inventory", ec);
  if (ec) throw IoError("cannot create store directory " + dir.string() + ": " + ec.message());
  std::lock_guard<std::mutex> lock(store->mu_);
  store->LoadLocked();
  if (!store->current_) {
    if (!initial) throw IoError("store " + dir.string() + " is empty and no inventory was given");
    if (initial->restriction()) throw StateError("cannot seed a store with a restricted view");
    store->CommitLocked(*initial);
  }
  return store;
}

void InventoryStore::LoadLocked() {
  static const std::regex kSnapshot(R"(v(\d{6,})\.json)");
  for (const auto& item : fs::directory_iterator(dir_ / "inventory")) {
    std::smatch m;
    const std::string name = item.path().filename().string();
    if (!std::regex_match(name, m, kSnapshot)) continue;
    auto inv = std::make_shared<const KeyInventory>(LoadInventory(item.path()));
    if (inv->version() != std::stoll(m[1].str())) {
      throw ParseError("snapshot " + name + " holds version " + std::to_string(inv->version()));
    }
    versions_[inv->version()] = inv;
  }
  if (!versions_.empty()) current_ = versions_.rbegin()->second;
  for (const json& j : ReadJsonLines(dir_ / "queue.jsonl")) {
    QueueEntry e = QueueEntryFromJson(j);
    queue_index_[e.proposal.proposal_id] = queue_.size();
    queue_.push_back(std::move(e));
  }
  for (const json& j : ReadJsonLines(dir_ / "decisions.jsonl")) {
    if (j.value("type", "") == "review") {
      const std::string id = j.at("decision").at("proposal_id").get<std::string>();
      auto it = queue_index_.find(id);
      const auto status = ParseProposalStatus(j.at("status").get<std::string>());
      if (it != queue_index_.end() && status) queue_[it->second].proposal.status = *status;
    }
    decisions_.push_back(j);
  }
  batches_ = ReadJsonLines(dir_ / "batches.jsonl");
}

void InventoryStore::AppendLine(const fs::path& file, const json& record) const {
  if (dir_.empty()) return;
  std::ofstream out(file, std::ios::binary | std::ios::app);
  out << record.dump() << '\n';
  out.flush();
  if (!out) throw IoError("cannot append to " + file.string());
}

void InventoryStore::CommitLocked(KeyInventory next) {
  if (!dir_.empty()) {
    const fs::path final_path = dir_ / "inventory" / SnapshotName(next.version());
    const fs::path tmp_path = final_path.string() + ".tmp";
    {
      std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
      out << InventoryToJson(next).dump(2) << '\n';
      out.flush();
      if (!out) throw IoError("cannot write " + tmp_path.string());
    }
    std::error_code ec;
    fs::rename(tmp_path, final_path, ec);
    if (ec) throw IoError("cannot install snapshot " + final_path.string() + ": " + ec.message());
  }
  auto snapshot = std::make_shared<const KeyInventory>(std::move(next));
  versions_[snapshot->version()] = snapshot;
  current_ = std::move(snapshot);
}

std::shared_ptr<const KeyInventory> InventoryStore::Current() const {
  std::lock_guard<std::mutex> lock(mu_);
  return current_;
}

std::optional<KeyInventory> InventoryStore::Version(int64_t version) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = versions_.find(version);
  if (it == versions_.end()) return std::nullopt;
  return *it->second;
}

std::vector<int64_t> InventoryStore::Versions() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<int64_t> out;
  for (const auto& [v, inv] : versions_) out.push_back(v);
  return out;
}

fs::path InventoryStore::SnapshotPath(int64_t version) const {
  if (dir_.empty()) return {};
  return dir_ / "inventory" / SnapshotName(version);
}

DecisionOutcome InventoryStore::RegisterAlias(const std::string& canonical,
                                              const std::string& alias) {
  std::lock_guard<std::mutex> lock(mu_);
  DecisionOutcome out;
  out.version_before = current_->version();
  KeyInventory next = keycov::RegisterAlias(*current_, canonical, alias);
  out.changed = next.version() != out.version_before;
  out.version_after = next.version();
  if (out.changed) {
    const json record = {{"type", "register_alias"},
                         {"canonical", canonical},
                         {"alias", alias},
                         {"version_before", out.version_before},
                         {"version_after", out.version_after}};
    CommitLocked(std::move(next));
    AppendLine(dir_ / "decisions.jsonl", record);
    decisions_.push_back(record);
  }
  return out;
}

std::vector<std::string> InventoryStore::Enqueue(std::vector<QueueEntry> entries) {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::string> ids;
  for (auto& e : entries) {
    const std::string base = e.proposal.proposal_id;
    std::string id = base;
    for (int n = 2; queue_index_.count(id) > 0; ++n) id = base + "-" + std::to_string(n);
    e.proposal.proposal_id = id;
    AppendLine(dir_ / "queue.jsonl", QueueEntryToJson(e));
    queue_index_[id] = queue_.size();
    queue_.push_back(std::move(e));
    ids.push_back(id);
  }
  return ids;
}

std::vector<QueueEntry> InventoryStore::Queue(std::optional<ProposalStatus> status) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<QueueEntry> out;
  for (const auto& e : queue_) {
    if (!status || e.proposal.status == *status) out.push_back(e);
  }
  return out;
}

std::optional<QueueEntry> InventoryStore::Proposal(const std::string& proposal_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = queue_index_.find(proposal_id);
  if (it == queue_index_.end()) return std::nullopt;
  return queue_[it->second];
}

DecisionOutcome InventoryStore::ApplyDecision(const ReviewDecision& decision) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = queue_index_.find(decision.proposal_id);
  if (it == queue_index_.end()) {
    throw NotFoundError("no queued proposal '" + decision.proposal_id + "'");
  }
  ClusterProposal proposal = queue_[it->second].proposal;
  KeyInventory next = ApplyReviewDecision(*current_, proposal, decision);

  DecisionOutcome out;
  out.version_before = current_->version();
  out.version_after = next.version();
  out.changed = out.version_after != out.version_before;
  out.proposal = proposal;
  const json record = {{"type", "review"},
                       {"decision", DecisionToJson(decision)},
                       {"status", ProposalStatusName(proposal.status)},
                       {"version_before", out.version_before},
                       {"version_after", out.version_after}};
  if (out.changed) CommitLocked(std::move(next));
  AppendLine(dir_ / "decisions.jsonl", record);
  decisions_.push_back(record);
  queue_[it->second].proposal.status = proposal.status;
  return out;
}

std::vector<json> InventoryStore::DecisionLog() const {
  std::lock_guard<std::mutex> lock(mu_);
  return decisions_;
}

void InventoryStore::AppendBatchRecord(const json& record) {
  std::lock_guard<std::mutex> lock(mu_);
  AppendLine(dir_ / "batches.jsonl", record);
  batches_.push_back(record);
}

std::vector<json> InventoryStore::BatchRecords() const {
  std::lock_guard<std::mutex> lock(mu_);
  return batches_;
}

}  // namespace keycov
