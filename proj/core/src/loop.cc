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

#include "keycov/loop.h"

#include <cstdlib>
#include <map>
#include <set>

#include "keycov/errors.h"
#include "keycov/normalize.h"
#include "keycov/text.h"

namespace keycov {

namespace {

std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

std::string Snippet(const Page& page, const Span& span, int radius) {
  const auto len = static_cast<int64_t>(page.text.size());
  const int64_t from = std::max<int64_t>(0, span.start - radius);
  const int64_t to = std::min<int64_t>(len, span.end + radius);
  return U32ToUtf8(std::u32string_view(page.text).substr(from, to - from));
}

std::optional<double> SafeCoverage(const KeyInventory& inv, const std::vector<Page>& pages,
                                   CoverageMode mode) {
  for (const Page& p : pages) {
    if (!p.annotations.empty()) return Coverage(inv, pages, mode);
  }
  return std::nullopt;
}

}  // namespace

BatchResult RunBatchIteration(const std::string& batch_id, const std::vector<Page>& batch,
                              InventoryStore& store, LogitBackend& backend,
                              const EmbeddingProvider& provider, const LoopConfig& config,
                              const std::vector<Page>* eval_pages) {
  std::lock_guard<std::mutex> batch_lock(store.batch_mutex());
  const std::vector<Page>& eval = eval_pages ? *eval_pages : batch;
  BatchResult result;
  BatchIterationRecord& rec = result.record;
  rec.batch_id = batch_id;
  rec.pages_processed = static_cast<int64_t>(batch.size());

  const auto before = store.Current();
  rec.inventory_version_before = before->version();
  rec.coverage_before = SafeCoverage(*before, eval, config.coverage_mode);

  // Inner loop: value and key queries for every canonical key.
  result.pairs = ExtractCorpus(batch, *before, backend, config.extract);
  rec.extracted_pairs = static_cast<int64_t>(result.pairs.size());

  // Observed surface keys with their counts and example contexts.
  std::map<std::string, int64_t> observed;
  std::map<std::string, std::vector<std::string>> snippets;
  std::map<std::string, const Page*> by_id;
  for (const Page& p : batch) by_id.emplace(p.page_id, &p);
  auto observe = [&](const std::string& raw, const Page& page, const Span& span) {
    const std::string key = NormalizeKey(raw);
    if (key.empty()) return;
    ++observed[key];
    auto& list = snippets[key];
    if (static_cast<int>(list.size()) < config.snippets_per_key) {
      list.push_back(Snippet(page, span, config.snippet_radius));
    }
  };
  for (const auto& pred : result.pairs) {
    if (pred.pair.surface_key && pred.pair.key_span) {
      observe(*pred.pair.surface_key, *by_id.at(pred.page_id), *pred.pair.key_span);
    }
  }
  if (config.observe_gold_keys) {
    for (const Page& p : batch) {
      for (const auto& a : p.annotations) observe(a.surface_key, p, a.key_span);
    }
  }
  std::set<std::string> observed_keys;
  for (const auto& [k, n] : observed) observed_keys.insert(k);
  const std::set<std::string> novel = DetectNovelKeys(observed_keys, *before);
  rec.novel_keys.assign(novel.begin(), novel.end());

  std::vector<KeyCount> counts;
  for (const auto& k : novel) counts.push_back({k, observed[k]});
  std::vector<QueueEntry> entries;
  for (auto& p : ProposeClusters(counts, *before, provider, config.cluster_threshold)) {
    QueueEntry e;
    for (const auto& m : p.members) e.snippets[m.key] = snippets[m.key];
    e.proposal = std::move(p);
    entries.push_back(std::move(e));
  }
  rec.proposals_created = static_cast<int64_t>(entries.size());
  rec.proposal_ids = store.Enqueue(std::move(entries));

  if (config.auto_accept) {
    for (const auto& id : rec.proposal_ids) {
      ReviewDecision d;
      d.proposal_id = id;
      d.action = ReviewAction::kAccept;
      d.automatic = true;
      try {
        store.ApplyDecision(d);
        ++rec.decisions_applied;
      } catch (const ConflictError&) {
        ++rec.decisions_skipped;
      }
    }
  }

  const auto after = store.Current();
  rec.inventory_version_after = after->version();
  rec.coverage_after = SafeCoverage(*after, eval, config.coverage_mode);
  if (rec.inventory_version_after != rec.inventory_version_before) {
    const auto path = store.SnapshotPath(after->version());
    backend.Refresh(*after, path);
    if (!config.refresh_command.empty()) {
      const std::string cmd = config.refresh_command + " " + ShellQuote(path.string());
      if (std::system(cmd.c_str()) != 0) {
        throw BackendError("refresh command failed: " + cmd);
      }
    }
    rec.refreshed = true;
  }
  store.AppendBatchRecord(BatchRecordToJson(rec));
  return result;
}

nlohmann::json BatchRecordToJson(const BatchIterationRecord& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"batch_id", r.batch_id},
          {"pages_processed", r.pages_processed},
          {"extracted_pairs", r.extracted_pairs},
          {"novel_keys", r.novel_keys},
          {"proposals_created", r.proposals_created},
          {"proposal_ids", r.proposal_ids},
          {"decisions_applied", r.decisions_applied},
          {"decisions_skipped", r.decisions_skipped},
          {"inventory_version_before", r.inventory_version_before},
          {"inventory_version_after", r.inventory_version_after},
          {"coverage_before", opt(r.coverage_before)},
          {"coverage_after", opt(r.coverage_after)},
          {"refreshed", r.refreshed}};
}

}  // namespace keycov
