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

#include "keycov/backend.h"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>

#include <nlohmann/json.hpp>

#include "keycov/errors.h"
#include "keycov/text.h"

namespace keycov {

void ChunkLogits::Validate(size_t chunk_length) const {
  if (start_logits.size() != chunk_length || end_logits.size() != chunk_length) {
    throw ValidationError("logit vectors have lengths " + std::to_string(start_logits.size()) +
                          "/" + std::to_string(end_logits.size()) + ", chunk has " +
                          std::to_string(chunk_length));
  }
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(start_logits.begin(), start_logits.end(), finite) ||
      !std::all_of(end_logits.begin(), end_logits.end(), finite) || !std::isfinite(null_score)) {
    throw ValidationError("non-finite logit");
  }
}

// ---------------------------------------------------------------------------
// RuleBackend

struct RuleBackend::Knowledge {
  struct Node {
    std::unordered_map<char32_t, int> next;
    int entry = -1;
  };
  std::vector<Node> trie{Node{}};
  std::unordered_map<std::string, int> entry_index;

  void Insert(std::u32string_view form, int entry) {
    int node = 0;
    for (char32_t c : form) {
      auto it = trie[node].next.find(c);
      if (it == trie[node].next.end()) {
        trie.push_back(Node{});
        const int child = static_cast<int>(trie.size()) - 1;
        trie[node].next.emplace(c, child);
        node = child;
      } else {
        node = it->second;
      }
    }
    trie[node].entry = entry;
  }
};

RuleBackend::RuleBackend(const KeyInventory& inv) { Refresh(inv, {}); }

void RuleBackend::Refresh(const KeyInventory& inv, const std::filesystem::path&) {
  auto k = std::make_shared<Knowledge>();
  for (size_t i = 0; i < inv.entries().size(); ++i) {
    const auto& e = inv.entries()[i];
    k->entry_index.emplace(e.canonical, static_cast<int>(i));
    for (const auto& form : KeyInventory::SurfaceForms(e)) {
      if (!form.empty()) k->Insert(Utf8ToU32(form), static_cast<int>(i));
    }
  }
  std::lock_guard<std::mutex> lock(mu_);
  knowledge_ = std::move(k);
  last_.reset();
  last_owner_ = nullptr;
}

std::shared_ptr<const RuleBackend::Knowledge> RuleBackend::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return knowledge_;
}

std::shared_ptr<const RuleBackend::Analysis> RuleBackend::Analyze(
    const std::shared_ptr<const Knowledge>& k, std::u32string_view chunk) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (last_ && last_owner_ == k.get() && last_->chunk == chunk) return last_;
  }
  auto a = std::make_shared<Analysis>();
  a->chunk.assign(chunk);
  const auto len = static_cast<int64_t>(chunk.size());
  for (int64_t pos = 0; pos < len; ++pos) {
    if (chunk[pos] == U'\n') a->line_breaks.push_back(pos);
    int node = 0;
    int best_entry = -1;
    int64_t best_len = 0;
    int64_t j = pos;
    for (; j < len; ++j) {
      const auto& next = k->trie[node].next;
      auto it = next.find(chunk[j]);
      if (it == next.end()) break;
      node = it->second;
      if (k->trie[node].entry >= 0) {
        best_entry = k->trie[node].entry;
        best_len = j - pos + 1;
      }
    }
    // The chunk ended while a longer form was still possible.
    const bool cut = j == len && !k->trie[node].next.empty();
    if (best_entry >= 0) a->occurrences.push_back({pos, best_len, best_entry, cut});
  }
  std::lock_guard<std::mutex> lock(mu_);
  if (knowledge_ == k) {
    last_ = a;
    last_owner_ = k.get();
  }
  return a;
}

ChunkLogits RuleBackend::Predict(const ExtractionQuery& query, std::u32string_view chunk) {
  const auto len = static_cast<int64_t>(chunk.size());
  ChunkLogits out{std::vector<double>(len, kMiss), std::vector<double>(len, kMiss), kNull};
  const auto k = Snapshot();
  auto idx = k->entry_index.find(query.canonical_key);
  if (idx == k->entry_index.end() || len == 0) return out;
  const auto a = Analyze(k, chunk);

  auto occ = std::find_if(a->occurrences.begin(), a->occurrences.end(),
                          [&](const Occurrence& o) { return o.entry == idx->second; });
  if (occ == a->occurrences.end()) return out;

  if (query.kind == QueryKind::kKey) {
    out.start_logits[occ->pos] = kHit;
    out.end_logits[occ->pos + occ->len - 1] = occ->cut ? kTruncatedHit : kHit;
    out.null_score = kMiss;
    return out;
  }

  int64_t start = occ->pos + occ->len;
  if (start < len && (chunk[start] == U'：' || chunk[start] == U':' || chunk[start] == U'＝' ||
                      chunk[start] == U'=')) {
    ++start;
  }
  while (start < len && IsSpace(chunk[start])) ++start;

  int64_t end = len;
  auto lb = std::lower_bound(a->line_breaks.begin(), a->line_breaks.end(), start);
  if (lb != a->line_breaks.end()) end = std::min(end, *lb);
  auto next = std::lower_bound(a->occurrences.begin(), a->occurrences.end(), start,
                               [](const Occurrence& o, int64_t p) { return o.pos < p; });
  if (next != a->occurrences.end()) end = std::min(end, next->pos);
  if (start >= end) return out;

  out.start_logits[start] = kHit;
  out.end_logits[end - 1] = end == len || occ->cut ? kTruncatedHit : kHit;
  out.null_score = kMiss;
  return out;
}

// ---------------------------------------------------------------------------
// ExternalProcessBackend

ExternalProcessBackend::ExternalProcessBackend(std::string command) : command_(std::move(command)) {
  // A dead child must surface as a write error, not kill the process.
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw BackendError("pipe: " + std::string(std::strerror(errno)));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw BackendError("pipe: " + std::string(std::strerror(errno)));
  }
  pid_ = fork();
  if (pid_ < 0) throw BackendError("fork: " + std::string(std::strerror(errno)));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

ExternalProcessBackend::~ExternalProcessBackend() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    // Closing stdin asks a well-behaved child to exit; give it a moment.
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, &status, WNOHANG) == pid_) return;
      usleep(10000);
    }
    kill(pid_, SIGTERM);
    waitpid(pid_, &status, 0);
  }
}

std::string ExternalProcessBackend::ReadLine() {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char buf[4096];
    const ssize_t n = read(from_child_, buf, sizeof(buf));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw BackendError("backend process closed its output");
    buffer_.append(buf, static_cast<size_t>(n));
  }
}

ChunkLogits ExternalProcessBackend::Predict(const ExtractionQuery& query,
                                            std::u32string_view chunk) {
  const nlohmann::json request = {{"query", query.rendered_text}, {"chunk", U32ToUtf8(chunk)}};
  const std::string line = request.dump() + "\n";
  std::lock_guard<std::mutex> lock(mu_);
  size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = write(to_child_, line.data() + written, line.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw BackendError("cannot write to backend process: " +
                                   std::string(std::strerror(errno)));
    written += static_cast<size_t>(n);
  }
  const std::string response = ReadLine();
  try {
    const auto j = nlohmann::json::parse(response);
    ChunkLogits out;
    out.start_logits = j.at("start_logits").get<std::vector<double>>();
    out.end_logits = j.at("end_logits").get<std::vector<double>>();
    out.null_score = j.at("null_score").get<double>();
    out.Validate(chunk.size());
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed backend response: ") + e.what());
  } catch (const ValidationError& e) {
    throw BackendError(std::string("invalid backend response: ") + e.what());
  }
}

}  // namespace keycov
