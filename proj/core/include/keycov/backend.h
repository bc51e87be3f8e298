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

// Logit backends: anything that maps (query, chunk) to per-character start
// and end logits plus a null score.

#ifndef KEYCOV_BACKEND_H_
#define KEYCOV_BACKEND_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "keycov/inventory.h"
#include "keycov/query.h"

namespace keycov {

struct ChunkLogits {
  std::vector<double> start_logits;
  std::vector<double> end_logits;
  double null_score = 0.0;

  // Throws ValidationError unless both vectors have length chunk_length and
  // every value is finite.
  void Validate(size_t chunk_length) const;
  friend bool operator==(const ChunkLogits&, const ChunkLogits&) = default;
};

class LogitBackend {
 public:
  virtual ~LogitBackend() = default;
  virtual ChunkLogits Predict(const ExtractionQuery& query, std::u32string_view chunk) = 0;
  // Called after the inventory changes; inventory_path holds the snapshot.
  virtual void Refresh(const KeyInventory& /*inv*/,
                       const std::filesystem::path& /*inventory_path*/) {}
  // True if callers must not issue concurrent Predict calls.
  virtual bool single_flight() const { return false; }
  virtual std::string name() const = 0;
};

// Deterministic reference backend. Finds the earliest header occurrence of
// the queried canonical key (longest surface form at each position wins
// across the whole inventory) and marks either the header itself (key
// query) or the text after an optional delimiter up to the next line break,
// next known header, or chunk end (value query). Marked boundaries get
// kHit, everything else kMiss. An end cut off by the chunk edge, or any end
// derived from a header whose longest match ran into the chunk edge, gets
// kTruncatedHit. null_score is kMiss when a span is marked, kNull otherwise.
class RuleBackend final : public LogitBackend {
 public:
  static constexpr double kHit = 10.0;
  static constexpr double kTruncatedHit = 5.0;
  static constexpr double kMiss = -10.0;
  static constexpr double kNull = 5.0;

  explicit RuleBackend(const KeyInventory& inv);

  ChunkLogits Predict(const ExtractionQuery& query, std::u32string_view chunk) override;
  void Refresh(const KeyInventory& inv, const std::filesystem::path& inventory_path) override;
  std::string name() const override { return "rule"; }

 private:
  struct Knowledge;
  struct Occurrence {
    int64_t pos;
    int64_t len;
    int entry;
    bool cut;  // a longer surface form may continue past the chunk end
  };
  struct Analysis {
    std::u32string chunk;
    std::vector<Occurrence> occurrences;  // sorted by position
    std::vector<int64_t> line_breaks;
  };

  std::shared_ptr<const Knowledge> Snapshot() const;
  std::shared_ptr<const Analysis> Analyze(const std::shared_ptr<const Knowledge>& k,
                                          std::u32string_view chunk);

  mutable std::mutex mu_;
  std::shared_ptr<const Knowledge> knowledge_;
  std::shared_ptr<const Analysis> last_;  // single-entry cache
  const Knowledge* last_owner_ = nullptr;
};

// Talks to a child process over line-delimited JSON: one request
// {"query": ..., "chunk": ...} per line on its stdin, one response
// {"start_logits": [...], "end_logits": [...], "null_score": x} per line on
// its stdout. The command runs under /bin/sh. Calls are serialized.
class ExternalProcessBackend final : public LogitBackend {
 public:
  explicit ExternalProcessBackend(std::string command);
  ~ExternalProcessBackend() override;
  ExternalProcessBackend(const ExternalProcessBackend&) = delete;
  ExternalProcessBackend& operator=(const ExternalProcessBackend&) = delete;

  ChunkLogits Predict(const ExtractionQuery& query, std::u32string_view chunk) override;
  bool single_flight() const override { return true; }
  std::string name() const override { return "external:" + command_; }

 private:
  std::string ReadLine();

  std::string command_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::mutex mu_;
};

}  // namespace keycov

#endif  // KEYCOV_BACKEND_H_
