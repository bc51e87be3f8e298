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

// HTTP API over the inventory store, extractor, batch loop and metrics.
//
//   GET  /health
//   GET  /v1/inventory[?version=N]      GET /v1/inventory/versions
//   GET  /v1/inventory/canonicalize?key=...
//   POST /v1/inventory/aliases          {canonical, alias}
//   POST /v1/extract                    {text, fraction? | keys?, include_aliases?}
//   POST /v1/batches                    {pages, mode: interactive|auto, batch_id?}
//   GET  /v1/batches
//   GET  /v1/review/queue[?status=...]  GET /v1/review/decisions
//   POST /v1/review/decisions           ReviewDecision
//   GET  /v1/metrics/coverage[?split=&fraction=&mode=]
//   GET  /v1/metrics/sweep
//
// Errors are {"error": message, "kind": ...} with 400 (bad input), 404,
// 409 (conflict or non-pending proposal), 500 (I/O) or 502 (backend).

#ifndef KEYCOV_TOOLS_SERVICE_H_
#define KEYCOV_TOOLS_SERVICE_H_

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "keycov/backend.h"
#include "keycov/corpus.h"
#include "keycov/embedding.h"
#include "keycov/store.h"
#include "settings.h"

namespace httplib {
class Server;
}

namespace keycov {

struct ServiceContext {
  InventoryStore* store = nullptr;
  LogitBackend* backend = nullptr;
  const EmbeddingProvider* provider = nullptr;
  Settings settings;
  // Gold corpus used for coverage, sweep and as the batch evaluation split.
  std::optional<std::vector<Page>> corpus;
};

class ApiService {
 public:
  explicit ApiService(ServiceContext ctx);
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  // Binds to host:port (port 0 picks a free port) and returns the bound
  // port. Throws IoError if the port is unavailable.
  int Bind(const std::string& host, int port);
  // Serves until Stop(); call after Bind.
  void Serve();
  void Stop();
  bool running() const;

  // Request handlers, callable without HTTP. Throw keycov errors.
  nlohmann::json Health() const;
  nlohmann::json Extract(const nlohmann::json& body);
  nlohmann::json RunBatch(const nlohmann::json& body);
  nlohmann::json Decide(const nlohmann::json& body);
  nlohmann::json Queue(const std::string& status) const;
  nlohmann::json CoverageMetric(const std::string& split, const std::string& fraction,
                                const std::string& mode) const;
  nlohmann::json Sweep();

 private:
  void Routes();
  std::vector<Page> SplitPages(SplitName name) const;
  KeyInventory WithTrainFrequencies(const KeyInventory& inv) const;

  ServiceContext ctx_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex backend_mu_;
  std::mutex sweep_mu_;
  std::map<int64_t, nlohmann::json> sweep_cache_;
};

}  // namespace keycov

#endif  // KEYCOV_TOOLS_SERVICE_H_
