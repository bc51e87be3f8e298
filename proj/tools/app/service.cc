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

#include "service.h"

#include <httplib.h>

#include "keycov/errors.h"
#include "keycov/evaluation.h"
#include "keycov/extractor.h"
#include "keycov/loop.h"
#include "keycov/normalize.h"
#include "keycov/text.h"

namespace keycov {

using json = nlohmann::json;

namespace {

struct HttpStatus {
  int code;
  const char* kind;
};

HttpStatus StatusFor(const std::exception& e) {
  if (dynamic_cast<const NotFoundError*>(&e)) return {404, "not_found"};
  if (dynamic_cast<const ConflictError*>(&e)) return {409, "conflict"};
  if (dynamic_cast<const StateError*>(&e)) return {409, "state"};
  if (dynamic_cast<const IoError*>(&e)) return {500, "io"};
  if (dynamic_cast<const BackendError*>(&e)) return {502, "backend"};
  if (dynamic_cast<const ConfigError*>(&e)) return {400, "config"};
  if (dynamic_cast<const ParseError*>(&e)) return {400, "parse"};
  if (dynamic_cast<const ValidationError*>(&e)) return {400, "validation"};
  if (dynamic_cast<const json::exception*>(&e)) return {400, "parse"};
  return {500, "internal"};
}

template <typename F>
void Respond(httplib::Response& res, F&& handler) {
  try {
    const json out = handler();
    res.status = 200;
    res.set_content(out.dump(), "application/json");
  } catch (const std::exception& e) {
    const HttpStatus s = StatusFor(e);
    res.status = s.code;
    res.set_content(json{{"error", e.what()}, {"kind", s.kind}}.dump(), "application/json");
  }
}

json ParseBody(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ParseError(std::string("request body is not JSON: ") + e.what());
  }
}

json QueueEntryJson(const QueueEntry& e) {
  json j = ProposalToJson(e.proposal);
  json snippets = json::object();
  for (const auto& [k, list] : e.snippets) snippets[k] = list;
  j["snippets"] = snippets;
  j["total_frequency"] = e.proposal.total_frequency();
  return j;
}

double ParseFraction(const std::string& text) {
  try {
    size_t used = 0;
    const double f = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return f;
  } catch (const std::logic_error&) {
    throw ValidationError("fraction '" + text + "' is not a number");
  }
}

}  // namespace

ApiService::ApiService(ServiceContext ctx)
    : ctx_(std::move(ctx)), server_(std::make_unique<httplib::Server>()) {
  if (!ctx_.store || !ctx_.backend || !ctx_.provider) {
    throw ConfigError("service needs a store, a backend and an embedding provider");
  }
  Routes();
}

ApiService::~ApiService() { Stop(); }

int ApiService::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port) + " (port busy?)");
  }
  return port;
}

void ApiService::Serve() { server_->listen_after_bind(); }

void ApiService::Stop() {
  if (server_) server_->stop();
}

bool ApiService::running() const { return server_->is_running(); }

std::vector<Page> ApiService::SplitPages(SplitName name) const {
  if (!ctx_.corpus) throw NotFoundError("no corpus is configured for metrics");
  const CorpusSplit split = SplitByReportHash(*ctx_.corpus, ctx_.settings.seed,
                                              ctx_.settings.split_ratios);
  return SelectSplit(*ctx_.corpus, split, name);
}

KeyInventory ApiService::WithTrainFrequencies(const KeyInventory& inv) const {
  return WithFrequencies(inv, SplitPages(SplitName::kTrain));
}

json ApiService::Health() const {
  return {{"status", "ok"}, {"inventory_version", ctx_.store->Current()->version()}};
}

json ApiService::Extract(const json& body) {
  const std::u32string text = Utf8ToU32(body.at("text").get<std::string>());
  const auto inv = ctx_.store->Current();
  KeyInventory view = *inv;
  if (body.contains("fraction") && body.contains("keys")) {
    throw ValidationError("give either fraction or keys, not both");
  }
  if (body.contains("fraction")) {
    const double f = body.at("fraction").get<double>();
    if (!(f > 0.0 && f <= 100.0)) throw ValidationError("fraction must lie in (0, 100]");
    view = TopFractionKeys(*inv, f);
  } else if (body.contains("keys")) {
    view = RestrictToKeys(*inv, body.at("keys").get<std::vector<std::string>>());
  }
  ExtractConfig config = ctx_.settings.extract;
  if (body.contains("include_aliases")) {
    config.include_aliases = body.at("include_aliases").get<bool>();
  }
  std::vector<ExtractedPair> pairs;
  if (ctx_.backend->single_flight()) {
    std::lock_guard<std::mutex> lock(backend_mu_);
    pairs = ExtractPage(text, view, *ctx_.backend, config);
  } else {
    pairs = ExtractPage(text, view, *ctx_.backend, config);
  }
  json out = json::array();
  for (const auto& p : pairs) out.push_back(ExtractedPairToJson(p));
  return {{"pairs", out}, {"inventory_version", inv->version()}};
}

json ApiService::RunBatch(const json& body) {
  std::vector<Page> pages;
  for (const auto& p : body.at("pages")) pages.push_back(PageFromJson(p));
  const std::string mode = body.value("mode", std::string("interactive"));
  if (mode != "interactive" && mode != "auto") {
    throw ValidationError("mode must be interactive or auto");
  }
  LoopConfig config = ctx_.settings.loop;
  config.extract = ctx_.settings.extract;
  config.cluster_threshold = ctx_.settings.cluster_threshold;
  config.auto_accept = mode == "auto";
  std::string batch_id = body.value("batch_id", std::string());
  if (batch_id.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "batch-%04zu", ctx_.store->BatchRecords().size() + 1);
    batch_id = buf;
  }
  std::optional<std::vector<Page>> eval;
  if (ctx_.corpus) eval = SplitPages(SplitName::kTest);

  std::unique_lock<std::mutex> lock(backend_mu_, std::defer_lock);
  if (ctx_.backend->single_flight()) lock.lock();
  const BatchResult result = RunBatchIteration(batch_id, pages, *ctx_.store, *ctx_.backend,
                                               *ctx_.provider, config, eval ? &*eval : nullptr);
  json out = BatchRecordToJson(result.record);
  if (body.value("include_pairs", false)) {
    json pairs = json::array();
    for (const auto& p : result.pairs) pairs.push_back(PagePredictionToJson(p));
    out["pairs"] = pairs;
  }
  return out;
}

json ApiService::Decide(const json& body) {
  const ReviewDecision decision = DecisionFromJson(body);
  const DecisionOutcome outcome = ctx_.store->ApplyDecision(decision);
  return {{"proposal", ProposalToJson(outcome.proposal)},
          {"decision", DecisionToJson(decision)},
          {"changed", outcome.changed},
          {"version_before", outcome.version_before},
          {"inventory_version", outcome.version_after}};
}

json ApiService::Queue(const std::string& status) const {
  std::optional<ProposalStatus> filter;
  if (!status.empty()) {
    filter = ParseProposalStatus(status);
    if (!filter) throw ValidationError("unknown status '" + status + "'");
  }
  json out = json::array();
  for (const auto& e : ctx_.store->Queue(filter)) out.push_back(QueueEntryJson(e));
  return out;
}

json ApiService::CoverageMetric(const std::string& split, const std::string& fraction,
                                const std::string& mode) const {
  const auto split_name = ParseSplitName(split.empty() ? "test" : split);
  if (!split_name) throw ValidationError("unknown split '" + split + "'");
  CoverageMode cov_mode = ctx_.settings.coverage_mode;
  if (!mode.empty()) {
    auto m = ParseCoverageMode(mode);
    if (!m) throw ValidationError("unknown coverage mode '" + mode + "'");
    cov_mode = *m;
  }
  const double f = fraction.empty() ? 100.0 : ParseFraction(fraction);
  if (!(f > 0.0 && f <= 100.0)) throw ValidationError("fraction must lie in (0, 100]");
  const auto inv = ctx_.store->Current();
  const KeyInventory view = TopFractionKeys(WithTrainFrequencies(*inv), f);
  const double c = Coverage(view, SplitPages(*split_name), cov_mode);
  return {{"coverage", c},
          {"mode", CoverageModeName(cov_mode)},
          {"split", split.empty() ? "test" : split},
          {"fraction", f},
          {"inventory_version", inv->version()}};
}

json ApiService::Sweep() {
  const auto inv = ctx_.store->Current();
  {
    std::lock_guard<std::mutex> lock(sweep_mu_);
    auto it = sweep_cache_.find(inv->version());
    if (it != sweep_cache_.end()) return it->second;
  }
  if (!ctx_.corpus) throw NotFoundError("no sweep available: no corpus is configured");
  SweepConfig config;
  config.fractions = ctx_.settings.fractions;
  config.delta = ctx_.settings.delta;
  config.coverage_mode = ctx_.settings.coverage_mode;
  config.level = ctx_.settings.level;
  config.extract = ctx_.settings.extract;
  const KeyInventory ranked = WithTrainFrequencies(*inv);
  const auto test = SplitPages(SplitName::kTest);
  std::vector<SweepRow> rows;
  {
    std::unique_lock<std::mutex> lock(backend_mu_, std::defer_lock);
    if (ctx_.backend->single_flight()) lock.lock();
    rows = CoverageSweep(test, ranked, *ctx_.backend, config);
  }
  json out = {{"inventory_version", inv->version()},
              {"level", EvalLevelName(config.level)},
              {"delta", config.delta},
              {"coverage_mode", CoverageModeName(config.coverage_mode)},
              {"rows", SweepToJson(rows)},
              {"csv", SweepToCsv(rows)}};
  std::lock_guard<std::mutex> lock(sweep_mu_);
  sweep_cache_[inv->version()] = out;
  return out;
}

void ApiService::Routes() {
  httplib::Server& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  s.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    Respond(res, [&] { return Health(); });
  });
  s.Get("/v1/inventory", [this](const httplib::Request& req, httplib::Response& res) {
    Respond(res, [&]() -> json {
      if (!req.has_param("version")) return InventoryToJson(*ctx_.store->Current());
      int64_t v = 0;
      try {
        v = std::stoll(req.get_param_value("version"));
      } catch (const std::logic_error&) {
        throw ValidationError("version must be an integer");
      }
      auto inv = ctx_.store->Version(v);
      if (!inv) throw NotFoundError("no inventory version " + std::to_string(v));
      return InventoryToJson(*inv);
    });
  });
  s.Get("/v1/inventory/versions", [this](const httplib::Request&, httplib::Response& res) {
    Respond(res, [&] { return json(ctx_.store->Versions()); });
  });
  s.Get("/v1/inventory/canonicalize", [this](const httplib::Request& req, httplib::Response& res) {
    Respond(res, [&]() -> json {
      if (!req.has_param("key")) throw ValidationError("missing key parameter");
      const std::string raw = req.get_param_value("key");
      const std::string key = NormalizeKey(raw);
      const auto inv = ctx_.store->Current();
      const auto canonical = inv->Canonicalize(key);
      return {{"key", raw},
              {"normalized", key},
              {"canonical", canonical ? json(*canonical) : json(nullptr)},
              {"inventory_version", inv->version()}};
    });
  });
  s.Post("/v1/inventory/aliases", [this](const httplib::Request& req, httplib::Response& res) {
    Respond(res, [&]() -> json {
      const json body = ParseBody(req);
      const auto canonical = body.at("canonical").get<std::string>();
      const auto alias = NormalizeKey(body.at("alias").get<std::string>());
      const DecisionOutcome o = ctx_.store->RegisterAlias(canonical, alias);
      return {{"canonical", canonical},
              {"alias", alias},
              {"changed", o.changed},
              {"version_before", o.version_before},
              {"inventory_version", o.version_after}};
    });
  });
  s.Post("/v1/extract", [this](const httplib::Request& req, httplib::Response& res) {
    Respond(res, [&] { return Extract(ParseBody(req)); });
  });
  s.Post("/v1/batches", [this](const httplib::Request& req, httplib::Response& res) {
    Respond(res, [&] { return RunBatch(ParseBody(req)); });
  });
  s.Get("/v1/batches", [this](const httplib::Request&, httplib::Response& res) {
    Respond(res, [&] { return json(ctx_.store->BatchRecords()); });
  });
  s.Get("/v1/review/queue", [this](const httplib::Request& req, httplib::Response& res) {
    Respond(res, [&] { return Queue(req.get_param_value("status")); });
  });
  s.Get("/v1/review/decisions", [this](const httplib::Request&, httplib::Response& res) {
    Respond(res, [&] { return json(ctx_.store->DecisionLog()); });
  });
  s.Post("/v1/review/decisions", [this](const httplib::Request& req, httplib::Response& res) {
    Respond(res, [&] { return Decide(ParseBody(req)); });
  });
  s.Get("/v1/metrics/coverage", [this](const httplib::Request& req, httplib::Response& res) {
    Respond(res, [&] {
      return CoverageMetric(req.get_param_value("split"), req.get_param_value("fraction"),
                            req.get_param_value("mode"));
    });
  });
  s.Get("/v1/metrics/sweep", [this](const httplib::Request&, httplib::Response& res) {
    Respond(res, [&] { return Sweep(); });
  });
  if (!ctx_.settings.static_dir.empty()) {
    if (!s.set_mount_point("/", ctx_.settings.static_dir)) {
      throw IoError("static directory " + ctx_.settings.static_dir + " does not exist");
    }
  }
}

}  // namespace keycov
