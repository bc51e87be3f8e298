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

#include "cli.h"

#include <pthread.h>
#include <signal.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "keycov/canonicalizer.h"
#include "keycov/corpus.h"
#include "keycov/errors.h"
#include "keycov/evaluation.h"
#include "keycov/extractor.h"
#include "keycov/loop.h"
#include "keycov/loss.h"
#include "keycov/normalize.h"
#include "keycov/store.h"
#include "keycov/synth.h"
#include "service.h"

namespace keycov {

using json = nlohmann::json;

std::unique_ptr<LogitBackend> MakeBackend(const Settings& settings, const KeyInventory& inv) {
  if (settings.backend == "external") {
    return std::make_unique<ExternalProcessBackend>(settings.backend_command);
  }
  return std::make_unique<RuleBackend>(inv);
}

std::unique_ptr<EmbeddingProvider> MakeEmbeddingProvider(const Settings& settings) {
  if (!settings.embedding_file.empty()) {
    return std::make_unique<FileEmbeddingProvider>(
        FileEmbeddingProvider::Load(settings.embedding_file));
  }
  return std::make_unique<BigramHashEmbedder>(settings.embedding_buckets);
}

namespace {

// Writes to path, or to out when path is empty or "-".
void WriteOutput(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  f.flush();
  if (!f) throw IoError("cannot write " + path);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<json> ReadJsonLines(const std::string& path) {
  std::vector<json> out;
  std::istringstream in(ReadFile(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Page> PagesOfSplit(const std::vector<Page>& pages, const std::string& split,
                               const Settings& s) {
  if (split.empty() || split == "all") return pages;
  const auto name = ParseSplitName(split);
  if (!name) throw ValidationError("unknown split '" + split + "'");
  return SelectSplit(pages, SplitByReportHash(pages, s.seed, s.split_ratios), *name);
}

// Flag values kept apart from Settings so that only flags the user actually
// passed override the config file.
struct Flags {
  std::string config;
  uint64_t seed = 0;
  std::string corpus, inventory, out, split, predictions, store, pages, batch_id, keys_file,
      queue_file, decisions_file, json_out, plot_out, stats_out, eval_corpus, backend,
      backend_command, embeddings, mode, level, coverage_mode, fractions, keys, ratios, host,
      static_dir, task, from, inventory_out;
  int num_pages = 0, num_keys = 0, port = 0, max_aliases = 0, instances = 0, max_len = 0;
  int64_t budget = 0, overlap = 0, delta = 0;
  double zipf = 0, noise = 0, aliases_mean = 0, fraction = 0, threshold = 0, null_offset = 0,
         tolerance = 1e-4;
  bool no_chunking = false, no_aliases = false, auto_accept = false, include_pairs = false;
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}
  int Run(std::vector<std::string> args);

 private:
  template <typename T>
  CLI::Option* Opt(CLI::App* app, const std::string& name, T& var, const std::string& help) {
    CLI::Option* o = app->add_option(name, var, help);
    options_[name].push_back(o);
    return o;
  }
  bool Given(const std::string& name) const {
    auto it = options_.find(name);
    if (it == options_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [](const CLI::Option* o) { return o->count() > 0; });
  }
  Settings ResolveSettings();
  std::vector<Page> LoadCorpusFlag(const Settings& s);
  KeyInventory LoadInventoryFlag(const Settings& s);

  int GenCorpus();
  int Split();
  int Extract();
  int Evaluate();
  int Sweep();
  int MineKeys();
  int Cluster();
  int ReviewApply();
  int LossCheck();
  int Serve();
  int Batch();

  std::ostream& out_;
  std::ostream& err_;
  Flags f_;
  std::map<std::string, std::vector<CLI::Option*>> options_;
};

Settings Cli::ResolveSettings() {
  Settings s;
  if (!f_.config.empty()) ApplySettingsFile(f_.config, s);
  if (Given("--seed")) s.seed = f_.seed;
  if (Given("--corpus")) s.corpus_path = f_.corpus;
  if (Given("--inventory")) s.inventory_path = f_.inventory;
  if (Given("--pages-count")) s.generator.num_pages = f_.num_pages;
  if (Given("--keys-count")) s.generator.num_keys = f_.num_keys;
  if (Given("--zipf")) s.generator.zipf_s = f_.zipf;
  if (Given("--noise")) s.generator.noise = NoiseConfig::Uniform(f_.noise);
  if (Given("--aliases-mean")) s.generator.surface_forms_mean = f_.aliases_mean;
  if (Given("--ratios")) {
    const auto r = ParseDoubleList(f_.ratios);
    if (r.size() != 3) throw ConfigError("--ratios needs three values");
    for (int i = 0; i < 3; ++i) s.split_ratios[i] = static_cast<int>(r[i]);
  }
  if (Given("--budget")) s.extract.budget = f_.budget;
  if (Given("--overlap")) s.extract.overlap = f_.overlap;
  if (f_.no_chunking) s.extract.chunking = false;
  if (Given("--max-aliases")) s.extract.max_aliases = f_.max_aliases;
  if (f_.no_aliases) s.extract.include_aliases = false;
  if (Given("--null-offset")) s.extract.decode.null_offset = f_.null_offset;
  if (Given("--backend")) s.backend = f_.backend;
  if (Given("--backend-command")) s.backend_command = f_.backend_command;
  if (Given("--embeddings")) s.embedding_file = f_.embeddings;
  if (Given("--threshold")) s.cluster_threshold = f_.threshold;
  if (Given("--delta")) s.delta = f_.delta;
  if (Given("--fractions")) s.fractions = ParseDoubleList(f_.fractions);
  if (Given("--level")) {
    auto l = ParseEvalLevel(f_.level);
    if (!l) throw ConfigError("--level must be value or pair");
    s.level = *l;
  }
  if (Given("--coverage-mode")) {
    auto m = ParseCoverageMode(f_.coverage_mode);
    if (!m) throw ConfigError("--coverage-mode must be occurrence, type or surface");
    s.coverage_mode = *m;
  }
  if (Given("--task")) {
    if (f_.task == "extraction") {
      s.loss = LossConfig::Extraction();
    } else if (f_.task == "canonicalization") {
      s.loss = LossConfig::Canonicalization();
    } else {
      throw ConfigError("--task must be extraction or canonicalization");
    }
  }
  if (Given("--instances")) s.loss_instances = f_.instances;
  if (Given("--max-len")) s.loss_max_len = f_.max_len;
  if (Given("--host")) s.host = f_.host;
  if (Given("--port")) s.port = f_.port;
  if (Given("--store")) s.store_dir = f_.store;
  if (Given("--static-dir")) s.static_dir = f_.static_dir;
  if (f_.auto_accept) s.loop.auto_accept = true;
  s.generator.seed = s.seed;
  s.Validate();
  return s;
}

std::vector<Page> Cli::LoadCorpusFlag(const Settings& s) {
  if (s.corpus_path.empty()) throw ConfigError("a corpus is required (--corpus)");
  return LoadCorpus(s.corpus_path);
}

KeyInventory Cli::LoadInventoryFlag(const Settings& s) {
  if (s.inventory_path.empty()) throw ConfigError("an inventory is required (--inventory)");
  return LoadInventory(s.inventory_path);
}

int Cli::GenCorpus() {
  Settings s = ResolveSettings();
  if (!s.confusions_path.empty()) {
    // The generator always uses the built-in table; a custom table is
    // applied by generating clean pages and injecting noise separately.
    GeneratorConfig clean = s.generator;
    clean.noise = NoiseConfig{};
    SyntheticCorpus c = GenerateSyntheticCorpus(clean);
    c.pages = InjectCorpusNoise(c.pages, s.generator.noise, s.seed,
                                ConfusionTable::Load(s.confusions_path));
    WriteOutput(f_.out, SerializeCorpus(c.pages), out_);
    if (!f_.inventory_out.empty()) SaveInventory(f_.inventory_out, c.inventory);
    return kExitOk;
  }
  const SyntheticCorpus c = GenerateSyntheticCorpus(s.generator);
  WriteOutput(f_.out, SerializeCorpus(c.pages), out_);
  if (!f_.inventory_out.empty()) SaveInventory(f_.inventory_out, c.inventory);
  return kExitOk;
}

int Cli::Split() {
  const Settings s = ResolveSettings();
  const auto pages = LoadCorpusFlag(s);
  const CorpusSplit split = SplitByReportHash(pages, s.seed, s.split_ratios);
  WriteOutput(f_.out, SplitToJson(split).dump(2) + "\n", out_);
  return kExitOk;
}

int Cli::Extract() {
  const Settings s = ResolveSettings();
  const auto pages = PagesOfSplit(LoadCorpusFlag(s), f_.split, s);
  const KeyInventory inv = LoadInventoryFlag(s);
  KeyInventory view = inv;
  if (Given("--fraction") && Given("--keys")) {
    throw ValidationError("give either --fraction or --keys");
  }
  if (Given("--fraction")) view = TopFractionKeys(inv, f_.fraction);
  if (Given("--keys")) {
    std::vector<std::string> keys;
    std::stringstream in(f_.keys);
    std::string k;
    while (std::getline(in, k, ',')) {
      if (!k.empty()) keys.push_back(k);
    }
    view = RestrictToKeys(inv, keys);
  }
  auto backend = MakeBackend(s, inv);
  const auto preds = ExtractCorpus(pages, view, *backend, s.extract);
  WriteOutput(f_.out, SerializePredictions(preds), out_);
  return kExitOk;
}

int Cli::Evaluate() {
  const Settings s = ResolveSettings();
  const auto pages = PagesOfSplit(LoadCorpusFlag(s), f_.split, s);
  if (f_.predictions.empty()) throw ConfigError("--predictions is required");
  const auto preds = LoadPredictions(f_.predictions);
  std::vector<MatchCriterion> criteria;
  if (f_.mode.empty() || f_.mode == "both") {
    criteria = {MatchCriterion::Em(), MatchCriterion::Btm(s.delta)};
  } else {
    const auto m = ParseMatchMode(f_.mode);
    if (!m) throw ConfigError("--mode must be em, btm or both");
    criteria = {*m == MatchMode::kEm ? MatchCriterion::Em() : MatchCriterion::Btm(s.delta)};
  }
  json reports = json::array();
  for (const auto& c : criteria) {
    EvalReport r = s.level == EvalLevel::kPair ? PairPrf(preds, pages, c) : ValuePrf(preds, pages, c);
    if (!s.inventory_path.empty()) {
      r.coverage = Coverage(LoadInventory(s.inventory_path), pages, s.coverage_mode);
    }
    reports.push_back(EvalReportToJson(r));
  }
  const json out = reports.size() == 1 ? reports[0] : json{{"reports", reports}};
  WriteOutput(f_.out, out.dump(2) + "\n", out_);
  return kExitOk;
}

int Cli::Sweep() {
  const Settings s = ResolveSettings();
  const auto pages = LoadCorpusFlag(s);
  const KeyInventory inv = LoadInventoryFlag(s);
  const CorpusSplit split = SplitByReportHash(pages, s.seed, s.split_ratios);
  const auto train = SelectSplit(pages, split, SplitName::kTrain);
  const auto test = SelectSplit(pages, split, SplitName::kTest);
  const KeyInventory ranked = WithFrequencies(inv, train);
  auto backend = MakeBackend(s, ranked);
  SweepConfig config;
  config.fractions = s.fractions;
  config.delta = s.delta;
  config.coverage_mode = s.coverage_mode;
  config.level = s.level;
  config.extract = s.extract;
  const auto rows = CoverageSweep(test, ranked, *backend, config);
  WriteOutput(f_.out, SweepToCsv(rows), out_);
  if (!f_.json_out.empty()) WriteOutput(f_.json_out, SweepToJson(rows).dump(2) + "\n", out_);
  if (!f_.plot_out.empty()) WriteOutput(f_.plot_out, SweepPlotData(rows).dump(2) + "\n", out_);
  return kExitOk;
}

int Cli::MineKeys() {
  const Settings s = ResolveSettings();
  const auto pages = PagesOfSplit(LoadCorpusFlag(s), f_.split, s);
  const std::string from = f_.from.empty() ? "gold" : f_.from;
  if (from != "gold" && from != "extracted" && from != "both") {
    throw ConfigError("--from must be gold, extracted or both");
  }
  std::map<std::string, int64_t> counts;
  if (from != "extracted") {
    for (const auto& p : pages) {
      for (const auto& a : p.annotations) {
        const std::string k = NormalizeKey(a.surface_key);
        if (!k.empty()) ++counts[k];
      }
    }
  }
  std::optional<KeyInventory> inv;
  if (!s.inventory_path.empty()) inv = LoadInventory(s.inventory_path);
  if (from != "gold") {
    if (!inv) throw ConfigError("--from extracted needs --inventory");
    auto backend = MakeBackend(s, *inv);
    for (const auto& pred : ExtractCorpus(pages, *inv, *backend, s.extract)) {
      if (!pred.pair.surface_key) continue;
      const std::string k = NormalizeKey(*pred.pair.surface_key);
      if (!k.empty()) ++counts[k];
    }
  }
  std::vector<KeyCount> keys;
  for (const auto& [k, n] : counts) keys.push_back({k, n});
  SortKeyCounts(keys);
  json out;
  out["keys"] = json::array();
  for (const auto& k : keys) out["keys"].push_back({{"key", k.key}, {"count", k.frequency}});
  if (inv) {
    std::set<std::string> observed;
    for (const auto& k : keys) observed.insert(k.key);
    out["novel"] = json::array();
    for (const auto& k : keys) {
      if (!inv->Covers(k.key)) out["novel"].push_back({{"key", k.key}, {"count", k.frequency}});
    }
  }
  out["profile"] = json::array();
  for (const auto& row : KeyFrequencyProfile(pages)) {
    out["profile"].push_back({{"surface_key", row.surface_key},
                              {"count", row.count},
                              {"cumulative_coverage", row.cumulative_coverage}});
  }
  WriteOutput(f_.out, out.dump(2) + "\n", out_);
  return kExitOk;
}

int Cli::Cluster() {
  const Settings s = ResolveSettings();
  std::optional<KeyInventory> inv;
  if (!s.inventory_path.empty()) inv = LoadInventory(s.inventory_path);
  if (!f_.stats_out.empty()) {
    if (!inv) throw ConfigError("--stats-out needs --inventory");
    WriteOutput(f_.stats_out, ClusterStatsToJson(ComputeClusterStats(*inv)).dump(2) + "\n", out_);
  }
  if (f_.keys_file.empty()) {
    if (f_.stats_out.empty()) throw ConfigError("--keys is required");
    return kExitOk;
  }
  const json doc = json::parse(ReadFile(f_.keys_file));
  const json& list = doc.is_array() ? doc : (inv && doc.contains("novel") ? doc.at("novel")
                                                                          : doc.at("keys"));
  std::vector<KeyCount> keys;
  for (const auto& k : list) {
    keys.push_back({NormalizeKey(k.at("key").get<std::string>()), k.value("count", int64_t{1})});
  }
  auto provider = MakeEmbeddingProvider(s);
  std::vector<ClusterProposal> proposals;
  if (inv) {
    std::vector<KeyCount> novel;
    for (const auto& k : keys) {
      if (!inv->Covers(k.key)) novel.push_back(k);
    }
    proposals = ProposeClusters(novel, *inv, *provider, s.cluster_threshold);
  } else {
    proposals = ClusterKeys(keys, *provider, s.cluster_threshold);
  }
  std::string text;
  for (const auto& p : proposals) text += ProposalToJson(p).dump() + "\n";
  WriteOutput(f_.out, text, out_);
  return kExitOk;
}

int Cli::ReviewApply() {
  const Settings s = ResolveSettings();
  if (s.store_dir.empty()) throw ConfigError("--store is required");
  std::optional<KeyInventory> seed;
  if (!s.inventory_path.empty()) seed = LoadInventory(s.inventory_path);
  auto store = InventoryStore::Open(s.store_dir, seed);
  if (!f_.queue_file.empty()) {
    std::vector<QueueEntry> fresh;
    for (const auto& j : ReadJsonLines(f_.queue_file)) {
      QueueEntry e;
      e.proposal = ProposalFromJson(j.contains("proposal") ? j.at("proposal") : j);
      if (!store->Proposal(e.proposal.proposal_id)) fresh.push_back(std::move(e));
    }
    store->Enqueue(std::move(fresh));
  }
  std::string text;
  if (!f_.decisions_file.empty()) {
    for (const auto& j : ReadJsonLines(f_.decisions_file)) {
      const ReviewDecision d = DecisionFromJson(j);
      const DecisionOutcome o = store->ApplyDecision(d);
      text += json{{"proposal_id", d.proposal_id},
                   {"status", ProposalStatusName(o.proposal.status)},
                   {"changed", o.changed},
                   {"inventory_version", o.version_after}}
                  .dump() +
              "\n";
    }
  }
  WriteOutput(f_.out, text, out_);
  return kExitOk;
}

int Cli::LossCheck() {
  const Settings s = ResolveSettings();
  Rng rng(s.seed);
  double worst = 0.0;
  int64_t checked = 0;
  int skipped = 0;
  for (int i = 0; i < s.loss_instances; ++i) {
    const LossInstance inst = RandomLossInstance(rng, s.loss_max_len);
    const GradCheckResult r = GradCheck(inst, s.loss);
    if (r.skipped) {
      ++skipped;
      continue;
    }
    worst = std::max(worst, r.max_relative_error);
    checked += r.coordinates_checked;
  }
  out_ << "task=" << LossTaskName(s.loss.task) << " instances=" << s.loss_instances
       << " skipped=" << skipped << " coordinates=" << checked
       << " max_relative_error=" << FormatDouble(worst) << "\n";
  if (worst >= f_.tolerance) {
    err_ << "gradient check failed: " << FormatDouble(worst) << " >= " << f_.tolerance << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

int Cli::Serve() {
  const Settings s = ResolveSettings();
  if (s.store_dir.empty()) throw ConfigError("--store is required");
  std::optional<KeyInventory> seed;
  if (!s.inventory_path.empty()) seed = LoadInventory(s.inventory_path);
  auto store = InventoryStore::Open(s.store_dir, seed);
  auto backend = MakeBackend(s, *store->Current());
  auto provider = MakeEmbeddingProvider(s);
  ServiceContext ctx;
  ctx.store = store.get();
  ctx.backend = backend.get();
  ctx.provider = provider.get();
  ctx.settings = s;
  if (!s.corpus_path.empty()) ctx.corpus = LoadCorpus(s.corpus_path);

  // Route SIGINT/SIGTERM to a waiter thread that stops the server.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ApiService service(std::move(ctx));
  const int port = service.Bind(s.host, s.port);
  out_ << "listening on " << s.host << ":" << port << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.Stop();
  });
  service.Serve();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return kExitOk;
}

int Cli::Batch() {
  const Settings s = ResolveSettings();
  if (s.store_dir.empty()) throw ConfigError("--store is required");
  if (f_.pages.empty()) throw ConfigError("--pages is required");
  std::optional<KeyInventory> seed;
  if (!s.inventory_path.empty()) seed = LoadInventory(s.inventory_path);
  auto store = InventoryStore::Open(s.store_dir, seed);
  auto backend = MakeBackend(s, *store->Current());
  auto provider = MakeEmbeddingProvider(s);
  const auto batch = LoadCorpus(f_.pages);
  std::optional<std::vector<Page>> eval;
  if (!f_.eval_corpus.empty()) eval = LoadCorpus(f_.eval_corpus);
  LoopConfig config = s.loop;
  config.extract = s.extract;
  config.cluster_threshold = s.cluster_threshold;
  std::string id = f_.batch_id;
  if (id.empty()) id = "batch-" + std::to_string(store->BatchRecords().size() + 1);
  const BatchResult r =
      RunBatchIteration(id, batch, *store, *backend, *provider, config, eval ? &*eval : nullptr);
  WriteOutput(f_.out, BatchRecordToJson(r.record).dump(2) + "\n", out_);
  return kExitOk;
}

int Cli::Run(std::vector<std::string> args) {
  CLI::App app{"keycov: canonical-key-conditioned key-value extraction toolkit", "keycov"};
  app.require_subcommand(1);
  app.fallthrough();
  Opt(&app, "--config", f_.config, "settings file (sections, key = value)");
  Opt(&app, "--seed", f_.seed, "random seed");

  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic annotated corpus");
  Opt(gen, "--out", f_.out, "corpus output (JSON Lines; default stdout)");
  Opt(gen, "--inventory-out", f_.inventory_out, "planted inventory output (JSON)");
  Opt(gen, "--pages-count", f_.num_pages, "number of pages");
  Opt(gen, "--keys-count", f_.num_keys, "number of canonical keys");
  Opt(gen, "--zipf", f_.zipf, "Zipf exponent");
  Opt(gen, "--noise", f_.noise, "total OCR noise rate, split over four channels");
  Opt(gen, "--aliases-mean", f_.aliases_mean, "mean surface forms per key");

  auto* split = app.add_subcommand("split", "report-level hash split");
  Opt(split, "--corpus", f_.corpus, "corpus (JSON Lines)");
  Opt(split, "--ratios", f_.ratios, "train,validation,test ratios");
  Opt(split, "--out", f_.out, "output JSON (default stdout)");

  auto* extract = app.add_subcommand("extract", "extract key-value pairs");
  Opt(extract, "--corpus", f_.corpus, "corpus (JSON Lines)");
  Opt(extract, "--inventory", f_.inventory, "inventory (JSON)");
  Opt(extract, "--split", f_.split, "train, validation, test or all");
  Opt(extract, "--fraction", f_.fraction, "query only the top fraction (percent) of keys");
  Opt(extract, "--keys", f_.keys, "query only these comma-separated canonical keys");
  Opt(extract, "--budget", f_.budget, "chunk budget in characters");
  Opt(extract, "--overlap", f_.overlap, "chunk overlap in characters");
  extract->add_flag("--no-chunking", f_.no_chunking, "treat each page as one chunk");
  Opt(extract, "--max-aliases", f_.max_aliases, "aliases listed in value queries");
  extract->add_flag("--no-aliases", f_.no_aliases, "omit the variants clause");
  Opt(extract, "--null-offset", f_.null_offset, "added to the null score at decoding");
  Opt(extract, "--backend", f_.backend, "rule or external");
  Opt(extract, "--backend-command", f_.backend_command, "command for the external backend");
  Opt(extract, "--out", f_.out, "predictions output (default stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
  Opt(evaluate, "--corpus", f_.corpus, "gold corpus (JSON Lines)");
  Opt(evaluate, "--predictions", f_.predictions, "predictions (JSON Lines)");
  Opt(evaluate, "--inventory", f_.inventory, "inventory view for the coverage figure");
  Opt(evaluate, "--split", f_.split, "restrict gold to a split");
  Opt(evaluate, "--mode", f_.mode, "em, btm or both");
  Opt(evaluate, "--delta", f_.delta, "BTM tolerance in characters");
  Opt(evaluate, "--level", f_.level, "value or pair");
  Opt(evaluate, "--coverage-mode", f_.coverage_mode, "occurrence, type or surface");
  Opt(evaluate, "--out", f_.out, "report output (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "coverage sweep over inventory fractions");
  Opt(sweep, "--corpus", f_.corpus, "corpus (JSON Lines)");
  Opt(sweep, "--inventory", f_.inventory, "full inventory (JSON)");
  Opt(sweep, "--fractions", f_.fractions, "comma-separated percentages");
  Opt(sweep, "--delta", f_.delta, "BTM tolerance in characters");
  Opt(sweep, "--level", f_.level, "value or pair");
  Opt(sweep, "--coverage-mode", f_.coverage_mode, "occurrence, type or surface");
  Opt(sweep, "--ratios", f_.ratios, "train,validation,test ratios");
  Opt(sweep, "--budget", f_.budget, "chunk budget in characters");
  Opt(sweep, "--overlap", f_.overlap, "chunk overlap in characters");
  Opt(sweep, "--backend", f_.backend, "rule or external");
  Opt(sweep, "--backend-command", f_.backend_command, "command for the external backend");
  Opt(sweep, "--out", f_.out, "CSV output (default stdout)");
  Opt(sweep, "--json-out", f_.json_out, "table as JSON");
  Opt(sweep, "--plot-out", f_.plot_out, "column-oriented plot data (JSON)");

  auto* mine = app.add_subcommand("mine-keys", "collect observed surface keys");
  Opt(mine, "--corpus", f_.corpus, "corpus (JSON Lines)");
  Opt(mine, "--inventory", f_.inventory, "inventory; enables novel-key detection");
  Opt(mine, "--split", f_.split, "restrict to a split");
  Opt(mine, "--from", f_.from, "gold, extracted or both");
  Opt(mine, "--out", f_.out, "output JSON (default stdout)");

  auto* cluster = app.add_subcommand("cluster", "cluster keys into review proposals");
  Opt(cluster, "--keys", f_.keys_file, "keys JSON (mine-keys output or [{key,count}])");
  Opt(cluster, "--inventory", f_.inventory, "existing inventory for alias attachment");
  Opt(cluster, "--threshold", f_.threshold, "average-linkage cosine threshold");
  Opt(cluster, "--embeddings", f_.embeddings, "precomputed embeddings (JSON Lines)");
  Opt(cluster, "--stats-out", f_.stats_out, "clustering statistics of the inventory");
  Opt(cluster, "--out", f_.out, "proposals output (JSON Lines; default stdout)");

  auto* review = app.add_subcommand("review", "review queue operations");
  review->require_subcommand(1);
  auto* apply = review->add_subcommand("apply", "apply decisions to a store");
  Opt(apply, "--store", f_.store, "store directory");
  Opt(apply, "--inventory", f_.inventory, "inventory to seed an empty store");
  Opt(apply, "--queue", f_.queue_file, "proposals to enqueue first (JSON Lines)");
  Opt(apply, "--decisions", f_.decisions_file, "decisions (JSON Lines)");
  Opt(apply, "--out", f_.out, "outcomes (JSON Lines; default stdout)");

  auto* loss = app.add_subcommand("loss-check", "finite-difference check of loss gradients");
  Opt(loss, "--instances", f_.instances, "number of random instances");
  Opt(loss, "--max-len", f_.max_len, "maximum logit length");
  Opt(loss, "--task", f_.task, "extraction or canonicalization");
  Opt(loss, "--tolerance", f_.tolerance, "maximum accepted relative error");

  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  Opt(serve, "--store", f_.store, "store directory");
  Opt(serve, "--inventory", f_.inventory, "inventory to seed an empty store");
  Opt(serve, "--corpus", f_.corpus, "gold corpus for metrics");
  Opt(serve, "--host", f_.host, "bind address");
  Opt(serve, "--port", f_.port, "port (0 picks a free one)");
  Opt(serve, "--static-dir", f_.static_dir, "static assets served at /");
  Opt(serve, "--backend", f_.backend, "rule or external");
  Opt(serve, "--backend-command", f_.backend_command, "command for the external backend");
  Opt(serve, "--embeddings", f_.embeddings, "precomputed embeddings (JSON Lines)");
  Opt(serve, "--threshold", f_.threshold, "average-linkage cosine threshold");

  auto* batch = app.add_subcommand("batch", "run one expansion-loop iteration");
  Opt(batch, "--store", f_.store, "store directory");
  Opt(batch, "--inventory", f_.inventory, "inventory to seed an empty store");
  Opt(batch, "--pages", f_.pages, "batch pages (JSON Lines)");
  Opt(batch, "--eval-corpus", f_.eval_corpus, "pages for coverage (default: the batch)");
  Opt(batch, "--batch-id", f_.batch_id, "batch identifier");
  batch->add_flag("--auto", f_.auto_accept, "accept every proposal (decisions are logged)");
  Opt(batch, "--threshold", f_.threshold, "average-linkage cosine threshold");
  Opt(batch, "--embeddings", f_.embeddings, "precomputed embeddings (JSON Lines)");
  Opt(batch, "--out", f_.out, "record output (default stdout)");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out_ << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out_ << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err_ << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (gen->parsed()) return GenCorpus();
    if (split->parsed()) return Split();
    if (extract->parsed()) return Extract();
    if (evaluate->parsed()) return Evaluate();
    if (sweep->parsed()) return Sweep();
    if (mine->parsed()) return MineKeys();
    if (cluster->parsed()) return Cluster();
    if (apply->parsed()) return ReviewApply();
    if (loss->parsed()) return LossCheck();
    if (serve->parsed()) return Serve();
    if (batch->parsed()) return Batch();
  } catch (const IoError& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const json::exception& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  err_ << app.help();
  return kExitInvalid;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.Run(args);
}

}  // namespace keycov
