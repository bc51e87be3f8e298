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

#include "keycov/evaluation.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "keycov/errors.h"
#include "keycov/text.h"

namespace keycov {

void MatchCriterion::Validate() const {
  if (delta < 0) throw ValidationError("BTM delta must be non-negative");
}

bool EmMatch(std::string_view pred, std::string_view gold) { return pred == gold; }

bool BtmMatch(const Span& pred, const Span& gold, int64_t delta) {
  return std::abs(pred.start - gold.start) <= delta && std::abs(pred.end - gold.end) <= delta;
}

double PrfCounts::precision() const {
  return tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
}

double PrfCounts::recall() const {
  return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}

double PrfCounts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

PrfCounts& PrfCounts::operator+=(const PrfCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

int64_t MaximumBipartiteMatching(const std::vector<std::vector<int>>& adjacency, int right_size) {
  std::vector<int> match_right(right_size, -1);
  std::vector<char> seen;
  std::function<bool(int)> augment = [&](int u) {
    for (int v : adjacency[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      if (match_right[v] < 0 || augment(match_right[v])) {
        match_right[v] = u;
        return true;
      }
    }
    return false;
  };
  int64_t size = 0;
  for (size_t u = 0; u < adjacency.size(); ++u) {
    seen.assign(right_size, 0);
    if (augment(static_cast<int>(u))) ++size;
  }
  return size;
}

namespace {

struct GoldItem {
  const KVAnnotation* annotation;
  std::string value;
};

struct PageIndex {
  std::unordered_map<std::string, const Page*> by_id;
};

PageIndex IndexPages(const std::vector<Page>& gold) {
  PageIndex index;
  for (const Page& p : gold) {
    if (!index.by_id.emplace(p.page_id, &p).second) {
      throw ValidationError("duplicate page_id '" + p.page_id + "' in gold corpus");
    }
  }
  return index;
}

std::map<std::string, std::vector<const ExtractedPair*>> GroupByPage(
    const std::vector<PagePrediction>& predictions, const PageIndex& index) {
  std::map<std::string, std::vector<const ExtractedPair*>> out;
  for (const auto& p : predictions) {
    if (index.by_id.count(p.page_id) == 0) {
      throw ValidationError("prediction for unknown page '" + p.page_id + "'");
    }
    out[p.page_id].push_back(&p.pair);
  }
  return out;
}

bool ValueMatches(const ExtractedPair& pred, const Page& page, const KVAnnotation& gold,
                  const MatchCriterion& c) {
  if (!pred.value || !pred.value_span) return false;
  if (c.mode == MatchMode::kEm) return EmMatch(*pred.value, page.Slice(gold.value_span));
  return BtmMatch(*pred.value_span, gold.value_span, c.delta);
}

bool KeyMatches(const ExtractedPair& pred, const KVAnnotation& gold, const MatchCriterion& c) {
  if (!pred.surface_key || !pred.key_span) return false;
  if (c.mode == MatchMode::kEm) return EmMatch(*pred.surface_key, gold.surface_key);
  return BtmMatch(*pred.key_span, gold.key_span, c.delta);
}

}  // namespace

EvalReport ValuePrf(const std::vector<PagePrediction>& predictions, const std::vector<Page>& gold,
                    const MatchCriterion& criterion) {
  criterion.Validate();
  const PageIndex index = IndexPages(gold);
  const auto by_page = GroupByPage(predictions, index);
  EvalReport report{EvalLevel::kValue, criterion, {}, std::nullopt};

  for (const Page& page : gold) {
    std::map<std::string, std::vector<const KVAnnotation*>> gold_by_key;
    int64_t unkeyed = 0;
    for (const auto& a : page.annotations) {
      if (a.canonical_key) {
        gold_by_key[*a.canonical_key].push_back(&a);
      } else {
        ++unkeyed;
      }
    }
    report.counts.fn += unkeyed;

    std::map<std::string, const ExtractedPair*> pred_by_key;
    auto it = by_page.find(page.page_id);
    if (it != by_page.end()) {
      for (const ExtractedPair* p : it->second) {
        if (!p->value) continue;
        if (!pred_by_key.emplace(p->canonical_key, p).second) {
          throw ValidationError("two value predictions for key '" + p->canonical_key +
                                "' on page '" + page.page_id + "'");
        }
      }
    }

    for (const auto& [key, golds] : gold_by_key) {
      auto pit = pred_by_key.find(key);
      if (pit == pred_by_key.end()) {
        report.counts.fn += static_cast<int64_t>(golds.size());
        continue;
      }
      bool hit = false;
      for (const KVAnnotation* g : golds) {
        if (ValueMatches(*pit->second, page, *g, criterion)) {
          hit = true;
          break;
        }
      }
      if (hit) {
        report.counts.tp += 1;
        report.counts.fn += static_cast<int64_t>(golds.size()) - 1;
      } else {
        report.counts.fp += 1;
        report.counts.fn += static_cast<int64_t>(golds.size());
      }
    }
    for (const auto& [key, p] : pred_by_key) {
      if (gold_by_key.count(key) == 0) report.counts.fp += 1;
    }
  }
  return report;
}

EvalReport PairPrf(const std::vector<PagePrediction>& predictions, const std::vector<Page>& gold,
                   const MatchCriterion& criterion) {
  criterion.Validate();
  const PageIndex index = IndexPages(gold);
  const auto by_page = GroupByPage(predictions, index);
  EvalReport report{EvalLevel::kPair, criterion, {}, std::nullopt};

  for (const Page& page : gold) {
    static const std::vector<const ExtractedPair*> kNone;
    auto it = by_page.find(page.page_id);
    const auto& preds = it == by_page.end() ? kNone : it->second;
    std::vector<std::vector<int>> adjacency(preds.size());
    for (size_t i = 0; i < preds.size(); ++i) {
      for (size_t j = 0; j < page.annotations.size(); ++j) {
        const KVAnnotation& g = page.annotations[j];
        if (KeyMatches(*preds[i], g, criterion) && ValueMatches(*preds[i], page, g, criterion)) {
          adjacency[i].push_back(static_cast<int>(j));
        }
      }
    }
    const int64_t tp =
        MaximumBipartiteMatching(adjacency, static_cast<int>(page.annotations.size()));
    report.counts.tp += tp;
    report.counts.fp += static_cast<int64_t>(preds.size()) - tp;
    report.counts.fn += static_cast<int64_t>(page.annotations.size()) - tp;
  }
  return report;
}

std::vector<PagePrediction> ExtractCorpus(const std::vector<Page>& pages, const KeyInventory& view,
                                          LogitBackend& backend, const ExtractConfig& config) {
  std::vector<PagePrediction> out;
  for (const Page& page : pages) {
    for (auto& pair : ExtractPage(page.text, view, backend, config)) {
      out.push_back({page.page_id, std::move(pair)});
    }
  }
  return out;
}

std::vector<SweepRow> CoverageSweep(const std::vector<Page>& eval_pages, const KeyInventory& inv,
                                    LogitBackend& backend, const SweepConfig& config) {
  if (config.fractions.empty()) throw ConfigError("sweep: fraction list is empty");
  for (double f : config.fractions) {
    if (!(f > 0.0 && f <= 100.0)) throw ConfigError("sweep: fractions must lie in (0, 100]");
  }
  const MatchCriterion em = MatchCriterion::Em();
  const MatchCriterion btm = MatchCriterion::Btm(config.delta);
  btm.Validate();
  std::vector<SweepRow> rows;
  for (double f : config.fractions) {
    const KeyInventory view = TopFractionKeys(inv, f);
    const auto preds = ExtractCorpus(eval_pages, view, backend, config.extract);
    SweepRow row;
    row.fraction = f;
    row.coverage = Coverage(view, eval_pages, config.coverage_mode);
    if (config.level == EvalLevel::kPair) {
      row.em = PairPrf(preds, eval_pages, em).counts;
      row.btm = PairPrf(preds, eval_pages, btm).counts;
    } else {
      row.em = ValuePrf(preds, eval_pages, em).counts;
      row.btm = ValuePrf(preds, eval_pages, btm).counts;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string FormatDouble(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string SweepToCsv(const std::vector<SweepRow>& rows) {
  std::string out = "fraction,coverage,em_p,em_r,em_f1,btm_p,btm_r,btm_f1\n";
  for (const auto& r : rows) {
    const double cols[] = {r.fraction,       r.coverage,      r.em.precision(),  r.em.recall(),
                           r.em.f1(),        r.btm.precision(), r.btm.recall(), r.btm.f1()};
    for (size_t i = 0; i < std::size(cols); ++i) {
      if (i > 0) out += ',';
      out += FormatDouble(cols[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json CountsJson(const PrfCounts& c) {
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"fn", c.fn},
          {"precision", c.precision()},
          {"recall", c.recall()},
          {"f1", c.f1()}};
}

}  // namespace

nlohmann::json SweepToJson(const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"fraction", r.fraction},
                   {"coverage", r.coverage},
                   {"em_p", r.em.precision()},
                   {"em_r", r.em.recall()},
                   {"em_f1", r.em.f1()},
                   {"btm_p", r.btm.precision()},
                   {"btm_r", r.btm.recall()},
                   {"btm_f1", r.btm.f1()},
                   {"em", CountsJson(r.em)},
                   {"btm", CountsJson(r.btm)}});
  }
  return out;
}

nlohmann::json SweepPlotData(const std::vector<SweepRow>& rows) {
  nlohmann::json out;
  std::vector<double> fraction, coverage, em_p, em_r, em_f1, btm_p, btm_r, btm_f1;
  for (const auto& r : rows) {
    fraction.push_back(r.fraction);
    coverage.push_back(r.coverage);
    em_p.push_back(r.em.precision());
    em_r.push_back(r.em.recall());
    em_f1.push_back(r.em.f1());
    btm_p.push_back(r.btm.precision());
    btm_r.push_back(r.btm.recall());
    btm_f1.push_back(r.btm.f1());
  }
  out["x"] = "fraction";
  out["series"] = {{"fraction", fraction}, {"coverage", coverage}, {"em_p", em_p},
                   {"em_r", em_r},         {"em_f1", em_f1},       {"btm_p", btm_p},
                   {"btm_r", btm_r},       {"btm_f1", btm_f1}};
  return out;
}

std::string_view MatchModeName(MatchMode mode) { return mode == MatchMode::kBtm ? "btm" : "em"; }

std::optional<MatchMode> ParseMatchMode(std::string_view name) {
  if (name == "em") return MatchMode::kEm;
  if (name == "btm") return MatchMode::kBtm;
  return std::nullopt;
}

std::string_view EvalLevelName(EvalLevel level) {
  return level == EvalLevel::kValue ? "value" : "pair";
}

std::optional<EvalLevel> ParseEvalLevel(std::string_view name) {
  if (name == "value") return EvalLevel::kValue;
  if (name == "pair") return EvalLevel::kPair;
  return std::nullopt;
}

nlohmann::json EvalReportToJson(const EvalReport& r) {
  nlohmann::json j = CountsJson(r.counts);
  j["level"] = EvalLevelName(r.level);
  j["mode"] = MatchModeName(r.criterion.mode);
  if (r.criterion.mode == MatchMode::kBtm) j["delta"] = r.criterion.delta;
  j["coverage"] = r.coverage ? nlohmann::json(*r.coverage) : nlohmann::json(nullptr);
  j["precision_convention"] = "0 when there are no predictions";
  return j;
}

nlohmann::json PagePredictionToJson(const PagePrediction& p) {
  nlohmann::json j = ExtractedPairToJson(p.pair);
  j["page_id"] = p.page_id;
  return j;
}

PagePrediction PagePredictionFromJson(const nlohmann::json& j) {
  try {
    return {j.at("page_id").get<std::string>(), ExtractedPairFromJson(j)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("prediction: ") + e.what());
  }
}

std::vector<PagePrediction> ParsePredictions(std::string_view jsonl) {
  std::vector<PagePrediction> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(PagePredictionFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("predictions line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PagePrediction> LoadPredictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open predictions file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParsePredictions(buf.str());
}

std::string SerializePredictions(const std::vector<PagePrediction>& predictions) {
  std::string out;
  for (const auto& p : predictions) {
    out += PagePredictionToJson(p).dump();
    out += '\n';
  }
  return out;
}

}  // namespace keycov
