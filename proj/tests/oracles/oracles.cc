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

#include "oracles/oracles.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "keycov/text.h"

namespace keycov::oracle {

namespace {

// Top-n indices: index i is in the set iff fewer than n indices beat it,
// where j beats i when v[j] > v[i] or (v[j] == v[i] and j < i).
std::set<int64_t> TopSet(const std::vector<double>& v, int n) {
  std::set<int64_t> out;
  for (size_t i = 0; i < v.size(); ++i) {
    int beaten_by = 0;
    for (size_t j = 0; j < v.size(); ++j) {
      if (v[j] > v[i] || (v[j] == v[i] && j < i)) ++beaten_by;
    }
    if (beaten_by < n) out.insert(static_cast<int64_t>(i));
  }
  return out;
}

}  // namespace

std::vector<int64_t> BruteAdmissibleEnds(int64_t start, const std::vector<double>& end_logits,
                                         double mass, int cap) {
  const auto len = static_cast<int64_t>(end_logits.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (int64_t j = start; j < len; ++j) peak = std::max(peak, end_logits[j]);
  std::vector<std::pair<double, int64_t>> items;
  double z = 0.0;
  for (int64_t j = start; j < len; ++j) {
    const double p = std::exp(end_logits[j] - peak);
    items.push_back({p, j});
    z += p;
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<int64_t> out;
  double acc = 0.0;
  for (const auto& [p, j] : items) {
    acc += p / z;
    if (j - start + 1 <= cap) out.push_back(j);
    if (acc >= mass - 1e-12) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<SpanCandidate> BruteDecode(const ChunkLogits& logits, const DecodeConfig& config,
                                         bool short_field) {
  const auto len = static_cast<int64_t>(logits.start_logits.size());
  if (len == 0) return std::nullopt;
  const int cap = short_field ? config.short_max_span : config.max_span;
  const std::set<int64_t> starts = TopSet(logits.start_logits, config.top_n);
  const std::set<int64_t> ends = TopSet(logits.end_logits, config.top_n);
  std::optional<SpanCandidate> best;
  for (int64_t s = 0; s < len; ++s) {
    const std::vector<int64_t> admissible =
        BruteAdmissibleEnds(s, logits.end_logits, config.mass, cap);
    for (int64_t e = 0; e < len; ++e) {
      if (!starts.count(s) || !ends.count(e) || e < s || e - s + 1 > cap) continue;
      if (std::find(admissible.begin(), admissible.end(), e) == admissible.end()) continue;
      const double score = logits.start_logits[s] + logits.end_logits[e];
      const auto key = std::make_tuple(-score, s, e);
      if (!best || key < std::make_tuple(-best->score, best->start, best->end - 1)) {
        best = SpanCandidate{s, e + 1, score};
      }
    }
  }
  if (!best) return std::nullopt;
  if (logits.null_score + config.null_offset > best->score) return std::nullopt;
  return best;
}

bool ExactMatch(const std::string& pred, const std::string& gold) {
  if (pred.size() != gold.size()) return false;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] != gold[i]) return false;
  }
  return true;
}

bool BoundaryMatch(const Span& pred, const Span& gold, int64_t delta) {
  const int64_t ds = pred.start > gold.start ? pred.start - gold.start : gold.start - pred.start;
  const int64_t de = pred.end > gold.end ? pred.end - gold.end : gold.end - pred.end;
  return ds <= delta && de <= delta;
}

namespace {

const Page* FindPage(const std::vector<Page>& gold, const std::string& id) {
  for (const Page& p : gold) {
    if (p.page_id == id) return &p;
  }
  return nullptr;
}

bool ValueOk(const ExtractedPair& pred, const Page& page, const KVAnnotation& g,
             const MatchCriterion& c) {
  if (!pred.value || !pred.value_span) return false;
  if (c.mode == MatchMode::kEm) return ExactMatch(*pred.value, page.Slice(g.value_span));
  return BoundaryMatch(*pred.value_span, g.value_span, c.delta);
}

bool KeyOk(const ExtractedPair& pred, const KVAnnotation& g, const MatchCriterion& c) {
  if (!pred.surface_key || !pred.key_span) return false;
  if (c.mode == MatchMode::kEm) return ExactMatch(*pred.surface_key, g.surface_key);
  return BoundaryMatch(*pred.key_span, g.key_span, c.delta);
}

// Largest number of disjoint (pred, gold) edges, by exhaustive search.
int64_t BestAssignment(const std::vector<std::vector<bool>>& ok, size_t i,
                       std::vector<bool>& used) {
  if (i == ok.size()) return 0;
  int64_t best = BestAssignment(ok, i + 1, used);
  for (size_t j = 0; j < used.size(); ++j) {
    if (used[j] || !ok[i][j]) continue;
    used[j] = true;
    best = std::max(best, 1 + BestAssignment(ok, i + 1, used));
    used[j] = false;
  }
  return best;
}

}  // namespace

PrfCounts BrutePairCounts(const std::vector<PagePrediction>& predictions,
                          const std::vector<Page>& gold, const MatchCriterion& criterion) {
  PrfCounts c;
  for (const Page& page : gold) {
    std::vector<const ExtractedPair*> preds;
    for (const auto& p : predictions) {
      if (p.page_id == page.page_id) preds.push_back(&p.pair);
    }
    std::vector<std::vector<bool>> ok(preds.size(),
                                      std::vector<bool>(page.annotations.size(), false));
    for (size_t i = 0; i < preds.size(); ++i) {
      for (size_t j = 0; j < page.annotations.size(); ++j) {
        ok[i][j] = KeyOk(*preds[i], page.annotations[j], criterion) &&
                   ValueOk(*preds[i], page, page.annotations[j], criterion);
      }
    }
    std::vector<bool> used(page.annotations.size(), false);
    const int64_t tp = BestAssignment(ok, 0, used);
    c.tp += tp;
    c.fp += static_cast<int64_t>(preds.size()) - tp;
    c.fn += static_cast<int64_t>(page.annotations.size()) - tp;
  }
  return c;
}

PrfCounts BruteValueCounts(const std::vector<PagePrediction>& predictions,
                           const std::vector<Page>& gold, const MatchCriterion& criterion) {
  PrfCounts c;
  // Cells are (page, key); a cell with gold contributes one outcome for the
  // prediction and one fn for every gold value left unmatched.
  std::set<std::pair<std::string, std::string>> cells;
  for (const Page& page : gold) {
    for (const auto& a : page.annotations) {
      if (a.canonical_key) {
        cells.insert({page.page_id, *a.canonical_key});
      } else {
        ++c.fn;
      }
    }
  }
  for (const auto& p : predictions) {
    if (p.pair.value) cells.insert({p.page_id, p.pair.canonical_key});
  }
  for (const auto& [page_id, key] : cells) {
    const Page* page = FindPage(gold, page_id);
    std::vector<const KVAnnotation*> golds;
    for (const auto& a : page->annotations) {
      if (a.canonical_key && *a.canonical_key == key) golds.push_back(&a);
    }
    const ExtractedPair* pred = nullptr;
    for (const auto& p : predictions) {
      if (p.page_id == page_id && p.pair.value && p.pair.canonical_key == key) pred = &p.pair;
    }
    const auto n = static_cast<int64_t>(golds.size());
    if (!pred) {
      c.fn += n;
      continue;
    }
    const bool hit = std::any_of(golds.begin(), golds.end(), [&](const KVAnnotation* g) {
      return ValueOk(*pred, *page, *g, criterion);
    });
    if (hit) {
      c.tp += 1;
      c.fn += n - 1;
    } else {
      c.fp += 1;
      c.fn += n;
    }
  }
  return c;
}

std::vector<std::vector<int>> BruteAverageLinkage(const std::vector<std::vector<double>>& sim,
                                                  double threshold) {
  std::vector<std::vector<int>> clusters;
  for (size_t i = 0; i < sim.size(); ++i) clusters.push_back({static_cast<int>(i)});
  auto mean = [&](const std::vector<int>& a, const std::vector<int>& b) {
    double s = 0.0;
    for (int x : a) {
      for (int y : b) s += sim[x][y];
    }
    return s / static_cast<double>(a.size() * b.size());
  };
  for (;;) {
    int bi = -1, bj = -1;
    double best = -std::numeric_limits<double>::infinity();
    // Clusters stay sorted by smallest member, so (i, j) order is id order.
    for (size_t i = 0; i < clusters.size(); ++i) {
      for (size_t j = i + 1; j < clusters.size(); ++j) {
        const double m = mean(clusters[i], clusters[j]);
        if (m > best + 1e-12) {
          best = m;
          bi = static_cast<int>(i);
          bj = static_cast<int>(j);
        }
      }
    }
    if (bi < 0 || best < threshold) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    std::sort(clusters[bi].begin(), clusters[bi].end());
    clusters.erase(clusters.begin() + bj);
  }
  return clusters;
}

std::vector<double> NumericGradient(const LossInstance& instance, const LossConfig& config,
                                    double h) {
  std::vector<double> out;
  auto probe = [&](const std::function<double&(ChunkLogits&)>& slot) {
    ChunkLogits plus = instance.logits;
    ChunkLogits minus = instance.logits;
    slot(plus) += h;
    slot(minus) -= h;
    const double fp = TotalLoss(plus, instance.gold, config).total;
    const double fm = TotalLoss(minus, instance.gold, config).total;
    out.push_back((fp - fm) / (2.0 * h));
  };
  const size_t len = instance.logits.start_logits.size();
  for (size_t i = 0; i < len; ++i) {
    probe([i](ChunkLogits& l) -> double& { return l.start_logits[i]; });
  }
  for (size_t i = 0; i < len; ++i) {
    probe([i](ChunkLogits& l) -> double& { return l.end_logits[i]; });
  }
  probe([](ChunkLogits& l) -> double& { return l.null_score; });
  return out;
}

namespace {

// Smoothed cross-entropy over [null, x_0, ..., x_{L-1}] with target index t.
double Ce(double null_score, const std::vector<double>& x, size_t t, double eps) {
  std::vector<double> all = {null_score};
  all.insert(all.end(), x.begin(), x.end());
  double m = all[0];
  for (double v : all) m = std::max(m, v);
  double z = 0.0;
  for (double v : all) z += std::exp(v - m);
  const double lse = m + std::log(z);
  const double k = static_cast<double>(all.size());
  double loss = 0.0;
  for (size_t i = 0; i < all.size(); ++i) {
    const double q = (i == t ? 1.0 - eps : 0.0) + eps / k;
    loss -= q * (all[i] - lse);
  }
  return loss;
}

std::vector<double> Softmax(const std::vector<double>& x) {
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  std::vector<double> p(x.size());
  double z = 0.0;
  for (size_t i = 0; i < x.size(); ++i) z += p[i] = std::exp(x[i] - m);
  for (double& v : p) v /= z;
  return p;
}

}  // namespace

double DirectTotalLoss(const ChunkLogits& logits, const std::optional<Span>& gold,
                       const LossConfig& config) {
  const auto& s = logits.start_logits;
  const auto& e = logits.end_logits;
  const size_t ts = gold ? static_cast<size_t>(gold->start) + 1 : 0;
  const size_t te = gold ? static_cast<size_t>(gold->end - 1) + 1 : 0;
  double weight = 1.0;
  if (gold && gold->length() <= config.short_threshold) weight = config.short_weight;
  const double ce = Ce(logits.null_score, s, ts, config.epsilon) +
                    Ce(logits.null_score, e, te, config.epsilon);

  double hinge;
  if (gold) {
    hinge = config.margin - (s[gold->start] + e[gold->end - 1] - logits.null_score);
  } else {
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < s.size(); ++i) {
      for (size_t j = i; j < e.size(); ++j) best = std::max(best, s[i] + e[j]);
    }
    hinge = config.margin - (logits.null_score - best);
  }
  hinge = std::max(0.0, hinge);

  double length = 0.0;
  if (gold) {
    const auto ps = Softmax(s);
    const auto pe = Softmax(e);
    double es = 0.0, ee = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
      es += ps[i] * static_cast<double>(i);
      ee += pe[i] * static_cast<double>(i);
    }
    const double x = (ee - es + 1.0 - static_cast<double>(gold->length())) / config.length_scale;
    length = std::log1p(std::exp(x));
  }
  return weight * ce + config.margin_weight * hinge + config.length_weight * length;
}

}  // namespace keycov::oracle
