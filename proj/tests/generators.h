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


// Random inputs shared by unit and acceptance tests.

#ifndef KEYCOV_TESTS_GENERATORS_H_
#define KEYCOV_TESTS_GENERATORS_H_

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "keycov/backend.h"
#include "keycov/evaluation.h"
#include "keycov/random.h"
#include "test_util.h"

namespace keycov::testing {

inline ChunkLogits RandomLogits(Rng& rng, int64_t len) {
  ChunkLogits l;
  const int style = static_cast<int>(rng.UniformInt(0, 2));
  auto draw = [&] {
    if (style == 0) return 3.0 * rng.Normal();
    if (style == 1) return static_cast<double>(rng.UniformInt(-2, 2));  // many ties
    return rng.Bernoulli(0.1) ? 8.0 + rng.Normal() : -8.0 + rng.Normal();
  };
  for (int64_t i = 0; i < len; ++i) {
    l.start_logits.push_back(draw());
    l.end_logits.push_back(draw());
  }
  l.null_score = rng.Bernoulli(0.3) ? 4.0 * rng.Normal() + 8.0 : 4.0 * rng.Normal() - 4.0;
  return l;
}

// Prediction equal to the gold annotation, optionally with shifted spans.
// Shifted spans are clamped to the text and kept non-empty.
inline PagePrediction FromGold(const Page& page, size_t i, int64_t key_shift = 0,
                               int64_t value_shift = 0) {
  const KVAnnotation& a = page.annotations[i];
  const int64_t len = static_cast<int64_t>(page.text.size());
  auto shift = [len](const Span& s, int64_t by) {
    Span out;
    out.start = std::clamp<int64_t>(s.start + by, 0, len - 1);
    out.end = std::clamp<int64_t>(s.end + by, out.start + 1, len);
    return out;
  };
  ExtractedPair p;
  p.canonical_key = *a.canonical_key;
  p.key_span = shift(a.key_span, key_shift);
  p.surface_key = page.Slice(*p.key_span);
  p.value_span = shift(a.value_span, value_shift);
  p.value = page.Slice(*p.value_span);
  p.score = 20.0;
  return {page.page_id, p};
}

// Random small pages with predictions drawn near the gold spans so that
// every matching outcome occurs.
struct RandomCase {
  std::vector<Page> gold;
  std::vector<PagePrediction> predictions;
};

inline RandomCase MakeRandomCase(Rng& rng) {
  RandomCase rc;
  static const char* kKeys[] = {"a", "b", "c"};
  const int pages = static_cast<int>(rng.UniformInt(1, 3));
  for (int p = 0; p < pages; ++p) {
    std::vector<Field> fields;
    const int n = static_cast<int>(rng.UniformInt(0, 4));
    for (int i = 0; i < n; ++i) {
      const char* k = kKeys[rng.UniformInt(0, 2)];
      std::string v = "v";
      const int64_t len = rng.UniformInt(1, 4);
      for (int64_t c = 0; c < len; ++c) v += static_cast<char>('0' + rng.UniformInt(0, 2));
      fields.push_back({k, v, std::nullopt});
    }
    Page page = MakePage("p" + std::to_string(p), fields);
    rc.gold.push_back(page);
    std::set<std::string> used;
    const int m = static_cast<int>(rng.UniformInt(0, 4));
    for (int i = 0; i < m; ++i) {
      ExtractedPair pair;
      if (!page.annotations.empty() && rng.Bernoulli(0.7)) {
        const size_t j = rng.UniformInt(0, static_cast<int64_t>(page.annotations.size()) - 1);
        pair = FromGold(page, j, rng.UniformInt(-1, 1), rng.UniformInt(-2, 2)).pair;
      } else {
        pair.canonical_key = kKeys[rng.UniformInt(0, 2)];
        pair.surface_key = pair.canonical_key;
        pair.key_span = Span{0, 1};
        pair.value_span = Span{2, 3};
        pair.value = "v9";
      }
      if (!used.insert(pair.canonical_key).second) continue;
      rc.predictions.push_back({page.page_id, pair});
    }
  }
  return rc;
}

}  // namespace keycov::testing

#endif  // KEYCOV_TESTS_GENERATORS_H_
