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

#include "keycov/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "keycov/errors.h"
#include "keycov/text.h"

namespace keycov {

namespace {

// Header suffixes for alias surface forms.
constexpr std::u32string_view kAliasSuffixes[] = {
    U"情况", U"记录", U"所见", U"结果", U"描述", U"检查", U"说明", U"信息", U"内容", U"摘要",
};

// Value alphabet. No 'k', delimiters, whitespace, '*' or trailing
// punctuation, so values never contain a key or get trimmed.
constexpr std::u32string_view kValueAlphabet =
    U"0123456789血压正常未见异常心肺腹部软无痛神志清楚精神可饮食睡眠良好大小便已人日天土干刀左";

constexpr std::u32string_view kNameAlphabet = U"王李张刘陈杨黄赵吴周徐孙马朱胡郭何高林罗伟芳娜敏静丽强磊军洋";

std::u32string RandomString(Rng& rng, std::u32string_view alphabet, int length) {
  std::u32string s;
  s.reserve(length);
  for (int i = 0; i < length; ++i) {
    s.push_back(alphabet[rng.UniformInt(0, static_cast<int64_t>(alphabet.size()) - 1)]);
  }
  return s;
}

struct PlantedKey {
  std::string canonical;
  std::vector<std::u32string> surfaces;  // [0] is the canonical
  int max_value_length = 0;
};

}  // namespace

ZipfSampler::ZipfSampler(int n, double s) {
  if (n <= 0) throw ConfigError("Zipf sampler needs at least one rank");
  probs_.resize(n);
  double total = 0.0;
  for (int r = 0; r < n; ++r) {
    probs_[r] = 1.0 / std::pow(static_cast<double>(r + 1), s);
    total += probs_[r];
  }
  cdf_.resize(n);
  double running = 0.0;
  for (int r = 0; r < n; ++r) {
    probs_[r] /= total;
    running += probs_[r];
    cdf_[r] = running;
  }
  cdf_.back() = 1.0;
}

int ZipfSampler::Sample(Rng& rng) const {
  const double u = rng.Uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int>(it - cdf_.begin());
}

void GeneratorConfig::Validate() const {
  if (num_keys <= 0) throw ConfigError("generator: num_keys must be positive");
  if (num_pages < 0) throw ConfigError("generator: num_pages must be non-negative");
  if (surface_forms_mean < 1.0) throw ConfigError("generator: surface_forms_mean must be >= 1");
  if (max_surface_forms < 1 ||
      max_surface_forms > 1 + static_cast<int>(std::size(kAliasSuffixes))) {
    throw ConfigError("generator: max_surface_forms must lie in [1, 11]");
  }
  if (zipf_s < 0.0) throw ConfigError("generator: zipf_s must be non-negative");
  if (pages_per_report_min < 1 || pages_per_report_max < pages_per_report_min) {
    throw ConfigError("generator: bad pages-per-report range");
  }
  if (keys_per_page_min < 1 || keys_per_page_max < keys_per_page_min) {
    throw ConfigError("generator: bad keys-per-page range");
  }
  if (value_length_min < 1 || value_length_max < value_length_min) {
    throw ConfigError("generator: bad value-length range");
  }
  if (delimiters.empty()) throw ConfigError("generator: delimiter set is empty");
  if (!(pii_probability >= 0.0 && pii_probability <= 1.0)) {
    throw ConfigError("generator: pii_probability must lie in [0,1]");
  }
  noise.Validate();
}

std::string SyntheticKeyName(int rank) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "k%04d", rank + 1);
  return buf;
}

std::vector<Page> InjectCorpusNoise(const std::vector<Page>& pages, const NoiseConfig& noise,
                                    uint64_t seed, const ConfusionTable& table) {
  std::vector<Page> out;
  out.reserve(pages.size());
  for (const Page& p : pages) {
    const uint64_t page_seed = Fnv1a64(p.page_id, kFnvOffset ^ seed);
    out.push_back(InjectOcrNoise(p, noise, page_seed, table));
  }
  return out;
}

SyntheticCorpus GenerateSyntheticCorpus(const GeneratorConfig& config) {
  config.Validate();
  Rng rng(config.seed);

  // Planted keys.
  std::vector<PlantedKey> keys(config.num_keys);
  const double p_stop = 1.0 / config.surface_forms_mean;
  for (int r = 0; r < config.num_keys; ++r) {
    PlantedKey& k = keys[r];
    k.canonical = SyntheticKeyName(r);
    const std::u32string base = Utf8ToU32(k.canonical);
    k.surfaces.push_back(base);
    const int extra = std::min(rng.Geometric(p_stop), config.max_surface_forms - 1);
    // Distinct suffixes, chosen by a partial shuffle.
    std::vector<int> order(std::size(kAliasSuffixes));
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    for (int i = 0; i < extra; ++i) {
      const auto j = rng.UniformInt(i, static_cast<int64_t>(order.size()) - 1);
      std::swap(order[i], order[j]);
      k.surfaces.push_back(base + std::u32string(kAliasSuffixes[order[i]]));
    }
    k.max_value_length =
        static_cast<int>(rng.UniformInt(config.value_length_min, config.value_length_max));
  }

  const ZipfSampler zipf(config.num_keys, config.zipf_s);
  std::vector<int64_t> occurrences(config.num_keys, 0);
  std::vector<std::unordered_map<std::string, int64_t>> surface_counts(config.num_keys);

  SyntheticCorpus corpus;
  corpus.pages.reserve(config.num_pages);
  int report = 0;
  while (static_cast<int>(corpus.pages.size()) < config.num_pages) {
    ++report;
    char report_id[16];
    std::snprintf(report_id, sizeof(report_id), "r%05d", report);
    const auto pages_here =
        rng.UniformInt(config.pages_per_report_min, config.pages_per_report_max);
    for (int64_t pi = 1;
         pi <= pages_here && static_cast<int>(corpus.pages.size()) < config.num_pages; ++pi) {
      Page page;
      page.report_id = report_id;
      page.page_id = std::string(report_id) + "-p" + std::to_string(pi);

      std::vector<Span> pii;
      if (rng.Bernoulli(config.pii_probability)) {
        page.text += U"姓名：";
        const int64_t start = static_cast<int64_t>(page.text.size());
        page.text += RandomString(rng, kNameAlphabet, static_cast<int>(rng.UniformInt(2, 3)));
        pii.push_back({start, static_cast<int64_t>(page.text.size())});
      }

      const int want = static_cast<int>(std::min<int64_t>(
          rng.UniformInt(config.keys_per_page_min, config.keys_per_page_max), config.num_keys));
      std::vector<int> slots;
      std::vector<bool> used(config.num_keys, false);
      int attempts = 0;
      while (static_cast<int>(slots.size()) < want) {
        int r = zipf.Sample(rng);
        if (++attempts > 100 * want) {
          // Extremely skewed configs: fall back to the first unused rank.
          r = static_cast<int>(std::find(used.begin(), used.end(), false) - used.begin());
        }
        if (used[r]) continue;
        used[r] = true;
        slots.push_back(r);
      }

      for (int r : slots) {
        const PlantedKey& k = keys[r];
        if (!page.text.empty()) page.text.push_back(U'\n');
        const auto& surface =
            k.surfaces[rng.UniformInt(0, static_cast<int64_t>(k.surfaces.size()) - 1)];
        const auto& delim =
            config.delimiters[rng.UniformInt(0, static_cast<int64_t>(config.delimiters.size()) - 1)];
        const int value_len =
            static_cast<int>(rng.UniformInt(config.value_length_min, k.max_value_length));
        KVAnnotation a;
        a.key_span.start = static_cast<int64_t>(page.text.size());
        page.text += surface;
        a.key_span.end = static_cast<int64_t>(page.text.size());
        page.text += delim;
        a.value_span.start = static_cast<int64_t>(page.text.size());
        page.text.push_back(U'v');
        page.text += RandomString(rng, kValueAlphabet, value_len - 1);
        a.value_span.end = static_cast<int64_t>(page.text.size());
        a.surface_key = U32ToUtf8(surface);
        a.canonical_key = k.canonical;
        page.annotations.push_back(std::move(a));
        ++occurrences[r];
        ++surface_counts[r][U32ToUtf8(surface)];
      }
      if (!pii.empty()) page = Deidentify(page, pii);
      corpus.pages.push_back(std::move(page));
    }
  }

  std::vector<CanonicalKeyEntry> entries;
  entries.reserve(keys.size());
  for (int r = 0; r < config.num_keys; ++r) {
    CanonicalKeyEntry e;
    e.canonical = keys[r].canonical;
    for (size_t i = 1; i < keys[r].surfaces.size(); ++i) {
      const std::string alias = U32ToUtf8(keys[r].surfaces[i]);
      e.aliases.insert(alias);
      auto it = surface_counts[r].find(alias);
      if (it != surface_counts[r].end()) e.alias_frequency[alias] = it->second;
    }
    e.frequency = occurrences[r];
    e.short_field = keys[r].max_value_length <= config.short_threshold;
    entries.push_back(std::move(e));
  }
  corpus.inventory = KeyInventory(1, std::move(entries));

  const NoiseConfig& n = config.noise;
  if (n.substitution > 0 || n.whitespace_insertion > 0 || n.whitespace_deletion > 0 ||
      n.line_break_insertion > 0) {
    corpus.pages = InjectCorpusNoise(corpus.pages, n, config.seed);
  }
  return corpus;
}

}  // namespace keycov
