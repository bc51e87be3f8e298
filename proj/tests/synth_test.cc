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

#include <gtest/gtest.h>

#include "keycov/errors.h"
#include "keycov/text.h"

namespace keycov {
namespace {

TEST(ZipfTest, EmpiricalProportionsMatchClosedForm) {
  const ZipfSampler zipf(5, 1.0);
  const double h = 1.0 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4 + 1.0 / 5;
  std::vector<int> counts(5, 0);
  Rng rng(1);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[zipf.Sample(rng)];
  for (int r = 0; r < 5; ++r) {
    const double expected = (1.0 / (r + 1)) / h;
    EXPECT_NEAR(zipf.probabilities()[r], expected, 1e-12);
    EXPECT_NEAR(counts[r] / static_cast<double>(draws), expected, 0.02);
  }
}

TEST(GeneratorTest, SingleKeySinglePage) {
  GeneratorConfig g;
  g.num_keys = 1;
  g.surface_forms_mean = 1.0;
  g.num_pages = 1;
  g.keys_per_page_min = g.keys_per_page_max = 1;
  g.pii_probability = 0.0;
  g.delimiters = {U": "};
  const SyntheticCorpus c = GenerateSyntheticCorpus(g);
  ASSERT_EQ(c.pages.size(), 1u);
  const Page& p = c.pages[0];
  EXPECT_EQ(U32ToUtf8(p.text.substr(0, 8)), "k0001: v");
  ASSERT_EQ(p.annotations.size(), 1u);
  EXPECT_EQ(p.annotations[0].surface_key, "k0001");
  EXPECT_EQ(p.annotations[0].canonical_key, "k0001");
  EXPECT_EQ(p.annotations[0].key_span, (Span{0, 5}));
  EXPECT_EQ(p.annotations[0].value_span.start, 7);
  ASSERT_EQ(c.inventory.size(), 1u);
  EXPECT_TRUE(c.inventory.entries()[0].aliases.empty());
}

TEST(GeneratorTest, SameSeedSameBytes) {
  GeneratorConfig g;
  g.num_keys = 50;
  g.num_pages = 60;
  g.noise = NoiseConfig::Uniform(0.05);
  EXPECT_EQ(SerializeCorpus(GenerateSyntheticCorpus(g).pages),
            SerializeCorpus(GenerateSyntheticCorpus(g).pages));
  GeneratorConfig other = g;
  other.seed = g.seed + 1;
  EXPECT_NE(SerializeCorpus(GenerateSyntheticCorpus(g).pages),
            SerializeCorpus(GenerateSyntheticCorpus(other).pages));
}

TEST(GeneratorTest, PagesValidateAndMatchInventory) {
  GeneratorConfig g;
  g.num_keys = 120;
  g.num_pages = 300;
  const SyntheticCorpus c = GenerateSyntheticCorpus(g);
  EXPECT_EQ(c.pages.size(), 300u);
  for (const Page& p : c.pages) {
    ValidatePage(p);
    for (const KVAnnotation& a : p.annotations) {
      ASSERT_TRUE(a.canonical_key.has_value());
      EXPECT_EQ(c.inventory.Canonicalize(a.surface_key), a.canonical_key);
    }
  }
}

TEST(GeneratorTest, MeanClusterSizeNearTarget) {
  GeneratorConfig g;
  g.num_keys = 2000;
  g.num_pages = 0;
  const SyntheticCorpus c = GenerateSyntheticCorpus(g);
  double total = 0.0;
  for (const auto& e : c.inventory.entries()) total += static_cast<double>(e.cluster_size());
  EXPECT_NEAR(total / 2000.0, 1.8, 0.1);
}

TEST(GeneratorTest, RejectsBadConfig) {
  GeneratorConfig g;
  g.num_keys = 0;
  EXPECT_THROW(GenerateSyntheticCorpus(g), ConfigError);
  g = GeneratorConfig{};
  g.max_surface_forms = 40;
  EXPECT_THROW(GenerateSyntheticCorpus(g), ConfigError);
}

TEST(GeneratorTest, KeyNames) {
  EXPECT_EQ(SyntheticKeyName(0), "k0001");
  EXPECT_EQ(SyntheticKeyName(299), "k0300");
}

}  // namespace
}  // namespace keycov
