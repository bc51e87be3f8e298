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

#include <benchmark/benchmark.h>

#include "keycov/canonicalizer.h"
#include "keycov/embedding.h"
#include "keycov/synth.h"

namespace keycov {
namespace {

std::vector<KeyCount> SurfaceKeys(int num_keys) {
  GeneratorConfig g;
  g.num_keys = num_keys;
  g.num_pages = 10;
  const SyntheticCorpus corpus = GenerateSyntheticCorpus(g);
  std::vector<KeyCount> keys;
  for (const auto& e : corpus.inventory.entries()) {
    for (const auto& form : KeyInventory::SurfaceForms(e)) keys.push_back({form, e.frequency + 1});
  }
  return keys;
}

void BM_ClusterKeys(benchmark::State& state) {
  const std::vector<KeyCount> keys = SurfaceKeys(static_cast<int>(state.range(0)));
  const BigramHashEmbedder embedder;
  for (auto _ : state) benchmark::DoNotOptimize(ClusterKeys(keys, embedder));
  state.counters["keys"] = static_cast<double>(keys.size());
}
BENCHMARK(BM_ClusterKeys)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace keycov
