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

#include "keycov/backend.h"
#include "keycov/extractor.h"
#include "keycov/synth.h"

namespace keycov {
namespace {

const SyntheticCorpus& Corpus() {
  static const SyntheticCorpus corpus = [] {
    GeneratorConfig g;
    g.num_pages = 50;
    g.noise = NoiseConfig::Uniform(0.02);
    return GenerateSyntheticCorpus(g);
  }();
  return corpus;
}

void BM_ExtractPage(benchmark::State& state) {
  const SyntheticCorpus& corpus = Corpus();
  const KeyInventory view = TopFractionKeys(corpus.inventory, static_cast<double>(state.range(0)));
  RuleBackend backend(corpus.inventory);
  ExtractConfig config;
  size_t i = 0;
  for (auto _ : state) {
    const Page& page = corpus.pages[i++ % corpus.pages.size()];
    benchmark::DoNotOptimize(ExtractPage(page.text, view, backend, config));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractPage)->Arg(10)->Arg(100)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace keycov
