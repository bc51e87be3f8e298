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

#include "keycov/decoder.h"
#include "keycov/loss.h"
#include "keycov/random.h"

namespace keycov {
namespace {

ChunkLogits MakeLogits(int64_t len, uint64_t seed) {
  Rng rng(seed);
  ChunkLogits l;
  for (int64_t i = 0; i < len; ++i) {
    l.start_logits.push_back(3.0 * rng.Normal());
    l.end_logits.push_back(3.0 * rng.Normal());
  }
  l.null_score = rng.Normal();
  return l;
}

void BM_DecodeSpans(benchmark::State& state) {
  const ChunkLogits l = MakeLogits(state.range(0), 1);
  const DecodeConfig c;
  for (auto _ : state) benchmark::DoNotOptimize(DecodeSpans(l, c, false));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DecodeSpans)->Arg(64)->Arg(448)->Arg(2048);

void BM_TotalLoss(benchmark::State& state) {
  const ChunkLogits l = MakeLogits(state.range(0), 2);
  const LossConfig c = LossConfig::Extraction();
  const Span gold{3, 9};
  for (auto _ : state) benchmark::DoNotOptimize(TotalLoss(l, gold, c));
}
BENCHMARK(BM_TotalLoss)->Arg(32)->Arg(448);

}  // namespace
}  // namespace keycov
