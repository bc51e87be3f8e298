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

#ifndef KEYCOV_CHUNK_H_
#define KEYCOV_CHUNK_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace keycov {

struct Chunk {
  int64_t origin = 0;  // global offset of text[0]
  std::u32string text;
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// Chunk k starts at k * (budget - overlap); chunks are emitted until one
// reaches the end of the text. Empty text yields no chunks. Throws
// ConfigError unless 0 <= overlap < budget.
std::vector<Chunk> ChunkPage(std::u32string_view text, int64_t budget, int64_t overlap);

}  // namespace keycov

#endif  // KEYCOV_CHUNK_H_
