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

#include "keycov/chunk.h"

#include <algorithm>

#include "keycov/errors.h"

namespace keycov {

std::vector<Chunk> ChunkPage(std::u32string_view text, int64_t budget, int64_t overlap) {
  if (budget <= 0) throw ConfigError("chunk budget must be positive");
  if (overlap < 0 || overlap >= budget) throw ConfigError("chunk overlap must lie in [0, budget)");
  std::vector<Chunk> chunks;
  const auto len = static_cast<int64_t>(text.size());
  const int64_t stride = budget - overlap;
  for (int64_t origin = 0; origin < len; origin += stride) {
    const int64_t end = std::min(len, origin + budget);
    chunks.push_back({origin, std::u32string(text.substr(origin, end - origin))});
    if (end == len) break;
  }
  return chunks;
}

}  // namespace keycov
