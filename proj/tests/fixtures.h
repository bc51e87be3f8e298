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

// Deterministic fixtures shared by unit and acceptance tests.

#ifndef KEYCOV_TESTS_FIXTURES_H_
#define KEYCOV_TESTS_FIXTURES_H_

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "keycov/canonicalizer.h"
#include "keycov/random.h"
#include "keycov/text.h"

namespace keycov::testing {

struct PlantedGroups {
  std::vector<KeyCount> keys;
  // Planted partition; each group sorted.
  std::vector<std::vector<std::string>> groups;
};

// Groups of a random 12-character Han base plus 1-3 variants that append
// one distinct Han character, and singletons that are fresh random bases.
// Han characters are unchanged by key normalization.
inline PlantedGroups MakePlantedGroups(uint64_t seed, int num_groups, int num_singletons) {
  Rng rng(seed);
  auto han = [&rng] { return static_cast<char32_t>(0x4E00 + rng.UniformInt(0, 2000)); };
  auto base = [&] {
    std::u32string s;
    for (int i = 0; i < 12; ++i) s.push_back(han());
    return s;
  };
  PlantedGroups out;
  std::set<std::string> seen;
  auto add = [&](const std::u32string& s, std::vector<std::string>& group) {
    const std::string k = U32ToUtf8(s);
    if (!seen.insert(k).second) return;
    out.keys.push_back({k, rng.UniformInt(1, 50)});
    group.push_back(k);
  };
  for (int g = 0; g < num_groups; ++g) {
    const std::u32string b = base();
    std::vector<std::string> group;
    add(b, group);
    const int variants = static_cast<int>(rng.UniformInt(1, 3));
    std::set<char32_t> used;
    while (static_cast<int>(used.size()) < variants) {
      const char32_t c = han();
      if (used.insert(c).second) add(b + c, group);
    }
    std::sort(group.begin(), group.end());
    out.groups.push_back(group);
  }
  for (int i = 0; i < num_singletons; ++i) {
    std::vector<std::string> group;
    add(base(), group);
    out.groups.push_back(group);
  }
  std::sort(out.groups.begin(), out.groups.end());
  return out;
}

inline std::vector<std::vector<std::string>> SortedMemberSets(
    const std::vector<ClusterProposal>& proposals) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : proposals) {
    std::vector<std::string> g;
    for (const auto& m : p.members) g.push_back(m.key);
    std::sort(g.begin(), g.end());
    out.push_back(g);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace keycov::testing

#endif  // KEYCOV_TESTS_FIXTURES_H_
