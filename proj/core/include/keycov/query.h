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

#ifndef KEYCOV_QUERY_H_
#define KEYCOV_QUERY_H_

#include <string>
#include <vector>

#include "keycov/inventory.h"

namespace keycov {

enum class QueryKind { kValue, kKey };

enum class QueryLanguage { kEnglish, kChinese };

struct ExtractionQuery {
  std::string canonical_key;
  QueryKind kind = QueryKind::kValue;
  std::vector<std::string> aliases_included;
  std::string rendered_text;
  friend bool operator==(const ExtractionQuery&, const ExtractionQuery&) = default;
};

// Up to max_aliases aliases of the canonical, most frequent first (ties
// lexicographic). Throws NotFoundError for an unknown canonical.
std::vector<std::string> TopAliases(const KeyInventory& inv, const std::string& canonical,
                                    int max_aliases);

// Value query: "Extract the value of the key <kc>", followed by a variants
// clause listing the chosen aliases when there are any.
ExtractionQuery BuildValueQuery(const std::string& canonical, const KeyInventory& inv,
                                int max_aliases, QueryLanguage lang = QueryLanguage::kEnglish);

// Key query: asks for the header on the page that names <kc>.
ExtractionQuery BuildKeyQuery(const std::string& canonical, const KeyInventory& inv,
                              int max_aliases, QueryLanguage lang = QueryLanguage::kEnglish);

std::string_view QueryKindName(QueryKind kind);

}  // namespace keycov

#endif  // KEYCOV_QUERY_H_
