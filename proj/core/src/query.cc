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

#include "keycov/query.h"

#include <algorithm>

#include "keycov/errors.h"

namespace keycov {

namespace {

std::string JoinAliases(const std::vector<std::string>& aliases, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < aliases.size(); ++i) {
    if (i > 0) out += sep;
    out += aliases[i];
  }
  return out;
}

std::string VariantsClause(const std::vector<std::string>& aliases, QueryLanguage lang) {
  if (aliases.empty()) return "";
  if (lang == QueryLanguage::kChinese) {
    return "，文本中的键可能是该标准键的变体，例如" + JoinAliases(aliases, "、");
  }
  return ", and the key in the text could be the variants of the canonical key, such as, " +
         JoinAliases(aliases, ", ");
}

}  // namespace

std::vector<std::string> TopAliases(const KeyInventory& inv, const std::string& canonical,
                                    int max_aliases) {
  const CanonicalKeyEntry* e = inv.Find(canonical);
  if (e == nullptr) throw NotFoundError("unknown canonical key '" + canonical + "'");
  std::vector<std::string> aliases(e->aliases.begin(), e->aliases.end());
  std::stable_sort(aliases.begin(), aliases.end(), [e](const std::string& a, const std::string& b) {
    return e->AliasFrequency(a) > e->AliasFrequency(b);
  });
  if (max_aliases >= 0 && static_cast<int>(aliases.size()) > max_aliases) {
    aliases.resize(max_aliases);
  }
  return aliases;
}

ExtractionQuery BuildValueQuery(const std::string& canonical, const KeyInventory& inv,
                                int max_aliases, QueryLanguage lang) {
  ExtractionQuery q;
  q.canonical_key = canonical;
  q.kind = QueryKind::kValue;
  q.aliases_included = TopAliases(inv, canonical, max_aliases);
  q.rendered_text = (lang == QueryLanguage::kChinese ? "抽取键" + canonical + "的值"
                                                     : "Extract the value of the key " + canonical) +
                    VariantsClause(q.aliases_included, lang);
  return q;
}

ExtractionQuery BuildKeyQuery(const std::string& canonical, const KeyInventory& inv,
                              int max_aliases, QueryLanguage lang) {
  ExtractionQuery q;
  q.canonical_key = canonical;
  q.kind = QueryKind::kKey;
  q.aliases_included = TopAliases(inv, canonical, max_aliases);
  q.rendered_text =
      (lang == QueryLanguage::kChinese ? "找出文本中表示键" + canonical + "的字段名"
                                       : "Find the key in the text that denotes " + canonical) +
      VariantsClause(q.aliases_included, lang);
  return q;
}

std::string_view QueryKindName(QueryKind kind) {
  return kind == QueryKind::kKey ? "key" : "value";
}

}  // namespace keycov
