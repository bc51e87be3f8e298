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

#include "keycov/inventory.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "keycov/errors.h"
#include "keycov/normalize.h"

namespace keycov {

using json = nlohmann::json;

int64_t CanonicalKeyEntry::AliasFrequency(const std::string& alias) const {
  auto it = alias_frequency.find(alias);
  return it == alias_frequency.end() ? 0 : it->second;
}

KeyInventory::KeyInventory(int64_t version, std::vector<CanonicalKeyEntry> entries)
    : version_(version), entries_(std::move(entries)) {
  Rebuild();
}

void KeyInventory::Rebuild() {
  lookup_.clear();
  for (size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.canonical.empty()) throw ValidationError("inventory: empty canonical key");
    if (!lookup_.emplace(e.canonical, i).second) {
      throw ValidationError("inventory: surface form '" + e.canonical +
                            "' appears more than once");
    }
  }
  for (size_t i = 0; i < entries_.size(); ++i) {
    for (const auto& alias : entries_[i].aliases) {
      if (!lookup_.emplace(alias, i).second) {
        throw ValidationError("inventory: alias '" + alias + "' of '" + entries_[i].canonical +
                              "' is already a canonical key or another key's alias");
      }
    }
  }
}

const CanonicalKeyEntry* KeyInventory::Find(std::string_view canonical) const {
  auto it = lookup_.find(std::string(canonical));
  if (it == lookup_.end()) return nullptr;
  const auto& e = entries_[it->second];
  return e.canonical == canonical ? &e : nullptr;
}

std::optional<std::string> KeyInventory::Canonicalize(std::string_view key) const {
  auto it = lookup_.find(std::string(key));
  if (it == lookup_.end()) return std::nullopt;
  return entries_[it->second].canonical;
}

std::vector<std::string> KeyInventory::SurfaceForms(const CanonicalKeyEntry& entry) {
  std::vector<std::string> forms;
  forms.reserve(entry.aliases.size() + 1);
  forms.push_back(entry.canonical);
  forms.insert(forms.end(), entry.aliases.begin(), entry.aliases.end());
  return forms;
}

// ---------------------------------------------------------------------------

InventoryEdit::InventoryEdit(const KeyInventory& base) : work_(base) {
  if (base.restriction()) {
    throw StateError("restricted inventory views are read-only");
  }
}

InventoryEdit& InventoryEdit::AddCanonical(const CanonicalKeyEntry& entry) {
  if (entry.canonical.empty()) throw ValidationError("canonical key must not be empty");
  auto it = work_.lookup_.find(entry.canonical);
  if (it != work_.lookup_.end()) {
    if (work_.entries_[it->second].canonical != entry.canonical) {
      throw ConflictError("'" + entry.canonical + "' is already an alias of '" +
                          work_.entries_[it->second].canonical + "'");
    }
  } else {
    CanonicalKeyEntry fresh;
    fresh.canonical = entry.canonical;
    fresh.frequency = entry.frequency;
    fresh.short_field = entry.short_field;
    work_.entries_.push_back(std::move(fresh));
    work_.lookup_.emplace(entry.canonical, work_.entries_.size() - 1);
    changed_ = true;
  }
  for (const auto& alias : entry.aliases) {
    AddAlias(entry.canonical, alias, entry.AliasFrequency(alias));
  }
  return *this;
}

InventoryEdit& InventoryEdit::AddAlias(std::string_view canonical, std::string_view alias,
                                       int64_t frequency) {
  const CanonicalKeyEntry* target = work_.Find(canonical);
  if (target == nullptr) {
    throw NotFoundError("unknown canonical key '" + std::string(canonical) + "'");
  }
  if (alias.empty()) throw ValidationError("alias must not be empty");
  const std::string a(alias);
  auto it = work_.lookup_.find(a);
  if (it != work_.lookup_.end()) {
    const auto& owner = work_.entries_[it->second];
    if (owner.canonical == a) {
      throw ConflictError("alias '" + a + "' is itself a canonical key");
    }
    if (owner.canonical != canonical) {
      throw ConflictError("alias '" + a + "' already belongs to '" + owner.canonical + "'");
    }
    return *this;  // already registered
  }
  const size_t index = static_cast<size_t>(target - work_.entries_.data());
  auto& e = work_.entries_[index];
  e.aliases.insert(a);
  if (frequency != 0) e.alias_frequency[a] = frequency;
  work_.lookup_.emplace(a, index);
  changed_ = true;
  return *this;
}

KeyInventory InventoryEdit::Commit() const {
  KeyInventory out = work_;
  if (changed_) out.version_ += 1;
  return out;
}

KeyInventory RegisterCanonical(const KeyInventory& inv, const CanonicalKeyEntry& entry) {
  return InventoryEdit(inv).AddCanonical(entry).Commit();
}

KeyInventory RegisterAlias(const KeyInventory& inv, std::string_view canonical,
                           std::string_view alias) {
  return InventoryEdit(inv).AddAlias(canonical, alias).Commit();
}

std::set<std::string> DetectNovelKeys(const std::set<std::string>& observed,
                                      const KeyInventory& inv) {
  std::set<std::string> novel;
  for (const auto& k : observed) {
    if (!inv.Covers(k)) novel.insert(k);
  }
  return novel;
}

KeyInventory TopFractionKeys(const KeyInventory& inv, double fraction) {
  if (!(fraction > 0.0 && fraction <= 100.0)) {
    throw ConfigError("fraction must lie in (0, 100]");
  }
  const size_t n = inv.entries_.size();
  KeyInventory view;
  view.version_ = inv.version_;
  view.restriction_ = fraction;
  if (n == 0) return view;

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& ea = inv.entries_[a];
    const auto& eb = inv.entries_[b];
    if (ea.frequency != eb.frequency) return ea.frequency > eb.frequency;
    return ea.canonical < eb.canonical;
  });
  // Round to nearest; the small bias keeps exact halves stable under
  // floating point (e.g. 50% of 4 -> 2).
  auto keep = static_cast<size_t>(std::floor(fraction * static_cast<double>(n) / 100.0 + 0.5 + 1e-9));
  keep = std::clamp<size_t>(keep, 1, n);
  std::vector<bool> selected(n, false);
  for (size_t i = 0; i < keep; ++i) selected[order[i]] = true;
  for (size_t i = 0; i < n; ++i) {
    if (selected[i]) view.entries_.push_back(inv.entries_[i]);
  }
  view.Rebuild();
  return view;
}

KeyInventory RestrictToKeys(const KeyInventory& inv, const std::vector<std::string>& keys) {
  std::set<std::string> wanted;
  for (const auto& k : keys) {
    if (inv.Find(k) == nullptr) throw NotFoundError("unknown canonical key '" + k + "'");
    wanted.insert(k);
  }
  KeyInventory view;
  view.version_ = inv.version_;
  const double pct = inv.empty() ? 100.0
                                 : 100.0 * static_cast<double>(wanted.size()) /
                                       static_cast<double>(inv.size());
  view.restriction_ = pct;
  for (const auto& e : inv.entries_) {
    if (wanted.count(e.canonical)) view.entries_.push_back(e);
  }
  view.Rebuild();
  return view;
}

// ---------------------------------------------------------------------------

std::optional<CoverageMode> ParseCoverageMode(std::string_view name) {
  if (name == "occurrence") return CoverageMode::kOccurrence;
  if (name == "type") return CoverageMode::kType;
  if (name == "surface") return CoverageMode::kSurface;
  return std::nullopt;
}

std::string_view CoverageModeName(CoverageMode mode) {
  switch (mode) {
    case CoverageMode::kOccurrence:
      return "occurrence";
    case CoverageMode::kType:
      return "type";
    case CoverageMode::kSurface:
      return "surface";
  }
  return "occurrence";
}

double Coverage(const KeyInventory& view, const std::vector<Page>& eval_pages,
                CoverageMode mode) {
  int64_t total = 0;
  int64_t covered = 0;
  std::set<std::string> observed;
  for (const Page& p : eval_pages) {
    for (const KVAnnotation& a : p.annotations) {
      if (mode == CoverageMode::kSurface) {
        ++total;
        if (view.Covers(NormalizeKey(a.surface_key))) ++covered;
        continue;
      }
      if (!a.canonical_key) continue;
      ++total;
      observed.insert(*a.canonical_key);
      if (view.Find(*a.canonical_key) != nullptr) ++covered;
    }
  }
  if (total == 0) throw ValidationError("coverage is undefined: no gold pairs");
  if (mode == CoverageMode::kType) {
    int64_t hit = 0;
    for (const auto& k : observed) {
      if (view.Find(k) != nullptr) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(observed.size());
  }
  return static_cast<double>(covered) / static_cast<double>(total);
}

KeyInventory WithFrequencies(const KeyInventory& inv, const std::vector<Page>& pages) {
  std::vector<CanonicalKeyEntry> entries = inv.entries();
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < entries.size(); ++i) {
    index[entries[i].canonical] = i;
    entries[i].frequency = 0;
    entries[i].alias_frequency.clear();
  }
  for (const Page& p : pages) {
    for (const KVAnnotation& a : p.annotations) {
      const std::string surface = NormalizeKey(a.surface_key);
      std::optional<std::string> owner =
          a.canonical_key && index.count(*a.canonical_key) ? a.canonical_key
                                                           : inv.Canonicalize(surface);
      if (!owner) continue;
      auto& e = entries[index.at(*owner)];
      ++e.frequency;
      if (e.aliases.count(surface)) ++e.alias_frequency[surface];
    }
  }
  KeyInventory out(inv.version() + 1, std::move(entries));
  return out;
}

// ---------------------------------------------------------------------------

json InventoryToJson(const KeyInventory& inv) {
  json entries = json::array();
  for (const auto& e : inv.entries()) {
    json je;
    je["canonical"] = e.canonical;
    je["aliases"] = std::vector<std::string>(e.aliases.begin(), e.aliases.end());
    je["frequency"] = e.frequency;
    je["short_field"] = e.short_field;
    if (!e.alias_frequency.empty()) je["alias_frequency"] = e.alias_frequency;
    entries.push_back(std::move(je));
  }
  json j;
  j["version"] = inv.version();
  j["entries"] = std::move(entries);
  if (inv.restriction()) j["restriction"] = {{"fraction", *inv.restriction()}};
  return j;
}

KeyInventory InventoryFromJson(const json& j) {
  try {
    std::vector<CanonicalKeyEntry> entries;
    for (const json& je : j.at("entries")) {
      CanonicalKeyEntry e;
      e.canonical = je.at("canonical").get<std::string>();
      for (const auto& a : je.value("aliases", json::array())) e.aliases.insert(a.get<std::string>());
      if (e.aliases.count(e.canonical)) {
        throw ValidationError("inventory: '" + e.canonical + "' lists itself as an alias");
      }
      e.frequency = je.value("frequency", int64_t{0});
      e.short_field = je.value("short_field", false);
      if (je.contains("alias_frequency")) {
        e.alias_frequency = je.at("alias_frequency").get<std::map<std::string, int64_t>>();
      }
      entries.push_back(std::move(e));
    }
    KeyInventory inv(j.at("version").get<int64_t>(), std::move(entries));
    if (j.contains("restriction")) {
      const double fraction = j.at("restriction").at("fraction").get<double>();
      return inv.MarkedAsRestriction(fraction);
    }
    return inv;
  } catch (const json::exception& e) {
    throw ParseError(std::string("inventory: ") + e.what());
  }
}

KeyInventory LoadInventory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open inventory file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ParseError("inventory file " + path.string() + ": " + e.what());
  }
  return InventoryFromJson(j);
}

void SaveInventory(const std::filesystem::path& path, const KeyInventory& inv) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write inventory file " + path.string());
  out << InventoryToJson(inv).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace keycov
