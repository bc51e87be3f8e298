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

// The canonical key inventory: canonical keys, their alias sets and the
// canonicalization lookup over every known surface form. Inventories are
// immutable snapshots; every mutation returns a new snapshot with a higher
// version.

#ifndef KEYCOV_INVENTORY_H_
#define KEYCOV_INVENTORY_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "keycov/corpus.h"

namespace keycov {

struct CanonicalKeyEntry {
  std::string canonical;
  std::set<std::string> aliases;
  // Training-split occurrences of any surface form of this key.
  int64_t frequency = 0;
  bool short_field = false;
  // Optional per-alias occurrence counts; missing aliases count as 0.
  std::map<std::string, int64_t> alias_frequency;

  int64_t AliasFrequency(const std::string& alias) const;
  int64_t cluster_size() const { return 1 + static_cast<int64_t>(aliases.size()); }

  friend bool operator==(const CanonicalKeyEntry&, const CanonicalKeyEntry&) = default;
};

class KeyInventory {
 public:
  KeyInventory() = default;

  // Validates disjointness; throws ValidationError on violation.
  KeyInventory(int64_t version, std::vector<CanonicalKeyEntry> entries);

  int64_t version() const { return version_; }
  const std::vector<CanonicalKeyEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }

  // Percentage this view was restricted to, if it is a restricted view.
  std::optional<double> restriction() const { return restriction_; }
  // Same snapshot marked as a view restricted to `fraction` percent.
  KeyInventory MarkedAsRestriction(double fraction) const {
    KeyInventory copy = *this;
    copy.restriction_ = fraction;
    return copy;
  }

  const CanonicalKeyEntry* Find(std::string_view canonical) const;

  // psi: the canonical key owning `key` (canonical itself or an alias).
  std::optional<std::string> Canonicalize(std::string_view key) const;
  bool Covers(std::string_view key) const { return lookup_.count(std::string(key)) > 0; }

  // Canonical plus aliases of one entry.
  static std::vector<std::string> SurfaceForms(const CanonicalKeyEntry& entry);
  // Number of distinct surface forms across all entries.
  size_t surface_form_count() const { return lookup_.size(); }

  friend bool operator==(const KeyInventory& a, const KeyInventory& b) {
    return a.version_ == b.version_ && a.entries_ == b.entries_ &&
           a.restriction_ == b.restriction_;
  }

 private:
  friend class InventoryEdit;
  friend KeyInventory TopFractionKeys(const KeyInventory&, double);
  friend KeyInventory RestrictToKeys(const KeyInventory&, const std::vector<std::string>&);

  void Rebuild();

  int64_t version_ = 0;
  std::vector<CanonicalKeyEntry> entries_;
  std::optional<double> restriction_;
  std::unordered_map<std::string, size_t> lookup_;
};

// Accumulates several registrations and commits them as one new version.
// The version advances by exactly one iff something changed.
class InventoryEdit {
 public:
  explicit InventoryEdit(const KeyInventory& base);

  // Adds the canonical (no-op if present) and then each of entry.aliases.
  // Throws ConflictError if the canonical is already an alias, or on any
  // alias conflict.
  InventoryEdit& AddCanonical(const CanonicalKeyEntry& entry);
  // No-op if alias already belongs to canonical. Throws NotFoundError for an
  // unknown canonical and ConflictError if alias is owned elsewhere or is a
  // canonical key.
  InventoryEdit& AddAlias(std::string_view canonical, std::string_view alias,
                          int64_t frequency = 0);

  bool changed() const { return changed_; }
  KeyInventory Commit() const;

 private:
  KeyInventory work_;
  bool changed_ = false;
};

KeyInventory RegisterCanonical(const KeyInventory& inv, const CanonicalKeyEntry& entry);
KeyInventory RegisterAlias(const KeyInventory& inv, std::string_view canonical,
                           std::string_view alias);

// observed minus every known surface form.
std::set<std::string> DetectNovelKeys(const std::set<std::string>& observed,
                                      const KeyInventory& inv);

// Ranks canonicals by frequency (descending, ties by canonical string) and
// keeps round(fraction/100 * size) of them, at least one. Entry order of the
// base inventory is preserved; the version is unchanged.
KeyInventory TopFractionKeys(const KeyInventory& inv, double fraction);
// Restricts to the named canonicals; throws NotFoundError for unknown names.
KeyInventory RestrictToKeys(const KeyInventory& inv, const std::vector<std::string>& keys);

enum class CoverageMode {
  kOccurrence,  // gold pairs whose canonical key is in the view
  kType,        // distinct observed canonicals present in the view
  kSurface,     // gold pairs whose normalized surface key resolves in the view
};

std::optional<CoverageMode> ParseCoverageMode(std::string_view name);
std::string_view CoverageModeName(CoverageMode mode);

// Throws ValidationError when there is nothing to measure (zero gold pairs).
double Coverage(const KeyInventory& view, const std::vector<Page>& eval_pages,
                CoverageMode mode = CoverageMode::kOccurrence);

// New snapshot whose frequencies are recounted from `pages` (normally the
// training split). Surface keys are normalized before lookup.
KeyInventory WithFrequencies(const KeyInventory& inv, const std::vector<Page>& pages);

nlohmann::json InventoryToJson(const KeyInventory& inv);
KeyInventory InventoryFromJson(const nlohmann::json& j);
KeyInventory LoadInventory(const std::filesystem::path& path);
void SaveInventory(const std::filesystem::path& path, const KeyInventory& inv);

}  // namespace keycov

#endif  // KEYCOV_INVENTORY_H_
