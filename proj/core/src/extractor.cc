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

#include "keycov/extractor.h"

#include <algorithm>

#include "keycov/errors.h"
#include "keycov/text.h"

namespace keycov {

void ExtractConfig::Validate() const {
  if (chunking) {
    if (budget <= 0) throw ConfigError("extractor: budget must be positive");
    if (overlap < 0 || overlap >= budget) {
      throw ConfigError("extractor: overlap must lie in [0, budget)");
    }
  }
  decode.Validate();
}

std::optional<SpanCandidate> RunQuery(std::u32string_view text, const std::vector<Chunk>& chunks,
                                      const ExtractionQuery& query, LogitBackend& backend,
                                      const DecodeConfig& decode, bool short_field) {
  std::vector<std::optional<SpanCandidate>> per_chunk;
  per_chunk.reserve(chunks.size());
  for (size_t ci = 0; ci < chunks.size(); ++ci) {
    const Chunk& chunk = chunks[ci];
    ChunkLogits logits;
    try {
      logits = backend.Predict(query, chunk.text);
      logits.Validate(chunk.text.size());
    } catch (const Error& e) {
      throw BackendError(std::string(QueryKindName(query.kind)) + " query for '" +
                         query.canonical_key + "' failed on chunk " + std::to_string(ci) +
                         " (origin " + std::to_string(chunk.origin) + "): " + e.what());
    }
    auto local = DecodeSpans(logits, decode, short_field);
    if (!local) {
      per_chunk.emplace_back();
      continue;
    }
    auto cleaned = PostprocessSpan(text, {chunk.origin + local->start, chunk.origin + local->end});
    if (!cleaned) {
      per_chunk.emplace_back();
      continue;
    }
    per_chunk.push_back(SpanCandidate{cleaned->start, cleaned->end, local->score});
  }
  return MergeChunkCandidates(per_chunk);
}

std::vector<ExtractedPair> ExtractPage(std::u32string_view text, const KeyInventory& view,
                                       LogitBackend& backend, const ExtractConfig& config) {
  config.Validate();
  std::vector<ExtractedPair> pairs;
  if (text.empty()) return pairs;
  const auto len = static_cast<int64_t>(text.size());
  const std::vector<Chunk> chunks = config.chunking
                                        ? ChunkPage(text, config.budget, config.overlap)
                                        : ChunkPage(text, len, 0);
  const int max_aliases = config.include_aliases ? config.max_aliases : 0;
  for (const auto& entry : view.entries()) {
    const ExtractionQuery vq = BuildValueQuery(entry.canonical, view, max_aliases, config.language);
    const ExtractionQuery kq = BuildKeyQuery(entry.canonical, view, max_aliases, config.language);
    const auto value = RunQuery(text, chunks, vq, backend, config.decode, entry.short_field);
    const auto key = RunQuery(text, chunks, kq, backend, config.decode, false);
    if (!key) continue;
    ExtractedPair p;
    p.canonical_key = entry.canonical;
    p.key_span = Span{key->start, key->end};
    p.surface_key = U32ToUtf8(text.substr(key->start, key->end - key->start));
    p.score = key->score;
    if (value) {
      p.value_span = Span{value->start, value->end};
      p.value = U32ToUtf8(text.substr(value->start, value->end - value->start));
      p.score = value->score;
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

namespace {

nlohmann::json SpanJson(const std::optional<Span>& s) {
  if (!s) return nullptr;
  return nlohmann::json::array({s->start, s->end});
}

std::optional<Span> SpanFromJson(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  const auto& a = j.at(field);
  if (!a.is_array() || a.size() != 2) throw ParseError(std::string(field) + " must be [start, end]");
  return Span{a[0].get<int64_t>(), a[1].get<int64_t>()};
}

template <typename T>
nlohmann::json Optional(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json ExtractedPairToJson(const ExtractedPair& p) {
  return {{"canonical_key", p.canonical_key}, {"surface_key", Optional(p.surface_key)},
          {"key_span", SpanJson(p.key_span)},   {"value_span", SpanJson(p.value_span)},
          {"value", Optional(p.value)},         {"score", p.score}};
}

ExtractedPair ExtractedPairFromJson(const nlohmann::json& j) {
  try {
    ExtractedPair p;
    p.canonical_key = j.at("canonical_key").get<std::string>();
    if (j.contains("surface_key") && !j.at("surface_key").is_null()) {
      p.surface_key = j.at("surface_key").get<std::string>();
    }
    if (j.contains("value") && !j.at("value").is_null()) p.value = j.at("value").get<std::string>();
    p.key_span = SpanFromJson(j, "key_span");
    p.value_span = SpanFromJson(j, "value_span");
    p.score = j.value("score", 0.0);
    if (p.value.has_value() != p.value_span.has_value()) {
      throw ValidationError("pair for '" + p.canonical_key + "' has value without span or vice versa");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("extracted pair: ") + e.what());
  }
}

}  // namespace keycov
