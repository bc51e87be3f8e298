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

#include "keycov/embedding.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "keycov/errors.h"
#include "keycov/text.h"

namespace keycov {

double Dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  double s = 0.0;
  const size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void NormalizeL2(EmbeddingVector& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (double& x : v) x /= norm;
}

BigramHashEmbedder::BigramHashEmbedder(int buckets) : buckets_(buckets) {
  if (buckets <= 0) throw ConfigError("embedding dimension must be positive");
}

int BigramHashEmbedder::Bucket(char32_t first, char32_t second) const {
  char bytes[8];
  for (int i = 0; i < 4; ++i) {
    bytes[i] = static_cast<char>((first >> (8 * i)) & 0xFF);
    bytes[4 + i] = static_cast<char>((second >> (8 * i)) & 0xFF);
  }
  return static_cast<int>(Fnv1a64(std::string_view(bytes, 8)) % static_cast<uint64_t>(buckets_));
}

EmbeddingVector BigramHashEmbedder::Embed(std::string_view key) const {
  const std::u32string chars = Utf8ToU32(key);
  EmbeddingVector v(buckets_, 0.0);
  char32_t prev = kBegin;
  for (char32_t c : chars) {
    v[Bucket(prev, c)] += 1.0;
    prev = c;
  }
  v[Bucket(prev, kEnd)] += 1.0;
  NormalizeL2(v);
  return v;
}

FileEmbeddingProvider FileEmbeddingProvider::Parse(std::string_view jsonl) {
  FileEmbeddingProvider p;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string key = j.at("key").get<std::string>();
      EmbeddingVector v = j.at("vector").get<EmbeddingVector>();
      if (v.empty()) throw ValidationError("empty vector");
      if (p.dim_ == 0) p.dim_ = static_cast<int>(v.size());
      if (static_cast<int>(v.size()) != p.dim_) {
        throw ValidationError("vector dimension " + std::to_string(v.size()) + " != " +
                              std::to_string(p.dim_));
      }
      NormalizeL2(v);
      p.vectors_[key] = std::move(v);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("embedding file line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("embedding file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return p;
}

FileEmbeddingProvider FileEmbeddingProvider::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

EmbeddingVector FileEmbeddingProvider::Embed(std::string_view key) const {
  auto it = vectors_.find(std::string(key));
  if (it == vectors_.end()) {
    throw NotFoundError("no precomputed embedding for key '" + std::string(key) + "'");
  }
  return it->second;
}

}  // namespace keycov
