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

#ifndef KEYCOV_EMBEDDING_H_
#define KEYCOV_EMBEDDING_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace keycov {

// Unit-length vector; dimension is fixed per provider.
using EmbeddingVector = std::vector<double>;

double Dot(const EmbeddingVector& a, const EmbeddingVector& b);
// Scales to unit L2 norm; a zero vector is returned unchanged.
void NormalizeL2(EmbeddingVector& v);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  // `key` is a normalized, non-empty surface key (UTF-8).
  virtual EmbeddingVector Embed(std::string_view key) const = 0;
};

// Character bigrams over "^" + key + "$" (sentinels are out-of-band code
// points, not literal characters), hashed with FNV-1a into `buckets` bins,
// counted and L2-normalized.
class BigramHashEmbedder final : public EmbeddingProvider {
 public:
  static constexpr int kDefaultBuckets = 256;

  explicit BigramHashEmbedder(int buckets = kDefaultBuckets);
  int dim() const override { return buckets_; }
  EmbeddingVector Embed(std::string_view key) const override;

  // Bucket of the bigram (first, second); sentinels are kBegin / kEnd.
  static constexpr char32_t kBegin = 0x110000;
  static constexpr char32_t kEnd = 0x110001;
  int Bucket(char32_t first, char32_t second) const;

 private:
  int buckets_;
};

// Precomputed vectors from JSON Lines {"key": "...", "vector": [...]}.
// Vectors are renormalized on load. Embed throws NotFoundError naming the
// key if it is absent.
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  static FileEmbeddingProvider Load(const std::filesystem::path& path);
  static FileEmbeddingProvider Parse(std::string_view jsonl);

  int dim() const override { return dim_; }
  EmbeddingVector Embed(std::string_view key) const override;

 private:
  int dim_ = 0;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

}  // namespace keycov

#endif  // KEYCOV_EMBEDDING_H_
