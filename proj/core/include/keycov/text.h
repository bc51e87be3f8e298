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

// Text primitives. All offsets in keycov are Unicode scalar indices into a
// std::u32string; UTF-8 only appears at I/O boundaries.

#ifndef KEYCOV_TEXT_H_
#define KEYCOV_TEXT_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace keycov {

// Throws ParseError on invalid UTF-8 (overlong, surrogate, truncated).
std::u32string Utf8ToU32(std::string_view utf8);
std::string U32ToUtf8(std::u32string_view text);

// Coarse character classes used for token snapping.
enum class CharClass {
  kSpace,
  kHan,
  kLatin,
  kDigit,
  kPunct,
  kOther,
};

CharClass ClassifyChar(char32_t c);

bool IsSpace(char32_t c);
bool IsHan(char32_t c);
bool IsLatinLetter(char32_t c);
bool IsDigit(char32_t c);
bool IsPunct(char32_t c);

// 64-bit FNV-1a. Stable across platforms and runs.
inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

inline uint64_t Fnv1a64(std::string_view bytes, uint64_t hash = kFnvOffset) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= kFnvPrime;
  }
  return hash;
}

}  // namespace keycov

#endif  // KEYCOV_TEXT_H_
