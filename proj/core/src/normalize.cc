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

#include "keycov/normalize.h"

#include "keycov/text.h"

namespace keycov {

namespace {

char32_t FoldWidth(char32_t c) {
  if (c >= 0xFF01 && c <= 0xFF5E) return c - 0xFEE0;
  if (c == 0x3000) return U' ';
  return c;
}

bool IsTrailingDelimiter(char32_t c) {
  // Fullwidth colon and equals are folded before this check.
  return c == U':' || c == U'=' || c == U'、' || c == U'.' || c == U'。';
}

char32_t ClosingBracket(char32_t open) {
  switch (open) {
    case U'(':
      return U')';
    case U'[':
      return U']';
    case U'{':
      return U'}';
    case U'【':
      return U'】';
    case U'〔':
      return U'〕';
    case U'《':
      return U'》';
    case U'「':
      return U'」';
    case U'〈':
      return U'〉';
    default:
      return 0;
  }
}

// True if s[0] opens a bracket that is closed exactly by s.back().
bool WrappedInMatchedPair(std::u32string_view s) {
  if (s.size() < 2) return false;
  const char32_t open = s.front();
  const char32_t close = ClosingBracket(open);
  if (close == 0 || s.back() != close) return false;
  int depth = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == open) ++depth;
    if (s[i] == close) {
      --depth;
      if (depth == 0) return i + 1 == s.size();
    }
  }
  return false;
}

std::u32string OnePass(std::u32string_view in) {
  std::u32string s;
  s.reserve(in.size());
  bool pending_space = false;
  for (char32_t c : in) {
    c = FoldWidth(c);
    if (IsSpace(c)) {
      pending_space = !s.empty();
      continue;
    }
    if (pending_space) {
      s.push_back(U' ');
      pending_space = false;
    }
    if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
    s.push_back(c);
  }
  while (!s.empty() && (IsTrailingDelimiter(s.back()) || IsSpace(s.back()))) s.pop_back();
  if (WrappedInMatchedPair(s)) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

}  // namespace

std::u32string NormalizeKey(std::u32string_view raw) {
  std::u32string current(raw);
  for (;;) {
    std::u32string next = OnePass(current);
    if (next == current) return next;
    current = std::move(next);
  }
}

std::string NormalizeKey(std::string_view raw_utf8) {
  return U32ToUtf8(NormalizeKey(Utf8ToU32(raw_utf8)));
}

}  // namespace keycov
