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

#ifndef KEYCOV_NORMALIZE_H_
#define KEYCOV_NORMALIZE_H_

#include <string>
#include <string_view>

namespace keycov {

// Cleans a raw surface key: folds fullwidth ASCII to halfwidth, trims and
// collapses whitespace, lowercases Latin letters, strips trailing delimiters
// (：:＝=、.。) and surrounding matched brackets. Repeats until nothing
// changes, so NormalizeKey(NormalizeKey(x)) == NormalizeKey(x) and the
// result is never longer than the input.
std::u32string NormalizeKey(std::u32string_view raw);
std::string NormalizeKey(std::string_view raw_utf8);

}  // namespace keycov

#endif  // KEYCOV_NORMALIZE_H_
