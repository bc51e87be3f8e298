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

#include "keycov/noise.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "keycov/errors.h"
#include "keycov/random.h"
#include "keycov/text.h"

namespace keycov {

namespace {

// Keep in sync with data/ocr_confusions.tsv (checked by noise_test).
constexpr std::string_view kDefaultConfusions =
    "# Visually similar character pairs used for OCR substitution noise.\n"
    "0\tO\n"
    "0\to\n"
    "1\tl\n"
    "1\tI\n"
    "2\tZ\n"
    "5\tS\n"
    "6\tb\n"
    "8\tB\n"
    "9\tg\n"
    "rn\tm\n"
    "未\t末\n"
    "己\t已\n"
    "已\t巳\n"
    "人\t入\n"
    "日\t曰\n"
    "土\t士\n"
    "大\t太\n"
    "天\t夫\n"
    "干\t千\n"
    "刀\t力\n"
    "戊\t戌\n"
    "左\t在\n"
    "：\t:\n"
    "，\t,\n";

bool IsDeletableSpace(char32_t c) { return c == U' ' || c == U'\t' || c == 0x3000; }

}  // namespace

void ConfusionTable::AddPair(char32_t a, char32_t b) {
  if (a == b) return;
  auto add = [this](char32_t x, char32_t y) {
    auto& v = partners_[x];
    if (std::find(v.begin(), v.end(), y) == v.end()) v.push_back(y);
  };
  add(a, b);
  add(b, a);
}

const std::vector<char32_t>* ConfusionTable::Partners(char32_t c) const {
  auto it = partners_.find(c);
  return it == partners_.end() ? nullptr : &it->second;
}

ConfusionTable ConfusionTable::Parse(std::string_view tsv) {
  ConfusionTable table;
  std::istringstream in{std::string(tsv)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("confusion table line " + std::to_string(line_no) + ": expected a tab");
    }
    const std::u32string a = Utf8ToU32(std::string_view(line).substr(0, tab));
    const std::u32string b = Utf8ToU32(std::string_view(line).substr(tab + 1));
    // Multi-character confusions ("rn"/"m") would change lengths; only
    // single-character pairs take part in substitution.
    if (a.size() != 1 || b.size() != 1) continue;
    table.AddPair(a[0], b[0]);
  }
  return table;
}

ConfusionTable ConfusionTable::Default() {
  static const ConfusionTable table = Parse(kDefaultConfusions);
  return table;
}

ConfusionTable ConfusionTable::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open confusion table " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

NoiseConfig NoiseConfig::Uniform(double total_rate) {
  const double each = total_rate / 4.0;
  return NoiseConfig{each, each, each, each};
}

void NoiseConfig::Validate() const {
  for (double r : {substitution, whitespace_insertion, whitespace_deletion,
                   line_break_insertion}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("noise rates must lie in [0,1]");
  }
}

Page InjectOcrNoise(const Page& page, const NoiseConfig& config, uint64_t seed,
                    const ConfusionTable& table) {
  config.Validate();
  const std::u32string& text = page.text;
  const size_t n = text.size();

  // Both characters of every placeholder occurrence are frozen.
  std::vector<bool> frozen(n, false);
  for (size_t i = 0; i + 1 < n; ++i) {
    if (text[i] == U'*' && text[i + 1] == U'*') {
      frozen[i] = frozen[i + 1] = true;
      ++i;
    }
  }
  // The first character of every span is never deleted, so spans stay
  // non-empty.
  std::vector<bool> span_head(n, false);
  for (const KVAnnotation& a : page.annotations) {
    span_head[a.key_span.start] = true;
    span_head[a.value_span.start] = true;
  }

  Rng rng(seed);
  std::u32string out;
  out.reserve(n + n / 8 + 4);
  // group_begin[i]: output size before insertions at position i.
  // char_at[i]: output size after insertions at position i.
  std::vector<int64_t> group_begin(n + 1), char_at(n + 1);
  for (size_t i = 0; i <= n; ++i) {
    group_begin[i] = static_cast<int64_t>(out.size());
    const bool inside_placeholder = i > 0 && i < n && frozen[i - 1] && frozen[i] &&
                                    text[i - 1] == U'*' && text[i] == U'*';
    if (!inside_placeholder) {
      if (rng.Bernoulli(config.whitespace_insertion)) out.push_back(U' ');
      if (rng.Bernoulli(config.line_break_insertion)) out.push_back(U'\n');
    }
    char_at[i] = static_cast<int64_t>(out.size());
    if (i == n) break;
    const char32_t c = text[i];
    if (frozen[i]) {
      out.push_back(c);
      continue;
    }
    if (IsDeletableSpace(c) && !span_head[i] && rng.Bernoulli(config.whitespace_deletion)) {
      continue;
    }
    const auto* partners = table.Partners(c);
    if (partners != nullptr && rng.Bernoulli(config.substitution)) {
      const auto pick = rng.UniformInt(0, static_cast<int64_t>(partners->size()) - 1);
      out.push_back((*partners)[pick]);
      continue;
    }
    out.push_back(c);
  }

  Page result;
  result.report_id = page.report_id;
  result.page_id = page.page_id;
  result.text = std::move(out);
  result.annotations.reserve(page.annotations.size());
  auto remap = [&](const Span& s) { return Span{char_at[s.start], group_begin[s.end]}; };
  for (const KVAnnotation& a : page.annotations) {
    KVAnnotation b = a;
    b.key_span = remap(a.key_span);
    b.value_span = remap(a.value_span);
    b.surface_key = result.Slice(b.key_span);
    result.annotations.push_back(std::move(b));
  }
  return result;
}

}  // namespace keycov
