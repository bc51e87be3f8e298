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

#include "keycov/corpus.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "keycov/errors.h"
#include "keycov/text.h"

namespace keycov {

using json = nlohmann::json;

std::string Page::Slice(const Span& span) const {
  return U32ToUtf8(std::u32string_view(text).substr(span.start, span.length()));
}

void ValidatePage(const Page& page) {
  const auto len = static_cast<int64_t>(page.text.size());
  for (size_t i = 0; i < page.annotations.size(); ++i) {
    const KVAnnotation& a = page.annotations[i];
    for (const Span* s : {&a.key_span, &a.value_span}) {
      if (s->start < 0 || s->end > len || s->start >= s->end) {
        throw ValidationError("page " + page.page_id + ": annotation " +
                              std::to_string(i) + " has span [" +
                              std::to_string(s->start) + "," + std::to_string(s->end) +
                              ") outside [0," + std::to_string(len) + "] or empty");
      }
    }
    if (page.Slice(a.key_span) != a.surface_key) {
      throw ValidationError("page " + page.page_id + ": annotation " + std::to_string(i) +
                            " key span text '" + page.Slice(a.key_span) +
                            "' != surface_key '" + a.surface_key + "'");
    }
  }
}

namespace {

Span SpanFromJson(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer()) {
    throw ParseError(std::string("field '") + field + "' must be [start,end]");
  }
  return Span{j[0].get<int64_t>(), j[1].get<int64_t>()};
}

std::string RequireString(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw ParseError(std::string("missing string field '") + field + "'");
  }
  return it->get<std::string>();
}

}  // namespace

json PageToJson(const Page& page) {
  json anns = json::array();
  for (const KVAnnotation& a : page.annotations) {
    json ja;
    ja["key_span"] = {a.key_span.start, a.key_span.end};
    ja["value_span"] = {a.value_span.start, a.value_span.end};
    ja["surface_key"] = a.surface_key;
    ja["canonical_key"] = a.canonical_key ? json(*a.canonical_key) : json(nullptr);
    anns.push_back(std::move(ja));
  }
  json j;
  j["report_id"] = page.report_id;
  j["page_id"] = page.page_id;
  j["text"] = U32ToUtf8(page.text);
  j["annotations"] = std::move(anns);
  return j;
}

Page PageFromJson(const json& j) {
  if (!j.is_object()) throw ParseError("page record must be a JSON object");
  Page page;
  page.report_id = RequireString(j, "report_id");
  page.page_id = RequireString(j, "page_id");
  page.text = Utf8ToU32(RequireString(j, "text"));
  auto it = j.find("annotations");
  if (it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("'annotations' must be an array");
    for (const json& ja : *it) {
      if (!ja.is_object()) throw ParseError("annotation must be an object");
      KVAnnotation a;
      a.key_span = SpanFromJson(ja.value("key_span", json()), "key_span");
      a.value_span = SpanFromJson(ja.value("value_span", json()), "value_span");
      a.surface_key = RequireString(ja, "surface_key");
      auto ck = ja.find("canonical_key");
      if (ck != ja.end() && !ck->is_null()) {
        if (!ck->is_string()) throw ParseError("'canonical_key' must be string or null");
        a.canonical_key = ck->get<std::string>();
      }
      page.annotations.push_back(std::move(a));
    }
  }
  return page;
}

std::vector<Page> ParseCorpus(std::string_view jsonl) {
  std::vector<Page> pages;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < jsonl.size()) {
    size_t nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    std::string_view line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Page page;
    try {
      page = PageFromJson(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    ValidatePage(page);
    pages.push_back(std::move(page));
  }
  return pages;
}

std::vector<Page> LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseCorpus(buf.str());
}

std::string SerializeCorpus(const std::vector<Page>& pages) {
  std::string out;
  for (const Page& p : pages) {
    out += PageToJson(p).dump();
    out += '\n';
  }
  return out;
}

void WriteCorpus(const std::filesystem::path& path, const std::vector<Page>& pages) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write corpus file " + path.string());
  out << SerializeCorpus(pages);
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& CorpusSplit::Get(SplitName name) const {
  switch (name) {
    case SplitName::kTrain:
      return train;
    case SplitName::kValidation:
      return validation;
    case SplitName::kTest:
      return test;
  }
  return test;
}

SplitName AssignSplit(std::string_view report_id, uint64_t seed, const SplitRatios& ratios) {
  int total = 0;
  for (int r : ratios) {
    if (r <= 0) throw ConfigError("split ratios must be positive");
    total += r;
  }
  char seed_bytes[8];
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xFF);
  uint64_t h = Fnv1a64(report_id);
  h = Fnv1a64(std::string_view(seed_bytes, 8), h);
  const auto bucket = static_cast<int>(h % static_cast<uint64_t>(total));
  if (bucket < ratios[0]) return SplitName::kTrain;
  if (bucket < ratios[0] + ratios[1]) return SplitName::kValidation;
  return SplitName::kTest;
}

CorpusSplit SplitByReportHash(const std::vector<Page>& pages, uint64_t seed,
                              const SplitRatios& ratios) {
  CorpusSplit split;
  std::unordered_set<std::string> seen;
  for (const Page& p : pages) {
    if (!seen.insert(p.report_id).second) continue;
    switch (AssignSplit(p.report_id, seed, ratios)) {
      case SplitName::kTrain:
        split.train.push_back(p.report_id);
        break;
      case SplitName::kValidation:
        split.validation.push_back(p.report_id);
        break;
      case SplitName::kTest:
        split.test.push_back(p.report_id);
        break;
    }
  }
  return split;
}

std::vector<Page> SelectSplit(const std::vector<Page>& pages, const CorpusSplit& split,
                              SplitName name) {
  const auto& ids = split.Get(name);
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  std::vector<Page> out;
  for (const Page& p : pages) {
    if (wanted.count(p.report_id)) out.push_back(p);
  }
  return out;
}

json SplitToJson(const CorpusSplit& split) {
  return json{{"train", split.train}, {"validation", split.validation}, {"test", split.test}};
}

CorpusSplit SplitFromJson(const json& j) {
  CorpusSplit split;
  try {
    split.train = j.at("train").get<std::vector<std::string>>();
    split.validation = j.at("validation").get<std::vector<std::string>>();
    split.test = j.at("test").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("split file: ") + e.what());
  }
  return split;
}

std::optional<SplitName> ParseSplitName(std::string_view name) {
  if (name == "train") return SplitName::kTrain;
  if (name == "validation" || name == "val") return SplitName::kValidation;
  if (name == "test") return SplitName::kTest;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::vector<KeyFrequencyRow> KeyFrequencyProfile(const std::vector<Page>& pages) {
  std::map<std::string, int64_t> counts;
  int64_t total = 0;
  for (const Page& p : pages) {
    for (const KVAnnotation& a : p.annotations) {
      ++counts[a.surface_key];
      ++total;
    }
  }
  std::vector<KeyFrequencyRow> rows;
  rows.reserve(counts.size());
  for (const auto& [key, count] : counts) rows.push_back({key, count, 0.0});
  // std::map already orders keys lexicographically; stable sort keeps that
  // order among equal counts.
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  int64_t running = 0;
  for (auto& row : rows) {
    running += row.count;
    row.cumulative_coverage =
        running == total ? 1.0 : static_cast<double>(running) / static_cast<double>(total);
  }
  return rows;
}

// ---------------------------------------------------------------------------

Page Deidentify(const Page& page, std::vector<Span> selectors) {
  const auto len = static_cast<int64_t>(page.text.size());
  std::sort(selectors.begin(), selectors.end());
  for (size_t i = 0; i < selectors.size(); ++i) {
    const Span& s = selectors[i];
    if (s.start < 0 || s.end > len || s.start >= s.end) {
      throw ValidationError("page " + page.page_id + ": de-identification selector out of range");
    }
    if (i > 0 && selectors[i - 1].end > s.start) {
      throw ValidationError("page " + page.page_id + ": overlapping de-identification selectors");
    }
  }
  if (selectors.empty()) return page;

  Page out;
  out.report_id = page.report_id;
  out.page_id = page.page_id;
  int64_t cursor = 0;
  for (const Span& s : selectors) {
    out.text.append(page.text, cursor, s.start - cursor);
    out.text.append(kPlaceholder);
    cursor = s.end;
  }
  out.text.append(page.text, cursor, std::u32string::npos);

  // Offsets outside every selector shift by the accumulated length change.
  auto remap = [&](int64_t pos) {
    int64_t delta = 0;
    for (const Span& s : selectors) {
      if (s.end <= pos) {
        delta += static_cast<int64_t>(kPlaceholder.size()) - s.length();
      } else {
        break;
      }
    }
    return pos + delta;
  };
  for (const KVAnnotation& a : page.annotations) {
    bool touched = false;
    for (const Span& s : selectors) {
      if (s.Intersects(a.key_span) || s.Intersects(a.value_span)) {
        touched = true;
        break;
      }
    }
    if (touched) continue;
    KVAnnotation b = a;
    b.key_span = {remap(a.key_span.start), remap(a.key_span.end)};
    b.value_span = {remap(a.value_span.start), remap(a.value_span.end)};
    b.surface_key = out.Slice(b.key_span);
    out.annotations.push_back(std::move(b));
  }
  return out;
}

}  // namespace keycov
