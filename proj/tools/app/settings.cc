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

#include "settings.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "keycov/errors.h"

namespace keycov {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& name, const std::string& text) {
  const std::string t = Trim(text);
  T value{};
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(name + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

bool ParseBool(const std::string& name, const std::string& text) {
  const std::string t = Trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(name + ": cannot parse '" + text + "' as a boolean");
}

CoverageMode ParseMode(const std::string& name, const std::string& text) {
  auto m = ParseCoverageMode(Trim(text));
  if (!m) throw ConfigError(name + ": unknown coverage mode '" + text + "'");
  return *m;
}

}  // namespace

std::vector<double> ParseDoubleList(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (Trim(item).empty()) continue;
    out.push_back(ParseNumber<double>("list", item));
  }
  return out;
}

void Settings::Set(const std::string& section, const std::string& key, const std::string& value) {
  using Setter = std::function<void(Settings&, const std::string&, const std::string&)>;
  auto i64 = [](int64_t Settings::*field) {
    return [field](Settings& s, const std::string& n, const std::string& v) {
      s.*field = ParseNumber<int64_t>(n, v);
    };
  };
  auto str = [](std::string Settings::*field) {
    return [field](Settings& s, const std::string&, const std::string& v) { s.*field = Trim(v); };
  };
  static const std::map<std::string, Setter> kSetters = {
      {"general.seed", [](Settings& s, auto& n, auto& v) { s.seed = ParseNumber<uint64_t>(n, v); }},

      {"corpus.path", str(&Settings::corpus_path)},
      {"corpus.confusions", str(&Settings::confusions_path)},
      {"corpus.num_keys",
       [](Settings& s, auto& n, auto& v) { s.generator.num_keys = ParseNumber<int>(n, v); }},
      {"corpus.num_pages",
       [](Settings& s, auto& n, auto& v) { s.generator.num_pages = ParseNumber<int>(n, v); }},
      {"corpus.surface_forms_mean",
       [](Settings& s, auto& n, auto& v) {
         s.generator.surface_forms_mean = ParseNumber<double>(n, v);
       }},
      {"corpus.max_surface_forms",
       [](Settings& s, auto& n, auto& v) {
         s.generator.max_surface_forms = ParseNumber<int>(n, v);
       }},
      {"corpus.zipf_s",
       [](Settings& s, auto& n, auto& v) { s.generator.zipf_s = ParseNumber<double>(n, v); }},
      {"corpus.keys_per_page_min",
       [](Settings& s, auto& n, auto& v) {
         s.generator.keys_per_page_min = ParseNumber<int>(n, v);
       }},
      {"corpus.keys_per_page_max",
       [](Settings& s, auto& n, auto& v) {
         s.generator.keys_per_page_max = ParseNumber<int>(n, v);
       }},
      {"corpus.value_length_min",
       [](Settings& s, auto& n, auto& v) {
         s.generator.value_length_min = ParseNumber<int>(n, v);
       }},
      {"corpus.value_length_max",
       [](Settings& s, auto& n, auto& v) {
         s.generator.value_length_max = ParseNumber<int>(n, v);
       }},
      {"corpus.pages_per_report_min",
       [](Settings& s, auto& n, auto& v) {
         s.generator.pages_per_report_min = ParseNumber<int>(n, v);
       }},
      {"corpus.pages_per_report_max",
       [](Settings& s, auto& n, auto& v) {
         s.generator.pages_per_report_max = ParseNumber<int>(n, v);
       }},
      {"corpus.pii_probability",
       [](Settings& s, auto& n, auto& v) {
         s.generator.pii_probability = ParseNumber<double>(n, v);
       }},
      {"corpus.short_threshold",
       [](Settings& s, auto& n, auto& v) {
         s.generator.short_threshold = ParseNumber<int>(n, v);
       }},

      {"noise.total",
       [](Settings& s, auto& n, auto& v) {
         s.generator.noise = NoiseConfig::Uniform(ParseNumber<double>(n, v));
       }},
      {"noise.substitution",
       [](Settings& s, auto& n, auto& v) {
         s.generator.noise.substitution = ParseNumber<double>(n, v);
       }},
      {"noise.whitespace_insertion",
       [](Settings& s, auto& n, auto& v) {
         s.generator.noise.whitespace_insertion = ParseNumber<double>(n, v);
       }},
      {"noise.whitespace_deletion",
       [](Settings& s, auto& n, auto& v) {
         s.generator.noise.whitespace_deletion = ParseNumber<double>(n, v);
       }},
      {"noise.line_break_insertion",
       [](Settings& s, auto& n, auto& v) {
         s.generator.noise.line_break_insertion = ParseNumber<double>(n, v);
       }},

      {"split.seed", [](Settings& s, auto& n, auto& v) { s.seed = ParseNumber<uint64_t>(n, v); }},
      {"split.ratios",
       [](Settings& s, auto& n, auto& v) {
         const auto r = ParseDoubleList(v);
         if (r.size() != 3) throw ConfigError(n + ": expected three ratios");
         for (int i = 0; i < 3; ++i) s.split_ratios[i] = static_cast<int>(r[i]);
       }},

      {"inventory.path", str(&Settings::inventory_path)},
      {"inventory.coverage_mode",
       [](Settings& s, auto& n, auto& v) { s.coverage_mode = ParseMode(n, v); }},

      {"canonicalizer.threshold",
       [](Settings& s, auto& n, auto& v) { s.cluster_threshold = ParseNumber<double>(n, v); }},
      {"canonicalizer.embedding_file", str(&Settings::embedding_file)},
      {"canonicalizer.embedding_buckets",
       [](Settings& s, auto& n, auto& v) { s.embedding_buckets = ParseNumber<int>(n, v); }},

      {"extractor.budget",
       [](Settings& s, auto& n, auto& v) { s.extract.budget = ParseNumber<int64_t>(n, v); }},
      {"extractor.overlap",
       [](Settings& s, auto& n, auto& v) { s.extract.overlap = ParseNumber<int64_t>(n, v); }},
      {"extractor.chunking",
       [](Settings& s, auto& n, auto& v) { s.extract.chunking = ParseBool(n, v); }},
      {"extractor.max_aliases",
       [](Settings& s, auto& n, auto& v) { s.extract.max_aliases = ParseNumber<int>(n, v); }},
      {"extractor.include_aliases",
       [](Settings& s, auto& n, auto& v) { s.extract.include_aliases = ParseBool(n, v); }},
      {"extractor.language",
       [](Settings& s, auto& n, auto& v) {
         const std::string t = Trim(v);
         if (t == "en") {
           s.extract.language = QueryLanguage::kEnglish;
         } else if (t == "zh") {
           s.extract.language = QueryLanguage::kChinese;
         } else {
           throw ConfigError(n + ": language must be en or zh");
         }
       }},
      {"extractor.top_n",
       [](Settings& s, auto& n, auto& v) { s.extract.decode.top_n = ParseNumber<int>(n, v); }},
      {"extractor.mass",
       [](Settings& s, auto& n, auto& v) { s.extract.decode.mass = ParseNumber<double>(n, v); }},
      {"extractor.max_span",
       [](Settings& s, auto& n, auto& v) { s.extract.decode.max_span = ParseNumber<int>(n, v); }},
      {"extractor.short_max_span",
       [](Settings& s, auto& n, auto& v) {
         s.extract.decode.short_max_span = ParseNumber<int>(n, v);
       }},
      {"extractor.null_offset",
       [](Settings& s, auto& n, auto& v) {
         s.extract.decode.null_offset = ParseNumber<double>(n, v);
       }},
      {"extractor.backend", str(&Settings::backend)},
      {"extractor.backend_command", str(&Settings::backend_command)},

      {"evaluation.delta", i64(&Settings::delta)},
      {"evaluation.fractions",
       [](Settings& s, auto&, auto& v) { s.fractions = ParseDoubleList(v); }},
      {"evaluation.level",
       [](Settings& s, auto& n, auto& v) {
         auto l = ParseEvalLevel(Trim(v));
         if (!l) throw ConfigError(n + ": level must be value or pair");
         s.level = *l;
       }},

      {"loss.task",
       [](Settings& s, auto& n, auto& v) {
         const std::string t = Trim(v);
         if (t == "extraction") {
           s.loss = LossConfig::Extraction();
         } else if (t == "canonicalization") {
           s.loss = LossConfig::Canonicalization();
         } else {
           throw ConfigError(n + ": task must be extraction or canonicalization");
         }
       }},
      {"loss.epsilon",
       [](Settings& s, auto& n, auto& v) { s.loss.epsilon = ParseNumber<double>(n, v); }},
      {"loss.margin",
       [](Settings& s, auto& n, auto& v) { s.loss.margin = ParseNumber<double>(n, v); }},
      {"loss.margin_weight",
       [](Settings& s, auto& n, auto& v) { s.loss.margin_weight = ParseNumber<double>(n, v); }},
      {"loss.length_weight",
       [](Settings& s, auto& n, auto& v) { s.loss.length_weight = ParseNumber<double>(n, v); }},
      {"loss.length_scale",
       [](Settings& s, auto& n, auto& v) { s.loss.length_scale = ParseNumber<double>(n, v); }},
      {"loss.short_weight",
       [](Settings& s, auto& n, auto& v) { s.loss.short_weight = ParseNumber<double>(n, v); }},
      {"loss.short_threshold",
       [](Settings& s, auto& n, auto& v) { s.loss.short_threshold = ParseNumber<int>(n, v); }},
      {"loss.instances",
       [](Settings& s, auto& n, auto& v) { s.loss_instances = ParseNumber<int>(n, v); }},
      {"loss.max_len",
       [](Settings& s, auto& n, auto& v) { s.loss_max_len = ParseNumber<int>(n, v); }},

      {"service.host", str(&Settings::host)},
      {"service.port", [](Settings& s, auto& n, auto& v) { s.port = ParseNumber<int>(n, v); }},
      {"service.store_dir", str(&Settings::store_dir)},
      {"service.static_dir", str(&Settings::static_dir)},

      {"loop.auto_accept",
       [](Settings& s, auto& n, auto& v) { s.loop.auto_accept = ParseBool(n, v); }},
      {"loop.refresh_command",
       [](Settings& s, auto&, auto& v) { s.loop.refresh_command = Trim(v); }},
      {"loop.coverage_mode",
       [](Settings& s, auto& n, auto& v) { s.loop.coverage_mode = ParseMode(n, v); }},
      {"loop.observe_gold_keys",
       [](Settings& s, auto& n, auto& v) { s.loop.observe_gold_keys = ParseBool(n, v); }},
  };
  const std::string name = (section.empty() ? "general" : section) + "." + key;
  auto it = kSetters.find(name);
  if (it == kSetters.end()) throw ConfigError("unknown setting '" + name + "'");
  it->second(*this, name, value);
}

void Settings::Validate() const {
  generator.Validate();
  extract.Validate();
  loss.Validate();
  for (int r : split_ratios) {
    if (r <= 0) throw ConfigError("split ratios must be positive");
  }
  if (delta < 0) throw ConfigError("evaluation.delta must be non-negative");
  if (!(cluster_threshold >= -1.0)) throw ConfigError("canonicalizer.threshold is invalid");
  if (embedding_buckets <= 0) throw ConfigError("canonicalizer.embedding_buckets must be positive");
  if (backend != "rule" && backend != "external") {
    throw ConfigError("extractor.backend must be rule or external");
  }
  if (backend == "external" && backend_command.empty()) {
    throw ConfigError("extractor.backend_command is required for the external backend");
  }
  if (port < 0 || port > 65535) throw ConfigError("service.port out of range");
  if (loss_instances <= 0 || loss_max_len <= 0) {
    throw ConfigError("loss.instances and loss.max_len must be positive");
  }
}

void ApplySettingsFile(const std::filesystem::path& path, Settings& settings) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    if (e.line() == 0) throw IoError("cannot read config " + path.string() + ": " + e.message());
    throw ConfigError("config " + path.string() + " line " + std::to_string(e.line()) + ": " +
                      e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      settings.Set("", section, body.data());
      continue;
    }
    for (const auto& [key, node] : body) settings.Set(section, key, node.data());
  }
}

Settings LoadSettings(const std::filesystem::path& path) {
  Settings s;
  ApplySettingsFile(path, s);
  return s;
}

}  // namespace keycov
