// Copyright 2026 The spikebench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "spikebench/error.hpp"
#include "spikebench/ingest.hpp"

namespace spikebench {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<std::string> capture(const std::regex& re, const std::string& text) {
  std::smatch m;
  if (!std::regex_search(text, m, re) || m.size() < 2 || !m[1].matched) {
    return std::nullopt;
  }
  return m[1].str();
}

std::regex compile(const std::string& pattern, const char* what) {
  try {
    return std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw ConfigError(std::string("invalid ") + what + " '" + pattern + "': " + e.what());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

// Keeps the lexicographically first entries of each (fold, class) group so
// every class in a fold has as many clips as the rarest one.
std::vector<ManifestEntry> balance(const std::vector<ManifestEntry>& entries) {
  std::map<int, std::map<std::string, std::size_t>> counts;
  for (const auto& e : entries) ++counts[e.fold.value_or(-1)][e.class_label];
  std::map<int, std::size_t> quota;
  for (const auto& [fold, per_class] : counts) {
    std::size_t q = SIZE_MAX;
    for (const auto& [label, n] : per_class) q = std::min(q, n);
    quota[fold] = q;
  }
  std::map<std::pair<int, std::string>, std::size_t> taken;
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    const int fold = e.fold.value_or(-1);
    auto& n = taken[{fold, e.class_label}];
    if (n < quota[fold]) {
      out.push_back(e);
      ++n;
    }
  }
  return out;
}

}  // namespace

std::string to_string(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  throw DataError("invalid split '" + text + "' (expected train or test)");
}

bool Manifest::cross_validation() const {
  return !entries.empty() &&
         std::all_of(entries.begin(), entries.end(),
                     [](const ManifestEntry& e) { return e.fold.has_value(); });
}

std::vector<ManifestEntry> filter_exact_duration(std::span<const ManifestEntry> entries,
                                                 double seconds,
                                                 std::optional<double> tolerance,
                                                 const TimingFn& timing) {
  std::vector<ManifestEntry> kept;
  for (const auto& e : entries) {
    const ClipTiming t = timing(e);
    const double tol = tolerance ? *tolerance
                                 : (t.sample_rate > 0 ? 0.5 / t.sample_rate : 0.0);
    if (std::abs(t.duration_s - seconds) <= tol) kept.push_back(e);
  }
  return kept;
}

void refresh_counts(Manifest& m) {
  std::set<std::string> labels;
  m.fold_class_counts.clear();
  for (const auto& e : m.entries) {
    labels.insert(e.class_label);
    ++m.fold_class_counts[{e.fold.value_or(-1), e.class_label}];
  }
  m.labels.assign(labels.begin(), labels.end());
}

Manifest build_manifest(const std::filesystem::path& root, const DatasetRules& rules) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw DataError(root.string() + ": not a directory");
  }
  const std::regex label_re = compile(rules.label_pattern, "label pattern");
  const std::optional<std::regex> fold_re =
      rules.fold_pattern.empty() ? std::nullopt
                                 : std::optional(compile(rules.fold_pattern, "fold pattern"));
  const std::optional<std::regex> split_re =
      rules.split_pattern.empty()
          ? std::nullopt
          : std::optional(compile(rules.split_pattern, "split pattern"));
  const std::set<std::string> declared(rules.labels.begin(), rules.labels.end());
  const std::set<std::string> excluded(rules.excluded.begin(), rules.excluded.end());
  const std::string ext = lower(rules.extension);

  std::vector<std::string> files;
  for (const auto& item : fs::recursive_directory_iterator(root)) {
    if (!item.is_regular_file()) continue;
    if (lower(item.path().extension().string()) != ext) continue;
    files.push_back(fs::relative(item.path(), root).generic_string());
  }
  std::sort(files.begin(), files.end());

  Manifest m;
  m.root = root;
  for (const auto& rel : files) {
    auto id = capture(label_re, rel);
    if (!id) throw DataError(rel + ": no class label matches the label pattern");
    std::string label = *id;
    if (!rules.label_map.empty()) {
      auto it = rules.label_map.find(*id);
      if (it == rules.label_map.end()) {
        throw DataError(rel + ": label id '" + *id + "' missing from label map");
      }
      label = it->second;
    }
    if (excluded.contains(label)) continue;
    if (!declared.empty() && !declared.contains(label)) {
      throw DataError(rel + ": label '" + label + "' outside the declared label set");
    }
    ManifestEntry e{rel, label, std::nullopt, Split::kTrain};
    if (fold_re) {
      auto text = capture(*fold_re, rel);
      int fold = 0;
      const char* end = text ? text->data() + text->size() : nullptr;
      if (!text || text->empty() ||
          std::from_chars(text->data(), end, fold).ptr != end || fold < 0) {
        throw DataError(rel + ": unparsable fold identifier");
      }
      e.fold = fold;
    }
    if (split_re) {
      auto text = capture(*split_re, rel);
      if (!text) throw DataError(rel + ": no split matches the split pattern");
      e.split = parse_split(lower(*text));
    }
    m.entries.push_back(std::move(e));
  }

  const TimingFn timing = [&](const ManifestEntry& e) {
    const WavInfo info = read_wav_info(root / e.path);
    return ClipTiming{info.duration_s(), info.sample_rate};
  };
  if (rules.duration_s) {
    m.entries = filter_exact_duration(m.entries, *rules.duration_s,
                                      rules.duration_tolerance_s, timing);
  }
  if (rules.crop_s) {
    std::erase_if(m.entries, [&](const ManifestEntry& e) {
      const ClipTiming t = timing(e);
      return std::llround(*rules.crop_s * t.sample_rate) >
             std::llround(t.duration_s * t.sample_rate);
    });
  }
  if (rules.balance_folds) m.entries = balance(m.entries);
  refresh_counts(m);
  return m;
}

void write_manifest_csv(const std::filesystem::path& path, const Manifest& m) {
  namespace fs = std::filesystem;
  const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  std::ostringstream out;
  out << "path,class_label,fold,split\n";
  for (const auto& e : m.entries) {
    const fs::path abs = fs::absolute(m.root / e.path).lexically_normal();
    const std::string rel = abs.lexically_relative(fs::absolute(dir).lexically_normal())
                                .generic_string();
    out << csv_field(rel) << ',' << csv_field(e.class_label) << ','
        << (e.fold ? std::to_string(*e.fold) : std::string()) << ','
        << to_string(e.split) << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError(path.string() + ": cannot open for writing");
  file << out.str();
}

Manifest read_manifest_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open manifest");
  Manifest m;
  m.root = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "path,class_label,fold,split") {
        throw DataError(path.string() + ": unexpected manifest header");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != 4) throw DataError(where + ": expected 4 fields");
    ManifestEntry e{f[0], f[1], std::nullopt, Split::kTrain};
    if (e.path.empty() || e.class_label.empty()) {
      throw DataError(where + ": empty path or label");
    }
    if (!f[2].empty()) {
      int fold = 0;
      const char* end = f[2].data() + f[2].size();
      if (std::from_chars(f[2].data(), end, fold).ptr != end || fold < 0) {
        throw DataError(where + ": unparsable fold identifier");
      }
      e.fold = fold;
    }
    try {
      e.split = parse_split(f[3]);
    } catch (const DataError& err) {
      throw DataError(where + ": " + err.what());
    }
    m.entries.push_back(std::move(e));
  }
  if (line_no == 0) throw DataError(path.string() + ": empty manifest file");
  const bool any_fold = std::any_of(m.entries.begin(), m.entries.end(),
                                    [](const auto& e) { return e.fold.has_value(); });
  if (any_fold && !m.cross_validation()) {
    throw DataError(path.string() + ": fold column must be set for all rows or none");
  }
  refresh_counts(m);
  return m;
}

}  // namespace spikebench
