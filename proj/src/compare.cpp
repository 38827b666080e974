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
#include <set>

#include "spikebench/error.hpp"
#include "spikebench/harness.hpp"

namespace spikebench {
namespace {

struct Candidate {
  std::string name;
  double value;
};

// Lower is better for every metric compared here.
Ranking rank(std::string scope, std::string key, std::vector<Candidate> c) {
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    return a.value != b.value ? a.value < b.value : a.name < b.name;
  });
  Ranking r{std::move(scope), std::move(key), "", "tie"};
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i > 0) r.order += c[i].value == c[i - 1].value ? "=" : "<";
    r.order += c[i].name;
  }
  if (c.size() == 1 || (c.size() > 1 && c[0].value < c[1].value)) r.winner = c[0].name;
  return r;
}

}  // namespace

Comparison compare_reports(const std::vector<BenchReport>& reports) {
  if (reports.empty()) throw DataError("nothing to compare");
  for (const auto& r : reports) {
    if (r.fingerprint != reports.front().fingerprint) {
      throw DataError("reports were produced from different corpora or front-end settings");
    }
  }
  // A codec that appears in more than one report is qualified by report index.
  std::map<Codec, int> seen;
  for (const auto& r : reports) {
    std::set<Codec> codecs;
    for (const auto& row : r.per_band) codecs.insert(row.codec);
    for (Codec c : codecs) ++seen[c];
  }
  auto entry = [&](std::size_t report, Codec c) {
    return seen[c] > 1 ? "#" + std::to_string(report + 1) + ":" + codec_name(c)
                       : codec_name(c);
  };

  Comparison out;
  std::map<int, std::vector<Candidate>> by_band;
  std::map<std::string, std::vector<Candidate>> by_class;
  std::map<std::string, std::vector<Candidate>> by_dataset;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (const auto& row : reports[i].per_band) {
      if (row.errdb) by_band[row.band].push_back({entry(i, row.codec), *row.errdb});
    }
    for (const auto& row : reports[i].per_class) {
      by_class[row.class_label].push_back({entry(i, row.codec), row.mean_errdb});
    }
    for (const auto& row : reports[i].efficiency) {
      by_dataset[row.dataset].push_back({entry(i, row.codec), row.firing_rate_pct});
    }
  }
  for (auto& [band, c] : by_band) {
    Ranking r = rank("band", std::to_string(band), std::move(c));
    if (r.winner != "tie") ++out.band_wins[r.winner];
    out.rankings.push_back(std::move(r));
  }
  for (auto& [label, c] : by_class) {
    Ranking r = rank("class", label, std::move(c));
    if (r.winner != "tie") ++out.class_wins[r.winner];
    out.rankings.push_back(std::move(r));
  }
  for (auto& [dataset, c] : by_dataset) {
    Ranking r = rank("firing_rate", dataset, std::move(c));
    out.firing_rate_winner = r.winner;
    out.rankings.push_back(std::move(r));
  }
  return out;
}

std::string comparison_csv(const Comparison& c) {
  std::string out = "scope,key,order,winner\n";
  for (const auto& r : c.rankings) {
    out += r.scope + "," + r.key + "," + r.order + "," + r.winner + "\n";
  }
  return out;
}

}  // namespace spikebench
