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

#ifndef SPIKEBENCH_HARNESS_HPP_
#define SPIKEBENCH_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spikebench/codec.hpp"
#include "spikebench/frontend.hpp"
#include "spikebench/ingest.hpp"
#include "spikebench/metrics.hpp"
#include "spikebench/snn.hpp"

namespace spikebench {

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

/// Generator kinds: "tone" (1 kHz), "chirp" (2-4 kHz sweeps), "noise"
/// (6-10 kHz band-limited), "am" (300 Hz carrier, 4 Hz modulation) and
/// "impulse" (8 Hz click train).
struct SyntheticSpec {
  int n_clips = 40;
  std::vector<std::string> classes = {"tone", "chirp", "noise", "am", "impulse"};
  double duration_s = 5.0;
  int sample_rate = kDefaultSampleRate;
  int folds = 4;  // < 2 gives a holdout split, last fifth of each class in test

  void validate() const;
};

struct SyntheticCorpus {
  Manifest manifest;
  std::vector<Waveform> clips;  // parallel to manifest.entries
};

/// Clip i belongs to class i % classes.size(); every clip depends only on
/// (seed, i).
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Writes 16-bit WAVs under `dir` plus `dir/manifest.csv`.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string dataset = "synthetic";  // "synthetic", a manifest CSV or a directory
  std::string dataset_name;           // defaults to "synthetic" or the file stem
  std::optional<DatasetRules> rules;  // required when dataset is a directory
  std::vector<Codec> codecs = {Codec::kStepForward, Codec::kMovingWindow,
                               Codec::kThresholdAdaptive};
  FrontendConfig frontend;
  std::map<Codec, CodecConfig> codec_params;  // missing codecs use defaults
  std::optional<double> crop_s;
  bool classify = false;
  SnnConfig snn;  // input/output sizes are derived from the data
  SyntheticSpec synthetic;
  std::uint64_t seed = 0;
  int measure_repetitions = 5;
  int threads = 1;
  std::filesystem::path output_dir = "out";
  std::filesystem::path base_dir = ".";  // relative dataset paths resolve here

  const CodecConfig& params_for(Codec c) const;
  void validate() const;
};

/// Parses the JSON config document. Unknown keys are rejected.
RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// Full parameter echo (everything except output paths).
std::string run_config_json(const RunConfig& cfg);

DatasetRules parse_dataset_rules(const std::string& json_text);

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

struct BandRow {
  Codec codec;
  int band;
  std::optional<double> errdb;  // nullopt for a band with no channels
  std::optional<double> snr;
};

struct EfficiencyRow {
  Codec codec;
  std::string dataset;
  double firing_rate_pct;
  double encode_ms;
  std::size_t aux_bytes;
};

struct ClassificationRow {
  Codec codec;
  std::string dataset;
  std::string fold;  // "fold<k>", "holdout" or "mean"
  double macro_acc;
};

struct BenchReport {
  std::string dataset;
  std::string fingerprint;
  std::vector<BandRow> per_band;
  std::vector<ClassTableRow> per_class;
  std::vector<EfficiencyRow> efficiency;
  std::vector<ClassificationRow> classification;
};

/// Clips loaded, cropped and resampled per the config, with their labels.
struct LoadedDataset {
  std::string name;
  Manifest manifest;
  std::vector<Waveform> clips;
  std::string fingerprint;
};

LoadedDataset load_dataset(const RunConfig& cfg);

/// Encodes, decodes, scores and optionally classifies every clip. Nothing is
/// written until every stage has succeeded.
BenchReport run_bench(const RunConfig& cfg);

/// run_bench followed by write_report into cfg.output_dir.
BenchReport run_bench_to_disk(const RunConfig& cfg);

/// per_band.csv, per_class.csv, efficiency.csv, classification.csv (when
/// present) and run_summary.json.
void write_report(const BenchReport& report, const RunConfig& cfg,
                  const std::filesystem::path& dir);

BenchReport read_report(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct Ranking {
  std::string scope;   // "band", "class" or "firing_rate"
  std::string key;     // band index, class label or dataset
  std::string order;   // e.g. "TAE<SF<MW", "=" joins ties
  std::string winner;  // entry name, or "tie"
};

struct Comparison {
  std::vector<Ranking> rankings;
  std::map<std::string, int> band_wins;   // entry -> outright band wins
  std::map<std::string, int> class_wins;  // entry -> outright class wins
  std::string firing_rate_winner;
};

/// Ranks codecs across reports built from the same corpus. Entries are named
/// by codec, prefixed with the report's index when a codec repeats.
Comparison compare_reports(const std::vector<BenchReport>& reports);

std::string comparison_csv(const Comparison& c);

// CSV emitters used by both the bench and the tests.
std::string per_band_csv(const std::vector<BandRow>& rows);
std::string per_class_csv(const std::vector<ClassTableRow>& rows);
std::string efficiency_csv(const std::vector<EfficiencyRow>& rows);
std::string classification_csv(const std::vector<ClassificationRow>& rows);

/// Fixed-point formatting with `digits` decimals; "-0.000000" prints as "0.000000".
std::string format_fixed(double v, int digits = 6);

}  // namespace spikebench

#endif  // SPIKEBENCH_HARNESS_HPP_
