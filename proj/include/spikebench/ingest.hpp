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

#ifndef SPIKEBENCH_INGEST_HPP_
#define SPIKEBENCH_INGEST_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spikebench {

inline constexpr int kDefaultSampleRate = 44100;

/// Mono audio with amplitudes in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;
  std::string source_path;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// ---------------------------------------------------------------------------
// WAV I/O
// ---------------------------------------------------------------------------

struct WavInfo {
  int channels = 0;
  int sample_rate = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  std::size_t frames = 0;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

struct WavFormat {
  int channels = 1;
  int bits_per_sample = 16;  // 8, 16, 24 (integer PCM) or 32 (float)
  bool is_float = false;
};

/// Parses only the RIFF header; cheap enough to run over a whole corpus.
WavInfo read_wav_info(const std::filesystem::path& path);

/// Decodes a PCM WAV into a mono waveform at its native rate.
Waveform read_wav(const std::filesystem::path& path);

/// Decodes from an in-memory RIFF image. `name` is used in error messages.
Waveform decode_wav(std::span<const std::uint8_t> bytes,
                    const std::string& name);

/// `interleaved` holds frames * format.channels samples in [-1, 1].
std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved,
                                     int sample_rate, const WavFormat& format);

void write_wav(const std::filesystem::path& path,
               std::span<const double> interleaved, int sample_rate,
               const WavFormat& format = {});

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel
/// (beta 8.6, 64 taps per phase). The tap table is built once per ratio.
class Resampler {
 public:
  static constexpr int kTapsPerPhase = 64;
  static constexpr double kKaiserBeta = 8.6;

  Resampler(int from_rate, int to_rate);

  int up() const { return up_; }
  int down() const { return down_; }

  /// Output length is ceil(n * to_rate / from_rate).
  std::vector<double> process(std::span<const double> input) const;

 private:
  int up_ = 1;
  int down_ = 1;
  std::vector<double> taps_;  // up_ rows of kTapsPerPhase
};

std::vector<double> resample(std::span<const double> input, int from_rate,
                             int to_rate);

/// Reads a WAV file, mixes down to mono and resamples to `target_rate`.
Waveform load_audio(const std::filesystem::path& path,
                    int target_rate = kDefaultSampleRate);

/// Keeps round(seconds * rate) samples around the midpoint. When an odd
/// number of samples is discarded the extra one comes off the end.
Waveform center_crop(const Waveform& w, double seconds);

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

enum class Split { kTrain, kTest };

std::string to_string(Split split);
Split parse_split(const std::string& text);

struct ManifestEntry {
  std::string path;  // relative to the manifest root
  std::string class_label;
  std::optional<int> fold;
  Split split = Split::kTrain;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct ClipTiming {
  double duration_s = 0.0;
  int sample_rate = 0;
};

using TimingFn = std::function<ClipTiming(const ManifestEntry&)>;

/// Keeps entries whose duration is within `tolerance` seconds of `seconds`.
/// Without a tolerance, half a sample period of each clip is used.
std::vector<ManifestEntry> filter_exact_duration(
    std::span<const ManifestEntry> entries, double seconds,
    std::optional<double> tolerance, const TimingFn& timing);

/// How to turn a directory of audio files into a manifest.
///
/// Patterns are ECMAScript regexes matched against the path relative to the
/// root (with '/' separators); capture group 1 is used.
struct DatasetRules {
  std::vector<std::string> labels;    // declared label set
  std::vector<std::string> excluded;  // dropped from the manifest
  std::string label_pattern = "^([^/]+)/";
  std::map<std::string, std::string> label_map;  // captured id -> label
  std::string fold_pattern;   // empty: no folds (holdout protocol)
  std::string split_pattern;  // captures "train" or "test"; empty: all train
  std::optional<double> duration_s;
  std::optional<double> duration_tolerance_s;
  std::optional<double> crop_s;  // applied at load time by the harness
  bool balance_folds = false;    // trim each (fold, class) to the fold minimum
  std::string extension = ".wav";
};

struct Manifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
  std::vector<std::string> labels;  // sorted, only labels that occur
  std::map<std::pair<int, std::string>, std::size_t> fold_class_counts;

  bool cross_validation() const;
  std::filesystem::path resolve(const ManifestEntry& e) const {
    return root / e.path;
  }
};

/// Recomputes `labels` and `fold_class_counts` from `entries`.
void refresh_counts(Manifest& m);

Manifest build_manifest(const std::filesystem::path& root,
                        const DatasetRules& rules);

/// CSV with header `path,class_label,fold,split`; paths are relative to the
/// directory holding the file.
void write_manifest_csv(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest_csv(const std::filesystem::path& path);

}  // namespace spikebench

#endif  // SPIKEBENCH_INGEST_HPP_
