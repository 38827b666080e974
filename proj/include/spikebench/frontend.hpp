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

#ifndef SPIKEBENCH_FRONTEND_HPP_
#define SPIKEBENCH_FRONTEND_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "spikebench/ingest.hpp"
#include "spikebench/matrix.hpp"

namespace spikebench {

enum class WindowKind { kHann, kRectangular };

struct FrontendConfig {
  int sample_rate = kDefaultSampleRate;
  int n_fft = 1024;
  int hop = 256;
  int n_mels = 128;
  double f_min = 20.0;
  double f_max = 20000.0;
  WindowKind window = WindowKind::kHann;
};

/// Number of fully interior frames: 1 + floor((n - n_fft) / hop).
std::size_t frame_count(std::size_t n_samples, int n_fft, int hop);

/// Periodic window of length n.
std::vector<double> make_window(WindowKind kind, int n);

/// |DFT|^2 of each windowed frame, no padding. Rows are the n_fft/2 + 1
/// bins, columns are frames.
Matrix<double> stft_power(std::span<const double> samples, int n_fft, int hop,
                          WindowKind window = WindowKind::kHann);

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  Matrix<double> weights;  // n_mels x (n_fft/2 + 1)
  std::vector<double> center_hz;
};

/// Triangular filters whose centres are equally spaced in mel between f_min
/// and f_max. A filter too narrow to cover any FFT bin centre collapses onto
/// the nearest bin so that every row carries weight.
MelFilterbank mel_filterbank(int n_mels, double f_min, double f_max, int n_fft,
                             int sample_rate);

/// Per-channel min-max state. scale == 0 marks a flat channel.
struct NormState {
  double offset = 0.0;
  double scale = 0.0;

  bool degenerate() const { return scale == 0.0; }
};

struct FeatureMatrix {
  Matrix<double> values;  // channels x frames, each row in [0, 1]
  std::vector<double> channel_center_hz;
  std::vector<NormState> norm_state;
  double frame_rate = 0.0;

  std::size_t channels() const { return values.rows(); }
  std::size_t frames() const { return values.cols(); }
};

inline constexpr double kLogFloor = 1e-10;

/// Min-max normalises each row in place and returns the per-row state.
std::vector<NormState> normalize_rows(Matrix<double>& m);

/// Inverse of normalize_rows; flat rows come back as their constant.
Matrix<double> denormalize(const Matrix<double>& normalized,
                           std::span<const NormState> state);

/// Stateless analysis front-end. The filterbank and window are built once
/// and may be shared across threads.
class MelFrontend {
 public:
  explicit MelFrontend(const FrontendConfig& cfg);

  const FrontendConfig& config() const { return cfg_; }
  const MelFilterbank& filterbank() const { return fb_; }

  /// log10(filterbank * power + kLogFloor), before normalisation.
  Matrix<double> log_mel(const Waveform& w) const;

  FeatureMatrix compute(const Waveform& w) const;

 private:
  FrontendConfig cfg_;
  MelFilterbank fb_;
};

FeatureMatrix mel_spectrogram(const Waveform& w, const FrontendConfig& cfg = {});

// ---------------------------------------------------------------------------
// Analysis bands
// ---------------------------------------------------------------------------

inline constexpr std::size_t kNumBands = 8;
inline constexpr std::array<double, kNumBands + 1> kBandEdgesHz = {
    20.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 20000.0};

struct BandPartition {
  std::array<double, kNumBands + 1> edges_hz = kBandEdgesHz;
  std::vector<int> assignment;  // band index per channel

  std::vector<std::size_t> channels_in(std::size_t band) const;
  std::array<std::size_t, kNumBands> band_sizes() const;
};

/// Band b holds centres in [edges[b], edges[b+1]); the last band also
/// includes its upper edge.
BandPartition partition_bands(std::span<const double> channel_center_hz);

// ---------------------------------------------------------------------------
// Serialisation: `SPKF1` binary plus a `.json` sidecar with the channel
// centres and normalisation state.
// ---------------------------------------------------------------------------

void write_features(const std::filesystem::path& path, const FeatureMatrix& f);
FeatureMatrix read_features(const std::filesystem::path& path);

}  // namespace spikebench

#endif  // SPIKEBENCH_FRONTEND_HPP_
