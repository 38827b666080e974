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

#ifndef SPIKEBENCH_CODEC_HPP_
#define SPIKEBENCH_CODEC_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikebench/frontend.hpp"
#include "spikebench/matrix.hpp"

namespace spikebench {

// Temporal-contrast spike codecs. Every encoder emits at most one signed
// spike per frame and tracks a baseline that its decoder can rebuild from
// the spikes plus a few per-channel values.

enum class Codec : std::uint8_t { kStepForward = 0, kMovingWindow = 1, kThresholdAdaptive = 2 };

inline constexpr Codec kAllCodecs[] = {Codec::kStepForward, Codec::kMovingWindow,
                                       Codec::kThresholdAdaptive};

/// "SF", "MW", "TAE".
std::string codec_name(Codec c);
/// Accepts sf/mw/tae in any case.
Codec parse_codec(const std::string& text);

/// Relative parameters; absolute thresholds are these fractions times the
/// per-channel range (or 1 for a flat channel).
struct CodecConfig {
  double threshold_rel = 0.05;
  int window = 3;
  double tae_gamma = 2.0;
  double tae_tmin_rel = 0.01;
  double tae_tmax_rel = 0.5;

  /// Throws ConfigError if the invariants do not hold.
  void validate() const;

  friend bool operator==(const CodecConfig&, const CodecConfig&) = default;
};

struct StepForwardParams {
  double threshold = 0.0;
};

struct MovingWindowParams {
  double threshold = 0.0;
  int window = 1;
};

struct AdaptiveParams {
  double threshold = 0.0;  // initial threshold
  double gamma = 2.0;
  double t_min = 0.0;
  double t_max = 0.0;
};

/// Everything a decoder needs for one channel besides the spikes.
struct SideInfo {
  double initial = 0.0;    // x[0]
  double threshold = 0.0;  // absolute (initial) threshold
  double scale = 1.0;      // channel range, or 1 for a flat channel

  friend bool operator==(const SideInfo&, const SideInfo&) = default;
};

/// max(x) - min(x), or 1 when the channel is flat.
double channel_scale(std::span<const double> x);

StepForwardParams step_forward_params(const CodecConfig& cfg, double scale);
MovingWindowParams moving_window_params(const CodecConfig& cfg, double scale);
AdaptiveParams adaptive_params(const CodecConfig& cfg, double scale);

// Single-channel kernels with absolute parameters. `out` must have the same
// length as the input. All encoders reject non-finite samples.

/// Returns the final baseline.
double encode_sf(std::span<const double> x, const StepForwardParams& p,
                 std::span<std::int8_t> out);
void decode_sf(std::span<const std::int8_t> spikes, double initial,
               const StepForwardParams& p, std::span<double> out);

void encode_mw(std::span<const double> x, const MovingWindowParams& p,
               std::span<std::int8_t> out);
void decode_mw(std::span<const std::int8_t> spikes, double initial,
               const MovingWindowParams& p, std::span<double> out);

/// When `thresholds` is given it receives the threshold in force at each
/// frame (before that frame's adaptation), for replay checks.
void encode_tae(std::span<const double> x, const AdaptiveParams& p,
                std::span<std::int8_t> out, std::vector<double>* thresholds = nullptr);
void decode_tae(std::span<const std::int8_t> spikes, double initial,
                const AdaptiveParams& p, std::span<double> out,
                std::vector<double>* thresholds = nullptr);

struct ChannelCode {
  std::vector<std::int8_t> spikes;
  SideInfo side;
};

/// Channel-level encode with relative configuration.
ChannelCode encode_channel(Codec codec, std::span<const double> x, const CodecConfig& cfg);
std::vector<double> decode_channel(Codec codec, std::span<const std::int8_t> spikes,
                                   const SideInfo& side, const CodecConfig& cfg);

struct SpikeTrain {
  Matrix<std::int8_t> spikes;  // channels x frames, entries in {-1, 0, +1}
  std::vector<SideInfo> side_info;
  Codec codec = Codec::kStepForward;
  CodecConfig params;

  std::size_t channels() const { return spikes.rows(); }
  std::size_t frames() const { return spikes.cols(); }

  friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;
};

SpikeTrain encode_matrix(const FeatureMatrix& f, const CodecConfig& cfg, Codec codec);
SpikeTrain encode_matrix(const Matrix<double>& values, const CodecConfig& cfg, Codec codec);

/// Reconstructs the normalised feature values.
Matrix<double> decode_matrix(const SpikeTrain& st);

// ---------------------------------------------------------------------------
// Serialisation: `SPKS1` header, 2-bit packed spikes (00 = 0, 01 = +1,
// 10 = -1, four entries per byte, first entry in the low bits), then three
// float32 side-info values per channel.
// ---------------------------------------------------------------------------

std::size_t packed_spike_bytes(std::size_t channels, std::size_t frames);
std::size_t side_info_bytes(std::size_t channels);

std::vector<std::uint8_t> serialize_spikes(const SpikeTrain& st);
SpikeTrain deserialize_spikes(std::span<const std::uint8_t> bytes, const std::string& name);

/// Writes the binary container and a `.json` debugging mirror.
void write_spikes(const std::filesystem::path& path, const SpikeTrain& st);
SpikeTrain read_spikes(const std::filesystem::path& path);

}  // namespace spikebench

#endif  // SPIKEBENCH_CODEC_HPP_
