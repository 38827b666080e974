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

#ifndef SPIKEBENCH_METRICS_HPP_
#define SPIKEBENCH_METRICS_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikebench/codec.hpp"
#include "spikebench/frontend.hpp"
#include "spikebench/matrix.hpp"

namespace spikebench {

/// Scores saturate at +/- this many dB so perfect reconstructions stay finite.
inline constexpr double kDbClamp = 100.0;

/// 10 log10(sum s^2 / sum (s - s_hat)^2), clamped. Zero error gives +100;
/// a zero reference with nonzero error gives -100.
double snr_db(std::span<const double> s, std::span<const double> s_hat);
double snr_db(const Matrix<double>& s, const Matrix<double>& s_hat);

/// Relative error energy in dB: exactly -snr_db. More negative is better.
double errdb(std::span<const double> s, std::span<const double> s_hat);
double errdb(const Matrix<double>& s, const Matrix<double>& s_hat);

struct ReconScore {
  double errdb = 0.0;
  double snr = 0.0;
  std::optional<int> band;  // nullopt means all channels
  std::optional<std::string> class_label;
  std::size_t n_channels = 0;
  std::size_t n_frames = 0;
};

/// One entry per analysis band; empty bands are nullopt.
std::array<std::optional<ReconScore>, kNumBands> score_per_band(
    const Matrix<double>& reference, const Matrix<double>& reconstruction,
    const BandPartition& bands);

struct ClassScore {
  Codec codec = Codec::kStepForward;
  std::string class_label;
  double errdb = 0.0;
};

struct ClassTableRow {
  Codec codec = Codec::kStepForward;
  std::string class_label;
  double mean_errdb = 0.0;
  std::size_t clips = 0;
};

/// Unweighted mean ERRdB per (codec, class), rows ordered by codec then
/// class label. The result does not depend on input order.
std::vector<ClassTableRow> score_per_class(std::span<const ClassScore> scores);

/// Arithmetic mean computed over the sorted values, so that permuting the
/// input never changes the last bit.
double stable_mean(std::vector<double> values);

/// Percentage of nonzero entries over channels x frames.
double firing_rate(const SpikeTrain& st);

struct EfficiencyStat {
  double firing_rate_pct = 0.0;
  double encode_ms = 0.0;
  std::size_t aux_bytes = 0;
};

/// Working state an encoder keeps per channel while it runs.
std::size_t encoder_state_bytes(Codec codec, const CodecConfig& cfg);

/// Median wall-clock time of `repetitions` (at least 5) full encodes, plus
/// analytic memory: serialised train size and encoder state.
EfficiencyStat measure_encode_cost(const FeatureMatrix& f, const CodecConfig& cfg,
                                   Codec codec, int repetitions = 5);

}  // namespace spikebench

#endif  // SPIKEBENCH_METRICS_HPP_
