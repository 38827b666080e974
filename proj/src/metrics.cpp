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
#include <chrono>
#include <cmath>
#include <map>

#include "spikebench/error.hpp"
#include "spikebench/metrics.hpp"

namespace spikebench {
namespace {

double ratio_db(double signal, double noise) {
  if (noise == 0.0) return kDbClamp;
  if (signal == 0.0) return -kDbClamp;
  return std::clamp(10.0 * std::log10(signal / noise), -kDbClamp, kDbClamp);
}

void check_shapes(std::size_t a, std::size_t b) {
  if (a != b) throw DataError("reference and reconstruction differ in size");
}

}  // namespace

double snr_db(std::span<const double> s, std::span<const double> s_hat) {
  check_shapes(s.size(), s_hat.size());
  double signal = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double e = s[i] - s_hat[i];
    signal += s[i] * s[i];
    noise += e * e;
  }
  if (!std::isfinite(signal) || !std::isfinite(noise)) {
    throw NumericError("non-finite energy in SNR computation");
  }
  return ratio_db(signal, noise);
}

double snr_db(const Matrix<double>& s, const Matrix<double>& s_hat) {
  if (!s.same_shape(s_hat)) throw DataError("reference and reconstruction differ in shape");
  return snr_db(s.values(), s_hat.values());
}

double errdb(std::span<const double> s, std::span<const double> s_hat) {
  return -snr_db(s, s_hat);
}

double errdb(const Matrix<double>& s, const Matrix<double>& s_hat) {
  return -snr_db(s, s_hat);
}

std::array<std::optional<ReconScore>, kNumBands> score_per_band(
    const Matrix<double>& reference, const Matrix<double>& reconstruction,
    const BandPartition& bands) {
  if (!reference.same_shape(reconstruction)) {
    throw DataError("reference and reconstruction differ in shape");
  }
  if (bands.assignment.size() != reference.rows()) {
    throw DataError("band partition does not match channel count");
  }
  std::array<std::optional<ReconScore>, kNumBands> out;
  for (std::size_t b = 0; b < kNumBands; ++b) {
    const auto channels = bands.channels_in(b);
    if (channels.empty()) continue;
    std::vector<double> s;
    std::vector<double> s_hat;
    s.reserve(channels.size() * reference.cols());
    s_hat.reserve(s.capacity());
    for (std::size_t c : channels) {
      s.insert(s.end(), reference.row(c).begin(), reference.row(c).end());
      s_hat.insert(s_hat.end(), reconstruction.row(c).begin(), reconstruction.row(c).end());
    }
    ReconScore score;
    score.snr = snr_db(s, s_hat);
    score.errdb = -score.snr;
    score.band = static_cast<int>(b);
    score.n_channels = channels.size();
    score.n_frames = reference.cols();
    out[b] = score;
  }
  return out;
}

double stable_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<ClassTableRow> score_per_class(std::span<const ClassScore> scores) {
  std::map<std::pair<Codec, std::string>, std::vector<double>> groups;
  for (const auto& s : scores) groups[{s.codec, s.class_label}].push_back(s.errdb);
  std::vector<ClassTableRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, values] : groups) {
    const std::size_t n = values.size();
    rows.push_back({key.first, key.second, stable_mean(std::move(values)), n});
  }
  return rows;
}

double firing_rate(const SpikeTrain& st) {
  if (st.spikes.empty()) throw DataError("firing rate of an empty spike train");
  std::size_t nonzero = 0;
  for (std::int8_t s : st.spikes.values()) nonzero += s != 0;
  return 100.0 * static_cast<double>(nonzero) / static_cast<double>(st.spikes.size());
}

std::size_t encoder_state_bytes(Codec codec, const CodecConfig& cfg) {
  switch (codec) {
    case Codec::kStepForward:
      return 2 * sizeof(double);  // baseline, threshold
    case Codec::kMovingWindow:
      // window history plus threshold
      return (static_cast<std::size_t>(cfg.window) + 1) * sizeof(double);
    case Codec::kThresholdAdaptive:
      return 2 * sizeof(double);  // baseline, adaptive threshold
  }
  return 0;
}

EfficiencyStat measure_encode_cost(const FeatureMatrix& f, const CodecConfig& cfg, Codec codec,
                                   int repetitions) {
  using Clock = std::chrono::steady_clock;
  repetitions = std::max(repetitions, 5);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(repetitions));
  SpikeTrain st;
  for (int i = 0; i < repetitions; ++i) {
    const auto t0 = Clock::now();
    st = encode_matrix(f, cfg, codec);
    const auto t1 = Clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  const double median =
      times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);

  EfficiencyStat stat;
  stat.firing_rate_pct = firing_rate(st);
  stat.encode_ms = median;
  stat.aux_bytes = serialize_spikes(st).size() + f.channels() * encoder_state_bytes(codec, cfg);
  return stat;
}

}  // namespace spikebench
