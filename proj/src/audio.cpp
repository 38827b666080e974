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
#include <numbers>
#include <numeric>

#include "spikebench/error.hpp"
#include "spikebench/ingest.hpp"

namespace spikebench {
namespace {

double kaiser(double r, double beta) {
  const double a = 1.0 - r * r;
  if (a <= 0.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(a)) / std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

Resampler::Resampler(int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) {
    throw ConfigError("resampler rates must be positive");
  }
  const int g = std::gcd(from_rate, to_rate);
  up_ = to_rate / g;
  down_ = from_rate / g;

  constexpr int kHalf = kTapsPerPhase / 2;
  const double cutoff = 0.5 / std::max(up_, down_);  // cycles per upsampled sample
  const double half_span = static_cast<double>(kHalf) * up_;
  taps_.resize(static_cast<std::size_t>(up_) * kTapsPerPhase);
  for (int phase = 0; phase < up_; ++phase) {
    double* row = taps_.data() + static_cast<std::size_t>(phase) * kTapsPerPhase;
    double sum = 0.0;
    for (int j = 0; j < kTapsPerPhase; ++j) {
      const double d = phase + static_cast<double>(kHalf - 1 - j) * up_;
      row[j] = 2.0 * cutoff * sinc(2.0 * cutoff * d) * kaiser(d / half_span, kKaiserBeta);
      sum += row[j];
    }
    // Unity DC gain per phase.
    for (int j = 0; j < kTapsPerPhase; ++j) row[j] /= sum;
  }
}

std::vector<double> Resampler::process(std::span<const double> input) const {
  const auto n = static_cast<long long>(input.size());
  if (up_ == 1 && down_ == 1) return {input.begin(), input.end()};
  const long long out_len = (n * up_ + down_ - 1) / down_;
  std::vector<double> out(static_cast<std::size_t>(out_len));
  constexpr int kHalf = kTapsPerPhase / 2;
  for (long long i = 0; i < out_len; ++i) {
    const long long pos = i * down_;
    const long long base = pos / up_;
    const auto phase = static_cast<std::size_t>(pos % up_);
    const double* row = taps_.data() + phase * kTapsPerPhase;
    double acc = 0.0;
    const long long first = base - (kHalf - 1);
    for (int j = 0; j < kTapsPerPhase; ++j) {
      const long long k = first + j;
      if (k >= 0 && k < n) acc += row[j] * input[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> resample(std::span<const double> input, int from_rate, int to_rate) {
  return Resampler(from_rate, to_rate).process(input);
}

Waveform load_audio(const std::filesystem::path& path, int target_rate) {
  if (target_rate <= 0) throw ConfigError("target sample rate must be positive");
  Waveform w = read_wav(path);
  if (w.sample_rate != target_rate) {
    w.samples = resample(w.samples, w.sample_rate, target_rate);
    for (double& s : w.samples) s = std::clamp(s, -1.0, 1.0);
    w.sample_rate = target_rate;
  }
  return w;
}

Waveform center_crop(const Waveform& w, double seconds) {
  if (seconds <= 0.0) throw ConfigError("crop duration must be positive");
  const auto keep = static_cast<std::size_t>(std::llround(seconds * w.sample_rate));
  if (keep > w.samples.size()) {
    throw DataError(w.source_path + ": clip shorter than requested crop of " +
                    std::to_string(seconds) + " s");
  }
  const std::size_t start = (w.samples.size() - keep) / 2;
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.source_path = w.source_path;
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(start + keep));
  return out;
}

}  // namespace spikebench
