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
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "spikebench/error.hpp"
#include "spikebench/frontend.hpp"
#include "test_util.hpp"

using namespace spikebench;
using spikebench::testing::TempDir;

namespace {

Waveform wave(std::vector<double> samples, int rate = 44100) {
  Waveform w;
  w.samples = std::move(samples);
  w.sample_rate = rate;
  return w;
}

}  // namespace

TEST_CASE("frame count") {
  CHECK(frame_count(220500, 1024, 256) == 858);
  CHECK(frame_count(1024, 1024, 256) == 1);
  CHECK(frame_count(1279, 1024, 256) == 1);
  CHECK(frame_count(1280, 1024, 256) == 2);
  CHECK(frame_count(1000, 1024, 256) == 0);

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> len(1024, 30000);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = len(rng);
    const Matrix<double> p = stft_power(std::vector<double>(n, 0.0), 1024, 256);
    // Count frame starts by walking the hop until the frame falls off the end.
    std::size_t expected = 0;
    for (std::size_t start = 0; start + 1024 <= n; start += 256) ++expected;
    CHECK(p.cols() == expected);
    CHECK(p.rows() == 513);
  }
}

TEST_CASE("stft_power matches a direct DFT") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(300);
  for (double& v : x) v = u(rng);
  const int n = 64, hop = 24;
  for (WindowKind kind : {WindowKind::kHann, WindowKind::kRectangular}) {
    const Matrix<double> p = stft_power(x, n, hop, kind);
    REQUIRE(p.cols() == 1 + (300 - 64) / 24);
    for (std::size_t f = 0; f < p.cols(); ++f) {
      std::vector<double> frame(n);
      for (int i = 0; i < n; ++i) {
        const double w = kind == WindowKind::kHann
                             ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n)
                             : 1.0;
        frame[i] = x[f * hop + i] * w;
      }
      const auto ref = testing::naive_power(frame);
      for (std::size_t k = 0; k < ref.size(); ++k) {
        CHECK(p(k, f) == doctest::Approx(ref[k]).epsilon(1e-9).scale(1.0));
      }
    }
  }
}

TEST_CASE("stft_power edge cases") {
  const Matrix<double> z = stft_power(std::vector<double>(5000, 0.0), 1024, 256);
  CHECK(std::all_of(z.values().begin(), z.values().end(), [](double v) { return v == 0.0; }));
  CHECK_THROWS_AS(stft_power(std::vector<double>(1000, 0.0), 1024, 256), DataError);
  CHECK_THROWS_AS(stft_power(std::vector<double>(5000, 0.0), 1000, 256), ConfigError);
}

TEST_CASE("4 kHz tone peaks at bin 93 in every frame") {
  const auto x = testing::sine(4000.0, 44100, 44100);
  const Matrix<double> p = stft_power(x, 1024, 256);
  const auto expected = static_cast<std::size_t>(std::lround(4000.0 * 1024 / 44100));
  REQUIRE(expected == 93);
  for (std::size_t f = 0; f < p.cols(); ++f) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.rows(); ++k) {
      if (p(k, f) > p(best, f)) best = k;
    }
    CHECK(best == expected);
  }
}

TEST_CASE("mel scale round trip") {
  for (double hz : {0.0, 20.0, 700.0, 1000.0, 8000.0, 20000.0}) {
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-12));
  }
  CHECK(hz_to_mel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
}

TEST_CASE("mel filterbank") {
  SUBCASE("128 bands over 20 Hz - 20 kHz") {
    const MelFilterbank fb = mel_filterbank(128, 20, 20000, 1024, 44100);
    CHECK(fb.weights.rows() == 128);
    CHECK(fb.weights.cols() == 513);
    CHECK(std::adjacent_find(fb.center_hz.begin(), fb.center_hz.end(),
                             std::greater_equal<>()) == fb.center_hz.end());
    CHECK(fb.center_hz.front() > 20.0);
    CHECK(fb.center_hz.back() < 20000.0);
    for (std::size_t m = 0; m < 128; ++m) {
      const auto row = fb.weights.row(m);
      CHECK(std::all_of(row.begin(), row.end(), [](double v) { return v >= 0.0; }));
      CHECK(std::accumulate(row.begin(), row.end(), 0.0) > 0.0);
    }
  }
  SUBCASE("row sums stay positive for narrow configurations") {
    for (int n_mels : {2, 40, 256}) {
      for (int n_fft : {256, 512, 2048}) {
        const MelFilterbank fb = mel_filterbank(n_mels, 0, 8000, n_fft, 16000);
        for (std::size_t m = 0; m < fb.weights.rows(); ++m) {
          const auto row = fb.weights.row(m);
          CHECK(std::accumulate(row.begin(), row.end(), 0.0) > 0.0);
        }
      }
    }
  }
  SUBCASE("two bands over the full band sit at the mel thirds") {
    const double nyq = 22050.0;
    const MelFilterbank fb = mel_filterbank(2, 0, nyq, 1024, 44100);
    const double top = 2595.0 * std::log10(1.0 + nyq / 700.0);
    const double bin_hz = 44100.0 / 1024;
    for (int m = 0; m < 2; ++m) {
      const double mel = top * (m + 1) / 3.0;
      const double hz = 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
      CHECK(fb.center_hz[m] == doctest::Approx(hz).epsilon(1e-12));
      const auto row = fb.weights.row(m);
      const auto peak = std::max_element(row.begin(), row.end()) - row.begin();
      CHECK(std::abs(peak * bin_hz - hz) <= bin_hz);
    }
  }
  SUBCASE("invalid ranges") {
    CHECK_THROWS_AS(mel_filterbank(128, 20, 20000, 1024, 22050), ConfigError);
    CHECK_THROWS_AS(mel_filterbank(1, 20, 2000, 1024, 22050), ConfigError);
  }
}

TEST_CASE("normalisation") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-10.0, 3.0);
  Matrix<double> m(6, 50);
  for (double& v : m.values()) v = u(rng);
  std::fill(m.row(2).begin(), m.row(2).end(), -4.5);
  const Matrix<double> original = m;
  const auto state = normalize_rows(m);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    CHECK(*std::min_element(row.begin(), row.end()) >= 0.0);
    CHECK(*std::max_element(row.begin(), row.end()) <= 1.0);
  }
  CHECK(state[2].degenerate());
  CHECK(std::all_of(m.row(2).begin(), m.row(2).end(), [](double v) { return v == 0.0; }));
  const Matrix<double> back = denormalize(m, state);
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(std::abs(back.values()[i] - original.values()[i]) <= 1e-9);
  }
}

TEST_CASE("mel_spectrogram") {
  SUBCASE("silence is flat in every channel") {
    const FeatureMatrix f = mel_spectrogram(wave(std::vector<double>(44100, 0.0)));
    CHECK(f.channels() == 128);
    for (const auto& s : f.norm_state) CHECK(s.degenerate());
    CHECK(std::all_of(f.values.values().begin(), f.values.values().end(),
                      [](double v) { return v == 0.0; }));
  }
  SUBCASE("5 s clip gives 128 x 858 values") {
    const FeatureMatrix f = mel_spectrogram(wave(testing::sine(440.0, 44100, 220500)));
    CHECK(f.channels() == 128);
    CHECK(f.frames() == 858);
    CHECK(f.frame_rate == doctest::Approx(44100.0 / 256));
    for (double v : f.values.values()) {
      REQUIRE(std::isfinite(v));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  SUBCASE("1 kHz tone lights up the channel nearest 1 kHz") {
    const MelFrontend fe(FrontendConfig{});
    const Matrix<double> lm = fe.log_mel(wave(testing::sine(1000.0, 44100, 44100)));
    std::size_t best = 0;
    double best_mean = -1e300;
    for (std::size_t c = 0; c < lm.rows(); ++c) {
      const auto row = lm.row(c);
      const double mean = std::accumulate(row.begin(), row.end(), 0.0) / row.size();
      if (mean > best_mean) best_mean = mean, best = c;
    }
    const auto& hz = fe.filterbank().center_hz;
    const double spacing = hz[std::min(best + 1, hz.size() - 1)] - hz[best == 0 ? 0 : best - 1];
    CHECK(std::abs(hz[best] - 1000.0) <= spacing / 2.0 + 1e-9);
  }
  SUBCASE("deterministic") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 0.1);
    std::vector<double> x(20000);
    for (double& v : x) v = n(rng);
    const FeatureMatrix a = mel_spectrogram(wave(x));
    const FeatureMatrix b = mel_spectrogram(wave(x));
    CHECK(a.values == b.values);
  }
  SUBCASE("a waveform at the wrong rate is rejected") {
    CHECK_THROWS_AS(mel_spectrogram(wave(std::vector<double>(5000, 0.0), 16000)), DataError);
  }
}

TEST_CASE("partition_bands") {
  const std::vector<double> one_each = {100, 200, 300, 700, 1500, 3000, 5000, 20000};
  const BandPartition p = partition_bands(one_each);
  CHECK(p.assignment == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});

  const std::vector<double> edges = {20, 125, 250, 500, 1000, 2000, 4000, 8000};
  CHECK(partition_bands(edges).assignment == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});

  CHECK_THROWS_AS(partition_bands(std::vector<double>{19.9}), ConfigError);
  CHECK_THROWS_AS(partition_bands(std::vector<double>{20000.5}), ConfigError);

  const MelFilterbank fb = mel_filterbank(128, 20, 20000, 1024, 44100);
  const BandPartition full = partition_bands(fb.center_hz);
  REQUIRE(full.assignment.size() == 128);
  CHECK(std::is_sorted(full.assignment.begin(), full.assignment.end()));
  std::array<std::size_t, kNumBands> counted{};
  for (std::size_t c = 0; c < 128; ++c) {
    const double hz = fb.center_hz[c];
    int band = 0;
    while (band < 7 && hz >= kBandEdgesHz[band + 1]) ++band;
    CHECK(full.assignment[c] == band);
    ++counted[band];
  }
  CHECK(full.band_sizes() == counted);
  const auto sizes = full.band_sizes();
  CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == 128);
  std::vector<int> seen(128, 0);
  for (std::size_t b = 0; b < kNumBands; ++b) {
    for (std::size_t c : full.channels_in(b)) ++seen[c];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }));
}

TEST_CASE("feature files round trip through SPKF1") {
  TempDir dir;
  const FeatureMatrix f = mel_spectrogram(wave(testing::sine(2500.0, 44100, 8000)));
  write_features(dir / "f.spkf", f);
  const FeatureMatrix g = read_features(dir / "f.spkf");
  REQUIRE(g.values.same_shape(f.values));
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    CHECK(g.values.values()[i] == static_cast<double>(static_cast<float>(f.values.values()[i])));
  }
  CHECK(g.channel_center_hz == f.channel_center_hz);
  CHECK(g.frame_rate == doctest::Approx(f.frame_rate));
  const std::string raw = testing::slurp(dir / "f.spkf");
  CHECK(raw.substr(0, 5) == "SPKF1");
  CHECK(raw.size() == 5 + 4 + 4 + 4 + 4 * f.values.size());
}
