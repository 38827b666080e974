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
#include <cstdio>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "spikebench/error.hpp"
#include "spikebench/harness.hpp"

namespace spikebench {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBackgroundLevel = 0.002;

class ClipRng {
 public:
  ClipRng(std::uint64_t seed, std::uint64_t index)
      : engine_(seed * 0x9E3779B97F4A7C15ULL + index * 0xBF58476D1CE4E5B9ULL + 1) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller on the engine's raw output keeps results library-independent.
  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    cached_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool cached_ = false;
};

double sinc(double x) {
  return x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
}

// Windowed-sinc band-pass, Blackman window, cutoffs in Hz.
std::vector<double> bandpass(std::span<const double> x, double lo_hz, double hi_hz, int rate) {
  constexpr int kTaps = 255;
  constexpr int kHalf = kTaps / 2;
  const double f1 = lo_hz / rate;
  const double f2 = hi_hz / rate;
  std::vector<double> h(kTaps);
  for (int n = 0; n < kTaps; ++n) {
    const double m = n - kHalf;
    const double w = 0.42 - 0.5 * std::cos(kTwoPi * n / (kTaps - 1)) +
                     0.08 * std::cos(2.0 * kTwoPi * n / (kTaps - 1));
    h[static_cast<std::size_t>(n)] = (2.0 * f2 * sinc(2.0 * f2 * m) - 2.0 * f1 * sinc(2.0 * f1 * m)) * w;
  }
  std::vector<double> y(x.size(), 0.0);
  const auto len = static_cast<long long>(x.size());
  for (long long i = 0; i < len; ++i) {
    double acc = 0.0;
    for (int n = 0; n < kTaps; ++n) {
      const long long k = i + kHalf - n;
      if (k >= 0 && k < len) acc += h[static_cast<std::size_t>(n)] * x[static_cast<std::size_t>(k)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

std::vector<double> synthesize(const std::string& kind, std::size_t n, int rate, ClipRng& rng) {
  std::vector<double> x(n, 0.0);
  const double fs = rate;
  if (kind == "tone") {
    const double f = 1000.0 * rng.uniform(0.99, 1.01);
    const double phase = rng.uniform(0.0, kTwoPi);
    const double swell = rng.uniform(0.3, 0.7);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      const double env = 0.65 + 0.35 * std::sin(kTwoPi * swell * t + phase);
      x[i] = env * std::sin(kTwoPi * f * t + phase);
    }
  } else if (kind == "chirp") {
    const double f0 = 2000.0 * rng.uniform(0.97, 1.03);
    const double f1 = 4000.0 * rng.uniform(0.97, 1.03);
    const double period = rng.uniform(0.8, 1.2);
    double phase = rng.uniform(0.0, kTwoPi);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      const double frac = std::fmod(t, period) / period;
      phase += kTwoPi * (f0 + (f1 - f0) * frac) / fs;
      x[i] = std::sin(phase);
    }
  } else if (kind == "noise") {
    std::vector<double> white(n);
    for (double& v : white) v = rng.normal();
    const double lo = 6000.0 * rng.uniform(0.97, 1.03);
    const double hi = 10000.0 * rng.uniform(0.97, 1.03);
    x = bandpass(white, lo, hi, rate);
  } else if (kind == "am") {
    const double fc = 300.0 * rng.uniform(0.98, 1.02);
    const double fm = 4.0 * rng.uniform(0.9, 1.1);
    const double pc = rng.uniform(0.0, kTwoPi);
    const double pm = rng.uniform(0.0, kTwoPi);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      x[i] = (1.0 + 0.8 * std::sin(kTwoPi * fm * t + pm)) * std::sin(kTwoPi * fc * t + pc);
    }
  } else if (kind == "impulse") {
    const double rate_hz = 8.0 * rng.uniform(0.9, 1.1);
    const auto burst = static_cast<std::size_t>(0.005 * fs);
    double next = rng.uniform(0.0, 1.0 / rate_hz) * fs;
    while (next < static_cast<double>(n)) {
      const auto start = static_cast<std::size_t>(next);
      for (std::size_t k = 0; k < burst && start + k < n; ++k) {
        x[start + k] += rng.normal() * std::exp(-static_cast<double>(k) / (0.001 * fs));
      }
      next += fs / rate_hz * rng.uniform(0.9, 1.1);
    }
  } else {
    throw ConfigError("unknown synthetic class '" + kind + "'");
  }
  return x;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_clips < 1) throw ConfigError("synthetic corpus needs at least one clip");
  if (classes.empty()) throw ConfigError("synthetic corpus needs at least one class");
  if (!(duration_s > 0.0)) throw ConfigError("synthetic duration must be positive");
  if (sample_rate <= 0) throw ConfigError("synthetic sample rate must be positive");
  static const std::vector<std::string> kinds = {"tone", "chirp", "noise", "am", "impulse"};
  for (const auto& c : classes) {
    if (std::find(kinds.begin(), kinds.end(), c) == kinds.end()) {
      throw ConfigError("unknown synthetic class '" + c + "'");
    }
  }
  auto sorted = classes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("duplicate synthetic class");
  }
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate));
  const auto k = spec.classes.size();

  struct Item {
    ManifestEntry entry;
    Waveform clip;
  };
  std::vector<Item> items;
  items.reserve(static_cast<std::size_t>(spec.n_clips));
  for (std::size_t i = 0; i < static_cast<std::size_t>(spec.n_clips); ++i) {
    const std::string& kind = spec.classes[i % k];
    const std::size_t j = i / k;
    ClipRng rng(seed, i);

    std::vector<double> x = synthesize(kind, n, spec.sample_rate, rng);
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    const double gain = peak > 0.0 ? rng.uniform(0.35, 0.6) / peak : 0.0;
    // Quantise to 16-bit so the in-memory corpus equals its WAV round trip.
    for (double& v : x) {
      const double y = std::clamp(v * gain + kBackgroundLevel * rng.normal(), -1.0, 1.0);
      v = static_cast<double>(std::clamp(std::lround(y * 32768.0), -32768L, 32767L)) / 32768.0;
    }

    char name[32];
    std::snprintf(name, sizeof name, "_%03zu.wav", j);
    Item item;
    item.entry.path = kind + "/" + kind + name;
    item.entry.class_label = kind;
    if (spec.folds >= 2) {
      item.entry.fold = static_cast<int>(j % static_cast<std::size_t>(spec.folds)) + 1;
    } else {
      // The last fifth of each class (at least one clip) goes to test.
      const std::size_t m = (static_cast<std::size_t>(spec.n_clips) - i % k + k - 1) / k;
      const std::size_t t = m >= 2 ? std::max<std::size_t>(1, m / 5) : 0;
      item.entry.split = j + t >= m ? Split::kTest : Split::kTrain;
    }
    item.clip.samples = std::move(x);
    item.clip.sample_rate = spec.sample_rate;
    item.clip.source_path = item.entry.path;
    items.push_back(std::move(item));
  }
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.entry.path < b.entry.path; });

  SyntheticCorpus corpus;
  corpus.manifest.root = ".";
  for (auto& item : items) {
    corpus.manifest.entries.push_back(std::move(item.entry));
    corpus.clips.push_back(std::move(item.clip));
  }
  refresh_counts(corpus.manifest);
  return corpus;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Manifest m = corpus.manifest;
  m.root = dir;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const fs::path path = dir / m.entries[i].path;
    fs::create_directories(path.parent_path());
    write_wav(path, corpus.clips[i].samples, corpus.clips[i].sample_rate);
  }
  write_manifest_csv(dir / "manifest.csv", m);
}

}  // namespace spikebench
