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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "binary_io.hpp"
#include "json.hpp"
#include "spikebench/error.hpp"
#include "spikebench/frontend.hpp"

namespace spikebench {
namespace {

// FFTW planning is not thread-safe; execution on a private plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(static_cast<std::size_t>(n));
    out_ = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }

  void power(std::span<double> dst) {
    fftw_execute(plan_);
    for (int k = 0; k <= n_ / 2; ++k) {
      dst[static_cast<std::size_t>(k)] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  int n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

std::size_t frame_count(std::size_t n_samples, int n_fft, int hop) {
  if (n_fft <= 0 || hop <= 0) throw ConfigError("n_fft and hop must be positive");
  const auto n = static_cast<std::size_t>(n_fft);
  if (n_samples < n) return 0;
  return 1 + (n_samples - n) / static_cast<std::size_t>(hop);
}

std::vector<double> make_window(WindowKind kind, int n) {
  std::vector<double> w(static_cast<std::size_t>(n), 1.0);
  if (kind == WindowKind::kHann) {
    for (int i = 0; i < n; ++i) {
      w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    }
  }
  return w;
}

Matrix<double> stft_power(std::span<const double> samples, int n_fft, int hop,
                          WindowKind window) {
  if (!power_of_two(n_fft)) throw ConfigError("n_fft must be a power of two");
  if (hop <= 0) throw ConfigError("hop must be positive");
  if (samples.size() < static_cast<std::size_t>(n_fft)) {
    throw DataError("clip shorter than n_fft (" + std::to_string(samples.size()) +
                    " < " + std::to_string(n_fft) + " samples)");
  }
  const std::size_t frames = frame_count(samples.size(), n_fft, hop);
  const auto bins = static_cast<std::size_t>(n_fft / 2 + 1);
  const std::vector<double> win = make_window(window, n_fft);

  Matrix<double> power(bins, frames);
  RealFft fft(n_fft);
  std::vector<double> column(bins);
  for (std::size_t f = 0; f < frames; ++f) {
    const double* src = samples.data() + f * static_cast<std::size_t>(hop);
    double* in = fft.input();
    for (int i = 0; i < n_fft; ++i) in[i] = src[i] * win[static_cast<std::size_t>(i)];
    fft.power(column);
    for (std::size_t k = 0; k < bins; ++k) power(k, f) = column[k];
  }
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(int n_mels, double f_min, double f_max, int n_fft,
                             int sample_rate) {
  if (n_mels < 2) throw ConfigError("n_mels must be at least 2");
  if (!power_of_two(n_fft)) throw ConfigError("n_fft must be a power of two");
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  if (f_min < 0.0 || !(f_min < f_max)) throw ConfigError("need 0 <= f_min < f_max");
  if (f_max > sample_rate / 2.0) {
    throw ConfigError("f_max " + std::to_string(f_max) + " Hz is above Nyquist");
  }

  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  const auto points = static_cast<std::size_t>(n_mels + 2);
  std::vector<double> edge_hz(points);
  for (std::size_t i = 0; i < points; ++i) {
    edge_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                        static_cast<double>(n_mels + 1));
  }

  const auto bins = static_cast<std::size_t>(n_fft / 2 + 1);
  const double bin_hz = static_cast<double>(sample_rate) / n_fft;
  MelFilterbank fb;
  fb.weights = Matrix<double>(static_cast<std::size_t>(n_mels), bins);
  fb.center_hz.resize(static_cast<std::size_t>(n_mels));
  for (std::size_t m = 0; m < fb.center_hz.size(); ++m) {
    const double lo = edge_hz[m];
    const double c = edge_hz[m + 1];
    const double hi = edge_hz[m + 2];
    fb.center_hz[m] = c;
    bool any = false;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= c) {
        w = (f - lo) / (c - lo);
      } else if (f > c && f < hi) {
        w = (hi - f) / (hi - c);
      }
      fb.weights(m, k) = w;
      any = any || w > 0.0;
    }
    if (!any) {
      const auto k = std::min(bins - 1, static_cast<std::size_t>(std::lround(c / bin_hz)));
      fb.weights(m, k) = 1.0;
    }
  }
  return fb;
}

std::vector<NormState> normalize_rows(Matrix<double>& m) {
  std::vector<NormState> state(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    if (row.empty()) continue;
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    NormState s{*lo, *hi - *lo};
    if (s.degenerate()) {
      std::fill(row.begin(), row.end(), 0.0);
    } else {
      for (double& v : row) v = (v - s.offset) / s.scale;
    }
    state[r] = s;
  }
  return state;
}

Matrix<double> denormalize(const Matrix<double>& normalized, std::span<const NormState> state) {
  if (state.size() != normalized.rows()) {
    throw DataError("normalisation state does not match channel count");
  }
  Matrix<double> out(normalized.rows(), normalized.cols());
  for (std::size_t r = 0; r < normalized.rows(); ++r) {
    const auto src = normalized.row(r);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) {
      dst[c] = src[c] * state[r].scale + state[r].offset;
    }
  }
  return out;
}

MelFrontend::MelFrontend(const FrontendConfig& cfg)
    : cfg_(cfg),
      fb_(mel_filterbank(cfg.n_mels, cfg.f_min, cfg.f_max, cfg.n_fft, cfg.sample_rate)) {
  if (cfg.hop <= 0) throw ConfigError("hop must be positive");
}

Matrix<double> MelFrontend::log_mel(const Waveform& w) const {
  if (w.sample_rate != cfg_.sample_rate) {
    const std::string where = w.source_path.empty() ? "waveform" : w.source_path;
    throw DataError(where + ": sample rate " + std::to_string(w.sample_rate) +
                    " does not match front-end rate " + std::to_string(cfg_.sample_rate));
  }
  const Matrix<double> power = stft_power(w.samples, cfg_.n_fft, cfg_.hop, cfg_.window);
  const std::size_t mels = fb_.weights.rows();
  const std::size_t bins = fb_.weights.cols();
  Matrix<double> out(mels, power.cols());
  std::vector<double> column(bins);
  for (std::size_t f = 0; f < power.cols(); ++f) {
    for (std::size_t k = 0; k < bins; ++k) column[k] = power(k, f);
    for (std::size_t m = 0; m < mels; ++m) {
      const auto weights = fb_.weights.row(m);
      double acc = 0.0;
      for (std::size_t k = 0; k < bins; ++k) acc += weights[k] * column[k];
      out(m, f) = std::log10(acc + kLogFloor);
    }
  }
  return out;
}

FeatureMatrix MelFrontend::compute(const Waveform& w) const {
  FeatureMatrix f;
  f.values = log_mel(w);
  f.norm_state = normalize_rows(f.values);
  f.channel_center_hz = fb_.center_hz;
  f.frame_rate = static_cast<double>(cfg_.sample_rate) / cfg_.hop;
  return f;
}

FeatureMatrix mel_spectrogram(const Waveform& w, const FrontendConfig& cfg) {
  return MelFrontend(cfg).compute(w);
}

std::vector<std::size_t> BandPartition::channels_in(std::size_t band) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < assignment.size(); ++c) {
    if (static_cast<std::size_t>(assignment[c]) == band) out.push_back(c);
  }
  return out;
}

std::array<std::size_t, kNumBands> BandPartition::band_sizes() const {
  std::array<std::size_t, kNumBands> sizes{};
  for (int b : assignment) ++sizes[static_cast<std::size_t>(b)];
  return sizes;
}

BandPartition partition_bands(std::span<const double> channel_center_hz) {
  BandPartition p;
  p.assignment.reserve(channel_center_hz.size());
  for (std::size_t c = 0; c < channel_center_hz.size(); ++c) {
    const double hz = channel_center_hz[c];
    if (!(hz >= p.edges_hz.front() && hz <= p.edges_hz.back())) {
      throw ConfigError("channel centre " + std::to_string(hz) +
                        " Hz outside the analysis range");
    }
    // upper_bound gives the first edge strictly above hz.
    auto it = std::upper_bound(p.edges_hz.begin(), p.edges_hz.end(), hz);
    auto band = static_cast<int>(std::distance(p.edges_hz.begin(), it)) - 1;
    band = std::min(band, static_cast<int>(kNumBands) - 1);
    p.assignment.push_back(band);
  }
  return p;
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& f) {
  detail::ByteWriter w;
  w.raw("SPKF1");
  w.u32(static_cast<std::uint32_t>(f.channels()));
  w.u32(static_cast<std::uint32_t>(f.frames()));
  w.f32(static_cast<float>(f.frame_rate));
  for (double v : f.values.values()) w.f32(static_cast<float>(v));
  detail::write_file(path.string(), w.bytes());

  nlohmann::json side;
  side["channels"] = f.channels();
  side["frames"] = f.frames();
  side["frame_rate"] = f.frame_rate;
  side["channel_center_hz"] = f.channel_center_hz;
  auto& norm = side["norm_state"] = nlohmann::json::array();
  for (const auto& s : f.norm_state) norm.push_back({{"offset", s.offset}, {"scale", s.scale}});
  detail::write_text(path.string() + ".json", side.dump(2) + "\n");
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  detail::ByteReader r(bytes, path.string());
  r.expect("SPKF1");
  const std::size_t channels = r.u32();
  const std::size_t frames = r.u32();
  FeatureMatrix f;
  f.frame_rate = r.f32();
  f.values = Matrix<double>(channels, frames);
  for (double& v : f.values.values()) v = r.f32();
  if (!r.done()) throw DataError(path.string() + ": trailing bytes after payload");

  const auto text = detail::read_file(path.string() + ".json");
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(text.begin(), text.end());
    f.frame_rate = side.at("frame_rate").get<double>();
    f.channel_center_hz = side.at("channel_center_hz").get<std::vector<double>>();
    for (const auto& s : side.at("norm_state")) {
      f.norm_state.push_back({s.at("offset").get<double>(), s.at("scale").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ".json: " + e.what());
  }
  if (f.channel_center_hz.size() != channels || f.norm_state.size() != channels) {
    throw DataError(path.string() + ": sidecar does not match channel count");
  }
  return f;
}

}  // namespace spikebench
