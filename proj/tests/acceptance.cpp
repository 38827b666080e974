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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Pass criterion numbers to run a subset.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "codec_oracle.hpp"
#include "spikebench/codec.hpp"
#include "spikebench/frontend.hpp"
#include "spikebench/harness.hpp"
#include "spikebench/metrics.hpp"
#include "spikebench/snn.hpp"
#include "test_util.hpp"

using namespace spikebench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

// Collects failures without stopping, so the detail names the first one.
struct Verdict {
  bool ok = true;
  std::string first;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) first = what;
    ok = ok && cond;
  }
  Outcome done(const std::string& summary) const { return {ok, ok ? summary : first}; }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Library kernels against the brute-force reference traces.

oracle::Params oracle_params(const CodecConfig& c) {
  return {c.threshold_rel, c.window, c.tae_gamma, c.tae_tmin_rel, c.tae_tmax_rel};
}

template <std::size_t N>
bool same(const std::array<std::int8_t, N>& a, const std::int8_t* b, std::size_t n) {
  return std::equal(b, b + n, a.begin());
}

template <std::size_t N>
bool same(const std::array<double, N>& a, const double* b, std::size_t n) {
  return std::equal(b, b + n, a.begin());
}

constexpr int kLevels = 11;
constexpr std::size_t kMaxLen = 8;
constexpr std::size_t kPrefix = 2;  // leading samples fixed per work chunk

struct GridChunk {
  std::size_t n;
  int lead;  // leading digits, base kLevels
};

// Checks every signal of length c.n whose first min(n, kPrefix) samples are
// fixed by c.lead. Returns the first mismatch, or an empty string.
std::string check_chunk(const GridChunk& c, std::size_t& count) {
  const CodecConfig cfg;
  const oracle::Params op = oracle_params(cfg);
  const std::size_t n = c.n;
  const std::size_t fixed = std::min(n, kPrefix);
  std::array<int, kMaxLen> digit{};
  std::array<double, kMaxLen> x{};
  for (std::size_t i = fixed, lead = static_cast<std::size_t>(c.lead); i-- > 0; lead /= kLevels) {
    digit[i] = static_cast<int>(lead % kLevels);
    x[i] = digit[i] / 10.0;
  }
  std::array<std::int8_t, kMaxLen> spk{};
  std::array<double, kMaxLen> rec{};
  std::vector<double> enc_thr(kMaxLen), dec_thr(kMaxLen);
  const std::span<const double> xs(x.data(), n);
  const std::span<std::int8_t> ss(spk.data(), n);
  const std::span<double> rs(rec.data(), n);
  for (;;) {
    ++count;
    const double scale = channel_scale(xs);

    const auto sf = oracle::step_forward(x.data(), n, op);
    const auto sfp = step_forward_params(cfg, scale);
    encode_sf(xs, sfp, ss);
    decode_sf(ss, x[0], sfp, rs);
    const bool sf_ok = scale == sf.scale && sfp.threshold == sf.threshold &&
                       same(sf.spikes, spk.data(), n) && same(sf.recon, rec.data(), n);

    const auto mw = oracle::moving_window(x.data(), n, op);
    const auto mwp = moving_window_params(cfg, scale);
    encode_mw(xs, mwp, ss);
    decode_mw(ss, x[0], mwp, rs);
    const bool mw_ok = mwp.threshold == mw.threshold && same(mw.spikes, spk.data(), n) &&
                       same(mw.recon, rec.data(), n);

    const auto tae = oracle::threshold_adaptive(x.data(), n, op);
    const auto tp = adaptive_params(cfg, scale);
    encode_tae(xs, tp, ss, &enc_thr);
    decode_tae(ss, x[0], tp, rs, &dec_thr);
    const bool tae_ok = tp.threshold == tae.threshold && same(tae.spikes, spk.data(), n) &&
                        same(tae.recon, rec.data(), n) &&
                        same(tae.thresholds, enc_thr.data(), n) && enc_thr == dec_thr;

    if (!(sf_ok && mw_ok && tae_ok)) {
      std::string sig;
      for (std::size_t i = 0; i < n; ++i) sig += (i ? "," : "") + fmt("%.1f", x[i]);
      return std::string(sf_ok ? mw_ok ? "TAE" : "MW" : "SF") +
             " differs from the reference on [" + sig + "]";
    }

    // Odometer over the free samples, last sample fastest.
    std::size_t pos = n;
    while (pos > fixed && ++digit[pos - 1] == kLevels) {
      digit[pos - 1] = 0;
      x[pos - 1] = 0.0;
      --pos;
    }
    if (pos == fixed) return {};
    x[pos - 1] = digit[pos - 1] / 10.0;
  }
}

Outcome codec_oracle_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<GridChunk> chunks;
  for (std::size_t n = 1; n <= kMaxLen; ++n) {
    int leads = 1;
    for (std::size_t i = 0; i < std::min(n, kPrefix); ++i) leads *= kLevels;
    for (int lead = 0; lead < leads; ++lead) chunks.push_back({n, lead});
  }
  // Workers pull chunks in order; the lowest failing chunk is reported so
  // the verdict does not depend on the thread count.
  std::vector<std::string> failure(chunks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> signals{0};
  auto worker = [&] {
    std::size_t count = 0;
    for (std::size_t i; (i = next.fetch_add(1)) < chunks.size();) {
      failure[i] = check_chunk(chunks[i], count);
    }
    signals += count;
  };
  std::vector<std::thread> pool(std::max(1u, std::thread::hardware_concurrency()) - 1);
  for (auto& t : pool) t = std::thread(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& f : failure) {
    if (!f.empty()) return {false, f};
  }
  const double elapsed = seconds_since(t0);
  const std::string exact = std::to_string(signals.load()) + " signals x 3 codecs exact";
  if (elapsed >= 60.0) {
    return {false, exact + " but took " + fmt("%.1f s", elapsed) + " on " +
                       std::to_string(pool.size() + 1) + " thread(s), limit 60 s"};
  }
  return {true, exact + " in " + fmt("%.1f s", elapsed)};
}

// 2. Round-trip bounds.

std::vector<double> slow_signal(std::mt19937_64& rng, double threshold_rel) {
  std::uniform_int_distribution<int> len(2, 900);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const auto n = static_cast<std::size_t>(len(rng));
    const double period = 40.0 + 400.0 * u(rng);
    const double phase = 2.0 * std::numbers::pi * u(rng);
    const double amp = 0.2 + u(rng);
    const double drift = 0.5 * threshold_rel * amp;
    std::vector<double> x(n);
    double walk = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      walk += drift * (2.0 * u(rng) - 1.0);
      x[t] = 0.5 * amp * std::sin(2.0 * std::numbers::pi * t / period + phase) + walk;
    }
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double T = threshold_rel * (*hi > *lo ? *hi - *lo : 1.0);
    bool slow = true;
    for (std::size_t t = 1; t < n && slow; ++t) slow = std::abs(x[t] - x[t - 1]) <= T;
    if (slow) return x;
  }
}

double max_abs_error(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome round_trip_bounds() {
  Verdict v;
  const CodecConfig cfg;
  std::mt19937_64 rng(2024);
  double worst_sf = 0.0, worst_tae = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = slow_signal(rng, cfg.threshold_rel);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double range = *hi > *lo ? *hi - *lo : 1.0;
    const double T = cfg.threshold_rel * range;
    const double t_max = cfg.tae_tmax_rel * range;

    const auto sf = encode_channel(Codec::kStepForward, x, cfg);
    const double e_sf = max_abs_error(x, decode_channel(Codec::kStepForward, sf.spikes, sf.side, cfg));
    const auto tae = encode_channel(Codec::kThresholdAdaptive, x, cfg);
    const double e_tae =
        max_abs_error(x, decode_channel(Codec::kThresholdAdaptive, tae.spikes, tae.side, cfg));
    worst_sf = std::max(worst_sf, e_sf / T);
    worst_tae = std::max(worst_tae, e_tae / t_max);
    v.expect(e_sf <= 2.0 * T + 1e-9, "SF error above 2T on signal " + std::to_string(i));
    v.expect(e_tae <= 2.0 * t_max + 1e-9, "TAE error above 2Tmax on signal " + std::to_string(i));
  }
  std::uniform_real_distribution<double> level(-3.0, 3.0);
  for (Codec c : {Codec::kStepForward, Codec::kMovingWindow, Codec::kThresholdAdaptive}) {
    for (int i = 0; i < 50; ++i) {
      const std::vector<double> x(static_cast<std::size_t>(1 + i * 17), level(rng));
      const auto code = encode_channel(c, x, cfg);
      v.expect(max_abs_error(x, decode_channel(c, code.spikes, code.side, cfg)) <= 1e-9,
               codec_name(c) + " does not reconstruct a constant");
    }
  }
  return v.done("1000 slow signals, worst SF " + fmt("%.3f", worst_sf) + "T, worst TAE " +
                fmt("%.3f", worst_tae) + "Tmax; constants exact");
}

// 3. TAE decoder replay.

Outcome tae_replay() {
  Verdict v;
  const CodecConfig cfg;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(1, 600);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> enc, dec;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(static_cast<std::size_t>(len(rng)));
    const double wiggle = std::abs(g(rng));
    double walk = 0.0;
    for (double& s : x) s = walk += wiggle * g(rng);
    const auto p = adaptive_params(cfg, channel_scale(x));
    std::vector<std::int8_t> spikes(x.size());
    std::vector<double> recon(x.size());
    encode_tae(x, p, spikes, &enc);
    decode_tae(spikes, x[0], p, recon, &dec);
    v.expect(enc == dec, "threshold sequences differ on signal " + std::to_string(i));
  }
  return v.done("1000 random signals, encoder and decoder thresholds identical");
}

// 4. Metric identities.

Outcome metric_identities() {
  Verdict v;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 400);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> s(static_cast<std::size_t>(len(rng))), r(s.size());
    const double noise = std::pow(10.0, g(rng));
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] = g(rng);
      r[k] = s[k] + noise * g(rng);
    }
    worst = std::max(worst, std::abs(errdb(s, r) + snr_db(s, r)));
    v.expect(snr_db(s, s) == 100.0, "snr(s, s) is not +100");
    const std::vector<double> zero(s.size(), 0.0);
    if (std::any_of(s.begin(), s.end(), [](double x) { return x != 0.0; })) {
      v.expect(snr_db(s, zero) == 0.0, "snr(s, 0) is not exactly 0 dB");
    }
  }
  v.expect(worst <= 1e-9, "errdb + snr reached " + fmt("%.3g", worst));
  return v.done("1000 random pairs, max |errdb + snr| = " + fmt("%.1g", worst) +
                ", snr(s,s) = 100, snr(s,0) = 0");
}

// 5. Band partition.

Outcome band_partition() {
  Verdict v;
  const FrontendConfig fe;
  const MelFilterbank fb = mel_filterbank(fe.n_mels, fe.f_min, fe.f_max, fe.n_fft, fe.sample_rate);
  const BandPartition bands = partition_bands(fb.center_hz);
  std::vector<int> seen(fb.center_hz.size(), 0);
  for (std::size_t b = 0; b < kNumBands; ++b) {
    for (std::size_t c : bands.channels_in(b)) ++seen.at(c);
  }
  v.expect(seen.size() == 128, "filterbank does not have 128 channels");
  v.expect(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }),
           "a channel is not assigned exactly once");
  const auto sizes = bands.band_sizes();
  std::size_t total = 0;
  std::string listing;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    total += sizes[b];
    listing += (b ? "," : "") + std::to_string(sizes[b]);
  }
  v.expect(total == 128, "band sizes sum to " + std::to_string(total));
  return v.done("every channel assigned once, band sizes {" + listing + "} sum to 128");
}

// 6. Frontend.

Outcome frontend_checks() {
  Verdict v;
  const FrontendConfig fe;
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> len(1024, 60000);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = len(rng);
    std::size_t frames = 0;
    for (std::size_t start = 0; start + 1024 <= n; start += 256) ++frames;
    const std::vector<double> x = spikebench::testing::sine(440.0, 44100, n);
    v.expect(frame_count(n, 1024, 256) == frames && stft_power(x, 1024, 256).cols() == frames,
             "frame count wrong for length " + std::to_string(n));
  }

  const std::vector<double> tone = spikebench::testing::sine(4000.0, 44100, 44100);
  const Matrix<double> p = stft_power(tone, 1024, 256);
  bool all93 = true;
  for (std::size_t t = 0; t < p.cols(); ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.rows(); ++k) {
      if (p(k, t) > p(best, t)) best = k;
    }
    all93 = all93 && best == 93;
  }
  v.expect(all93, "4 kHz tone does not peak at bin 93 in every frame");

  Waveform w;
  w.sample_rate = 44100;
  w.samples = spikebench::testing::sine(1000.0, 44100, 44100);
  w.source_path = "tone";
  const MelFrontend frontend(fe);
  const Matrix<double> lm = frontend.log_mel(w);
  std::vector<double> mean(lm.rows(), 0.0);
  for (std::size_t c = 0; c < lm.rows(); ++c) {
    for (double e : lm.row(c)) mean[c] += e;
  }
  const auto best = static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) -
                                             mean.begin());
  const auto& hz = frontend.filterbank().center_hz;
  const double spacing = hz[best + 1] - hz[best];
  v.expect(std::abs(hz[best] - 1000.0) <= spacing, "1 kHz tone argmax centre at " +
                                                       fmt("%.1f Hz", hz[best]));
  return v.done("20 lengths exact, 4 kHz at bin 93, 1 kHz argmax centre " +
                fmt("%.1f Hz", hz[best]) + " (spacing " + fmt("%.1f Hz)", spacing));
}

// 7. SNN numerics.

double rel_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric) {
  const double denom = std::max(analytic.norm(), numeric.norm());
  return denom == 0.0 ? 0.0 : (analytic - numeric).norm() / denom;
}

Outcome snn_checks() {
  Verdict v;
  double worst = 0.0;
  for (double slope : {25.0, 2.0}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      SnnConfig cfg;
      cfg.input_size = 2;
      cfg.hidden_sizes = {2, 2};
      cfg.output_size = 2;
      cfg.seed = seed;
      cfg.surrogate_slope = slope;
      SpikingNetwork net(cfg);
      // Keep membranes O(1) despite smooth spikes being bounded by 1/slope.
      for (std::size_t l = 0; l < net.weights().size(); ++l) {
        net.weights()[l] *= l == 0 ? 2.5 : 2.5 * slope;
      }
      std::mt19937_64 rng(seed + 100);
      std::uniform_int_distribution<int> tern(-1, 1);
      Sample s;
      s.label = static_cast<int>(seed % 2);
      s.input.resize(2, 12);
      for (Eigen::Index i = 0; i < s.input.size(); ++i) s.input(i) = tern(rng);
      auto grads = net.zero_gradients();
      net.loss_and_gradient(s, grads, 1.0, SpikeFunction::kSmooth);
      const double h = 1e-4;
      for (std::size_t l = 0; l < grads.size(); ++l) {
        Eigen::MatrixXd numeric(grads[l].rows(), grads[l].cols());
        for (Eigen::Index i = 0; i < numeric.size(); ++i) {
          const double keep = net.weights()[l](i);
          net.weights()[l](i) = keep + h;
          const double up = net.loss(s, SpikeFunction::kSmooth);
          net.weights()[l](i) = keep - h;
          const double down = net.loss(s, SpikeFunction::kSmooth);
          net.weights()[l](i) = keep;
          numeric(i) = (up - down) / (2 * h);
        }
        const double e = rel_error(grads[l], numeric);
        worst = std::max(worst, e);
        v.expect(grads[l].norm() > 1e-8, "vanishing gradient in the finite-difference check");
        v.expect(e <= 1e-4, "gradient relative error " + fmt("%.3g", e));
      }
    }
  }

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SnnConfig cfg;
    cfg.input_size = 128;
    cfg.output_size = 5;
    cfg.seed = seed;
    SpikingNetwork net(cfg);
    for (auto& w : net.weights()) w *= 10.0;
    v.expect(net.forward(Eigen::MatrixXd::Zero(128, 50)).counts.isZero(0.0),
             "zero input produced output spikes");
  }

  // Two classes driven by disjoint halves of 16 input channels.
  std::mt19937_64 rng(17);
  std::bernoulli_distribution fire(0.5);
  std::vector<Sample> toy;
  for (int i = 0; i < 32; ++i) {
    Sample s;
    s.label = i % 2;
    s.input = Eigen::MatrixXd::Zero(16, 20);
    for (int c = 8 * s.label; c < 8 * s.label + 8; ++c) {
      for (int t = 0; t < 20; ++t) s.input(c, t) = fire(rng) ? 1.0 : 0.0;
    }
    toy.push_back(std::move(s));
  }
  const auto t0 = std::chrono::steady_clock::now();
  SnnConfig cfg;
  cfg.input_size = 16;
  cfg.output_size = 2;
  cfg.epochs = 200;
  cfg.seed = 5;
  SpikingNetwork net(cfg);
  TrainOptions opt;
  opt.stop_at_accuracy = 1.0;
  const TrainResult r = train(net, toy, cfg, opt);
  const double acc = evaluate_macro(net, toy).macro_accuracy;
  const double elapsed = seconds_since(t0);
  v.expect(acc == 1.0, "toy set train accuracy " + fmt("%.3f", acc));
  v.expect(elapsed < 120.0, "toy training took " + fmt("%.1f s", elapsed));
  return v.done("max gradient error " + fmt("%.2g", worst) + ", zero in gives zero out, toy set " +
                "100% after " + std::to_string(r.epochs_run) + " epochs (" +
                fmt("%.1f s)", elapsed));
}

// 8. End-to-end determinism through the command-line tool.

std::string drop_column(const std::string& csv, const std::string& name) {
  std::stringstream in(csv);
  std::string line, out;
  std::size_t skip = std::string::npos;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream f(line);
    for (std::string s; std::getline(f, s, ',');) fields.push_back(s);
    if (skip == std::string::npos) {
      skip = static_cast<std::size_t>(std::find(fields.begin(), fields.end(), name) -
                                      fields.begin());
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i != skip) out += fields[i] + ",";
    }
    out += "\n";
  }
  return out;
}

Outcome end_to_end_determinism() {
  Verdict v;
  spikebench::testing::TempDir dir;
  std::ofstream(dir / "config.json") << R"({
    "synthetic": {"n_clips": 10, "duration_s": 1.0, "folds": 2},
    "snn": {"enabled": true, "epochs": 2, "hidden_sizes": [32, 32, 32], "threads": 2},
    "threads": 2
  })";
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string(SPIKEBENCH_CLI) + " bench --seed 11 --config " +
                            (dir / "config.json").string() + " --out " + (dir / run).string() +
                            " >/dev/null 2>&1";
    v.expect(std::system(cmd.c_str()) == 0, std::string("bench run ") + run + " failed");
  }
  if (!v.ok) return v.done("");
  std::set<std::string> names_a, names_b;
  for (const auto& e : fs::directory_iterator(dir / "a")) names_a.insert(e.path().filename());
  for (const auto& e : fs::directory_iterator(dir / "b")) names_b.insert(e.path().filename());
  v.expect(names_a == names_b, "runs wrote different file sets");
  v.expect(names_a.contains("classification.csv"), "classification output missing");
  for (const auto& name : names_a) {
    std::string a = spikebench::testing::slurp(dir / "a" / name);
    std::string b = spikebench::testing::slurp(dir / "b" / name);
    if (name == "efficiency.csv") {
      a = drop_column(a, "encode_ms");
      b = drop_column(b, "encode_ms");
    }
    v.expect(a == b, name + " differs between runs");
  }
  return v.done(std::to_string(names_a.size()) +
                " output files byte-identical outside the encode_ms column");
}

// 9. Trend reproduction on the default synthetic corpus.

// Reference run: default configuration, seed 0. Regression fixtures, rows
// ordered MW, SF, TAE.
constexpr std::array<double, 3> kFiringRate = {67.952405667249, 66.087398929196,
                                               49.749030266608};
constexpr std::array<std::array<double, kNumBands>, 3> kBandErrdb = {{
    {0.289066095512, -1.765838250123, -1.686140466384, -1.350301246677, -3.479017641669,
     -3.742458075420, -3.574190426165, -4.211435244359},
    {-15.855565725325, -15.624851392545, -15.313413059532, -14.571748682711,
     -13.109128431766, -12.730821998318, -11.711359069094, -11.553324844810},
    {-15.898854893748, -16.047073773355, -16.007749630160, -14.841705421888,
     -13.587354194881, -13.389324559556, -12.179221021496, -12.000656075068},
}};

Outcome trend_reproduction() {
  Verdict v;
  const BenchReport r = run_bench(parse_run_config("{}"));

  std::map<Codec, double> rate;
  for (const auto& e : r.efficiency) rate[e.codec] = e.firing_rate_pct;
  const double tae = rate.at(Codec::kThresholdAdaptive);
  const double sf = rate.at(Codec::kStepForward);
  const double mw = rate.at(Codec::kMovingWindow);
  v.expect(tae < sf && tae < mw, "TAE firing rate is not the lowest");

  const Comparison c = compare_reports({r});
  const int wins = c.band_wins.contains("TAE") ? c.band_wins.at("TAE") : 0;
  v.expect(wins >= 6, "TAE best in only " + std::to_string(wins) + " of 8 bands");

  const std::array<double, 3> rates = {mw, sf, tae};
  for (std::size_t k = 0; k < 3; ++k) {
    v.expect(std::abs(rates[k] - kFiringRate[k]) <= 1e-6,
             "firing rate drifted from fixture: " + fmt("%.9f", rates[k]));
  }
  v.expect(r.per_band.size() == 24, "expected 24 band rows");
  for (std::size_t i = 0; i < r.per_band.size() && i < 24; ++i) {
    const double got = r.per_band[i].errdb.value_or(NAN);
    v.expect(std::abs(got - kBandErrdb[i / 8][i % 8]) <= 1e-6,
             "band errdb drifted from fixture: " + fmt("%.9f", got));
  }
  return v.done("firing rate TAE " + fmt("%.2f%%", tae) + " vs SF " + fmt("%.2f%%", sf) +
                " and MW " + fmt("%.2f%%", mw) + "; TAE best in " + std::to_string(wins) +
                " of 8 bands; fixtures match");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"codec oracle equivalence", codec_oracle_grid},
      {"round-trip bounds", round_trip_bounds},
      {"TAE decoder replay", tae_replay},
      {"metric identities", metric_identities},
      {"band partition", band_partition},
      {"frontend", frontend_checks},
      {"SNN numerics", snn_checks},
      {"end-to-end determinism", end_to_end_determinism},
      {"trend reproduction", trend_reproduction},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
