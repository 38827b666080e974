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
#include <cctype>
#include <cmath>

#include "spikebench/codec.hpp"
#include "spikebench/error.hpp"

namespace spikebench {
namespace {

void require_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericError("non-finite sample in encoder input");
  }
}

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw DataError("spike row length does not match signal length");
}

}  // namespace

std::string codec_name(Codec c) {
  switch (c) {
    case Codec::kStepForward:
      return "SF";
    case Codec::kMovingWindow:
      return "MW";
    case Codec::kThresholdAdaptive:
      return "TAE";
  }
  return "?";
}

Codec parse_codec(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "sf") return Codec::kStepForward;
  if (t == "mw") return Codec::kMovingWindow;
  if (t == "tae") return Codec::kThresholdAdaptive;
  throw ConfigError("unknown codec '" + text + "' (expected sf, mw or tae)");
}

void CodecConfig::validate() const {
  if (!(threshold_rel > 0.0 && threshold_rel <= 1.0)) {
    throw ConfigError("threshold_rel must lie in (0, 1]");
  }
  if (window < 1) throw ConfigError("window must be at least 1 frame");
  if (!(tae_gamma > 1.0) || !std::isfinite(tae_gamma)) {
    throw ConfigError("tae_gamma must be greater than 1");
  }
  if (!(tae_tmin_rel > 0.0 && tae_tmin_rel <= threshold_rel && threshold_rel <= tae_tmax_rel)) {
    throw ConfigError("need 0 < tae_tmin_rel <= threshold_rel <= tae_tmax_rel");
  }
}

double channel_scale(std::span<const double> x) {
  if (x.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double range = *hi - *lo;
  return range > 0.0 ? range : 1.0;
}

StepForwardParams step_forward_params(const CodecConfig& cfg, double scale) {
  return {cfg.threshold_rel * scale};
}

MovingWindowParams moving_window_params(const CodecConfig& cfg, double scale) {
  return {cfg.threshold_rel * scale, cfg.window};
}

AdaptiveParams adaptive_params(const CodecConfig& cfg, double scale) {
  return {cfg.threshold_rel * scale, cfg.tae_gamma, cfg.tae_tmin_rel * scale,
          cfg.tae_tmax_rel * scale};
}

double encode_sf(std::span<const double> x, const StepForwardParams& p,
                 std::span<std::int8_t> out) {
  require_same_length(x.size(), out.size());
  require_finite(x);
  if (x.empty()) return 0.0;
  double base = x[0];
  out[0] = 0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    if (x[t] > base + p.threshold) {
      out[t] = 1;
      base += p.threshold;
    } else if (x[t] < base - p.threshold) {
      out[t] = -1;
      base -= p.threshold;
    } else {
      out[t] = 0;
    }
  }
  return base;
}

void decode_sf(std::span<const std::int8_t> spikes, double initial,
               const StepForwardParams& p, std::span<double> out) {
  require_same_length(spikes.size(), out.size());
  if (spikes.empty()) return;
  out[0] = initial;
  for (std::size_t t = 1; t < spikes.size(); ++t) {
    out[t] = out[t - 1] + spikes[t] * p.threshold;
  }
}

namespace {

// Mean of the min(t, window) values preceding index t, taken as the oldest
// value plus the mean deviation from it (oldest first) so that a constant
// window averages to itself exactly.
double trailing_mean(std::span<const double> v, std::size_t t, std::size_t window) {
  const std::size_t k = std::min(t, window);
  const double anchor = v[t - k];
  double dev = 0.0;
  for (std::size_t i = t - k; i < t; ++i) dev += v[i] - anchor;
  return anchor + dev / static_cast<double>(k);
}

}  // namespace

void encode_mw(std::span<const double> x, const MovingWindowParams& p,
               std::span<std::int8_t> out) {
  require_same_length(x.size(), out.size());
  require_finite(x);
  if (p.window < 1) throw ConfigError("window must be at least 1 frame");
  if (x.empty()) return;
  const auto w = static_cast<std::size_t>(p.window);
  out[0] = 0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double base = trailing_mean(x, t, w);
    out[t] = x[t] > base + p.threshold ? 1 : (x[t] < base - p.threshold ? -1 : 0);
  }
}

void decode_mw(std::span<const std::int8_t> spikes, double initial,
               const MovingWindowParams& p, std::span<double> out) {
  require_same_length(spikes.size(), out.size());
  if (p.window < 1) throw ConfigError("window must be at least 1 frame");
  if (spikes.empty()) return;
  const auto w = static_cast<std::size_t>(p.window);
  out[0] = initial;
  for (std::size_t t = 1; t < spikes.size(); ++t) {
    out[t] = trailing_mean(out, t, w) + spikes[t] * p.threshold;
  }
}

void encode_tae(std::span<const double> x, const AdaptiveParams& p,
                std::span<std::int8_t> out, std::vector<double>* thresholds) {
  require_same_length(x.size(), out.size());
  require_finite(x);
  if (thresholds) thresholds->assign(x.size(), p.threshold);
  if (x.empty()) return;
  double base = x[0];
  double thr = p.threshold;
  out[0] = 0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    if (thresholds) (*thresholds)[t] = thr;
    const double d = x[t] - base;
    if (d > thr) {
      out[t] = 1;
      base += thr;
      thr = std::min(thr * p.gamma, p.t_max);
    } else if (d < -thr) {
      out[t] = -1;
      base -= thr;
      thr = std::min(thr * p.gamma, p.t_max);
    } else {
      out[t] = 0;
      thr = std::max(thr / p.gamma, p.t_min);
    }
  }
}

void decode_tae(std::span<const std::int8_t> spikes, double initial,
                const AdaptiveParams& p, std::span<double> out,
                std::vector<double>* thresholds) {
  require_same_length(spikes.size(), out.size());
  if (thresholds) thresholds->assign(spikes.size(), p.threshold);
  if (spikes.empty()) return;
  double thr = p.threshold;
  out[0] = initial;
  for (std::size_t t = 1; t < spikes.size(); ++t) {
    if (thresholds) (*thresholds)[t] = thr;
    if (spikes[t] != 0) {
      out[t] = out[t - 1] + spikes[t] * thr;
      thr = std::min(thr * p.gamma, p.t_max);
    } else {
      out[t] = out[t - 1];
      thr = std::max(thr / p.gamma, p.t_min);
    }
  }
}

ChannelCode encode_channel(Codec codec, std::span<const double> x, const CodecConfig& cfg) {
  if (x.empty()) throw DataError("cannot encode an empty channel");
  const double scale = channel_scale(x);
  ChannelCode code;
  code.spikes.resize(x.size());
  code.side.initial = x[0];
  code.side.scale = scale;
  switch (codec) {
    case Codec::kStepForward: {
      const auto p = step_forward_params(cfg, scale);
      encode_sf(x, p, code.spikes);
      code.side.threshold = p.threshold;
      break;
    }
    case Codec::kMovingWindow: {
      const auto p = moving_window_params(cfg, scale);
      encode_mw(x, p, code.spikes);
      code.side.threshold = p.threshold;
      break;
    }
    case Codec::kThresholdAdaptive: {
      const auto p = adaptive_params(cfg, scale);
      encode_tae(x, p, code.spikes);
      code.side.threshold = p.threshold;
      break;
    }
  }
  return code;
}

namespace {

void decode_into(Codec codec, std::span<const std::int8_t> spikes, const SideInfo& side,
                 const CodecConfig& cfg, std::span<double> out) {
  switch (codec) {
    case Codec::kStepForward:
      decode_sf(spikes, side.initial, {side.threshold}, out);
      break;
    case Codec::kMovingWindow:
      decode_mw(spikes, side.initial, {side.threshold, cfg.window}, out);
      break;
    case Codec::kThresholdAdaptive: {
      AdaptiveParams p = adaptive_params(cfg, side.scale);
      p.threshold = side.threshold;
      decode_tae(spikes, side.initial, p, out);
      break;
    }
  }
}

}  // namespace

std::vector<double> decode_channel(Codec codec, std::span<const std::int8_t> spikes,
                                   const SideInfo& side, const CodecConfig& cfg) {
  std::vector<double> out(spikes.size());
  decode_into(codec, spikes, side, cfg, out);
  return out;
}

SpikeTrain encode_matrix(const Matrix<double>& values, const CodecConfig& cfg, Codec codec) {
  cfg.validate();
  SpikeTrain st;
  st.codec = codec;
  st.params = cfg;
  st.spikes = Matrix<std::int8_t>(values.rows(), values.cols());
  st.side_info.resize(values.rows());
  if (values.cols() == 0) return st;
  for (std::size_t c = 0; c < values.rows(); ++c) {
    ChannelCode code = encode_channel(codec, values.row(c), cfg);
    std::copy(code.spikes.begin(), code.spikes.end(), st.spikes.row(c).begin());
    st.side_info[c] = code.side;
  }
  return st;
}

SpikeTrain encode_matrix(const FeatureMatrix& f, const CodecConfig& cfg, Codec codec) {
  return encode_matrix(f.values, cfg, codec);
}

Matrix<double> decode_matrix(const SpikeTrain& st) {
  st.params.validate();
  if (st.side_info.size() != st.channels()) {
    throw DataError("spike train is missing side information for some channels");
  }
  for (std::int8_t s : st.spikes.values()) {
    if (s < -1 || s > 1) throw DataError("spike entry outside {-1, 0, +1}");
  }
  Matrix<double> out(st.channels(), st.frames());
  for (std::size_t c = 0; c < st.channels(); ++c) {
    decode_into(st.codec, st.spikes.row(c), st.side_info[c], st.params, out.row(c));
  }
  return out;
}

}  // namespace spikebench
