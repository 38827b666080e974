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

#include "binary_io.hpp"
#include "json.hpp"
#include "spikebench/codec.hpp"
#include "spikebench/error.hpp"

namespace spikebench {
namespace {

constexpr std::uint8_t kCodeZero = 0b00;
constexpr std::uint8_t kCodePlus = 0b01;
constexpr std::uint8_t kCodeMinus = 0b10;

std::uint8_t pack(std::int8_t s) {
  return s > 0 ? kCodePlus : (s < 0 ? kCodeMinus : kCodeZero);
}

std::int8_t unpack(std::uint8_t code, const std::string& name) {
  switch (code) {
    case kCodeZero:
      return 0;
    case kCodePlus:
      return 1;
    case kCodeMinus:
      return -1;
    default:
      throw DataError(name + ": invalid spike code 11");
  }
}

}  // namespace

std::size_t packed_spike_bytes(std::size_t channels, std::size_t frames) {
  return (channels * frames * 2 + 7) / 8;
}

std::size_t side_info_bytes(std::size_t channels) { return channels * 3 * sizeof(float); }

std::vector<std::uint8_t> serialize_spikes(const SpikeTrain& st) {
  detail::ByteWriter w;
  w.raw("SPKS1");
  w.u8(static_cast<std::uint8_t>(st.codec));
  w.u32(static_cast<std::uint32_t>(st.channels()));
  w.u32(static_cast<std::uint32_t>(st.frames()));
  w.f64(st.params.threshold_rel);
  w.u32(static_cast<std::uint32_t>(st.params.window));
  w.f64(st.params.tae_gamma);
  w.f64(st.params.tae_tmin_rel);
  w.f64(st.params.tae_tmax_rel);

  std::vector<std::uint8_t> packed(packed_spike_bytes(st.channels(), st.frames()), 0);
  std::size_t i = 0;
  for (std::int8_t s : st.spikes.values()) {
    packed[i / 4] |= static_cast<std::uint8_t>(pack(s) << (2 * (i % 4)));
    ++i;
  }
  auto& bytes = w.bytes();
  bytes.insert(bytes.end(), packed.begin(), packed.end());

  for (const SideInfo& s : st.side_info) {
    w.f32(static_cast<float>(s.initial));
    w.f32(static_cast<float>(s.threshold));
    w.f32(static_cast<float>(s.scale));
  }
  return std::move(w.bytes());
}

SpikeTrain deserialize_spikes(std::span<const std::uint8_t> bytes, const std::string& name) {
  detail::ByteReader r(bytes, name);
  r.expect("SPKS1");
  SpikeTrain st;
  const std::uint8_t id = r.u8();
  if (id > static_cast<std::uint8_t>(Codec::kThresholdAdaptive)) {
    throw DataError(name + ": unknown codec id " + std::to_string(id));
  }
  st.codec = static_cast<Codec>(id);
  const std::size_t channels = r.u32();
  const std::size_t frames = r.u32();
  st.params.threshold_rel = r.f64();
  st.params.window = static_cast<int>(r.u32());
  st.params.tae_gamma = r.f64();
  st.params.tae_tmin_rel = r.f64();
  st.params.tae_tmax_rel = r.f64();
  try {
    st.params.validate();
  } catch (const ConfigError& e) {
    throw DataError(name + ": " + e.what());
  }

  const auto packed = r.take(packed_spike_bytes(channels, frames));
  st.spikes = Matrix<std::int8_t>(channels, frames);
  std::size_t i = 0;
  for (std::int8_t& s : st.spikes.values()) {
    s = unpack(static_cast<std::uint8_t>((packed[i / 4] >> (2 * (i % 4))) & 0b11), name);
    ++i;
  }
  st.side_info.resize(channels);
  for (SideInfo& s : st.side_info) {
    s.initial = r.f32();
    s.threshold = r.f32();
    s.scale = r.f32();
  }
  if (!r.done()) throw DataError(name + ": trailing bytes after side information");
  return st;
}

void write_spikes(const std::filesystem::path& path, const SpikeTrain& st) {
  detail::write_file(path.string(), serialize_spikes(st));

  nlohmann::json j;
  j["codec"] = codec_name(st.codec);
  j["channels"] = st.channels();
  j["frames"] = st.frames();
  j["params"] = {{"threshold_rel", st.params.threshold_rel},
                 {"window", st.params.window},
                 {"tae_gamma", st.params.tae_gamma},
                 {"tae_tmin_rel", st.params.tae_tmin_rel},
                 {"tae_tmax_rel", st.params.tae_tmax_rel}};
  auto& side = j["side_info"] = nlohmann::json::array();
  for (const SideInfo& s : st.side_info) side.push_back({s.initial, s.threshold, s.scale});
  // One string per channel: '+', '-' or '.' per frame.
  auto& rows = j["spikes"] = nlohmann::json::array();
  for (std::size_t c = 0; c < st.channels(); ++c) {
    std::string row;
    row.reserve(st.frames());
    for (std::int8_t s : st.spikes.row(c)) row += s > 0 ? '+' : (s < 0 ? '-' : '.');
    rows.push_back(std::move(row));
  }
  detail::write_text(path.string() + ".json", j.dump(1) + "\n");
}

SpikeTrain read_spikes(const std::filesystem::path& path) {
  return deserialize_spikes(detail::read_file(path.string()), path.string());
}

}  // namespace spikebench
