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
#include <cstring>
#include <fstream>
#include <iterator>

#include "spikebench/error.hpp"
#include "spikebench/ingest.hpp"

namespace spikebench {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct Layout {
  WavInfo info;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

Layout parse_layout(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError(name + ": not a RIFF/WAVE file");
  }
  Layout layout;
  bool have_fmt = false;
  bool have_data = false;
  std::uint16_t tag = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) {
        throw DataError(name + ": truncated fmt chunk");
      }
      const std::uint8_t* f = bytes.data() + body;
      tag = le16(f);
      layout.info.channels = le16(f + 2);
      layout.info.sample_rate = static_cast<int>(le32(f + 4));
      layout.info.bits_per_sample = le16(f + 14);
      if (tag == kFormatExtensible) {
        if (size < 26) throw DataError(name + ": truncated extensible fmt chunk");
        tag = le16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      layout.data_offset = body;
      // Some writers leave the size field at 0 or 0xFFFFFFFF when streaming.
      layout.data_size = std::min(size, bytes.size() - body);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw DataError(name + ": missing fmt chunk");
  if (!have_data) throw DataError(name + ": missing data chunk");

  WavInfo& info = layout.info;
  if (info.channels < 1) throw DataError(name + ": zero channels");
  if (info.sample_rate <= 0) throw DataError(name + ": invalid sample rate");
  if (tag == kFormatPcm) {
    if (info.bits_per_sample != 8 && info.bits_per_sample != 16 &&
        info.bits_per_sample != 24 && info.bits_per_sample != 32) {
      throw DataError(name + ": unsupported PCM bit depth " +
                      std::to_string(info.bits_per_sample));
    }
  } else if (tag == kFormatFloat) {
    if (info.bits_per_sample != 32) {
      throw DataError(name + ": unsupported float bit depth " +
                      std::to_string(info.bits_per_sample));
    }
    info.is_float = true;
  } else {
    throw DataError(name + ": unsupported codec (format tag " +
                    std::to_string(tag) + ")");
  }
  const std::size_t frame_bytes =
      static_cast<std::size_t>(info.channels) * (info.bits_per_sample / 8);
  info.frames = layout.data_size / frame_bytes;
  return layout;
}

double decode_sample(const std::uint8_t* p, const WavInfo& info) {
  switch (info.bits_per_sample) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default: {
      const std::uint32_t bits = le32(p);
      if (info.is_float) {
        float f;
        std::memcpy(&f, &bits, sizeof f);
        return static_cast<double>(f);
      }
      return static_cast<std::int32_t>(bits) / 2147483648.0;
    }
  }
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

WavInfo read_wav_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  // Headers rarely exceed a few hundred bytes, but LIST/bext chunks can be
  // large; fall back to the whole file if the data chunk is not found early.
  std::vector<std::uint8_t> head(65536);
  in.read(reinterpret_cast<char*>(head.data()),
          static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  const auto file_size = std::filesystem::file_size(path);
  try {
    Layout l = parse_layout(head, path.string());
    if (head.size() < file_size) {
      // The data chunk size field is authoritative when the read was partial.
      const std::size_t declared = le32(head.data() + l.data_offset - 4);
      const std::size_t avail = static_cast<std::size_t>(file_size) - l.data_offset;
      const std::size_t frame_bytes = static_cast<std::size_t>(l.info.channels) *
                                      (l.info.bits_per_sample / 8);
      l.info.frames = std::min(declared, avail) / frame_bytes;
    }
    return l.info;
  } catch (const DataError&) {
    if (head.size() >= file_size) throw;
  }
  return parse_layout(slurp(path), path.string()).info;
}

Waveform decode_wav(std::span<const std::uint8_t> bytes, const std::string& name) {
  const Layout layout = parse_layout(bytes, name);
  const WavInfo& info = layout.info;
  if (info.frames == 0) throw DataError(name + ": zero-length audio");

  const std::size_t width = info.bits_per_sample / 8;
  Waveform w;
  w.sample_rate = info.sample_rate;
  w.source_path = name;
  w.samples.resize(info.frames);
  const std::uint8_t* p = bytes.data() + layout.data_offset;
  for (std::size_t i = 0; i < info.frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < info.channels; ++c) {
      acc += decode_sample(p, info);
      p += width;
    }
    double v = acc / info.channels;
    if (!std::isfinite(v)) throw DataError(name + ": non-finite sample");
    w.samples[i] = std::clamp(v, -1.0, 1.0);
  }
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  return decode_wav(slurp(path), path.string());
}

std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved,
                                     int sample_rate, const WavFormat& format) {
  const int bits = format.bits_per_sample;
  if (format.is_float ? bits != 32
                      : (bits != 8 && bits != 16 && bits != 24 && bits != 32)) {
    throw ConfigError("unsupported WAV output format");
  }
  if (format.channels < 1 || interleaved.size() % format.channels != 0) {
    throw ConfigError("interleaved sample count does not match channel count");
  }
  const std::uint32_t width = static_cast<std::uint32_t>(bits / 8);
  const auto data_size = static_cast<std::uint32_t>(interleaved.size() * width);
  const auto channels = static_cast<std::uint16_t>(format.channels);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, format.is_float ? kFormatFloat : kFormatPcm);
  put16(out, channels);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate) * channels * width);
  put16(out, static_cast<std::uint16_t>(channels * width));
  put16(out, static_cast<std::uint16_t>(bits));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_size);

  for (double s : interleaved) {
    const double v = std::clamp(s, -1.0, 1.0);
    if (format.is_float) {
      const float f = static_cast<float>(v);
      std::uint32_t u;
      std::memcpy(&u, &f, sizeof u);
      put32(out, u);
      continue;
    }
    switch (bits) {
      case 8:
        out.push_back(static_cast<std::uint8_t>(
            std::clamp(std::lround(v * 128.0) + 128, 0L, 255L)));
        break;
      case 16:
        put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(
                       std::clamp(std::lround(v * 32768.0), -32768L, 32767L))));
        break;
      case 24: {
        const auto q = static_cast<std::uint32_t>(
            std::clamp(std::lround(v * 8388608.0), -8388608L, 8388607L));
        for (int i = 0; i < 3; ++i) out.push_back(static_cast<std::uint8_t>(q >> (8 * i)));
        break;
      }
      default:
        put32(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(
                       std::clamp(std::llround(v * 2147483648.0), -2147483648LL,
                                  2147483647LL))));
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, std::span<const double> interleaved,
               int sample_rate, const WavFormat& format) {
  const auto bytes = encode_wav(interleaved, sample_rate, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace spikebench
