// Copyright 2026 The QCSE Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qcse/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numbers>
#include <stdexcept>

namespace qcse {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void append32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::int16_t to_pcm16(double x, std::size_t& clipped) {
  double v = std::nearbyint(x * 32768.0);
  if (v > 32767.0) {
    v = 32767.0;
    ++clipped;
  } else if (v < -32768.0) {
    v = -32768.0;
    ++clipped;
  }
  return static_cast<std::int16_t>(v);
}

}  // namespace

void AudioBuffer::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw std::invalid_argument("non-finite sample at index " + std::to_string(i));
    }
  }
}

std::string_view to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::rectangular: return "rectangular";
    case WindowKind::hamming: return "hamming";
    case WindowKind::hann: return "hann";
  }
  return "?";
}

WindowKind parse_window(std::string_view name) {
  if (name == "rectangular") return WindowKind::rectangular;
  if (name == "hamming") return WindowKind::hamming;
  if (name == "hann") return WindowKind::hann;
  throw std::invalid_argument("unknown window '" + std::string(name) + "'");
}

void FrameConfig::validate() const {
  if (frame_len == 0) throw std::invalid_argument("frame_len must be positive");
  if (hop == 0 || hop > frame_len) {
    throw std::invalid_argument("hop must satisfy 0 < hop <= frame_len");
  }
  if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be positive");
}

std::vector<double> make_window(WindowKind kind, std::size_t len) {
  if (len == 0) throw std::invalid_argument("window length must be positive");
  std::vector<double> w(len, 1.0);
  if (kind == WindowKind::rectangular) return w;
  const double a = kind == WindowKind::hamming ? 0.54 : 0.5;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(len);
  for (std::size_t n = 0; n < len; ++n) {
    w[n] = a - (1.0 - a) * std::cos(step * static_cast<double>(n));
  }
  return w;
}

std::size_t frame_count(std::size_t signal_len, const FrameConfig& cfg) {
  if (signal_len < cfg.frame_len) return 0;
  return (signal_len - cfg.frame_len) / cfg.hop + 1;
}

FrameMatrix frame_signal(const AudioBuffer& buf, const FrameConfig& cfg) {
  cfg.validate();
  if (buf.sample_rate != cfg.sample_rate) {
    throw std::invalid_argument("sample rate " + std::to_string(buf.sample_rate) +
                                " Hz does not match the configured " +
                                std::to_string(cfg.sample_rate) + " Hz");
  }
  if (buf.size() < cfg.frame_len) {
    throw std::invalid_argument("buffer of " + std::to_string(buf.size()) +
                                " samples is shorter than one frame (" +
                                std::to_string(cfg.frame_len) + ")");
  }
  const std::vector<double> window = make_window(cfg.window, cfg.frame_len);

  FrameMatrix fm;
  fm.frame_len = cfg.frame_len;
  fm.n_frames = frame_count(buf.size(), cfg);
  fm.sample_rate = buf.sample_rate;
  fm.data.resize(fm.n_frames * fm.frame_len);

  for (std::size_t i = 0; i < fm.n_frames; ++i) {
    std::span<double> out = fm.row(i);
    std::copy_n(buf.samples.begin() + static_cast<std::ptrdiff_t>(i * cfg.hop),
                cfg.frame_len, out.begin());
    if (cfg.remove_dc) {
      double mean = 0.0;
      for (double v : out) mean += v;
      mean /= static_cast<double>(out.size());
      for (double& v : out) v -= mean;
    }
    if (cfg.pre_emphasis) {
      for (std::size_t n = out.size() - 1; n > 0; --n) {
        out[n] -= cfg.pre_emphasis_coeff * out[n - 1];
      }
      out[0] -= cfg.pre_emphasis_coeff * out[0];
    }
    for (std::size_t n = 0; n < out.size(); ++n) out[n] *= window[n];
  }
  return fm;
}

AudioBuffer parse_wav(std::span<const unsigned char> bytes, std::string_view source) {
  const std::string where(source);
  if (bytes.size() < 12 || std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != "RIFF" ||
      std::string_view(reinterpret_cast<const char*>(bytes.data()) + 8, 4) != "WAVE") {
    throw std::runtime_error(where + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    const std::size_t size = le32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;

    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) {
        throw std::runtime_error(where + ": malformed fmt chunk");
      }
      const unsigned char* f = bytes.data() + body;
      std::uint16_t format = le16(f);
      const std::uint16_t channels = le16(f + 2);
      rate = static_cast<int>(le32(f + 4));
      const std::uint16_t bits = le16(f + 14);
      if (format == kFormatExtensible && size >= 40) {
        format = le16(f + 24);  // first two bytes of the sub-format GUID
      }
      if (format != kFormatPcm) {
        throw std::runtime_error(where + ": unsupported encoding (format tag " +
                                 std::to_string(format) + ", only PCM is supported)");
      }
      if (bits != 16) {
        throw std::runtime_error(where + ": unsupported bit depth " + std::to_string(bits) +
                                 " (only 16-bit PCM is supported)");
      }
      if (channels != 1) {
        throw std::runtime_error(where + ": " + std::to_string(channels) +
                                 " channels (only mono is supported)");
      }
      if (rate <= 0) throw std::runtime_error(where + ": invalid sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw std::runtime_error(where + ": data chunk precedes fmt chunk");
      if (body + size > bytes.size()) {
        throw std::runtime_error(where + ": truncated data chunk (header declares " +
                                 std::to_string(size) + " bytes, " +
                                 std::to_string(bytes.size() - body) + " present)");
      }
      if (size % 2 != 0) throw std::runtime_error(where + ": odd-sized 16-bit data chunk");
      AudioBuffer buf;
      buf.sample_rate = rate;
      buf.samples.resize(size / 2);
      for (std::size_t i = 0; i < buf.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(le16(bytes.data() + body + 2 * i));
        buf.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      return buf;
    }
    pos = body + size + (size & 1);  // chunks are word aligned
  }
  throw std::runtime_error(where + (have_fmt ? ": no data chunk" : ": no fmt chunk"));
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return parse_wav(bytes, path.string());
}

std::vector<unsigned char> encode_wav(const AudioBuffer& buf, std::size_t* clipped) {
  buf.validate();
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  append32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  append32(out, 16);
  append16(out, kFormatPcm);
  append16(out, 1);
  append32(out, static_cast<std::uint32_t>(buf.sample_rate));
  append32(out, static_cast<std::uint32_t>(buf.sample_rate) * 2);
  append16(out, 2);
  append16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  append32(out, data_bytes);
  std::size_t n_clipped = 0;
  for (double x : buf.samples) {
    append16(out, static_cast<std::uint16_t>(to_pcm16(x, n_clipped)));
  }
  if (clipped) *clipped = n_clipped;
  return out;
}

std::size_t write_wav(const std::filesystem::path& path, const AudioBuffer& buf) {
  std::size_t clipped = 0;
  const std::vector<unsigned char> bytes = encode_wav(buf, &clipped);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
  return clipped;
}

AudioBuffer quantize_pcm16(const AudioBuffer& buf, std::size_t* clipped) {
  AudioBuffer out;
  out.sample_rate = buf.sample_rate;
  out.samples.resize(buf.size());
  std::size_t n_clipped = 0;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    out.samples[i] = static_cast<double>(to_pcm16(buf.samples[i], n_clipped)) / 32768.0;
  }
  if (clipped) *clipped = n_clipped;
  return out;
}

}  // namespace qcse
