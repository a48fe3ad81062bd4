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


#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qcse/signal_io.hpp"
#include "support.hpp"

using namespace qcse;

namespace {

// Hand-assembled WAV bytes, independent of encode_wav.
struct WavBuilder {
  std::vector<unsigned char> bytes;

  void tag(const char* t) { bytes.insert(bytes.end(), t, t + 4); }
  void u16(std::uint16_t v) {
    bytes.push_back(v & 0xFF);
    bytes.push_back(v >> 8);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back((v >> (8 * i)) & 0xFF);
  }
  void fmt(std::uint16_t format, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits) {
    tag("fmt ");
    u32(16);
    u16(format);
    u16(channels);
    u32(rate);
    u32(rate * channels * bits / 8);
    u16(channels * bits / 8);
    u16(bits);
  }
  void data(const std::vector<std::int16_t>& s, std::uint32_t declared = 0) {
    tag("data");
    u32(declared ? declared : static_cast<std::uint32_t>(s.size() * 2));
    for (std::int16_t v : s) u16(static_cast<std::uint16_t>(v));
  }
  std::vector<unsigned char> finish() {
    std::vector<unsigned char> out;
    const char riff[] = "RIFF";
    out.insert(out.end(), riff, riff + 4);
    const auto size = static_cast<std::uint32_t>(bytes.size() + 4);
    for (int i = 0; i < 4; ++i) out.push_back((size >> (8 * i)) & 0xFF);
    const char wave[] = "WAVE";
    out.insert(out.end(), wave, wave + 4);
    out.insert(out.end(), bytes.begin(), bytes.end());
    return out;
  }
};

std::vector<unsigned char> simple_wav(const std::vector<std::int16_t>& s, std::uint32_t rate = 16000) {
  WavBuilder b;
  b.fmt(1, 1, rate, 16);
  b.data(s);
  return b.finish();
}

}  // namespace

TEST_CASE("silence decodes to zeros at the stored rate") {
  const std::vector<std::int16_t> zeros(16000, 0);
  const AudioBuffer a = parse_wav(simple_wav(zeros), "silence");
  CHECK(a.sample_rate == 16000);
  REQUIRE(a.size() == 16000);
  for (double v : a.samples) REQUIRE(v == 0.0);
}

TEST_CASE("pcm scaling divides by 32768") {
  const AudioBuffer a = parse_wav(simple_wav({32767, -32768, 1, -1}), "extremes");
  CHECK(a.samples[0] == 32767.0 / 32768.0);
  CHECK(a.samples[1] == -1.0);
  CHECK(a.samples[2] == 1.0 / 32768.0);
  CHECK(a.samples[3] == -1.0 / 32768.0);
}

TEST_CASE("unknown chunks are skipped") {
  WavBuilder b;
  b.fmt(1, 1, 16000, 16);
  b.tag("LIST");
  b.u32(3);
  b.bytes.insert(b.bytes.end(), {'a', 'b', 'c', 0});  // odd size plus pad byte
  b.data({5, 6});
  const AudioBuffer a = parse_wav(b.finish(), "list");
  REQUIRE(a.size() == 2);
  CHECK(a.samples[1] == 6.0 / 32768.0);
}

TEST_CASE("malformed WAV input is rejected with a reason") {
  SUBCASE("not RIFF") {
    std::vector<unsigned char> junk(64, 'x');
    CHECK_THROWS_WITH_AS(parse_wav(junk, "junk"), doctest::Contains("not a RIFF/WAVE"), std::runtime_error);
  }
  SUBCASE("stereo") {
    WavBuilder b;
    b.fmt(1, 2, 16000, 16);
    b.data({0, 0});
    CHECK_THROWS_WITH_AS(parse_wav(b.finish(), "s"), doctest::Contains("mono"), std::runtime_error);
  }
  SUBCASE("24-bit") {
    WavBuilder b;
    b.fmt(1, 1, 16000, 24);
    b.data({0, 0, 0});
    CHECK_THROWS_WITH_AS(parse_wav(b.finish(), "s"), doctest::Contains("bit depth"), std::runtime_error);
  }
  SUBCASE("float encoding") {
    WavBuilder b;
    b.fmt(3, 1, 16000, 16);
    b.data({0});
    CHECK_THROWS_WITH_AS(parse_wav(b.finish(), "s"), doctest::Contains("PCM"), std::runtime_error);
  }
  SUBCASE("truncated data") {
    WavBuilder b;
    b.fmt(1, 1, 16000, 16);
    b.data({1, 2, 3}, 100);
    CHECK_THROWS_WITH_AS(parse_wav(b.finish(), "s"), doctest::Contains("truncated"), std::runtime_error);
  }
  SUBCASE("missing data chunk") {
    WavBuilder b;
    b.fmt(1, 1, 16000, 16);
    CHECK_THROWS_WITH_AS(parse_wav(b.finish(), "s"), doctest::Contains("no data"), std::runtime_error);
  }
}

TEST_CASE("write/read round trip is exact for quantized samples") {
  testing::TempDir dir("wav");
  AudioBuffer a;
  for (int v = -32768; v < 32768; v += 97) a.samples.push_back(v / 32768.0);
  CHECK(write_wav(dir / "a.wav", a) == 0);
  const AudioBuffer b = read_wav(dir / "a.wav");
  CHECK(b.sample_rate == a.sample_rate);
  CHECK(b.samples == a.samples);
  // encoder output equals the hand-built layout
  std::vector<std::int16_t> pcm;
  for (double x : a.samples) pcm.push_back(static_cast<std::int16_t>(std::lround(x * 32768.0)));
  CHECK(encode_wav(a) == simple_wav(pcm));
}

TEST_CASE("quantization clamps and counts clipping") {
  AudioBuffer a{{1.5, -2.0, 0.25}, 16000};
  std::size_t clipped = 0;
  const AudioBuffer q = quantize_pcm16(a, &clipped);
  CHECK(clipped == 2);
  CHECK(q.samples[0] == 32767.0 / 32768.0);
  CHECK(q.samples[1] == -1.0);
  CHECK(q.samples[2] == 0.25);
}

TEST_CASE("frame counts") {
  FrameConfig cfg;
  CHECK(frame_count(1024, cfg) == 1);
  CHECK(frame_count(2048, cfg) == 5);
  CHECK(frame_count(1023, cfg) == 0);
  CHECK(frame_count(16000, cfg) == 59);
}

TEST_CASE("frames start at multiples of the hop") {
  FrameConfig cfg;
  cfg.window = WindowKind::rectangular;
  AudioBuffer a;
  for (int i = 0; i < 2048; ++i) a.samples.push_back(i);
  const FrameMatrix fm = frame_signal(a, cfg);
  REQUIRE(fm.n_frames == 5);
  for (std::size_t f = 0; f < 5; ++f) {
    CHECK(fm.row(f)[0] == static_cast<double>(f * 256));
    CHECK(fm.row(f)[1023] == static_cast<double>(f * 256 + 1023));
  }
}

TEST_CASE("framing rejects mismatched rates and short buffers") {
  FrameConfig cfg;
  AudioBuffer a{std::vector<double>(2048, 0.0), 8000};
  CHECK_THROWS_AS(frame_signal(a, cfg), std::invalid_argument);
  AudioBuffer b{std::vector<double>(100, 0.0), 16000};
  CHECK_THROWS_WITH(frame_signal(b, cfg), doctest::Contains("shorter than one frame"));
}

TEST_CASE("window closed forms") {
  CHECK(make_window(WindowKind::rectangular, 4) == std::vector<double>{1, 1, 1, 1});
  const auto hann = make_window(WindowKind::hann, 4);
  CHECK(hann[0] == doctest::Approx(0.0));
  CHECK(hann[1] == doctest::Approx(0.5));
  CHECK(hann[2] == doctest::Approx(1.0));
  CHECK(hann[3] == doctest::Approx(0.5));
  const auto ham = make_window(WindowKind::hamming, 2);
  CHECK(ham[0] == doctest::Approx(0.08));
  CHECK(ham[1] == doctest::Approx(1.0));
  CHECK_THROWS(make_window(WindowKind::hann, 0));
  CHECK(parse_window("hann") == WindowKind::hann);
  CHECK_THROWS(parse_window("blackman"));
}

TEST_CASE("window is applied after DC removal and pre-emphasis") {
  FrameConfig cfg;
  cfg.frame_len = 4;
  cfg.hop = 4;
  cfg.window = WindowKind::hann;
  cfg.remove_dc = true;
  cfg.pre_emphasis = true;
  cfg.pre_emphasis_coeff = 0.5;
  const AudioBuffer a{{1.0, 2.0, 3.0, 6.0}, 16000};
  const FrameMatrix fm = frame_signal(a, cfg);
  // mean 3 -> [-2,-1,0,3]; emphasis -> [-1, 0, 0.5, 3]; hann [0,.5,1,.5]
  CHECK(fm.row(0)[0] == doctest::Approx(0.0));
  CHECK(fm.row(0)[1] == doctest::Approx(0.0));
  CHECK(fm.row(0)[2] == doctest::Approx(0.5));
  CHECK(fm.row(0)[3] == doctest::Approx(1.5));
}
