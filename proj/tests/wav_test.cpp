// Copyright 2026 The Cadence Authors
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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include <doctest.h>

#include "cadence/common.hpp"
#include "cadence/rng.hpp"
#include "cadence/wav.hpp"
#include "test_util.hpp"

using namespace cadence;
using cadence::testing::ScopedTempDir;

namespace {

void PutU32(std::vector<char>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}
void PutU16(std::vector<char>& v, std::uint16_t x) {
  v.push_back(static_cast<char>(x & 0xff));
  v.push_back(static_cast<char>((x >> 8) & 0xff));
}
void PutTag(std::vector<char>& v, const char* tag) {
  v.insert(v.end(), tag, tag + 4);
}

// Hand-built canonical PCM16 mono file.
std::vector<char> BuildWavBytes(const std::vector<std::int16_t>& pcm, int rate,
                                std::uint16_t format_tag = 1,
                                std::uint16_t channels = 1,
                                std::uint16_t bits = 16) {
  std::vector<char> v;
  PutTag(v, "RIFF");
  PutU32(v, 4 + 8 + 16 + 8 + static_cast<std::uint32_t>(pcm.size() * 2));
  PutTag(v, "WAVE");
  PutTag(v, "fmt ");
  PutU32(v, 16);
  PutU16(v, format_tag);
  PutU16(v, channels);
  PutU32(v, static_cast<std::uint32_t>(rate));
  PutU32(v, static_cast<std::uint32_t>(rate * channels * bits / 8));
  PutU16(v, static_cast<std::uint16_t>(channels * bits / 8));
  PutU16(v, bits);
  PutTag(v, "data");
  PutU32(v, static_cast<std::uint32_t>(pcm.size() * 2));
  for (std::int16_t s : pcm) PutU16(v, static_cast<std::uint16_t>(s));
  return v;
}

}  // namespace

TEST_CASE("wav round-trip is exact for PCM-grid samples") {
  ScopedTempDir tmp("wav");
  Rng rng(31);
  Recording rec;
  rec.sample_rate = 16000;
  std::vector<std::int16_t> pcm;
  for (int i = 0; i < 4000; ++i) {
    auto q = static_cast<std::int16_t>(rng.UniformInt(65536) - 32768);
    pcm.push_back(q);
    rec.samples.push_back(q / 32768.0);
  }
  const auto p = tmp.path() / "r.wav";
  WriteWav(p, rec);
  const Recording back = LoadWav(p);
  REQUIRE(back.sample_rate == 16000);
  REQUIRE(back.samples.size() == rec.samples.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    CHECK(back.samples[i] == rec.samples[i]);
  }
}

TEST_CASE("wav round-trip quantization error is bounded by one step") {
  ScopedTempDir tmp("wav");
  Recording rec;
  rec.sample_rate = 8000;
  for (int i = 0; i < 8000; ++i) {
    rec.samples.push_back(0.9 * std::sin(2.0 * M_PI * 440.0 * i / 8000.0));
  }
  const auto p = tmp.path() / "sine.wav";
  WriteWav(p, rec);
  const Recording back = LoadWav(p);
  REQUIRE(back.samples.size() == rec.samples.size());
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    CHECK(std::abs(back.samples[i] - rec.samples[i]) <= 1.0 / 32768.0);
  }
  CHECK(back.duration() == doctest::Approx(1.0));
}

TEST_CASE("wav loader accepts extra chunks before data") {
  ScopedTempDir tmp("wav");
  std::vector<std::int16_t> pcm = {0, 100, -100, 32767, -32768};
  std::vector<char> v;
  PutTag(v, "RIFF");
  PutU32(v, 0);  // size fixed below
  PutTag(v, "WAVE");
  PutTag(v, "fmt ");
  PutU32(v, 16);
  PutU16(v, 1);
  PutU16(v, 1);
  PutU32(v, 16000);
  PutU32(v, 32000);
  PutU16(v, 2);
  PutU16(v, 16);
  PutTag(v, "LIST");
  PutU32(v, 5);
  for (char c : {'I', 'N', 'F', 'O', 'x'}) v.push_back(c);
  v.push_back(0);  // chunk padding to word boundary
  PutTag(v, "data");
  PutU32(v, static_cast<std::uint32_t>(pcm.size() * 2));
  for (std::int16_t s : pcm) PutU16(v, static_cast<std::uint16_t>(s));
  const std::uint32_t riff_size = static_cast<std::uint32_t>(v.size() - 8);
  std::memcpy(v.data() + 4, &riff_size, 4);

  const auto p = tmp.path() / "chunks.wav";
  cadence::testing::WriteAllBytes(p, v);
  const Recording rec = LoadWav(p);
  REQUIRE(rec.samples.size() == pcm.size());
  CHECK(rec.samples[3] == doctest::Approx(32767.0 / 32768.0));
  CHECK(rec.samples[4] == doctest::Approx(-1.0));
}

TEST_CASE("wav loader rejects malformed and unsupported input distinctly") {
  ScopedTempDir tmp("wav");
  const std::vector<std::int16_t> pcm = {1, 2, 3};

  SUBCASE("truncated header") {
    auto v = BuildWavBytes(pcm, 16000);
    v.resize(10);
    const auto p = tmp.path() / "trunc.wav";
    cadence::testing::WriteAllBytes(p, v);
    try {
      LoadWav(p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kWavMalformed);
    }
  }

  SUBCASE("wrong magic") {
    auto v = BuildWavBytes(pcm, 16000);
    v[0] = 'X';
    const auto p = tmp.path() / "magic.wav";
    cadence::testing::WriteAllBytes(p, v);
    try {
      LoadWav(p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kWavMalformed);
    }
  }

  SUBCASE("float format tag is unsupported") {
    auto v = BuildWavBytes(pcm, 16000, /*format_tag=*/3);
    const auto p = tmp.path() / "float.wav";
    cadence::testing::WriteAllBytes(p, v);
    try {
      LoadWav(p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kWavUnsupported);
    }
  }

  SUBCASE("stereo is unsupported") {
    auto v = BuildWavBytes(pcm, 16000, 1, /*channels=*/2);
    const auto p = tmp.path() / "stereo.wav";
    cadence::testing::WriteAllBytes(p, v);
    try {
      LoadWav(p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kWavUnsupported);
    }
  }

  SUBCASE("8-bit depth is unsupported") {
    auto v = BuildWavBytes(pcm, 16000, 1, 1, /*bits=*/8);
    const auto p = tmp.path() / "u8.wav";
    cadence::testing::WriteAllBytes(p, v);
    try {
      LoadWav(p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kWavUnsupported);
    }
  }

  SUBCASE("data chunk shorter than declared") {
    auto v = BuildWavBytes(pcm, 16000);
    v.resize(v.size() - 2);
    const auto p = tmp.path() / "short.wav";
    cadence::testing::WriteAllBytes(p, v);
    try {
      LoadWav(p);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kWavMalformed);
    }
  }
}
