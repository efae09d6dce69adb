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

#include "cadence/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cadence/common.hpp"

namespace cadence {

namespace {

std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorKind::kData, ErrorCode::kWavMalformed, "malformed wav: " + what);
}

[[noreturn]] void Unsupported(const std::string& what) {
  throw Error(ErrorKind::kData, ErrorCode::kWavUnsupported, "unsupported wav encoding: " + what);
}

}  // namespace

Recording LoadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kData, ErrorCode::kIoFailure,
                "cannot open wav file: " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  if (size < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    Malformed("missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* chunk = p + pos;
    std::uint32_t chunk_len = ReadU32(chunk + 4);
    const unsigned char* body = chunk + 8;
    if (pos + 8 + chunk_len > size) Malformed("chunk overruns file");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_len < 16) Malformed("fmt chunk too short");
      format = ReadU16(body);
      channels = ReadU16(body + 2);
      sample_rate = ReadU32(body + 4);
      bits = ReadU16(body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = body;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt) Malformed("missing fmt chunk");
  if (data == nullptr) Malformed("missing data chunk");
  if (format != 1) Unsupported("non-PCM format tag " + std::to_string(format));
  if (channels != 1) Unsupported(std::to_string(channels) + " channels, expected mono");
  if (bits != 16) Unsupported(std::to_string(bits) + "-bit samples, expected 16");
  if (sample_rate == 0) Malformed("zero sample rate");
  if (data_len < 2) Malformed("empty data chunk");

  Recording rec;
  rec.sample_rate = static_cast<int>(sample_rate);
  const std::size_t n = data_len / 2;
  rec.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t s =
        static_cast<std::int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
    rec.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return rec;
}

void WriteWav(const std::filesystem::path& path, const Recording& rec) {
  CADENCE_CHECK_DATA(rec.sample_rate > 0, "wav writer: sample rate must be positive");
  CADENCE_CHECK_DATA(!rec.samples.empty(), "wav writer: no samples");

  std::string out;
  const std::uint32_t data_len = static_cast<std::uint32_t>(rec.samples.size() * 2);
  out.reserve(44 + data_len);
  out += "RIFF";
  PutU32(out, 36 + data_len);
  out += "WAVE";
  out += "fmt ";
  PutU32(out, 16);
  PutU16(out, 1);  // PCM
  PutU16(out, 1);  // mono
  PutU32(out, static_cast<std::uint32_t>(rec.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(rec.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_len);
  for (double v : rec.samples) {
    double c = std::clamp(v, -1.0, 1.0);
    long q = std::lrint(c * 32768.0);
    q = std::clamp(q, -32768L, 32767L);
    PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error(ErrorKind::kData, ErrorCode::kIoFailure,
                "cannot write wav file: " + path.string());
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace cadence
