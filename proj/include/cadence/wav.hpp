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

#ifndef CADENCE_WAV_HPP_
#define CADENCE_WAV_HPP_

#include <filesystem>
#include <string>
#include <vector>

namespace cadence {

// Immutable mono waveform. Samples live in [-1, 1] (PCM16 / 32768).
struct Recording {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a RIFF/WAVE file. Only PCM 16-bit mono is accepted; anything else
// raises kWavUnsupported, structural damage raises kWavMalformed.
Recording LoadWav(const std::filesystem::path& path);

// Writes PCM16 mono. Values are clamped to [-1, 1] and rounded.
void WriteWav(const std::filesystem::path& path, const Recording& rec);

}  // namespace cadence

#endif  // CADENCE_WAV_HPP_
