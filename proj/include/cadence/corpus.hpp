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

#ifndef CADENCE_CORPUS_HPP_
#define CADENCE_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cadence/wav.hpp"

namespace cadence::corpus {

enum class Label { kAd, kNonAd };

enum class Sex { kMale, kFemale };

inline const char* LabelName(Label l) { return l == Label::kAd ? "AD" : "nonAD"; }
inline const char* SexName(Sex s) { return s == Sex::kMale ? "M" : "F"; }

// Half-open age interval in years, bounds within [50, 80).
struct AgeBand {
  int lo = 0;
  int hi = 0;
};

struct Subject {
  std::string id;
  Label label = Label::kNonAd;
  Sex sex = Sex::kMale;
  AgeBand age_band;
  // Stored relative to the manifest file so a corpus directory is relocatable.
  std::string audio_path;
  std::string transcript_path;
};

struct Manifest {
  std::vector<Subject> subjects;
  std::map<std::string, int> class_counts;
  // Directory the relative paths resolve against (set on load/save).
  std::filesystem::path base_dir;

  std::filesystem::path AudioFile(const Subject& s) const { return base_dir / s.audio_path; }
  std::filesystem::path TranscriptFile(const Subject& s) const {
    return base_dir / s.transcript_path;
  }
};

// Validates id uniqueness, age bands, and class-count consistency.
void ValidateManifest(const Manifest& m);

Manifest LoadManifest(const std::filesystem::path& path);
void SaveManifest(const Manifest& m, const std::filesystem::path& path);

struct SynthConfig {
  int n_subjects = 40;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
};

// Writes <id>.wav and <id>.cha per subject plus manifest.json under out_dir
// and returns the manifest. Pure function of (config) given a fixed out_dir
// layout; AD subjects get longer pauses, slower syllable bursts, a narrower
// F0 range, and shorter low-vocabulary transcripts.
Manifest GenerateSyntheticCorpus(const SynthConfig& config,
                                 const std::filesystem::path& out_dir);

// Writes a small deterministic word-embedding table (50-d, one line per
// token) covering the generator vocabulary, for the sequential text model.
void WriteSyntheticEmbeddingTable(const std::filesystem::path& path,
                                  std::uint64_t seed);

}  // namespace cadence::corpus

#endif  // CADENCE_CORPUS_HPP_
