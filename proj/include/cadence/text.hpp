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

#ifndef CADENCE_TEXT_HPP_
#define CADENCE_TEXT_HPP_

#include <array>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cadence/chat.hpp"

namespace cadence::text {

// Pretrained word-embedding table loaded from a text file with one token
// plus exactly 50 floats per line. Row order follows first appearance.
struct EmbeddingTable {
  static constexpr int kDim = 50;

  std::unordered_map<std::string, int> vocab;  // token -> row in vectors
  Eigen::MatrixXd vectors;                     // V x kDim
  std::vector<std::string> warnings;           // duplicate-token notes

  int Size() const { return static_cast<int>(vectors.rows()); }
  // Row index for a token, or -1 when out of vocabulary.
  int Lookup(const std::string& token) const {
    const auto it = vocab.find(token);
    return it == vocab.end() ? -1 : it->second;
  }
};

// Duplicate tokens keep the first line and append a warning; a line whose
// value count is not 50 is a data error naming the line number.
EmbeddingTable LoadEmbeddingTable(const std::filesystem::path& path);

// Fixed-length intervention encoding for the sequential model. Real tokens
// are right-aligned so padding sits on the left; kPadId marks both padding
// and out-of-vocabulary tokens, and both embed to the zero vector.
struct PaddedIntervention {
  static constexpr int kLength = 20;
  static constexpr int kPadId = -1;

  std::array<int, kLength> token_ids;
  std::array<bool, kLength> mask;  // true exactly where a real token sits
  bool empty = false;              // no tokens; excluded from training

  int TokenCount() const {
    int n = 0;
    for (bool b : mask) n += b ? 1 : 0;
    return n;
  }
};

// Keeps the last kLength tokens when the intervention is longer.
PaddedIntervention PadIntervention(const std::vector<std::string>& tokens,
                                   const EmbeddingTable& table);

// Embedding sequence for one padded intervention: kLength x kDim with zero
// rows at pad and out-of-vocabulary slots.
Eigen::MatrixXd EmbedIntervention(const PaddedIntervention& padded,
                                  const EmbeddingTable& table);

// Word to coarse part of speech. Lexicon entries win; unknown words fall
// back to a plural-stem lookup, then suffix rules, then noun.
class PosTagger {
 public:
  // Starts with the built-in closed-class entries (pronouns, determiners,
  // prepositions, conjunctions, auxiliaries, common adverbs).
  PosTagger();

  // Adds entries from a file of "token tag" lines on top of the built-ins.
  // '#' starts a comment. Valid tags: noun verb adj adv pron det prep conj
  // intj num. A malformed line or unknown tag is a data error naming the
  // line number.
  static PosTagger FromFile(const std::filesystem::path& path);

  // Later entries overwrite earlier ones for the same token.
  void Add(const std::string& token, const std::string& tag);

  std::string Tag(const std::string& token) const;
  std::size_t LexiconSize() const { return lexicon_.size(); }

 private:
  std::unordered_map<std::string, std::string> lexicon_;
};

// The 13 transcript descriptors: extension information (3), vocabulary
// richness (1), key-concept presence (5), part-of-speech frequencies (4).
struct LinguisticVector {
  double n_interventions = 0.0;
  double words_per_intervention = 0.0;  // mean tokens per intervention
  double mean_word_length = 0.0;        // characters per token
  double n_unique_words = 0.0;
  double concept_kitchen = 0.0;  // binary presence flags
  double concept_mother = 0.0;
  double concept_stool = 0.0;
  double concept_boy = 0.0;
  double concept_girl = 0.0;
  double freq_verbs = 0.0;  // tagged count / total tokens, in [0, 1]
  double freq_nouns = 0.0;
  double freq_adjectives = 0.0;
  double freq_pronouns = 0.0;

  Eigen::VectorXd AsVector() const;
  // 13 names in AsVector order; also the CSV export header.
  static const std::vector<std::string>& Names();
};

// A transcript with no tokens is a data error (the subject has no text
// evidence). Concept flags match the exact word or its "-s" plural.
LinguisticVector ComputeLinguistic(const chat::Transcript& transcript,
                                   const PosTagger& tagger);

// Per-column min-max map fitted on training rows only. Transformed values
// are clamped to [0, 1]; a constant training column always maps to 0.5.
class MinMaxScaler {
 public:
  void Fit(const Eigen::MatrixXd& train);

  Eigen::VectorXd Apply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd Apply(const Eigen::MatrixXd& m) const;

  // Exact inverse for non-constant columns; a constant column returns its
  // training value.
  Eigen::VectorXd Invert(const Eigen::VectorXd& v) const;

  bool Fitted() const { return min_.size() > 0; }
  const Eigen::VectorXd& Mins() const { return min_; }
  const Eigen::VectorXd& Maxs() const { return max_; }

 private:
  Eigen::VectorXd min_, max_;
};

}  // namespace cadence::text

#endif  // CADENCE_TEXT_HPP_
