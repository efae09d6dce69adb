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

#include "cadence/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "cadence/common.hpp"

namespace cadence::text {

namespace {

bool BlankLine(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::string Lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

EmbeddingTable LoadEmbeddingTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    ThrowData("embedding table: cannot open " + path.string(),
              ErrorCode::kIoFailure);
  }

  EmbeddingTable table;
  std::vector<std::array<double, EmbeddingTable::kDim>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (BlankLine(line)) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;

    std::array<double, EmbeddingTable::kDim> row{};
    int count = 0;
    double v = 0.0;
    while (ls >> v) {
      if (count < EmbeddingTable::kDim) row[count] = v;
      ++count;
    }
    if (count != EmbeddingTable::kDim) {
      ThrowData("embedding table " + path.string() + " line " +
                    std::to_string(line_no) + ": expected " +
                    std::to_string(EmbeddingTable::kDim) + " values, got " +
                    std::to_string(count),
                ErrorCode::kGeneric);
    }
    if (table.vocab.count(token) > 0) {
      table.warnings.push_back("duplicate token '" + token + "' at line " +
                               std::to_string(line_no) +
                               " ignored; first occurrence wins");
      continue;
    }
    table.vocab.emplace(token, static_cast<int>(rows.size()));
    rows.push_back(row);
  }
  if (rows.empty()) {
    ThrowData("embedding table " + path.string() + " has no entries",
              ErrorCode::kEmptyInput);
  }

  table.vectors.resize(static_cast<Eigen::Index>(rows.size()),
                       EmbeddingTable::kDim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < EmbeddingTable::kDim; ++j) {
      table.vectors(static_cast<Eigen::Index>(i), j) = rows[i][j];
    }
  }
  return table;
}

PaddedIntervention PadIntervention(const std::vector<std::string>& tokens,
                                   const EmbeddingTable& table) {
  PaddedIntervention out;
  out.token_ids.fill(PaddedIntervention::kPadId);
  out.mask.fill(false);
  out.empty = tokens.empty();

  const std::size_t keep =
      std::min<std::size_t>(tokens.size(), PaddedIntervention::kLength);
  const std::size_t src0 = tokens.size() - keep;  // keep the last tokens
  const std::size_t dst0 = PaddedIntervention::kLength - keep;
  for (std::size_t i = 0; i < keep; ++i) {
    out.token_ids[dst0 + i] = table.Lookup(tokens[src0 + i]);
    out.mask[dst0 + i] = true;
  }
  return out;
}

Eigen::MatrixXd EmbedIntervention(const PaddedIntervention& padded,
                                  const EmbeddingTable& table) {
  Eigen::MatrixXd seq = Eigen::MatrixXd::Zero(PaddedIntervention::kLength,
                                              EmbeddingTable::kDim);
  for (int t = 0; t < PaddedIntervention::kLength; ++t) {
    const int id = padded.token_ids[t];
    if (id >= 0) seq.row(t) = table.vectors.row(id);
  }
  return seq;
}

PosTagger::PosTagger() {
  static const struct {
    const char* tag;
    const char* words;
  } kClosedClass[] = {
      {"pron",
       "i you he she it we they me him her us them mine yours his hers ours "
       "theirs myself yourself himself herself itself ourselves themselves "
       "who whom whose this that these those something someone anything "
       "everything nothing"},
      {"det",
       "the a an some any no every each both all most other another such "
       "what which"},
      {"prep",
       "on in of from under over with near by at to for about into onto off "
       "out up down through between behind beside above below during after "
       "before against around without within toward across along past"},
      {"conj", "and or but nor so yet because although while if when than as "
               "unless until since whether"},
      {"verb",
       "is are was were be been being am has have had having do does did "
       "doing done will would can could shall should may might must go goes "
       "going went gone get gets getting got"},
      {"adv",
       "not very too also just only here there now then again always never "
       "often really quite almost maybe still already soon away back"},
      {"intj", "uh um oh ah okay yeah mhm hmm hi hello yes"},
      {"num", "one two three four five six seven eight nine ten"},
  };
  for (const auto& group : kClosedClass) {
    std::istringstream ws(group.words);
    std::string w;
    while (ws >> w) Add(w, group.tag);
  }
}

PosTagger PosTagger::FromFile(const std::filesystem::path& path) {
  static const std::set<std::string> kTags = {
      "noun", "verb", "adj", "adv", "pron", "det", "prep", "conj", "intj",
      "num"};

  std::ifstream in(path);
  if (!in) {
    ThrowData("pos lexicon: cannot open " + path.string(),
              ErrorCode::kIoFailure);
  }
  PosTagger tagger;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (BlankLine(line)) continue;
    std::istringstream ls(line);
    std::string token, tag, extra;
    if (!(ls >> token >> tag) || (ls >> extra)) {
      ThrowData("pos lexicon " + path.string() + " line " +
                    std::to_string(line_no) + ": expected 'token tag'",
                ErrorCode::kGeneric);
    }
    if (kTags.count(tag) == 0) {
      ThrowData("pos lexicon " + path.string() + " line " +
                    std::to_string(line_no) + ": unknown tag '" + tag + "'",
                ErrorCode::kGeneric);
    }
    tagger.Add(token, tag);
  }
  return tagger;
}

void PosTagger::Add(const std::string& token, const std::string& tag) {
  lexicon_[Lower(token)] = tag;
}

std::string PosTagger::Tag(const std::string& token) const {
  const std::string w = Lower(token);
  if (const auto it = lexicon_.find(w); it != lexicon_.end()) {
    return it->second;
  }
  // Plural-stem lookup keeps unseen plurals on their singular's tag.
  if (w.size() > 2 && w.back() == 's') {
    if (const auto it = lexicon_.find(w.substr(0, w.size() - 1));
        it != lexicon_.end()) {
      return it->second;
    }
  }
  const auto ends_with = [&w](const char* suf) {
    const std::size_t n = std::strlen(suf);
    return w.size() > n + 1 && w.compare(w.size() - n, n, suf) == 0;
  };
  if (ends_with("ing") || ends_with("ed")) return "verb";
  if (ends_with("ness") || ends_with("tion")) return "noun";
  if (ends_with("ly")) return "adv";
  return "noun";
}

Eigen::VectorXd LinguisticVector::AsVector() const {
  Eigen::VectorXd v(13);
  v << n_interventions, words_per_intervention, mean_word_length,
      n_unique_words, concept_kitchen, concept_mother, concept_stool,
      concept_boy, concept_girl, freq_verbs, freq_nouns, freq_adjectives,
      freq_pronouns;
  return v;
}

const std::vector<std::string>& LinguisticVector::Names() {
  static const std::vector<std::string> names = {
      "n_interventions", "words_per_intervention", "mean_word_length",
      "n_unique_words",  "concept_kitchen",        "concept_mother",
      "concept_stool",   "concept_boy",            "concept_girl",
      "freq_verbs",      "freq_nouns",             "freq_adjectives",
      "freq_pronouns"};
  return names;
}

LinguisticVector ComputeLinguistic(const chat::Transcript& transcript,
                                   const PosTagger& tagger) {
  static const char* kConcepts[] = {"kitchen", "mother", "stool", "boy",
                                    "girl"};

  std::size_t total_tokens = 0;
  std::size_t total_chars = 0;
  std::set<std::string> unique;
  double concept_hits[5] = {0, 0, 0, 0, 0};
  std::size_t tag_counts[4] = {0, 0, 0, 0};  // verb, noun, adj, pron

  for (const auto& intervention : transcript.interventions) {
    for (const auto& raw : intervention) {
      const std::string w = Lower(raw);
      ++total_tokens;
      total_chars += w.size();
      unique.insert(w);
      for (int c = 0; c < 5; ++c) {
        if (w == kConcepts[c] || w == std::string(kConcepts[c]) + "s") {
          concept_hits[c] = 1.0;
        }
      }
      const std::string tag = tagger.Tag(w);
      if (tag == "verb") {
        ++tag_counts[0];
      } else if (tag == "noun") {
        ++tag_counts[1];
      } else if (tag == "adj") {
        ++tag_counts[2];
      } else if (tag == "pron") {
        ++tag_counts[3];
      }
    }
  }
  if (total_tokens == 0) {
    ThrowData("transcript for subject '" + transcript.subject_id +
                  "' has no words",
              ErrorCode::kEmptyInput);
  }

  LinguisticVector lv;
  lv.n_interventions = static_cast<double>(transcript.interventions.size());
  lv.words_per_intervention =
      static_cast<double>(total_tokens) / lv.n_interventions;
  lv.mean_word_length =
      static_cast<double>(total_chars) / static_cast<double>(total_tokens);
  lv.n_unique_words = static_cast<double>(unique.size());
  lv.concept_kitchen = concept_hits[0];
  lv.concept_mother = concept_hits[1];
  lv.concept_stool = concept_hits[2];
  lv.concept_boy = concept_hits[3];
  lv.concept_girl = concept_hits[4];
  const auto freq = [&](std::size_t n) {
    return static_cast<double>(n) / static_cast<double>(total_tokens);
  };
  lv.freq_verbs = freq(tag_counts[0]);
  lv.freq_nouns = freq(tag_counts[1]);
  lv.freq_adjectives = freq(tag_counts[2]);
  lv.freq_pronouns = freq(tag_counts[3]);
  return lv;
}

void MinMaxScaler::Fit(const Eigen::MatrixXd& train) {
  CADENCE_CHECK_DATA(train.rows() > 0 && train.cols() > 0,
                     "min-max scaler needs a nonempty training matrix");
  min_ = train.colwise().minCoeff();
  max_ = train.colwise().maxCoeff();
}

Eigen::VectorXd MinMaxScaler::Apply(const Eigen::VectorXd& v) const {
  CADENCE_CHECK_CONFIG(Fitted(), "min-max scaler used before Fit");
  CADENCE_CHECK_DATA(v.size() == min_.size(),
                     "min-max scaler: dimension mismatch");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double range = max_(j) - min_(j);
    if (range <= 0.0) {
      out(j) = 0.5;
    } else {
      out(j) = std::clamp((v(j) - min_(j)) / range, 0.0, 1.0);
    }
  }
  return out;
}

Eigen::MatrixXd MinMaxScaler::Apply(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out.row(i) = Apply(Eigen::VectorXd(m.row(i))).transpose();
  }
  return out;
}

Eigen::VectorXd MinMaxScaler::Invert(const Eigen::VectorXd& v) const {
  CADENCE_CHECK_CONFIG(Fitted(), "min-max scaler used before Fit");
  CADENCE_CHECK_DATA(v.size() == min_.size(),
                     "min-max scaler: dimension mismatch");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double range = max_(j) - min_(j);
    out(j) = range <= 0.0 ? min_(j) : min_(j) + v(j) * range;
  }
  return out;
}

}  // namespace cadence::text
