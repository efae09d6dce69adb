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

#include <string>
#include <vector>

#include <doctest.h>

#include "cadence/chat.hpp"
#include "cadence/common.hpp"
#include "cadence/corpus.hpp"
#include "cadence/rng.hpp"
#include "cadence/text.hpp"
#include "test_util.hpp"

using namespace cadence;
using namespace cadence::testing;
using namespace cadence::text;

namespace {

// One embedding line: token then 50 floats 'base, base+1, ...'.
std::string EmbeddingLine(const std::string& token, double base, int n = 50) {
  std::string line = token;
  for (int i = 0; i < n; ++i) {
    line += " " + FormatDouble(base + i);
  }
  return line;
}

chat::Transcript MakeTranscript(
    std::vector<std::vector<std::string>> interventions) {
  chat::Transcript t;
  t.subject_id = "T1";
  t.interventions = std::move(interventions);
  return t;
}

}  // namespace

TEST_CASE("embedding table loads tokens and vectors") {
  ScopedTempDir tmp("text");
  const auto path = tmp.path() / "emb.txt";
  WriteAllText(path, EmbeddingLine("cat", 1.0) + "\n" +
                         EmbeddingLine("dog", 100.0) + "\n");
  const EmbeddingTable table = LoadEmbeddingTable(path);
  CHECK(table.Size() == 2);
  CHECK(table.Lookup("cat") == 0);
  CHECK(table.Lookup("dog") == 1);
  CHECK(table.Lookup("bird") == -1);
  CHECK(table.vectors(0, 0) == 1.0);
  CHECK(table.vectors(1, 49) == 149.0);
  CHECK(table.warnings.empty());
}

TEST_CASE("embedding table rejects a wrong-width line with its line number") {
  ScopedTempDir tmp("text");
  const auto path = tmp.path() / "emb.txt";
  SUBCASE("49 values") {
    WriteAllText(path, EmbeddingLine("cat", 1.0) + "\n" +
                           EmbeddingLine("dog", 2.0, 49) + "\n");
  }
  SUBCASE("51 values") {
    WriteAllText(path, EmbeddingLine("cat", 1.0) + "\n" +
                           EmbeddingLine("dog", 2.0, 51) + "\n");
  }
  try {
    LoadEmbeddingTable(path);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("duplicate embedding tokens keep the first row and warn") {
  ScopedTempDir tmp("text");
  const auto path = tmp.path() / "emb.txt";
  WriteAllText(path, EmbeddingLine("cat", 1.0) + "\n" +
                         EmbeddingLine("dog", 2.0) + "\n" +
                         EmbeddingLine("cat", 9.0) + "\n");
  const EmbeddingTable table = LoadEmbeddingTable(path);
  CHECK(table.Size() == 2);
  CHECK(table.vectors(table.Lookup("cat"), 0) == 1.0);
  REQUIRE(table.warnings.size() == 1);
  CHECK(table.warnings[0].find("cat") != std::string::npos);
  CHECK(table.warnings[0].find("line 3") != std::string::npos);
}

TEST_CASE("embedding loader rejects missing and empty files") {
  ScopedTempDir tmp("text");
  CHECK_THROWS_AS(LoadEmbeddingTable(tmp.path() / "absent.txt"), Error);
  const auto path = tmp.path() / "blank.txt";
  WriteAllText(path, "\n  \n");
  CHECK_THROWS_AS(LoadEmbeddingTable(path), Error);
}

TEST_CASE("generated embedding table round-trips through the loader") {
  ScopedTempDir tmp("text");
  const auto path = tmp.path() / "emb.txt";
  corpus::WriteSyntheticEmbeddingTable(path, 9);
  const EmbeddingTable table = LoadEmbeddingTable(path);
  CHECK(table.Size() > 40);
  CHECK(table.vectors.cols() == EmbeddingTable::kDim);
  CHECK(table.Lookup("cookie") >= 0);
  CHECK(table.warnings.empty());
  // Vocab indices are dense over 0..V-1.
  std::vector<bool> seen(table.Size(), false);
  for (const auto& [tok, idx] : table.vocab) {
    REQUIRE(idx >= 0);
    REQUIRE(idx < table.Size());
    CHECK(!seen[idx]);
    seen[idx] = true;
  }
}

TEST_CASE("pad intervention right-aligns tokens behind left padding") {
  ScopedTempDir tmp("text");
  const auto path = tmp.path() / "emb.txt";
  std::string text;
  for (int i = 0; i < 30; ++i) {
    text += EmbeddingLine("w" + std::to_string(i), i) + "\n";
  }
  WriteAllText(path, text);
  const EmbeddingTable table = LoadEmbeddingTable(path);

  SUBCASE("five tokens leave fifteen pad slots") {
    const std::vector<std::string> tokens = {"w3", "w1", "w4", "w1", "w5"};
    const PaddedIntervention p = PadIntervention(tokens, table);
    CHECK(!p.empty);
    CHECK(p.TokenCount() == 5);
    for (int t = 0; t < 15; ++t) {
      CHECK(p.token_ids[t] == PaddedIntervention::kPadId);
      CHECK(!p.mask[t]);
    }
    for (int t = 0; t < 5; ++t) {
      CHECK(p.mask[15 + t]);
      CHECK(p.token_ids[15 + t] == table.Lookup(tokens[t]));
    }
  }
  SUBCASE("twenty-five tokens keep the last twenty") {
    std::vector<std::string> tokens;
    for (int i = 0; i < 25; ++i) tokens.push_back("w" + std::to_string(i));
    const PaddedIntervention p = PadIntervention(tokens, table);
    CHECK(p.TokenCount() == 20);
    for (int t = 0; t < 20; ++t) {
      CHECK(p.mask[t]);
      CHECK(p.token_ids[t] == table.Lookup("w" + std::to_string(5 + t)));
    }
  }
  SUBCASE("empty intervention is all pad and flagged") {
    const PaddedIntervention p = PadIntervention({}, table);
    CHECK(p.empty);
    CHECK(p.TokenCount() == 0);
  }
  SUBCASE("oov tokens stay masked but embed to zero") {
    const PaddedIntervention p = PadIntervention({"w2", "zzz"}, table);
    CHECK(p.TokenCount() == 2);
    CHECK(p.token_ids[18] == table.Lookup("w2"));
    CHECK(p.token_ids[19] == PaddedIntervention::kPadId);
    CHECK(p.mask[19]);
    const Eigen::MatrixXd seq = EmbedIntervention(p, table);
    REQUIRE(seq.rows() == 20);
    REQUIRE(seq.cols() == 50);
    CHECK(seq.row(0).norm() == 0.0);   // pad
    CHECK(seq.row(19).norm() == 0.0);  // oov
    CHECK(seq.row(18) == table.vectors.row(table.Lookup("w2")));
  }
}

TEST_CASE("linguistic vector on the hand-counted fixture") {
  // Hand counts: 6 tokens, 1 intervention, unique {the,boy,is,on,stool}=5,
  // lengths 3+3+2+2+3+5=18 so mean 3.0; tags det,noun,verb,prep,det,noun.
  const auto t = MakeTranscript({{"the", "boy", "is", "on", "the", "stool"}});
  const PosTagger tagger;
  const LinguisticVector lv = ComputeLinguistic(t, tagger);
  CHECK(lv.n_interventions == 1.0);
  CHECK(lv.words_per_intervention == 6.0);
  CHECK(lv.mean_word_length == doctest::Approx(3.0));
  CHECK(lv.n_unique_words == 5.0);
  CHECK(lv.concept_stool == 1.0);
  CHECK(lv.concept_boy == 1.0);
  CHECK(lv.concept_kitchen == 0.0);
  CHECK(lv.concept_mother == 0.0);
  CHECK(lv.concept_girl == 0.0);
  CHECK(lv.freq_nouns == doctest::Approx(2.0 / 6.0));
  CHECK(lv.freq_verbs == doctest::Approx(1.0 / 6.0));
  CHECK(lv.freq_adjectives == 0.0);
  CHECK(lv.freq_pronouns == 0.0);

  const Eigen::VectorXd v = lv.AsVector();
  REQUIRE(v.size() == 13);
  CHECK(LinguisticVector::Names().size() == 13);
  CHECK(LinguisticVector::Names().front() == "n_interventions");
  CHECK(v(0) == 1.0);
  CHECK(v(12) == lv.freq_pronouns);
}

TEST_CASE("linguistic vector details") {
  const PosTagger tagger;
  SUBCASE("concept flags accept simple plurals") {
    const auto lv =
        ComputeLinguistic(MakeTranscript({{"stools", "girls"}}), tagger);
    CHECK(lv.concept_stool == 1.0);
    CHECK(lv.concept_girl == 1.0);
    CHECK(lv.concept_boy == 0.0);
  }
  SUBCASE("mean word length arithmetic") {
    const auto lv = ComputeLinguistic(MakeTranscript({{"a", "bb", "ccc"}}),
                                      tagger);
    CHECK(lv.mean_word_length == doctest::Approx(2.0));
  }
  SUBCASE("no concept words leaves all flags zero") {
    const auto lv = ComputeLinguistic(
        MakeTranscript({{"the", "water", "is", "wet"}}), tagger);
    CHECK(lv.concept_kitchen + lv.concept_mother + lv.concept_stool +
              lv.concept_boy + lv.concept_girl ==
          0.0);
  }
  SUBCASE("pronoun-heavy text raises the pronoun frequency") {
    const auto lv = ComputeLinguistic(
        MakeTranscript({{"he", "is", "there"}, {"she", "took", "it"}}),
        tagger);
    CHECK(lv.n_interventions == 2.0);
    CHECK(lv.words_per_intervention == 3.0);
    CHECK(lv.freq_pronouns == doctest::Approx(3.0 / 6.0));
  }
  SUBCASE("words per intervention averages over interventions") {
    const auto lv = ComputeLinguistic(
        MakeTranscript({{"a", "b", "c", "d"}, {"e", "f"}}), tagger);
    CHECK(lv.words_per_intervention == doctest::Approx(3.0));
  }
  SUBCASE("empty transcript is a data error") {
    CHECK_THROWS_AS(ComputeLinguistic(MakeTranscript({}), tagger), Error);
    try {
      ComputeLinguistic(MakeTranscript({{}}), tagger);
      FAIL("expected a data error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kData);
    }
  }
}

TEST_CASE("pos tagger built-ins, plural stems, and suffix rules") {
  const PosTagger tagger;
  CHECK(tagger.Tag("he") == "pron");
  CHECK(tagger.Tag("Them") == "pron");
  CHECK(tagger.Tag("the") == "det");
  CHECK(tagger.Tag("is") == "verb");
  CHECK(tagger.Tag("on") == "prep");
  CHECK(tagger.Tag("and") == "conj");
  CHECK(tagger.Tag("running") == "verb");    // -ing
  CHECK(tagger.Tag("walked") == "verb");     // -ed
  CHECK(tagger.Tag("happiness") == "noun");  // -ness
  CHECK(tagger.Tag("attention") == "noun");  // -tion
  CHECK(tagger.Tag("quickly") == "adv");     // -ly
  CHECK(tagger.Tag("zzqq") == "noun");       // unknown defaults to noun
  CHECK(tagger.Tag("red") == "noun");        // too short for the -ed rule
  CHECK(tagger.Tag("sing") == "noun");       // too short for the -ing rule

  PosTagger extended = tagger;
  extended.Add("puddle", "noun");
  CHECK(extended.Tag("puddles") == "noun");  // plural-stem lookup
  extended.Add("puddles", "verb");
  CHECK(extended.Tag("puddles") == "verb");  // exact entry wins
}

TEST_CASE("shipped pos lexicon loads and covers the domain words") {
  const auto path =
      std::filesystem::path(CADENCE_SOURCE_DIR) / "data" / "pos_lexicon.txt";
  const PosTagger tagger = PosTagger::FromFile(path);
  CHECK(tagger.LexiconSize() > 250);
  CHECK(tagger.Tag("cookie") == "noun");
  CHECK(tagger.Tag("falling") == "verb");
  CHECK(tagger.Tag("little") == "adj");
  CHECK(tagger.Tag("mother") == "noun");
  CHECK(tagger.Tag("he") == "pron");  // built-ins survive the file load
}

TEST_CASE("pos lexicon file errors carry line numbers") {
  ScopedTempDir tmp("text");
  const auto path = tmp.path() / "lex.txt";
  SUBCASE("unknown tag") { WriteAllText(path, "cookie nounn\n"); }
  SUBCASE("missing tag") { WriteAllText(path, "cookie\n"); }
  SUBCASE("extra field") { WriteAllText(path, "cookie noun extra\n"); }
  try {
    PosTagger::FromFile(path);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("pos lexicon skips comments and blank lines") {
  ScopedTempDir tmp("text");
  const auto path = tmp.path() / "lex.txt";
  WriteAllText(path, "# comment only\n\njar noun  # trailing comment\n");
  const PosTagger tagger = PosTagger::FromFile(path);
  CHECK(tagger.Tag("jar") == "noun");
}

TEST_CASE("minmax scaler maps training values and clamps held-out ones") {
  Eigen::MatrixXd train(3, 1);
  train << 2, 4, 6;
  MinMaxScaler scaler;
  scaler.Fit(train);

  Eigen::VectorXd v(1);
  v << 4;
  CHECK(scaler.Apply(v)(0) == doctest::Approx(0.5));
  v << 2;
  CHECK(scaler.Apply(v)(0) == 0.0);
  v << 6;
  CHECK(scaler.Apply(v)(0) == 1.0);
  v << 8;
  CHECK(scaler.Apply(v)(0) == 1.0);  // clamped
  v << -1;
  CHECK(scaler.Apply(v)(0) == 0.0);  // clamped

  v << 3.7;
  const Eigen::VectorXd back = scaler.Invert(scaler.Apply(v));
  CHECK(back(0) == doctest::Approx(3.7).epsilon(1e-12));
}

TEST_CASE("constant training column always maps to one half") {
  Eigen::MatrixXd train(3, 2);
  train << 3, 1, 3, 2, 3, 3;
  MinMaxScaler scaler;
  scaler.Fit(train);
  Eigen::VectorXd v(2);
  v << 99, 2;
  const Eigen::VectorXd out = scaler.Apply(v);
  CHECK(out(0) == 0.5);
  CHECK(out(1) == doctest::Approx(0.5));
  CHECK(scaler.Invert(out)(0) == 3.0);  // constant column returns its value
}

TEST_CASE("minmax scaler guards misuse") {
  MinMaxScaler scaler;
  Eigen::VectorXd v(1);
  v << 1;
  CHECK_THROWS_AS(scaler.Apply(v), Error);
  Eigen::MatrixXd train(2, 2);
  train << 0, 1, 1, 2;
  scaler.Fit(train);
  CHECK_THROWS_AS(scaler.Apply(v), Error);  // width mismatch
}

TEST_CASE("minmax scaler maps its own training rows into the unit box") {
  Rng rng(31);
  Eigen::MatrixXd train(10, 4);
  for (Eigen::Index i = 0; i < train.rows(); ++i) {
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
      train(i, j) = rng.Gaussian() * (1.0 + static_cast<double>(j));
    }
  }
  MinMaxScaler scaler;
  scaler.Fit(train);
  const Eigen::MatrixXd scaled = scaler.Apply(train);
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    CHECK(scaled.col(j).minCoeff() == 0.0);
    CHECK(scaled.col(j).maxCoeff() == 1.0);
  }
  // Inverse recovers the originals for these non-constant columns.
  for (Eigen::Index i = 0; i < train.rows(); ++i) {
    const Eigen::VectorXd back =
        scaler.Invert(Eigen::VectorXd(scaled.row(i)));
    CHECK((back - train.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("intervention samples over a synthetic corpus match transcripts") {
  ScopedTempDir tmp("text");
  corpus::SynthConfig cfg;
  cfg.n_subjects = 8;
  cfg.seed = 5;
  const corpus::Manifest manifest =
      corpus::GenerateSyntheticCorpus(cfg, tmp.path());
  const auto emb_path = tmp.path() / "emb.txt";
  corpus::WriteSyntheticEmbeddingTable(emb_path, cfg.seed);
  const EmbeddingTable table = LoadEmbeddingTable(emb_path);
  const PosTagger tagger;

  std::size_t expected = 0;
  std::size_t padded_count = 0;
  for (const auto& s : manifest.subjects) {
    const auto doc = chat::ParseChatFile(manifest.TranscriptFile(s));
    const chat::Transcript t = chat::ExtractInterventions(doc);
    expected += t.interventions.size();
    for (const auto& iv : t.interventions) {
      const PaddedIntervention p = PadIntervention(iv, table);
      CHECK(!p.empty);
      CHECK(p.TokenCount() >= 1);
      CHECK(p.TokenCount() <= 20);
      ++padded_count;
    }
    // Every subject yields a full 13-feature vector without NaN.
    const LinguisticVector lv = ComputeLinguistic(t, tagger);
    const Eigen::VectorXd v = lv.AsVector();
    CHECK(v.allFinite());
    const double freq_sum =
        lv.freq_verbs + lv.freq_nouns + lv.freq_adjectives + lv.freq_pronouns;
    CHECK(freq_sum <= 1.0 + 1e-12);
    CHECK(lv.freq_verbs >= 0.0);
    CHECK(lv.freq_nouns >= 0.0);
  }
  CHECK(padded_count == expected);
  CHECK(expected >= manifest.subjects.size());  // every subject speaks
}
