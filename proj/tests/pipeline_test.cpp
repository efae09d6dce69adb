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

#include "cadence/pipeline.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "cadence/common.hpp"
#include "cadence/corpus.hpp"
#include "cadence/embeddings.hpp"
#include "cadence/evaluation.hpp"
#include "cadence/rng.hpp"
#include "test_util.hpp"

using namespace cadence;
using cadence::testing::ReadAllBytes;
using cadence::testing::ScopedTempDir;

namespace {

// One tiny corpus shared across cases; generation and feature extraction
// dominate this suite's runtime.
struct SharedCorpus {
  ScopedTempDir dir{"pipeline"};
  corpus::Manifest manifest;
  std::filesystem::path table_path;

  SharedCorpus() {
    corpus::SynthConfig sc;
    sc.n_subjects = 8;
    sc.seed = 11;
    manifest = corpus::GenerateSyntheticCorpus(sc, dir.path() / "corpus");
    table_path = dir.path() / "corpus" / "embeddings.tsv";
    corpus::WriteSyntheticEmbeddingTable(table_path, sc.seed);
  }
};

SharedCorpus& Fixture() {
  static SharedCorpus fixture;
  return fixture;
}

// Model sizes scaled to an 8-subject corpus so the suite stays fast.
pipeline::PipelineConfig SmallConfig() {
  pipeline::PipelineConfig pc;
  pc.seed = 5;
  pc.embedding_table = Fixture().table_path;
  pc.ubm_components = 8;
  pc.ubm_em_iters = 3;
  pc.ubm_kmeans_iters = 3;
  pc.ubm_max_frames = 4000;
  pc.tv_dim = 4;
  pc.tv_em_iters = 3;
  pc.mfcc_filters = 20;
  pc.mfcc_ceps = 13;
  pc.lda_dim = 16;
  pc.cfs_max_features = 10;
  pc.lstm.epochs = 3;
  return pc;
}

const evaluation::ScoreRow* FindRow(const evaluation::ScoreTable& table,
                                    const std::string& subject,
                                    const std::string& system) {
  for (const auto& row : table.rows) {
    if (row.subject_id == subject && row.system_id == system) return &row;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("system registry maps rules and modalities") {
  CHECK(pipeline::AllSystemIds().size() == 6);
  CHECK(pipeline::IsKnownSystem("ivector"));
  CHECK_FALSE(pipeline::IsKnownSystem("oracle"));

  CHECK(pipeline::RuleForSystem("rnn") == evaluation::DecisionRule::kRawAtHalf);
  CHECK(pipeline::RuleForSystem("linguistic") ==
        evaluation::DecisionRule::kRawAtHalf);
  CHECK(pipeline::RuleForSystem("ivector") ==
        evaluation::DecisionRule::kZnormedAtZero);
  CHECK(pipeline::RuleForSystem("fluency") ==
        evaluation::DecisionRule::kZnormedAtZero);

  CHECK(pipeline::ModalityForSystem("functionals") ==
        evaluation::Modality::kSpeech);
  CHECK(pipeline::ModalityForSystem("rnn") == evaluation::Modality::kText);
}

TEST_CASE("config validation rejects bad requests") {
  pipeline::PipelineConfig pc = SmallConfig();
  pc.systems = {"fluency", "mystery"};
  CHECK_THROWS_WITH_AS(pipeline::PrepareCorpus(Fixture().manifest, pc),
                       doctest::Contains("mystery"), Error);

  pc = SmallConfig();
  pc.systems = {"fluency", "fluency"};
  CHECK_THROWS_AS(pipeline::PrepareCorpus(Fixture().manifest, pc), Error);

  pc = SmallConfig();
  pc.systems = {"rnn"};
  pc.embedding_table.clear();
  CHECK_THROWS_WITH_AS(pipeline::PrepareCorpus(Fixture().manifest, pc),
                       doctest::Contains("embedding"), Error);

  pc = SmallConfig();
  pc.jobs = 0;
  CHECK_THROWS_AS(pipeline::PrepareCorpus(Fixture().manifest, pc), Error);
}

TEST_CASE("feature preparation fills only what enabled systems need") {
  pipeline::PipelineConfig pc = SmallConfig();
  pc.systems = {"fluency"};
  const pipeline::CorpusFeatures feats =
      pipeline::PrepareCorpus(Fixture().manifest, pc);

  REQUIRE(feats.subjects.size() == 8);
  CHECK(feats.subject_ids.size() == 8);
  CHECK(feats.labels.size() == 8);
  CHECK(feats.ubm.Components() == 0);
  CHECK(feats.tdnn.layers.empty());
  CHECK(feats.table.Size() == 0);
  for (const auto& s : feats.subjects) {
    CHECK(s.fluency.size() == 11);
    CHECK(s.window_stats.empty());
    CHECK(s.window_embeddings.empty());
    CHECK(s.functional_windows.rows() == 0);
    CHECK(s.linguistic.size() == 0);
    CHECK(s.interventions.empty());
  }
}

TEST_CASE("feature preparation shapes for every system") {
  pipeline::PipelineConfig pc = SmallConfig();
  const pipeline::CorpusFeatures feats =
      pipeline::PrepareCorpus(Fixture().manifest, pc);

  REQUIRE(feats.subjects.size() == 8);
  CHECK(feats.ubm.Components() == 8);
  CHECK(feats.ubm.Dim() == 45);
  CHECK(feats.tdnn.InputDim() == 13);
  CHECK(feats.table.Size() > 0);

  int positives = 0;
  for (const auto& s : feats.subjects) {
    positives += s.label;
    REQUIRE(!s.window_stats.empty());
    REQUIRE(!s.window_embeddings.empty());
    CHECK(s.window_stats[0].n.size() == 8);
    CHECK(s.window_stats[0].f.cols() == 45);
    CHECK(s.window_embeddings[0].size() == 512);
    CHECK(s.functional_windows.rows() >= 1);
    CHECK(s.functional_windows.cols() == 351);
    CHECK(s.fluency.size() == 11);
    CHECK(s.linguistic.size() == 13);
    CHECK(!s.interventions.empty());

    // Sufficient statistics count frames: roughly 100 per second of audio,
    // grouped into 3 s windows with a 2 s hop.
    double frames = 0.0;
    for (const auto& st : s.window_stats) frames += st.n.sum();
    CHECK(frames > 100.0);
  }
  // The generator alternates labels, so an 8-subject corpus is balanced.
  CHECK(positives == 4);
}

TEST_CASE("per-fold runners standardize and score every subject") {
  pipeline::PipelineConfig pc = SmallConfig();
  pc.systems = {"fluency", "linguistic"};
  const pipeline::ExperimentResult result =
      pipeline::RunLoso(Fixture().manifest, pc);

  // 8 subjects x (2 systems + 2 fusion rows).
  CHECK(result.scores.rows.size() == 8 * 4);
  const auto& subjects = Fixture().manifest.subjects;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    for (const std::string sys :
         {"fluency", "linguistic", "fusion_1", "fusion_2"}) {
      const evaluation::ScoreRow* row =
          FindRow(result.scores, subjects[i].id, sys);
      REQUIRE(row != nullptr);
      CHECK(std::isfinite(row->znormed));
      CHECK(row->fold == static_cast<int>(i));
    }
  }

  // Probabilities stay in [0, 1]; fused rows carry the fused value in both
  // score fields.
  for (const auto& row : result.scores.rows) {
    if (row.system_id == "linguistic") {
      CHECK(row.raw >= 0.0);
      CHECK(row.raw <= 1.0);
    }
    if (row.modality == evaluation::Modality::kFused) {
      CHECK(row.raw == row.znormed);
    }
  }

  REQUIRE(result.reports.size() == 4);
  CHECK(result.reports[0].first == "fluency");
  CHECK(result.reports[1].first == "linguistic");
  CHECK(result.reports[2].first == "fusion_1");
  CHECK(result.reports[3].first == "fusion_2");
  for (const auto& [id, report] : result.reports) {
    CHECK(report.counts.Total() == 8);
    CHECK(report.accuracy >= 0.0);
    CHECK(report.accuracy <= 1.0);
    REQUIRE(!report.roc.points.empty());
    CHECK(report.roc.auc >= 0.0);
    CHECK(report.roc.auc <= 1.0);
  }

  // The synthetic class contrast is strong enough for these two systems.
  CHECK(result.reports[0].second.accuracy >= 0.75);
  CHECK(result.reports[1].second.accuracy >= 0.75);
}

TEST_CASE("single-modality runs skip the modality fusion") {
  pipeline::PipelineConfig pc = SmallConfig();
  pc.systems = {"fluency"};
  const pipeline::ExperimentResult result =
      pipeline::RunLoso(Fixture().manifest, pc);

  CHECK(result.scores.rows.size() == 8);  // one system, no fusion
  REQUIRE(result.reports.size() == 1);
  CHECK(result.reports[0].first == "fluency");

  pc.systems = {"fluency", "functionals"};
  const pipeline::ExperimentResult speech_only =
      pipeline::RunLoso(Fixture().manifest, pc);
  std::vector<std::string> ids;
  for (const auto& [id, report] : speech_only.reports) ids.push_back(id);
  CHECK(ids == std::vector<std::string>{"fluency", "functionals", "fusion_1"});
}

TEST_CASE("all six systems run end to end on a tiny corpus") {
  pipeline::PipelineConfig pc = SmallConfig();
  const pipeline::ExperimentResult result =
      pipeline::RunLoso(Fixture().manifest, pc);

  // 6 systems + 2 fusions, 8 subjects each.
  CHECK(result.scores.rows.size() == 8 * 8);
  REQUIRE(result.reports.size() == 8);
  for (const auto& [id, report] : result.reports) {
    CAPTURE(id);
    CHECK(report.counts.Total() == 8);
    REQUIRE(!report.roc.points.empty());
    CHECK(std::isfinite(report.roc.auc));
  }

  // rnn scores are probabilities; window systems produce mean margins.
  for (const auto& row : result.scores.rows) {
    if (row.system_id == "rnn") {
      CHECK(row.raw >= 0.0);
      CHECK(row.raw <= 1.0);
    }
    if (row.system_id == "ivector" || row.system_id == "xvector" ||
        row.system_id == "functionals") {
      CHECK(std::isfinite(row.raw));
    }
  }
}

TEST_CASE("runs are deterministic and job-count independent") {
  pipeline::PipelineConfig pc = SmallConfig();
  pc.systems = {"fluency", "linguistic"};

  const pipeline::ExperimentResult a = pipeline::RunLoso(Fixture().manifest, pc);
  pc.jobs = 3;
  const pipeline::ExperimentResult b = pipeline::RunLoso(Fixture().manifest, pc);

  REQUIRE(a.scores.rows.size() == b.scores.rows.size());
  for (std::size_t i = 0; i < a.scores.rows.size(); ++i) {
    CHECK(a.scores.rows[i].subject_id == b.scores.rows[i].subject_id);
    CHECK(a.scores.rows[i].system_id == b.scores.rows[i].system_id);
    CHECK(a.scores.rows[i].raw == b.scores.rows[i].raw);
    CHECK(a.scores.rows[i].znormed == b.scores.rows[i].znormed);
  }

  ScopedTempDir tmp{"pipeline_art"};
  pipeline::WriteArtifacts(a, tmp.path() / "run1");
  pipeline::WriteArtifacts(b, tmp.path() / "run2");
  for (const std::string name : {"scores.csv", "metrics.json", "roc_fluency.csv",
                                 "roc_fusion_2.csv", "roc_all.svg"}) {
    CAPTURE(name);
    CHECK(ReadAllBytes(tmp.path() / "run1" / name) ==
          ReadAllBytes(tmp.path() / "run2" / name));
  }
}

TEST_CASE("artifact writer emits every expected file") {
  pipeline::PipelineConfig pc = SmallConfig();
  pc.systems = {"fluency", "linguistic"};
  const pipeline::ExperimentResult result =
      pipeline::RunLoso(Fixture().manifest, pc);

  ScopedTempDir tmp{"pipeline_art"};
  const std::filesystem::path out = tmp.path() / "artifacts";
  pipeline::WriteArtifacts(result, out);

  CHECK(std::filesystem::exists(out / "scores.csv"));
  CHECK(std::filesystem::exists(out / "metrics.json"));
  CHECK(std::filesystem::exists(out / "roc_fluency.csv"));
  CHECK(std::filesystem::exists(out / "roc_linguistic.csv"));
  CHECK(std::filesystem::exists(out / "roc_fusion_1.csv"));
  CHECK(std::filesystem::exists(out / "roc_fusion_2.csv"));
  CHECK(std::filesystem::exists(out / "roc_all.svg"));

  const evaluation::ScoreTable readback =
      evaluation::ReadScoresCsv(out / "scores.csv");
  CHECK(readback.rows.size() == result.scores.rows.size());
}

TEST_CASE("cached extractor matches one-shot extraction") {
  Rng rng(21);
  Eigen::MatrixXd frames(60, 3);
  for (Eigen::Index i = 0; i < frames.rows(); ++i) {
    for (Eigen::Index j = 0; j < frames.cols(); ++j) {
      frames(i, j) = rng.Gaussian();
    }
  }
  embeddings::UbmConfig uc;
  uc.n_components = 2;
  uc.em_iters = 2;
  uc.seed = 3;
  const embeddings::Ubm ubm = embeddings::TrainUbm(frames, uc);

  std::vector<embeddings::BwStats> stats;
  for (int u = 0; u < 4; ++u) {
    stats.push_back(
        embeddings::AccumulateBwStats(ubm, frames.middleRows(u * 15, 15)));
  }
  embeddings::TvConfig tc;
  tc.dim = 2;
  tc.em_iters = 2;
  tc.seed = 9;
  const embeddings::TvModel tv = embeddings::TrainTv(stats, ubm, tc);

  const embeddings::IvectorExtractor extractor(tv, ubm);
  for (const auto& st : stats) {
    const embeddings::Embedding a = embeddings::ExtractIvector(tv, ubm, st);
    const embeddings::Embedding b = extractor.Extract(st);
    REQUIRE(a.vector.size() == b.vector.size());
    CHECK((a.vector - b.vector).norm() < 1e-12);
    CHECK(a.degenerate == b.degenerate);
  }
}
