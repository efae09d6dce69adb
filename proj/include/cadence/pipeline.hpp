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

#ifndef CADENCE_PIPELINE_HPP_
#define CADENCE_PIPELINE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cadence/classifiers.hpp"
#include "cadence/corpus.hpp"
#include "cadence/dsp.hpp"
#include "cadence/embeddings.hpp"
#include "cadence/evaluation.hpp"
#include "cadence/text.hpp"

namespace cadence::pipeline {

// ---------------------------------------------------------------------------
// System registry. Six scoring pipelines, each trained and scored per fold.
// ---------------------------------------------------------------------------

// Canonical order; also the report order.
const std::vector<std::string>& AllSystemIds();
bool IsKnownSystem(const std::string& id);

// rnn and linguistic score probabilities (0.5 threshold on the raw value);
// the rest are margin-style scores thresholded at standardized zero.
evaluation::DecisionRule RuleForSystem(const std::string& system_id);
evaluation::Modality ModalityForSystem(const std::string& system_id);

// ---------------------------------------------------------------------------
// Configuration.
// ---------------------------------------------------------------------------

struct PipelineConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::vector<std::string> systems;  // empty resolves to AllSystemIds()

  // Word-embedding table; required when the rnn system is enabled.
  std::filesystem::path embedding_table;

  // Shared acoustic frontend and the embedding/functional window geometry.
  dsp::FrameConfig frame;
  double window_len = 3.0;  // seconds
  double window_hop = 2.0;

  // Model sizes sized for corpora of tens of subjects; the underlying
  // modules default to full-corpus sizes instead.
  int ubm_components = 64;
  int ubm_em_iters = 8;
  int ubm_kmeans_iters = 5;
  int ubm_max_frames = 20000;  // training frames are subsampled past this
  int tv_dim = 32;
  int tv_em_iters = 5;
  int mfcc_filters = 30;  // frame-embedding network frontend
  int mfcc_ceps = 30;
  int lda_dim = 150;           // clamped to the embedding width
  int cfs_max_features = 57;
  double svm_c = 1.0;
  classifiers::LstmConfig lstm;  // its seed field is overridden per fold
};

// ---------------------------------------------------------------------------
// Per-subject feature cache. Fold-independent work (frontends, background
// model statistics, frame-embedding forward passes) happens exactly once.
// ---------------------------------------------------------------------------

struct SubjectFeatures {
  std::string id;
  int label = 0;  // 1 = positive class

  // One entry per usable analysis window, in time order.
  std::vector<embeddings::BwStats> window_stats;  // ivector
  std::vector<Eigen::VectorXd> window_embeddings; // xvector, pre-reduction
  Eigen::MatrixXd functional_windows;             // functionals, W x 351

  Eigen::VectorXd fluency;     // 11 components
  Eigen::VectorXd linguistic;  // 13 components
  std::vector<text::PaddedIntervention> interventions;  // rnn
};

struct CorpusFeatures {
  std::vector<SubjectFeatures> subjects;
  std::vector<std::string> subject_ids;  // same order as subjects
  std::map<std::string, int> labels;     // subject id -> 0/1

  // Shared fold-independent models; empty when no enabled system needs them.
  embeddings::Ubm ubm;
  embeddings::TdnnModel tdnn;
  text::EmbeddingTable table;
};

// Loads audio and transcripts, runs the frontends, and fits the shared
// background models. Only stages consumed by an enabled system run.
CorpusFeatures PrepareCorpus(const corpus::Manifest& manifest,
                             const PipelineConfig& config);

// One analysis window mapped onto the rows of a frame-feature matrix whose
// frame i starts at sample i * round(hop_seconds * sample_rate).
struct WindowSlice {
  embeddings::WindowSpan span;
  int row_begin = 0;
  int row_end = 0;  // half-open
};

// Windows of `duration` seconds sliced against an n_rows frame matrix.
// Windows with fewer than min_rows frames are dropped.
std::vector<WindowSlice> WindowSlices(double duration, int n_rows,
                                      int sample_rate, double hop_seconds,
                                      double window_len, double window_hop,
                                      int min_rows);

// One fold-trainable scoring pipeline per enabled system. The returned
// closures hold references to `corpus`, which must outlive them.
std::vector<evaluation::LosoSystem> BuildSystems(const CorpusFeatures& corpus,
                                                 const PipelineConfig& config);

// The run's frame-embedding network: derived from the run seed alone, so
// separate commands given the same seed use the same network.
embeddings::TdnnModel DefaultTdnn(int input_dim, std::uint64_t run_seed);

// ---------------------------------------------------------------------------
// End-to-end evaluation.
// ---------------------------------------------------------------------------

struct ExperimentResult {
  evaluation::ScoreTable scores;  // per-system rows plus fusion rows
  // Report order: enabled systems, then fusion_1, then fusion_2.
  std::vector<std::pair<std::string, evaluation::MetricReport>> reports;
};

// Full leave-one-subject-out run: feature preparation, per-fold training,
// score fusion (fusion_1 over systems when two or more are enabled,
// fusion_2 over modalities when both are present), and metric reports.
ExperimentResult RunLoso(const corpus::Manifest& manifest,
                         const PipelineConfig& config);

// Writes scores.csv, metrics.json, one roc_<system>.csv per report with a
// curve, and roc_all.svg into out_dir (created if needed).
void WriteArtifacts(const ExperimentResult& result,
                    const std::filesystem::path& out_dir);

}  // namespace cadence::pipeline

#endif  // CADENCE_PIPELINE_HPP_
