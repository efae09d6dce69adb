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

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "cadence/chat.hpp"
#include "cadence/common.hpp"
#include "cadence/features.hpp"
#include "cadence/rng.hpp"
#include "cadence/wav.hpp"

namespace cadence::pipeline {

namespace {

// Fold-seed stream tags; combined with the fold index so every fold of
// every system draws from an independent stream of the run seed.
constexpr std::uint64_t kUbmStream = 0x75626d00;
constexpr std::uint64_t kTdnnStream = 0x78766563;
constexpr std::uint64_t kTvStream = 0x69760000;
constexpr std::uint64_t kLstmStream = 0x726e0000;

constexpr const char* kIvector = "ivector";
constexpr const char* kXvector = "xvector";
constexpr const char* kFunctionals = "functionals";
constexpr const char* kFluency = "fluency";
constexpr const char* kRnn = "rnn";
constexpr const char* kLinguistic = "linguistic";

bool Enabled(const std::vector<std::string>& systems, const char* id) {
  return std::find(systems.begin(), systems.end(), id) != systems.end();
}

std::vector<std::string> ResolveSystems(const PipelineConfig& config) {
  std::vector<std::string> systems =
      config.systems.empty() ? AllSystemIds() : config.systems;
  std::unordered_set<std::string> seen;
  for (const auto& id : systems) {
    CADENCE_CHECK_CONFIG(IsKnownSystem(id), "unknown system '" + id + "'");
    CADENCE_CHECK_CONFIG(seen.insert(id).second,
                         "system '" + id + "' listed twice");
  }
  return systems;
}

void CheckConfig(const PipelineConfig& config) {
  CADENCE_CHECK_CONFIG(config.jobs >= 1, "jobs must be >= 1");
  CADENCE_CHECK_CONFIG(config.window_len > 0.0 && config.window_hop > 0.0,
                       "window length and hop must be positive");
  CADENCE_CHECK_CONFIG(config.ubm_components >= 1 && config.ubm_em_iters >= 1,
                       "background model size and iterations must be >= 1");
  CADENCE_CHECK_CONFIG(config.ubm_max_frames >= config.ubm_components,
                       "frame budget smaller than the component count");
  CADENCE_CHECK_CONFIG(config.tv_dim >= 1 && config.tv_em_iters >= 1,
                       "subspace size and iterations must be >= 1");
  CADENCE_CHECK_CONFIG(config.mfcc_filters >= config.mfcc_ceps &&
                           config.mfcc_ceps >= 1,
                       "cepstrum count must be in [1, n_filters]");
  CADENCE_CHECK_CONFIG(config.lda_dim >= 1, "reduction size must be >= 1");
  CADENCE_CHECK_CONFIG(config.cfs_max_features >= 1,
                       "selection budget must be >= 1");
  CADENCE_CHECK_CONFIG(config.svm_c > 0.0, "svm c must be positive");
}

int SignedLabel(int label01) { return label01 == 1 ? 1 : -1; }

// Mean window margin, the subject-level score for the window systems. The
// margin keeps the window votes' sign structure but stays continuous, so
// fold standardization never sees a constant training-score list.
double MeanWindowMargin(const classifiers::SvmModel& svm,
                        const std::vector<Eigen::VectorXd>& windows) {
  std::vector<double> margins;
  margins.reserve(windows.size());
  for (const auto& w : windows) {
    margins.push_back(svm.Margin(w));
  }
  return classifiers::AggregateWindowScores(margins);
}

Eigen::MatrixXd StackRows(const std::vector<Eigen::VectorXd>& rows) {
  CADENCE_CHECK_DATA(!rows.empty(), "no training windows in this fold");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CADENCE_CHECK_DATA(rows[i].size() == m.cols(),
                       "inconsistent window vector sizes");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Registry.
// ---------------------------------------------------------------------------

const std::vector<std::string>& AllSystemIds() {
  static const std::vector<std::string> ids = {
      kIvector, kXvector, kFunctionals, kFluency, kRnn, kLinguistic};
  return ids;
}

bool IsKnownSystem(const std::string& id) {
  const auto& ids = AllSystemIds();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

evaluation::DecisionRule RuleForSystem(const std::string& system_id) {
  if (system_id == kRnn || system_id == kLinguistic) {
    return evaluation::DecisionRule::kRawAtHalf;
  }
  return evaluation::DecisionRule::kZnormedAtZero;
}

evaluation::Modality ModalityForSystem(const std::string& system_id) {
  if (system_id == kRnn || system_id == kLinguistic) {
    return evaluation::Modality::kText;
  }
  return evaluation::Modality::kSpeech;
}

// ---------------------------------------------------------------------------
// Feature preparation.
// ---------------------------------------------------------------------------

std::vector<WindowSlice> WindowSlices(double duration, int n_rows,
                                      int sample_rate, double hop_seconds,
                                      double window_len, double window_hop,
                                      int min_rows) {
  CADENCE_CHECK_DATA(n_rows >= 0 && sample_rate > 0 && hop_seconds > 0.0,
                     "invalid frame geometry");
  const auto hop_samples =
      static_cast<double>(std::lround(hop_seconds * sample_rate));
  std::vector<WindowSlice> out;
  for (const embeddings::WindowSpan& span :
       embeddings::SlidingWindows(duration, window_len, window_hop)) {
    WindowSlice slice;
    slice.span = span;
    int lo = 0;
    while (lo < n_rows && static_cast<double>(lo) * hop_samples / sample_rate <
                              span.start - 1e-9) {
      ++lo;
    }
    int hi = lo;
    while (hi < n_rows && static_cast<double>(hi) * hop_samples / sample_rate <
                              span.end - 1e-9) {
      ++hi;
    }
    if (span.truncated) hi = n_rows;  // short recordings take all frames
    slice.row_begin = lo;
    slice.row_end = hi;
    if (hi - lo >= min_rows) out.push_back(slice);
  }
  return out;
}

CorpusFeatures PrepareCorpus(const corpus::Manifest& manifest,
                             const PipelineConfig& config) {
  CheckConfig(config);
  const std::vector<std::string> systems = ResolveSystems(config);
  const bool want_ivector = Enabled(systems, kIvector);
  const bool want_xvector = Enabled(systems, kXvector);
  const bool want_functionals = Enabled(systems, kFunctionals);
  const bool want_fluency = Enabled(systems, kFluency);
  const bool want_rnn = Enabled(systems, kRnn);
  const bool want_linguistic = Enabled(systems, kLinguistic);
  const bool want_audio =
      want_ivector || want_xvector || want_functionals || want_fluency;
  const bool want_text = want_rnn || want_linguistic;

  const auto n = manifest.subjects.size();
  CADENCE_CHECK_DATA(n >= 3, "need at least three subjects");

  CorpusFeatures corpus;
  corpus.subjects.resize(n);
  corpus.subject_ids.reserve(n);
  for (const auto& s : manifest.subjects) {
    corpus.subject_ids.push_back(s.id);
    corpus.labels[s.id] = s.label == corpus::Label::kAd ? 1 : 0;
  }

  if (want_rnn) {
    CADENCE_CHECK_CONFIG(!config.embedding_table.empty(),
                         "the rnn system needs a word-embedding table");
    corpus.table = text::LoadEmbeddingTable(config.embedding_table);
  }
  if (want_xvector) {
    corpus.tdnn = DefaultTdnn(config.mfcc_ceps, config.seed);
  }
  const text::PosTagger tagger;

  // Pass 1, parallel over subjects: frontends and fold-independent forward
  // passes. Normalized spectral features are kept only until the background
  // model pass below.
  std::vector<Eigen::MatrixXd> plp(want_ivector ? n : 0);
  std::vector<std::vector<std::pair<int, int>>> plp_rows(want_ivector ? n : 0);
  ParallelFor(n, config.jobs, [&](std::size_t i) {
    const corpus::Subject& subj = manifest.subjects[i];
    SubjectFeatures& out = corpus.subjects[i];
    out.id = subj.id;
    out.label = subj.label == corpus::Label::kAd ? 1 : 0;

    try {
      if (want_audio) {
        const Recording rec = LoadWav(manifest.AudioFile(subj));

        if (want_functionals || want_fluency) {
          const dsp::FrameSeries series = dsp::Analyze(rec, config.frame);
          if (want_functionals) {
            features::FunctionalConfig fc;
            fc.window_len = config.window_len;
            fc.stride = config.window_hop;
            const features::FunctionalSet set =
                features::ComputeFunctionals(series, fc);
            CADENCE_CHECK_DATA(!set.vectors.empty(), "no functional windows");
            out.functional_windows.resize(
                static_cast<Eigen::Index>(set.vectors.size()),
                set.vectors[0].size());
            for (std::size_t w = 0; w < set.vectors.size(); ++w) {
              out.functional_windows.row(static_cast<Eigen::Index>(w)) =
                  set.vectors[w].transpose();
            }
          }
          if (want_fluency) {
            const dsp::VadSegmentation vad = dsp::Vad(rec, config.frame);
            out.fluency = features::ComputeFluency(rec, series, vad).AsVector();
          }
        }

        if (want_ivector) {
          plp[i] = embeddings::MeanVarianceNormalize(
              dsp::PlpPitchFeatures(rec, config.frame));
          for (const WindowSlice& slice : WindowSlices(
                   rec.duration(), static_cast<int>(plp[i].rows()),
                   rec.sample_rate, config.frame.hop, config.window_len,
                   config.window_hop, /*min_rows=*/2)) {
            plp_rows[i].push_back({slice.row_begin, slice.row_end});
          }
          CADENCE_CHECK_DATA(!plp_rows[i].empty(),
                             "recording too short for one analysis window");
        }

        if (want_xvector) {
          const Eigen::MatrixXd mfcc =
              embeddings::MeanVarianceNormalize(dsp::MfccMatrix(
                  rec, config.frame, config.mfcc_filters, config.mfcc_ceps));
          for (const WindowSlice& slice : WindowSlices(
                   rec.duration(), static_cast<int>(mfcc.rows()),
                   rec.sample_rate, config.frame.hop, config.window_len,
                   config.window_hop, corpus.tdnn.ReceptiveField())) {
            out.window_embeddings.push_back(embeddings::XvectorForward(
                corpus.tdnn,
                mfcc.middleRows(slice.row_begin,
                                slice.row_end - slice.row_begin)));
          }
          CADENCE_CHECK_DATA(!out.window_embeddings.empty(),
                             "recording too short for one analysis window");
        }
      }

      if (want_text) {
        const chat::Transcript transcript = chat::ExtractInterventions(
            chat::ParseChatFile(manifest.TranscriptFile(subj)));
        if (want_linguistic) {
          out.linguistic =
              text::ComputeLinguistic(transcript, tagger).AsVector();
        }
        if (want_rnn) {
          for (const auto& tokens : transcript.interventions) {
            out.interventions.push_back(
                text::PadIntervention(tokens, corpus.table));
          }
        }
      }
    } catch (const Error& e) {
      throw Error(e.kind(), e.code(),
                  "subject '" + subj.id + "': " + e.what());
    }
  });

  // Pass 2, serial: background model on frames pooled across subjects,
  // subsampled evenly past the frame budget.
  if (want_ivector) {
    Eigen::Index total = 0;
    for (const auto& m : plp) total += m.rows();
    Eigen::Index stride = (total + config.ubm_max_frames - 1) /
                          std::max(1, config.ubm_max_frames);
    stride = std::max<Eigen::Index>(stride, 1);
    const Eigen::Index kept = (total + stride - 1) / stride;
    Eigen::MatrixXd pool(kept, plp[0].cols());
    Eigen::Index row = 0, seen = 0;
    for (const auto& m : plp) {
      for (Eigen::Index r = 0; r < m.rows(); ++r, ++seen) {
        if (seen % stride == 0) pool.row(row++) = m.row(r);
      }
    }
    CADENCE_CHECK_DATA(row == kept, "frame subsampling accounting error");

    embeddings::UbmConfig uc;
    uc.n_components = config.ubm_components;
    uc.em_iters = config.ubm_em_iters;
    uc.kmeans_iters = config.ubm_kmeans_iters;
    uc.seed = Rng::Mix(config.seed, kUbmStream);
    corpus.ubm = embeddings::TrainUbm(pool, uc);

    // Pass 3, parallel: per-window sufficient statistics under the shared
    // background model.
    ParallelFor(n, config.jobs, [&](std::size_t i) {
      for (const auto& [lo, hi] : plp_rows[i]) {
        corpus.subjects[i].window_stats.push_back(embeddings::AccumulateBwStats(
            corpus.ubm, plp[i].middleRows(lo, hi - lo)));
      }
    });
  }

  return corpus;
}

// ---------------------------------------------------------------------------
// Per-fold system runners.
// ---------------------------------------------------------------------------

namespace {

using evaluation::FoldScores;
using evaluation::LosoSystem;

LosoSystem MakeIvectorSystem(const CorpusFeatures& corpus,
                             const PipelineConfig& config) {
  LosoSystem sys;
  sys.id = kIvector;
  sys.modality = evaluation::Modality::kSpeech;
  sys.run_fold = [&corpus, config](const std::vector<int>& train,
                                   int test) -> FoldScores {
    std::vector<embeddings::BwStats> stats;
    std::vector<int> window_labels;
    for (int idx : train) {
      const SubjectFeatures& s = corpus.subjects[idx];
      for (const auto& st : s.window_stats) {
        stats.push_back(st);
        window_labels.push_back(SignedLabel(s.label));
      }
    }

    embeddings::TvConfig tc;
    tc.dim = config.tv_dim;
    tc.em_iters = config.tv_em_iters;
    tc.seed = Rng::Mix(config.seed, kTvStream + static_cast<std::uint64_t>(test));
    const embeddings::TvModel tv =
        embeddings::TrainTv(stats, corpus.ubm, tc);
    const embeddings::IvectorExtractor extractor(tv, corpus.ubm);

    auto extract_subject = [&](int idx) {
      std::vector<Eigen::VectorXd> vecs;
      for (const auto& st : corpus.subjects[idx].window_stats) {
        vecs.push_back(extractor.Extract(st).vector);
      }
      return vecs;
    };

    std::vector<Eigen::VectorXd> train_rows;
    for (std::size_t i = 0; i < stats.size(); ++i) {
      train_rows.push_back(extractor.Extract(stats[i]).vector);
    }
    classifiers::SvmConfig sc;
    sc.kernel = classifiers::SvmKernel::kLinear;
    sc.c = config.svm_c;
    const classifiers::SvmModel svm =
        classifiers::TrainSvm(StackRows(train_rows), window_labels, sc);

    FoldScores out;
    for (int idx : train) {
      out.train_scores.push_back(MeanWindowMargin(svm, extract_subject(idx)));
    }
    out.test_score = MeanWindowMargin(svm, extract_subject(test));
    return out;
  };
  return sys;
}

LosoSystem MakeXvectorSystem(const CorpusFeatures& corpus,
                             const PipelineConfig& config) {
  LosoSystem sys;
  sys.id = kXvector;
  sys.modality = evaluation::Modality::kSpeech;
  sys.run_fold = [&corpus, config](const std::vector<int>& train,
                                   int test) -> FoldScores {
    std::vector<Eigen::VectorXd> raw;
    std::vector<int> window_labels01;
    std::vector<int> window_labels;
    for (int idx : train) {
      const SubjectFeatures& s = corpus.subjects[idx];
      for (const auto& v : s.window_embeddings) {
        raw.push_back(v);
        window_labels01.push_back(s.label);
        window_labels.push_back(SignedLabel(s.label));
      }
    }
    const Eigen::MatrixXd raw_matrix = StackRows(raw);
    const int out_dim =
        std::min<int>(config.lda_dim, static_cast<int>(raw_matrix.cols()));
    const embeddings::LdaBasis basis =
        embeddings::TrainLdaBasis(raw_matrix, window_labels01, out_dim);

    auto project_subject = [&](int idx) {
      std::vector<Eigen::VectorXd> vecs;
      for (const auto& v : corpus.subjects[idx].window_embeddings) {
        vecs.push_back(embeddings::ProjectAndNorm(basis, v).vector);
      }
      return vecs;
    };

    std::vector<Eigen::VectorXd> train_rows;
    for (const auto& v : raw) {
      train_rows.push_back(embeddings::ProjectAndNorm(basis, v).vector);
    }
    classifiers::SvmConfig sc;
    sc.kernel = classifiers::SvmKernel::kLinear;
    sc.c = config.svm_c;
    const classifiers::SvmModel svm =
        classifiers::TrainSvm(StackRows(train_rows), window_labels, sc);

    FoldScores out;
    for (int idx : train) {
      out.train_scores.push_back(MeanWindowMargin(svm, project_subject(idx)));
    }
    out.test_score = MeanWindowMargin(svm, project_subject(test));
    return out;
  };
  return sys;
}

LosoSystem MakeFunctionalsSystem(const CorpusFeatures& corpus,
                                 const PipelineConfig& config) {
  LosoSystem sys;
  sys.id = kFunctionals;
  sys.modality = evaluation::Modality::kSpeech;
  sys.run_fold = [&corpus, config](const std::vector<int>& train,
                                   int test) -> FoldScores {
    Eigen::Index n_rows = 0;
    for (int idx : train) n_rows += corpus.subjects[idx].functional_windows.rows();
    CADENCE_CHECK_DATA(n_rows > 0, "no training windows in this fold");
    Eigen::MatrixXd x(n_rows, corpus.subjects[train[0]].functional_windows.cols());
    std::vector<int> window_labels;
    Eigen::Index row = 0;
    for (int idx : train) {
      const SubjectFeatures& s = corpus.subjects[idx];
      x.middleRows(row, s.functional_windows.rows()) = s.functional_windows;
      row += s.functional_windows.rows();
      for (Eigen::Index w = 0; w < s.functional_windows.rows(); ++w) {
        window_labels.push_back(SignedLabel(s.label));
      }
    }

    const features::CfsSelection sel =
        features::CfsSelect(x, window_labels, config.cfs_max_features);
    CADENCE_CHECK_DATA(!sel.selected_indices.empty(), "selection kept nothing");

    auto slice = [&sel](const Eigen::MatrixXd& m) {
      Eigen::MatrixXd out(m.rows(),
                          static_cast<Eigen::Index>(sel.selected_indices.size()));
      for (std::size_t j = 0; j < sel.selected_indices.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = m.col(sel.selected_indices[j]);
      }
      return out;
    };

    classifiers::SvmConfig sc;
    sc.kernel = classifiers::SvmKernel::kLinear;
    sc.c = config.svm_c;
    const classifiers::SvmModel svm =
        classifiers::TrainSvm(slice(x), window_labels, sc);

    auto score_subject = [&](int idx) {
      const Eigen::MatrixXd sliced =
          slice(corpus.subjects[idx].functional_windows);
      std::vector<Eigen::VectorXd> windows;
      for (Eigen::Index w = 0; w < sliced.rows(); ++w) {
        windows.push_back(sliced.row(w).transpose());
      }
      return MeanWindowMargin(svm, windows);
    };

    FoldScores out;
    for (int idx : train) out.train_scores.push_back(score_subject(idx));
    out.test_score = score_subject(test);
    return out;
  };
  return sys;
}

LosoSystem MakeFluencySystem(const CorpusFeatures& corpus) {
  LosoSystem sys;
  sys.id = kFluency;
  sys.modality = evaluation::Modality::kSpeech;
  sys.run_fold = [&corpus](const std::vector<int>& train,
                           int test) -> FoldScores {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(train.size()),
                      corpus.subjects[train[0]].fluency.size());
    std::vector<int> labels;
    for (std::size_t i = 0; i < train.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) =
          corpus.subjects[train[i]].fluency.transpose();
      labels.push_back(corpus.subjects[train[i]].label);
    }
    const classifiers::LdaScorer lda = classifiers::TrainLda(x, labels);

    FoldScores out;
    for (int idx : train) {
      out.train_scores.push_back(lda.Score(corpus.subjects[idx].fluency));
    }
    out.test_score = lda.Score(corpus.subjects[test].fluency);
    return out;
  };
  return sys;
}

LosoSystem MakeRnnSystem(const CorpusFeatures& corpus,
                         const PipelineConfig& config) {
  LosoSystem sys;
  sys.id = kRnn;
  sys.modality = evaluation::Modality::kText;
  sys.run_fold = [&corpus, config](const std::vector<int>& train,
                                   int test) -> FoldScores {
    std::vector<text::PaddedIntervention> interventions;
    std::vector<int> labels;
    for (int idx : train) {
      const SubjectFeatures& s = corpus.subjects[idx];
      for (const auto& iv : s.interventions) {
        interventions.push_back(iv);
        labels.push_back(s.label);
      }
    }
    classifiers::LstmConfig lc = config.lstm;
    lc.seed =
        Rng::Mix(config.seed, kLstmStream + static_cast<std::uint64_t>(test));
    const classifiers::LstmModel model =
        classifiers::TrainLstm(interventions, corpus.table, labels, lc);

    FoldScores out;
    for (int idx : train) {
      out.train_scores.push_back(classifiers::LstmPredictSubject(
          model, corpus.subjects[idx].interventions, corpus.table));
    }
    out.test_score = classifiers::LstmPredictSubject(
        model, corpus.subjects[test].interventions, corpus.table);
    return out;
  };
  return sys;
}

LosoSystem MakeLinguisticSystem(const CorpusFeatures& corpus,
                                const PipelineConfig& config) {
  LosoSystem sys;
  sys.id = kLinguistic;
  sys.modality = evaluation::Modality::kText;
  sys.run_fold = [&corpus, config](const std::vector<int>& train,
                                   int test) -> FoldScores {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(train.size()),
                      corpus.subjects[train[0]].linguistic.size());
    std::vector<int> labels;
    for (std::size_t i = 0; i < train.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) =
          corpus.subjects[train[i]].linguistic.transpose();
      labels.push_back(SignedLabel(corpus.subjects[train[i]].label));
    }
    text::MinMaxScaler scaler;
    scaler.Fit(x);

    classifiers::SvmConfig sc;
    sc.kernel = classifiers::SvmKernel::kRbf;
    sc.c = config.svm_c;
    sc.fit_probability = true;
    const classifiers::SvmModel svm =
        classifiers::TrainSvm(scaler.Apply(x), labels, sc);

    FoldScores out;
    for (int idx : train) {
      out.train_scores.push_back(
          svm.Probability(scaler.Apply(corpus.subjects[idx].linguistic)));
    }
    out.test_score =
        svm.Probability(scaler.Apply(corpus.subjects[test].linguistic));
    return out;
  };
  return sys;
}

}  // namespace

embeddings::TdnnModel DefaultTdnn(int input_dim, std::uint64_t run_seed) {
  return embeddings::MakeRandomTdnn(input_dim, Rng::Mix(run_seed, kTdnnStream));
}

std::vector<evaluation::LosoSystem> BuildSystems(const CorpusFeatures& corpus,
                                                 const PipelineConfig& config) {
  std::vector<evaluation::LosoSystem> systems;
  for (const auto& id : ResolveSystems(config)) {
    if (id == kIvector) {
      systems.push_back(MakeIvectorSystem(corpus, config));
    } else if (id == kXvector) {
      systems.push_back(MakeXvectorSystem(corpus, config));
    } else if (id == kFunctionals) {
      systems.push_back(MakeFunctionalsSystem(corpus, config));
    } else if (id == kFluency) {
      systems.push_back(MakeFluencySystem(corpus));
    } else if (id == kRnn) {
      systems.push_back(MakeRnnSystem(corpus, config));
    } else {
      systems.push_back(MakeLinguisticSystem(corpus, config));
    }
  }
  return systems;
}

// ---------------------------------------------------------------------------
// End-to-end run.
// ---------------------------------------------------------------------------

ExperimentResult RunLoso(const corpus::Manifest& manifest,
                         const PipelineConfig& config) {
  const CorpusFeatures corpus = PrepareCorpus(manifest, config);
  const std::vector<evaluation::LosoSystem> systems =
      BuildSystems(corpus, config);

  evaluation::LosoConfig lc;
  lc.jobs = config.jobs;
  evaluation::ScoreTable table =
      evaluation::LosoRun(corpus.subject_ids, systems, lc);

  bool has_speech = false, has_text = false;
  for (const auto& sys : systems) {
    (sys.modality == evaluation::Modality::kSpeech ? has_speech : has_text) =
        true;
  }
  std::vector<std::string> report_ids;
  for (const auto& sys : systems) report_ids.push_back(sys.id);
  std::vector<evaluation::ScoreRow> fused_rows;
  if (systems.size() >= 2) {
    const evaluation::ScoreTable fused = evaluation::FuseAll(table, "fusion_1");
    fused_rows.insert(fused_rows.end(), fused.rows.begin(), fused.rows.end());
    report_ids.push_back("fusion_1");
  }
  if (has_speech && has_text) {
    const evaluation::ScoreTable fused =
        evaluation::FuseByModality(table, "fusion_2");
    fused_rows.insert(fused_rows.end(), fused.rows.begin(), fused.rows.end());
    report_ids.push_back("fusion_2");
  }
  table.rows.insert(table.rows.end(), fused_rows.begin(), fused_rows.end());

  ExperimentResult result;
  result.scores = std::move(table);
  for (const auto& id : report_ids) {
    const evaluation::DecisionRule rule =
        IsKnownSystem(id) ? RuleForSystem(id)
                          : evaluation::DecisionRule::kZnormedAtZero;
    result.reports.emplace_back(
        id, evaluation::EvaluateSystem(result.scores, id, corpus.labels, rule));
  }
  return result;
}

void WriteArtifacts(const ExperimentResult& result,
                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  evaluation::WriteScoresCsv(out_dir / "scores.csv", result.scores);
  evaluation::WriteMetricsJson(out_dir / "metrics.json", result.reports);

  std::vector<std::pair<std::string, evaluation::RocCurve>> curves;
  for (const auto& [id, report] : result.reports) {
    if (report.roc.points.empty()) continue;
    evaluation::WriteRocCsv(out_dir / ("roc_" + id + ".csv"), report.roc);
    curves.emplace_back(id, report.roc);
  }
  if (!curves.empty()) {
    evaluation::WriteRocSvg(out_dir / "roc_all.svg", curves);
  }
}

}  // namespace cadence::pipeline
