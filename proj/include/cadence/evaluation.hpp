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

#ifndef CADENCE_EVALUATION_HPP_
#define CADENCE_EVALUATION_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cadence::evaluation {

// ---------------------------------------------------------------------------
// Score bookkeeping.
// ---------------------------------------------------------------------------

enum class Modality { kSpeech, kText, kFused };
std::string ModalityName(Modality m);

struct ScoreRow {
  std::string subject_id;
  std::string system_id;
  Modality modality = Modality::kSpeech;
  double raw = 0.0;
  double znormed = 0.0;
  int fold = -1;
};

// One row per (subject, system). Fused rows carry the fused value in both
// score columns.
struct ScoreTable {
  std::vector<ScoreRow> rows;

  std::vector<std::string> SystemIds() const;
  // Rows of one system, sorted by subject id.
  std::vector<const ScoreRow*> RowsForSystem(const std::string& system_id) const;
};

// ---------------------------------------------------------------------------
// Score normalization: standardize against training-fold scores only.
// ---------------------------------------------------------------------------

struct ZnormStats {
  double mean = 0.0;
  double std_dev = 0.0;  // population convention (divide by n)
};

// Errors when fewer than two scores are given or their deviation is zero;
// the message names `system_id`.
ZnormStats FitZnorm(const std::vector<double>& training_scores,
                    const std::string& system_id);
double ApplyZnorm(const ZnormStats& stats, double score);

// ---------------------------------------------------------------------------
// Score fusion over z-normed system scores.
// ---------------------------------------------------------------------------

// Per-subject mean over all systems.
ScoreTable FuseAll(const ScoreTable& table,
                   const std::string& fused_id = "fusion_1");
// Per-subject mean of the per-modality means; both modalities must be
// present. Weighs each modality equally regardless of its system count.
ScoreTable FuseByModality(const ScoreTable& table,
                          const std::string& fused_id = "fusion_2");

// ---------------------------------------------------------------------------
// Metrics.
// ---------------------------------------------------------------------------

struct ConfusionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;
  int Total() const { return tp + fp + fn + tn; }
};

// truth/decision hold 1 for the positive class, 0 otherwise.
ConfusionCounts CountDecisions(const std::vector<int>& truth,
                               const std::vector<int>& decision);

// NaN encodes an undefined ratio (zero denominator); exporters write null.
struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

struct MetricReport {
  ConfusionCounts counts;
  ClassMetrics positive;  // class of interest
  ClassMetrics negative;  // the class-swapped view
  double accuracy = 0.0;
  RocCurve roc;  // filled when scores are available
};

// Precision/recall/F1 per class plus accuracy; leaves the ROC empty.
MetricReport ComputeMetrics(const ConfusionCounts& counts);

// AUC by the rank statistic with half credit for ties; one ROC point per
// distinct threshold (decision rule: score >= threshold), with a leading
// (0,0) anchor. Errors unless both classes are present.
RocCurve ComputeRoc(const std::vector<double>& scores,
                    const std::vector<int>& labels);

// Trapezoidal area under a ROC point list; agrees with the rank AUC.
double TrapezoidArea(const std::vector<RocPoint>& points);

// How a system's scores become hard decisions.
enum class DecisionRule {
  kZnormedAtZero,  // margin-style scores on the standardized scale
  kRawAtHalf,      // probability outputs
};

// Counts, per-class metrics, and ROC (over z-normed scores) for one system.
// `labels` maps subject id to 1 (positive) or 0.
MetricReport EvaluateSystem(const ScoreTable& table,
                            const std::string& system_id,
                            const std::map<std::string, int>& labels,
                            DecisionRule rule);

// ---------------------------------------------------------------------------
// Leave-one-subject-out driver.
// ---------------------------------------------------------------------------

// Raw scores produced by one fold: one per training subject (aligned with
// the given training indices) plus the held-out subject's score.
struct FoldScores {
  std::vector<double> train_scores;
  double test_score = 0.0;
};

// One trainable scoring pipeline. `run_fold` must fit every trainable stage
// on the training indices only and score both partitions.
struct LosoSystem {
  std::string id;
  Modality modality = Modality::kSpeech;
  std::function<FoldScores(const std::vector<int>& train_indices,
                           int test_index)>
      run_fold;
};

struct LosoConfig {
  int jobs = 1;
};

// Runs one fold per subject: fits on the remainder, scores the held-out
// subject, and standardizes it with that fold's training-score statistics.
// Row order is fold-major then system order, independent of `jobs`. A fold
// failure is rethrown with the held-out subject named.
ScoreTable LosoRun(const std::vector<std::string>& subject_ids,
                   const std::vector<LosoSystem>& systems,
                   const LosoConfig& config);

// ---------------------------------------------------------------------------
// Artifact writers. All output is deterministic: rows are sorted, numbers
// use shortest round-trip formatting, and no timestamps are embedded.
// ---------------------------------------------------------------------------

void WriteScoresCsv(const std::filesystem::path& path,
                    const ScoreTable& table);
ScoreTable ReadScoresCsv(const std::filesystem::path& path);

void WriteMetricsJson(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, MetricReport>>& by_system);

void WriteRocCsv(const std::filesystem::path& path, const RocCurve& curve);

// Self-contained vector plot of every system's ROC with a legend.
void WriteRocSvg(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, RocCurve>>& curves);

}  // namespace cadence::evaluation

#endif  // CADENCE_EVALUATION_HPP_
