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

#ifndef CADENCE_CLASSIFIERS_HPP_
#define CADENCE_CLASSIFIERS_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cadence/text.hpp"

namespace cadence::classifiers {

// ---------------------------------------------------------------------------
// Support vector machine trained by sequential minimal optimization.

enum class SvmKernel { kLinear, kRbf };

struct SvmConfig {
  SvmKernel kernel = SvmKernel::kLinear;
  double c = 1.0;
  // <= 0 resolves to 1 / (n_features * var(X)) at training time.
  double gamma = 0.0;
  double tolerance = 1e-3;  // KKT tolerance
  int max_passes = 200;     // full sweeps without progress before stopping
  // Fit a Platt sigmoid on the training margins so Probability() works.
  bool fit_probability = false;
};

struct SvmModel {
  SvmConfig config;
  Eigen::MatrixXd support_vectors;  // one per row
  Eigen::VectorXd dual_coefs;       // alpha_i * y_i, |.| in [0, C]
  double bias = 0.0;
  double gamma = 0.0;  // resolved value actually used

  // Platt calibration p = 1 / (1 + exp(a * margin + b)).
  bool has_platt = false;
  double platt_a = 0.0;
  double platt_b = 0.0;

  // Dual objective after every SMO sweep (diagnostic, non-decreasing).
  std::vector<double> dual_objective_trace;

  double Margin(const Eigen::VectorXd& x) const;
  // Requires fit_probability at training time.
  double Probability(const Eigen::VectorXd& x) const;
};

// Labels must be +1/-1 (0 is accepted as an alias for -1). Throws on a
// single-class set or non-finite features.
SvmModel TrainSvm(const Eigen::MatrixXd& x, const std::vector<int>& y,
                  const SvmConfig& config = {});

// Dual objective sum(alpha) - 0.5 * sum. Exposed for the monotonicity test.
double SvmDualObjective(const Eigen::MatrixXd& x, const std::vector<int>& y,
                        const Eigen::VectorXd& alpha, SvmKernel kernel,
                        double gamma);

// ---------------------------------------------------------------------------
// Fisher discriminant scorer: projection onto w with a midpoint threshold.

struct LdaScorer {
  Eigen::VectorXd w;
  double threshold = 0.0;

  // Positive scores side with class 1.
  double Score(const Eigen::VectorXd& x) const { return w.dot(x) - threshold; }
};

// w = Sw^-1 (mu1 - mu0) with ridge 1e-6 * trace(Sw) added only when the
// plain solve fails. Labels are 0/1 (or -1/+1, -1 aliasing 0).
LdaScorer TrainLda(const Eigen::MatrixXd& x, const std::vector<int>& y);

// ---------------------------------------------------------------------------
// Small LSTM over embedded token sequences, sigmoid output.

struct LstmConfig {
  int hidden = 4;
  double dropout = 0.10;  // on embedding outputs and the LSTM output
  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 1e-3;  // Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

struct LstmModel {
  int input_dim = 0;
  int hidden = 0;
  // Gate rows stacked [input, forget, cell, output], 4*hidden x input_dim.
  Eigen::MatrixXd w_x;
  Eigen::MatrixXd w_h;  // 4*hidden x hidden
  Eigen::VectorXd b;    // 4*hidden, forget block initialized to 1
  Eigen::VectorXd dense_w;  // hidden
  double dense_b = 0.0;

  // Probability from one embedded sequence (rows = timesteps), no dropout.
  double Forward(const Eigen::MatrixXd& seq) const;
};

struct LstmGradients {
  Eigen::MatrixXd w_x;
  Eigen::MatrixXd w_h;
  Eigen::VectorXd b;
  Eigen::VectorXd dense_w;
  double dense_b = 0.0;
};

LstmModel InitLstm(int input_dim, const LstmConfig& config);

// Mean binary cross-entropy over the batch, dropout disabled. The gradient
// path applies inverted-dropout masks when given (train-time use).
double LstmBatchLoss(const LstmModel& model,
                     const std::vector<Eigen::MatrixXd>& batch,
                     const std::vector<int>& labels);

// Analytic gradients of the mean BCE. Optional masks (already scaled by
// 1/keep) multiply the embedding outputs and the LSTM output per sample.
LstmGradients LstmLossGradients(
    const LstmModel& model, const std::vector<Eigen::MatrixXd>& batch,
    const std::vector<int>& labels,
    const std::vector<Eigen::MatrixXd>* embedding_masks = nullptr,
    const std::vector<Eigen::VectorXd>* output_masks = nullptr,
    double* loss_out = nullptr);

// Trains on embedded sequences with per-epoch shuffling and dropout; the
// embedding table itself stays frozen upstream. Deterministic in the seed.
LstmModel TrainLstm(const std::vector<Eigen::MatrixXd>& sequences,
                    const std::vector<int>& labels,
                    const LstmConfig& config = {});

// Convenience wrapper: embeds padded interventions through the table first.
LstmModel TrainLstm(const std::vector<text::PaddedIntervention>& interventions,
                    const text::EmbeddingTable& table,
                    const std::vector<int>& labels,
                    const LstmConfig& config = {});

// Mean of per-intervention probabilities; empty interventions are skipped
// and zero usable interventions is an error.
double LstmPredictSubject(
    const LstmModel& model,
    const std::vector<text::PaddedIntervention>& interventions,
    const text::EmbeddingTable& table);

// ---------------------------------------------------------------------------

// Arithmetic mean of per-window scores; the subject-level decision input.
double AggregateWindowScores(const std::vector<double>& window_scores);

}  // namespace cadence::classifiers

#endif  // CADENCE_CLASSIFIERS_HPP_
