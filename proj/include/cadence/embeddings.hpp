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

#ifndef CADENCE_EMBEDDINGS_HPP_
#define CADENCE_EMBEDDINGS_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace cadence::embeddings {

// ---------------------------------------------------------------------------
// Universal background model: diagonal-covariance Gaussian mixture.
// ---------------------------------------------------------------------------

struct UbmConfig {
  int n_components = 512;
  int em_iters = 20;
  int kmeans_iters = 5;
  // Per-dimension variance floor, as a fraction of the global variance.
  double var_floor_frac = 1e-3;
  std::uint64_t seed = 0;
};

struct Ubm {
  Eigen::VectorXd weights;  // M, sums to 1
  Eigen::MatrixXd means;    // M x D
  Eigen::MatrixXd vars;     // M x D, floored elementwise
  // Total data log-likelihood at the start of each EM iteration.
  std::vector<double> log_likelihood_trace;

  int Components() const { return static_cast<int>(weights.size()); }
  int Dim() const { return static_cast<int>(means.cols()); }
};

// Fits a diagonal GMM with k-means++ seeding followed by EM. `frames` is
// n_frames x dim. Rows must be finite and n_frames >= n_components.
Ubm TrainUbm(const Eigen::MatrixXd& frames, const UbmConfig& config);

// Per-frame posterior responsibilities, n_frames x M rows summing to 1.
Eigen::MatrixXd UbmResponsibilities(const Ubm& ubm,
                                    const Eigen::MatrixXd& frames);

// Total log-likelihood of `frames` under the mixture.
double UbmLogLikelihood(const Ubm& ubm, const Eigen::MatrixXd& frames);

// ---------------------------------------------------------------------------
// Baum-Welch statistics and the total-variability subspace.
// ---------------------------------------------------------------------------

struct BwStats {
  Eigen::VectorXd n;  // M, zeroth order; sums to the frame count
  Eigen::MatrixXd f;  // M x D, first order centered on the UBM means

  double TotalFrames() const { return n.sum(); }
};

// Soft-assigns frames to UBM components. Errors on empty input.
BwStats AccumulateBwStats(const Ubm& ubm, const Eigen::MatrixXd& frames);

struct TvConfig {
  int dim = 125;
  int em_iters = 10;
  std::uint64_t seed = 0;
};

struct TvModel {
  // Stacked per-component blocks: rows [m*D, (m+1)*D) map latent w to the
  // mean offset of component m.
  Eigen::MatrixXd t;  // (M*D) x dim
  int n_components = 0;
  int feat_dim = 0;
  // Evidence lower bound (constants dropped) after each EM iteration.
  std::vector<double> elbo_trace;

  int Dim() const { return static_cast<int>(t.cols()); }
};

// Maximum-likelihood subspace over the given utterance statistics.
TvModel TrainTv(const std::vector<BwStats>& stats, const Ubm& ubm,
                const TvConfig& config);

// Posterior mean of the latent factor: solves
//   (I + T' Sigma^-1 N T) w = T' Sigma^-1 f
// where N expands each component count across its feature block.
Eigen::VectorXd IvectorPosteriorMean(const TvModel& tv, const Ubm& ubm,
                                     const BwStats& stats);

// An embedding plus the span of recording it summarizes. `truncated` marks
// recordings shorter than the analysis window; `degenerate` marks a zero
// vector that could not be length-normalized.
struct Embedding {
  Eigen::VectorXd vector;
  double window_start = 0.0;
  double window_end = 0.0;
  bool truncated = false;
  bool degenerate = false;
};

// Length-normalized posterior mean.
Embedding ExtractIvector(const TvModel& tv, const Ubm& ubm,
                         const BwStats& stats);

// Extraction against one fixed (tv, ubm) pair. The per-component Gram
// matrices are computed once at construction instead of on every call, so
// batch extraction costs O(R^2) per utterance rather than O(M D R^2).
class IvectorExtractor {
 public:
  IvectorExtractor(const TvModel& tv, const Ubm& ubm);

  // Identical result to ExtractIvector on the same model pair.
  Embedding Extract(const BwStats& stats) const;

 private:
  TvModel tv_;
  Ubm ubm_;
  std::vector<Eigen::MatrixXd> grams_;
};

// v / ||v||; the zero vector is returned unchanged with *degenerate = true.
Eigen::VectorXd LengthNormalize(const Eigen::VectorXd& v,
                                bool* degenerate = nullptr);

// Per-recording mean/variance normalization of a feature matrix
// (n_frames x dim). Zero-variance columns map to zero.
Eigen::MatrixXd MeanVarianceNormalize(const Eigen::MatrixXd& frames);

// ---------------------------------------------------------------------------
// Time-delay network embeddings.
// ---------------------------------------------------------------------------

struct TdnnLayer {
  std::vector<int> context;  // frame offsets spliced into the input, sorted
  Eigen::MatrixXd weight;    // out x (in * context.size())
  Eigen::VectorXd bias;      // out
};

struct TdnnModel {
  // Frame-level layers, each followed by ReLU. Valid splicing only, so each
  // layer shrinks the frame axis by its context span.
  std::vector<TdnnLayer> layers;
  // Statistics pooling (mean and population std over frames) feeds the first
  // dense affine; its pre-activation output is the embedding.
  Eigen::MatrixXd dense_w;  // embed_dim x (2 * last_layer_out)
  Eigen::VectorXd dense_b;  // embed_dim

  int InputDim() const;
  int EmbeddingDim() const { return static_cast<int>(dense_b.size()); }
  // Minimum number of input frames the layer stack can consume.
  int ReceptiveField() const;
};

// Random network in the standard five-layer shape with a 512-d embedding.
// Weights are seeded Gaussians scaled by 1/sqrt(fan_in); a trained model can
// be substituted through the model file format.
TdnnModel MakeRandomTdnn(int input_dim, std::uint64_t seed);

// Mean+std pooling over the rows of a frame-level activation matrix.
Eigen::VectorXd StatsPool(const Eigen::MatrixXd& activations);

// frames is n_frames x input_dim; errors when n_frames < ReceptiveField().
Eigen::VectorXd XvectorForward(const TdnnModel& tdnn,
                               const Eigen::MatrixXd& frames);

// ---------------------------------------------------------------------------
// Supervised dimensionality reduction applied to raw embeddings.
// ---------------------------------------------------------------------------

struct LdaBasis {
  Eigen::MatrixXd projection;  // out_dim x in_dim, orthonormal rows
};

// Fisher discriminant directions (at most n_classes - 1) extended with
// total-scatter principal directions until `out_dim` rows are available.
// Requires out_dim <= in_dim and at least two classes.
LdaBasis TrainLdaBasis(const Eigen::MatrixXd& embeddings,
                       const std::vector<int>& labels, int out_dim);

// Projects then length-normalizes.
Embedding ProjectAndNorm(const LdaBasis& basis, const Eigen::VectorXd& v);

// ---------------------------------------------------------------------------
// Sliding analysis windows over a recording.
// ---------------------------------------------------------------------------

struct WindowSpan {
  double start = 0.0;
  double end = 0.0;
  bool truncated = false;
};

// Spans [k*hop, k*hop + window) while they fit inside `duration`. A recording
// shorter than one window yields a single truncated span covering all of it.
std::vector<WindowSpan> SlidingWindows(double duration, double window = 3.0,
                                       double hop = 2.0);

}  // namespace cadence::embeddings

#endif  // CADENCE_EMBEDDINGS_HPP_
