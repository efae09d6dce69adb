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

#include "cadence/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cadence/common.hpp"
#include "cadence/rng.hpp"

namespace cadence::embeddings {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
// Frames processed per E-step block; bounds the responsibility buffer.
constexpr int kEmBlock = 4096;

// log p(x_t, component m) for a block of frames: log w_m + log N(x; mu, var).
Eigen::MatrixXd ComponentLogJoint(const Ubm& ubm,
                                  const Eigen::MatrixXd& frames) {
  const int n = static_cast<int>(frames.rows());
  const int m = ubm.Components();
  const int d = ubm.Dim();
  Eigen::MatrixXd out(n, m);
  for (int k = 0; k < m; ++k) {
    const Eigen::ArrayXd inv_var = ubm.vars.row(k).array().inverse();
    const double log_const =
        std::log(ubm.weights(k)) -
        0.5 * (d * kLog2Pi + ubm.vars.row(k).array().log().sum());
    Eigen::ArrayXXd centered = (frames.rowwise() - ubm.means.row(k)).array();
    Eigen::ArrayXd quad =
        (centered.square().rowwise() * inv_var.transpose()).rowwise().sum();
    out.col(k) = (-0.5 * quad + log_const).matrix();
  }
  return out;
}

// Row-wise log-sum-exp, numerically stable.
Eigen::VectorXd RowLogSumExp(const Eigen::MatrixXd& log_joint) {
  Eigen::VectorXd mx = log_joint.rowwise().maxCoeff();
  Eigen::VectorXd out(log_joint.rows());
  for (Eigen::Index i = 0; i < log_joint.rows(); ++i) {
    out(i) =
        mx(i) + std::log((log_joint.row(i).array() - mx(i)).exp().sum());
  }
  return out;
}

void CheckFrames(const Eigen::MatrixXd& frames, int dim) {
  CADENCE_CHECK_DATA(frames.rows() > 0,
                     "feature matrix has no frames");
  if (frames.rows() == 0) return;
  CADENCE_CHECK_DATA(static_cast<int>(frames.cols()) == dim,
                     "feature dimension does not match the model");
  CADENCE_CHECK_DATA(frames.allFinite(),
                     "feature matrix contains non-finite values");
}

// Hard k-means++ seeding plus Lloyd refinement; returns cluster assignments.
std::vector<int> KmeansInit(const Eigen::MatrixXd& frames, int k,
                            int lloyd_iters, Rng* rng,
                            Eigen::MatrixXd* centers) {
  const int n = static_cast<int>(frames.rows());
  const int d = static_cast<int>(frames.cols());
  centers->resize(k, d);
  centers->row(0) = frames.row(static_cast<Eigen::Index>(
      rng->UniformInt(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2 =
      (frames.rowwise() - centers->row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double r = rng->Uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc >= r) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = static_cast<Eigen::Index>(
          rng->UniformInt(static_cast<std::uint64_t>(n)));
    }
    centers->row(c) = frames.row(pick);
    d2 = d2.cwiseMin(
        (frames.rowwise() - centers->row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < lloyd_iters; ++iter) {
    // Assignment: nearest center, lowest index on ties.
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double dist =
            (frames.row(i) - centers->row(c)).squaredNorm();
        if (dist < best) {
          best = dist;
          arg = c;
        }
      }
      assign[i] = arg;
    }
    // Update, reseeding empty clusters to the worst-fit frame.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < n; ++i) {
      sums.row(assign[i]) += frames.row(i);
      counts(assign[i]) += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0.0) {
        centers->row(c) = sums.row(c) / counts(c);
      } else {
        Eigen::Index worst = 0;
        double worst_dist = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double dist =
              (frames.row(i) - centers->row(assign[i])).squaredNorm();
          if (dist > worst_dist) {
            worst_dist = dist;
            worst = i;
          }
        }
        centers->row(c) = frames.row(worst);
      }
    }
  }
  // Final assignment so cluster statistics match the returned centers.
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < k; ++c) {
      const double dist = (frames.row(i) - centers->row(c)).squaredNorm();
      if (dist < best) {
        best = dist;
        arg = c;
      }
    }
    assign[i] = arg;
  }
  return assign;
}

// Per-component Gram matrices T_m' diag(1/var_m) T_m, cached once per pass.
std::vector<Eigen::MatrixXd> SigmaScaledGrams(const Eigen::MatrixXd& t,
                                              const Ubm& ubm) {
  const int m = ubm.Components();
  const int d = ubm.Dim();
  std::vector<Eigen::MatrixXd> grams(m);
  for (int k = 0; k < m; ++k) {
    const Eigen::MatrixXd block = t.middleRows(k * d, d);
    const Eigen::VectorXd inv_var = ubm.vars.row(k).transpose().cwiseInverse();
    grams[k] = block.transpose() * inv_var.asDiagonal() * block;
  }
  return grams;
}

// Latent posterior for one utterance given cached grams. Returns the
// ELBO contribution 0.5 * (a' mean - log det L) through *elbo when asked.
void LatentPosterior(const Eigen::MatrixXd& t, const Ubm& ubm,
                     const std::vector<Eigen::MatrixXd>& grams,
                     const BwStats& stats, Eigen::VectorXd* mean,
                     Eigen::MatrixXd* cov, double* elbo) {
  const int m = ubm.Components();
  const int d = ubm.Dim();
  const int r = static_cast<int>(t.cols());
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(r, r);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(r);
  for (int k = 0; k < m; ++k) {
    l.noalias() += stats.n(k) * grams[k];
    const Eigen::VectorXd scaled =
        stats.f.row(k).transpose().cwiseQuotient(ubm.vars.row(k).transpose());
    a.noalias() += t.middleRows(k * d, d).transpose() * scaled;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(l);
  CADENCE_CHECK_DATA(llt.info() == Eigen::Success,
                     "latent precision matrix is not positive definite");
  *mean = llt.solve(a);
  if (cov != nullptr) {
    *cov = llt.solve(Eigen::MatrixXd::Identity(r, r));
  }
  if (elbo != nullptr) {
    const double log_det =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    *elbo = 0.5 * (a.dot(*mean) - log_det);
  }
}

void CheckUbm(const Ubm& ubm) {
  CADENCE_CHECK_DATA(ubm.Components() > 0 && ubm.Dim() > 0,
                     "background model is empty");
  CADENCE_CHECK_DATA(ubm.means.rows() == ubm.weights.size() &&
                         ubm.vars.rows() == ubm.weights.size() &&
                         ubm.vars.cols() == ubm.means.cols(),
                     "background model dimensions are inconsistent");
  CADENCE_CHECK_DATA((ubm.vars.array() > 0.0).all(),
                     "background model variances must be positive");
}

void CheckTvAgainstUbm(const TvModel& tv, const Ubm& ubm) {
  CADENCE_CHECK_DATA(tv.n_components == ubm.Components() &&
                         tv.feat_dim == ubm.Dim(),
                     "subspace model does not match the background model");
  CADENCE_CHECK_DATA(
      tv.t.rows() == static_cast<Eigen::Index>(tv.n_components) * tv.feat_dim,
      "subspace matrix has the wrong number of rows");
  CADENCE_CHECK_DATA(tv.t.cols() > 0, "subspace dimension must be positive");
}

}  // namespace

Ubm TrainUbm(const Eigen::MatrixXd& frames, const UbmConfig& config) {
  CADENCE_CHECK_CONFIG(config.n_components >= 1,
                       "mixture size must be at least 1");
  CADENCE_CHECK_CONFIG(config.em_iters >= 1, "EM needs at least 1 iteration");
  CADENCE_CHECK_CONFIG(config.var_floor_frac > 0.0,
                       "variance floor fraction must be positive");
  CADENCE_CHECK_DATA(frames.rows() > 0 && frames.cols() > 0,
                     "feature matrix has no frames");
  CADENCE_CHECK_DATA(frames.allFinite(),
                     "feature matrix contains non-finite values");
  CADENCE_CHECK_DATA(frames.rows() >= config.n_components,
                     "fewer frames than mixture components");

  const int n = static_cast<int>(frames.rows());
  const int d = static_cast<int>(frames.cols());
  const int m = config.n_components;

  const Eigen::RowVectorXd global_mean = frames.colwise().mean();
  const Eigen::RowVectorXd global_var =
      (frames.rowwise() - global_mean).array().square().colwise().mean().matrix();
  const Eigen::RowVectorXd floor =
      (global_var * config.var_floor_frac).cwiseMax(1e-10);

  Rng rng = Rng(config.seed).Derive(0x756b);
  Eigen::MatrixXd centers;
  const std::vector<int> assign =
      KmeansInit(frames, m, config.kmeans_iters, &rng, &centers);

  Ubm ubm;
  ubm.weights = Eigen::VectorXd::Zero(m);
  ubm.means = centers;
  ubm.vars = Eigen::MatrixXd::Zero(m, d);
  Eigen::MatrixXd sq_sums = Eigen::MatrixXd::Zero(m, d);
  for (int i = 0; i < n; ++i) {
    ubm.weights(assign[i]) += 1.0;
    sq_sums.row(assign[i]) +=
        (frames.row(i) - centers.row(assign[i])).array().square().matrix();
  }
  for (int k = 0; k < m; ++k) {
    if (ubm.weights(k) > 1.5) {
      ubm.vars.row(k) =
          (sq_sums.row(k) / ubm.weights(k)).cwiseMax(floor);
    } else {
      ubm.vars.row(k) = global_var.cwiseMax(floor);
    }
  }
  ubm.weights = (ubm.weights / n).cwiseMax(1e-8);
  ubm.weights /= ubm.weights.sum();

  for (int iter = 0; iter < config.em_iters; ++iter) {
    double total_ll = 0.0;
    Eigen::VectorXd nk = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd first = Eigen::MatrixXd::Zero(m, d);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(m, d);
    for (int start = 0; start < n; start += kEmBlock) {
      const int len = std::min(kEmBlock, n - start);
      const Eigen::MatrixXd block = frames.middleRows(start, len);
      Eigen::MatrixXd lj = ComponentLogJoint(ubm, block);
      const Eigen::VectorXd lse = RowLogSumExp(lj);
      total_ll += lse.sum();
      Eigen::MatrixXd resp = (lj.colwise() - lse).array().exp().matrix();
      nk.noalias() += resp.colwise().sum().transpose();
      first.noalias() += resp.transpose() * block;
      second.noalias() += resp.transpose() * block.array().square().matrix();
    }
    ubm.log_likelihood_trace.push_back(total_ll);
    for (int k = 0; k < m; ++k) {
      if (nk(k) < 1e-10) continue;  // starved component keeps its parameters
      const Eigen::RowVectorXd mean = first.row(k) / nk(k);
      ubm.means.row(k) = mean;
      ubm.vars.row(k) =
          (second.row(k) / nk(k) - mean.array().square().matrix())
              .cwiseMax(floor);
    }
    ubm.weights = (nk / n).cwiseMax(1e-8);
    ubm.weights /= ubm.weights.sum();
  }
  return ubm;
}

Eigen::MatrixXd UbmResponsibilities(const Ubm& ubm,
                                    const Eigen::MatrixXd& frames) {
  CheckUbm(ubm);
  CheckFrames(frames, ubm.Dim());
  Eigen::MatrixXd lj = ComponentLogJoint(ubm, frames);
  const Eigen::VectorXd lse = RowLogSumExp(lj);
  return (lj.colwise() - lse).array().exp().matrix();
}

double UbmLogLikelihood(const Ubm& ubm, const Eigen::MatrixXd& frames) {
  CheckUbm(ubm);
  CheckFrames(frames, ubm.Dim());
  return RowLogSumExp(ComponentLogJoint(ubm, frames)).sum();
}

BwStats AccumulateBwStats(const Ubm& ubm, const Eigen::MatrixXd& frames) {
  CADENCE_CHECK_DATA(frames.rows() > 0,
                     "cannot accumulate statistics over zero frames");
  const Eigen::MatrixXd resp = UbmResponsibilities(ubm, frames);
  BwStats stats;
  stats.n = resp.colwise().sum().transpose();
  stats.f = resp.transpose() * frames;
  stats.f -= stats.n.asDiagonal() * ubm.means;
  return stats;
}

TvModel TrainTv(const std::vector<BwStats>& stats, const Ubm& ubm,
                const TvConfig& config) {
  CheckUbm(ubm);
  CADENCE_CHECK_DATA(!stats.empty(),
                     "subspace training needs at least one utterance");
  const int m = ubm.Components();
  const int d = ubm.Dim();
  const int r = config.dim;
  CADENCE_CHECK_CONFIG(r >= 1 && r <= m * d,
                       "subspace dimension must be in [1, components * dim]");
  CADENCE_CHECK_CONFIG(config.em_iters >= 1, "EM needs at least 1 iteration");
  for (const BwStats& s : stats) {
    CADENCE_CHECK_DATA(
        s.n.size() == m && s.f.rows() == m && s.f.cols() == d,
        "utterance statistics do not match the background model");
    CADENCE_CHECK_DATA(s.n.allFinite() && s.f.allFinite() &&
                           (s.n.array() >= 0.0).all(),
                       "utterance statistics contain invalid values");
  }

  TvModel tv;
  tv.n_components = m;
  tv.feat_dim = d;
  tv.t.resize(static_cast<Eigen::Index>(m) * d, r);
  Rng rng = Rng(config.seed).Derive(0x7476);
  for (Eigen::Index i = 0; i < tv.t.rows(); ++i) {
    for (int j = 0; j < r; ++j) {
      tv.t(i, j) = 0.1 * rng.Gaussian();
    }
  }

  for (int iter = 0; iter < config.em_iters; ++iter) {
    const std::vector<Eigen::MatrixXd> grams = SigmaScaledGrams(tv.t, ubm);
    // Per-component accumulators for the row-block solve.
    std::vector<Eigen::MatrixXd> acc_a(m, Eigen::MatrixXd::Zero(r, r));
    std::vector<Eigen::MatrixXd> acc_c(m, Eigen::MatrixXd::Zero(d, r));
    double elbo = 0.0;
    for (const BwStats& s : stats) {
      Eigen::VectorXd mean;
      Eigen::MatrixXd cov;
      double e = 0.0;
      LatentPosterior(tv.t, ubm, grams, s, &mean, &cov, &e);
      elbo += e;
      const Eigen::MatrixXd eww = cov + mean * mean.transpose();
      for (int k = 0; k < m; ++k) {
        acc_a[k].noalias() += s.n(k) * eww;
        acc_c[k].noalias() += s.f.row(k).transpose() * mean.transpose();
      }
    }
    tv.elbo_trace.push_back(elbo);
    for (int k = 0; k < m; ++k) {
      if (acc_a[k].trace() < 1e-12) continue;  // component saw no mass
      Eigen::LDLT<Eigen::MatrixXd> ldlt(acc_a[k]);
      if (ldlt.info() != Eigen::Success) continue;
      tv.t.middleRows(static_cast<Eigen::Index>(k) * d, d) =
          ldlt.solve(acc_c[k].transpose()).transpose();
    }
  }
  return tv;
}

Eigen::VectorXd IvectorPosteriorMean(const TvModel& tv, const Ubm& ubm,
                                     const BwStats& stats) {
  CheckUbm(ubm);
  CheckTvAgainstUbm(tv, ubm);
  CADENCE_CHECK_DATA(stats.n.size() == ubm.Components() &&
                         stats.f.rows() == ubm.Components() &&
                         stats.f.cols() == ubm.Dim(),
                     "utterance statistics do not match the background model");
  const std::vector<Eigen::MatrixXd> grams = SigmaScaledGrams(tv.t, ubm);
  Eigen::VectorXd mean;
  LatentPosterior(tv.t, ubm, grams, stats, &mean, nullptr, nullptr);
  return mean;
}

Embedding ExtractIvector(const TvModel& tv, const Ubm& ubm,
                         const BwStats& stats) {
  Embedding emb;
  emb.vector = LengthNormalize(IvectorPosteriorMean(tv, ubm, stats),
                               &emb.degenerate);
  return emb;
}

IvectorExtractor::IvectorExtractor(const TvModel& tv, const Ubm& ubm)
    : tv_(tv), ubm_(ubm) {
  CheckUbm(ubm_);
  CheckTvAgainstUbm(tv_, ubm_);
  grams_ = SigmaScaledGrams(tv_.t, ubm_);
}

Embedding IvectorExtractor::Extract(const BwStats& stats) const {
  CADENCE_CHECK_DATA(stats.n.size() == ubm_.Components() &&
                         stats.f.rows() == ubm_.Components() &&
                         stats.f.cols() == ubm_.Dim(),
                     "utterance statistics do not match the background model");
  Eigen::VectorXd mean;
  LatentPosterior(tv_.t, ubm_, grams_, stats, &mean, nullptr, nullptr);
  Embedding emb;
  emb.vector = LengthNormalize(mean, &emb.degenerate);
  return emb;
}

Eigen::VectorXd LengthNormalize(const Eigen::VectorXd& v, bool* degenerate) {
  CADENCE_CHECK_DATA(v.allFinite(), "cannot normalize a non-finite vector");
  const double norm = v.norm();
  if (degenerate != nullptr) *degenerate = norm == 0.0;
  if (norm == 0.0) return v;
  return v / norm;
}

Eigen::MatrixXd MeanVarianceNormalize(const Eigen::MatrixXd& frames) {
  CADENCE_CHECK_DATA(frames.rows() > 0, "feature matrix has no frames");
  CADENCE_CHECK_DATA(frames.allFinite(),
                     "feature matrix contains non-finite values");
  const Eigen::RowVectorXd mean = frames.colwise().mean();
  const Eigen::RowVectorXd std_dev =
      (frames.rowwise() - mean).array().square().colwise().mean().sqrt().matrix();
  Eigen::MatrixXd out = frames.rowwise() - mean;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (std_dev(j) > 1e-12) {
      out.col(j) /= std_dev(j);
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

int TdnnModel::InputDim() const {
  if (layers.empty()) return 0;
  return static_cast<int>(layers[0].weight.cols() /
                          static_cast<Eigen::Index>(layers[0].context.size()));
}

int TdnnModel::ReceptiveField() const {
  int span = 0;
  for (const TdnnLayer& layer : layers) {
    if (layer.context.empty()) continue;
    span += layer.context.back() - layer.context.front();
  }
  return span + 1;
}

TdnnModel MakeRandomTdnn(int input_dim, std::uint64_t seed) {
  CADENCE_CHECK_CONFIG(input_dim >= 1, "input dimension must be positive");
  const std::vector<std::vector<int>> contexts = {
      {-2, -1, 0, 1, 2}, {-2, 0, 2}, {-3, 0, 3}, {0}, {0}};
  const std::vector<int> widths = {64, 64, 64, 64, 256};
  constexpr int kEmbedDim = 512;

  Rng rng = Rng(seed).Derive(0x7464);
  TdnnModel model;
  int in = input_dim;
  for (std::size_t l = 0; l < contexts.size(); ++l) {
    TdnnLayer layer;
    layer.context = contexts[l];
    const int fan_in = in * static_cast<int>(layer.context.size());
    layer.weight.resize(widths[l], fan_in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < layer.weight.rows(); ++i) {
      for (int j = 0; j < layer.weight.cols(); ++j) {
        layer.weight(i, j) = scale * rng.Gaussian();
      }
    }
    layer.bias = Eigen::VectorXd::Zero(widths[l]);
    model.layers.push_back(std::move(layer));
    in = widths[l];
  }
  const int pooled = 2 * in;
  model.dense_w.resize(kEmbedDim, pooled);
  const double scale = 1.0 / std::sqrt(static_cast<double>(pooled));
  for (int i = 0; i < model.dense_w.rows(); ++i) {
    for (int j = 0; j < model.dense_w.cols(); ++j) {
      model.dense_w(i, j) = scale * rng.Gaussian();
    }
  }
  model.dense_b = Eigen::VectorXd::Zero(kEmbedDim);
  return model;
}

Eigen::VectorXd StatsPool(const Eigen::MatrixXd& activations) {
  CADENCE_CHECK_DATA(activations.rows() > 0,
                     "statistics pooling needs at least one frame");
  const Eigen::RowVectorXd mean = activations.colwise().mean();
  const Eigen::RowVectorXd var =
      (activations.rowwise() - mean).array().square().colwise().mean().matrix();
  Eigen::VectorXd out(2 * activations.cols());
  out.head(activations.cols()) = mean.transpose();
  out.tail(activations.cols()) = var.cwiseMax(0.0).cwiseSqrt().transpose();
  return out;
}

Eigen::VectorXd XvectorForward(const TdnnModel& tdnn,
                               const Eigen::MatrixXd& frames) {
  CADENCE_CHECK_DATA(!tdnn.layers.empty(), "network has no layers");
  CheckFrames(frames, tdnn.InputDim());
  CADENCE_CHECK_DATA(
      frames.rows() >= tdnn.ReceptiveField(),
      "recording is shorter than the network receptive field of " +
          std::to_string(tdnn.ReceptiveField()) + " frames");

  Eigen::MatrixXd cur = frames;
  for (const TdnnLayer& layer : tdnn.layers) {
    CADENCE_CHECK_DATA(!layer.context.empty() &&
                           std::is_sorted(layer.context.begin(),
                                          layer.context.end()),
                       "layer context offsets must be sorted and non-empty");
    const int in_dim = static_cast<int>(cur.cols());
    CADENCE_CHECK_DATA(
        layer.weight.cols() ==
            static_cast<Eigen::Index>(layer.context.size()) * in_dim,
        "layer weight width does not match its spliced input");
    const int span = layer.context.back() - layer.context.front();
    const int t_out = static_cast<int>(cur.rows()) - span;
    Eigen::MatrixXd spliced(t_out,
                            static_cast<Eigen::Index>(layer.context.size()) *
                                in_dim);
    for (std::size_t c = 0; c < layer.context.size(); ++c) {
      const int shift = layer.context[c] - layer.context.front();
      spliced.middleCols(static_cast<Eigen::Index>(c) * in_dim, in_dim) =
          cur.middleRows(shift, t_out);
    }
    cur = ((spliced * layer.weight.transpose()).rowwise() +
           layer.bias.transpose())
              .cwiseMax(0.0);
  }
  const Eigen::VectorXd pooled = StatsPool(cur);
  CADENCE_CHECK_DATA(tdnn.dense_w.cols() == pooled.size(),
                     "dense layer width does not match pooled statistics");
  return tdnn.dense_w * pooled + tdnn.dense_b;
}

LdaBasis TrainLdaBasis(const Eigen::MatrixXd& embeddings,
                       const std::vector<int>& labels, int out_dim) {
  const int n = static_cast<int>(embeddings.rows());
  const int d = static_cast<int>(embeddings.cols());
  CADENCE_CHECK_DATA(n == static_cast<int>(labels.size()),
                     "labels do not match the number of embeddings");
  CADENCE_CHECK_DATA(n >= 2, "basis training needs at least two embeddings");
  CADENCE_CHECK_CONFIG(out_dim >= 1 && out_dim <= d,
                       "output dimension must be in [1, input dimension]");
  CADENCE_CHECK_DATA(embeddings.allFinite(),
                     "embeddings contain non-finite values");

  std::vector<int> classes(labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  const int c = static_cast<int>(classes.size());
  if (c < 2) {
    ThrowData("basis training needs at least two classes",
              ErrorCode::kSingularModel);
  }

  const Eigen::RowVectorXd global_mean = embeddings.colwise().mean();
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(d, d);
  for (int ci = 0; ci < c; ++ci) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (labels[i] == classes[ci]) {
        mean += embeddings.row(i);
        ++count;
      }
    }
    mean /= count;
    for (int i = 0; i < n; ++i) {
      if (labels[i] != classes[ci]) continue;
      const Eigen::RowVectorXd diff = embeddings.row(i) - mean;
      sw.noalias() += diff.transpose() * diff;
    }
    const Eigen::RowVectorXd offset = mean - global_mean;
    sb.noalias() += count * offset.transpose() * offset;
  }

  // Whiten within-class scatter, then diagonalize the between-class scatter
  // in the whitened space. Ridge grows until the factorization succeeds.
  double ridge = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int attempt = 0; attempt < 24; ++attempt) {
    llt.compute(sw + ridge * Eigen::MatrixXd::Identity(d, d));
    if (llt.info() == Eigen::Success) break;
    const double base = sw.trace() > 0.0 ? sw.trace() / d : 1.0;
    ridge = ridge == 0.0 ? 1e-10 * base : ridge * 10.0;
  }
  if (llt.info() != Eigen::Success) {
    ThrowNumeric("within-class scatter could not be factorized",
                 ErrorCode::kSingularModel);
  }
  const Eigen::MatrixXd half = llt.matrixL().solve(sb);
  const Eigen::MatrixXd white_sb = llt.matrixL().solve(half.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> fisher_eig(
      0.5 * (white_sb + white_sb.transpose()));
  CADENCE_CHECK_DATA(fisher_eig.info() == Eigen::Success,
                     "discriminant eigensolve failed");

  std::vector<Eigen::VectorXd> rows;
  const int n_fisher = std::min(out_dim, c - 1);
  for (int i = 0; i < n_fisher; ++i) {
    // Eigenvalues ascend, so walk from the back for the top directions.
    Eigen::VectorXd u = fisher_eig.eigenvectors().col(d - 1 - i);
    Eigen::VectorXd dir =
        llt.matrixL().transpose().solve(u);
    for (const Eigen::VectorXd& prev : rows) {
      dir -= prev.dot(dir) * prev;
    }
    const double norm = dir.norm();
    if (norm > 1e-10) rows.push_back(dir / norm);
  }

  if (static_cast<int>(rows.size()) < out_dim) {
    Eigen::MatrixXd st = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      const Eigen::RowVectorXd diff = embeddings.row(i) - global_mean;
      st.noalias() += diff.transpose() * diff;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> total_eig(st);
    CADENCE_CHECK_DATA(total_eig.info() == Eigen::Success,
                       "total scatter eigensolve failed");
    for (int i = d - 1; i >= 0 && static_cast<int>(rows.size()) < out_dim;
         --i) {
      Eigen::VectorXd dir = total_eig.eigenvectors().col(i);
      for (const Eigen::VectorXd& prev : rows) {
        dir -= prev.dot(dir) * prev;
      }
      const double norm = dir.norm();
      if (norm > 1e-8) rows.push_back(dir / norm);
    }
  }
  if (static_cast<int>(rows.size()) < out_dim) {
    ThrowNumeric("could not assemble enough projection directions",
                 ErrorCode::kSingularModel);
  }

  LdaBasis basis;
  basis.projection.resize(out_dim, d);
  for (int i = 0; i < out_dim; ++i) {
    basis.projection.row(i) = rows[i].transpose();
  }
  return basis;
}

Embedding ProjectAndNorm(const LdaBasis& basis, const Eigen::VectorXd& v) {
  CADENCE_CHECK_DATA(basis.projection.cols() == v.size(),
                     "vector does not match the projection width");
  Embedding emb;
  emb.vector = LengthNormalize(basis.projection * v, &emb.degenerate);
  return emb;
}

std::vector<WindowSpan> SlidingWindows(double duration, double window,
                                       double hop) {
  CADENCE_CHECK_CONFIG(window > 0.0 && hop > 0.0,
                       "window and hop must be positive");
  CADENCE_CHECK_DATA(duration > 0.0, "recording duration must be positive");
  std::vector<WindowSpan> spans;
  if (duration + 1e-9 < window) {
    spans.push_back({0.0, duration, true});
    return spans;
  }
  for (double start = 0.0; start + window <= duration + 1e-9; start += hop) {
    spans.push_back({start, start + window, false});
  }
  return spans;
}

}  // namespace cadence::embeddings
