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

#include "cadence/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cadence/common.hpp"
#include "cadence/rng.hpp"

namespace cadence::classifiers {

namespace {

double Sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double KernelEval(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  SvmKernel kernel, double gamma) {
  if (kernel == SvmKernel::kLinear) return a.dot(b);
  return std::exp(-gamma * (a - b).squaredNorm());
}

// +1/-1 labels; 0 aliases -1. Anything else is a data error.
std::vector<double> SignedLabels(const std::vector<int>& y) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1) {
      out[i] = 1.0;
    } else if (y[i] == -1 || y[i] == 0) {
      out[i] = -1.0;
    } else {
      ThrowData("labels must be +1/-1 (or 0 for the negative class)");
    }
  }
  return out;
}

// Platt sigmoid fit on margins (Newton iteration with backtracking).
void FitPlatt(const std::vector<double>& margins,
              const std::vector<double>& y, double* a_out, double* b_out) {
  const std::size_t n = margins.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (double yi : y) (yi > 0 ? prior1 : prior0) += 1.0;

  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = y[i] > 0 ? hi_target : lo_target;
  }

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  const auto objective = [&](double pa, double pb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = margins[i] * pa + pb;
      if (z >= 0.0) {
        f += t[i] * z + std::log1p(std::exp(-z));
      } else {
        f += (t[i] - 1.0) * z + std::log1p(std::exp(z));
      }
    }
    return f;
  };
  double fval = objective(a, b);

  for (int it = 0; it < 100; ++it) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = margins[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += margins[i] * margins[i] * d2;
      h22 += d2;
      h21 += margins[i] * d2;
      const double d1 = t[i] - p;
      g1 += margins[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= 1e-10) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < 1e-10) break;
  }
  *a_out = a;
  *b_out = b;
}

}  // namespace

double SvmDualObjective(const Eigen::MatrixXd& x, const std::vector<int>& y,
                        const Eigen::VectorXd& alpha, SvmKernel kernel,
                        double gamma) {
  const std::vector<double> ys = SignedLabels(y);
  const Eigen::Index n = x.rows();
  double quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) == 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (alpha(j) == 0.0) continue;
      quad += alpha(i) * alpha(j) * ys[i] * ys[j] *
              KernelEval(x.row(i), x.row(j), kernel, gamma);
    }
  }
  return alpha.sum() - 0.5 * quad;
}

double SvmModel::Margin(const Eigen::VectorXd& x) const {
  double f = bias;
  for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
    f += dual_coefs(i) *
         KernelEval(support_vectors.row(i), x, config.kernel, gamma);
  }
  return f;
}

double SvmModel::Probability(const Eigen::VectorXd& x) const {
  CADENCE_CHECK_CONFIG(has_platt,
                       "svm probability requested without calibration");
  return 1.0 / (1.0 + std::exp(platt_a * Margin(x) + platt_b));
}

SvmModel TrainSvm(const Eigen::MatrixXd& x, const std::vector<int>& y,
                  const SvmConfig& config) {
  const Eigen::Index n = x.rows();
  CADENCE_CHECK_DATA(n > 0 && static_cast<std::size_t>(n) == y.size(),
                     "svm training needs matching samples and labels");
  if (!x.allFinite()) {
    ThrowData("svm features must be finite");
  }
  const std::vector<double> ys = SignedLabels(y);
  const bool has_pos = std::any_of(ys.begin(), ys.end(),
                                   [](double v) { return v > 0; });
  const bool has_neg = std::any_of(ys.begin(), ys.end(),
                                   [](double v) { return v < 0; });
  if (!has_pos || !has_neg) {
    ThrowData("svm training set contains a single class",
              ErrorCode::kSingularModel);
  }

  double gamma = config.gamma;
  if (config.kernel == SvmKernel::kRbf && gamma <= 0.0) {
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();
    gamma = var > 1e-12 ? 1.0 / (static_cast<double>(x.cols()) * var)
                        : 1.0 / static_cast<double>(x.cols());
  }

  // Precomputed kernel matrix; training sets here stay small.
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = KernelEval(x.row(i), x.row(j), config.kernel, gamma);
      k(i, j) = v;
      k(j, i) = v;
    }
  }

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);  // decision values, bias-free
  double bias = 0.0;
  const double c = config.c;
  const double tol = config.tolerance;

  SvmModel model;
  model.config = config;
  model.gamma = gamma;

  const auto error_of = [&](Eigen::Index i) {
    return f(i) + bias - ys[i];
  };

  // One pair update; returns false when the pair cannot make progress.
  const auto take_step = [&](Eigen::Index i, Eigen::Index j) {
    if (i == j) return false;
    const double ei = error_of(i);
    const double ej = error_of(j);
    const double ai_old = alpha(i);
    const double aj_old = alpha(j);
    double lo, hi;
    if (ys[i] != ys[j]) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(c, c + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - c);
      hi = std::min(c, ai_old + aj_old);
    }
    if (lo >= hi) return false;
    const double eta = 2.0 * k(i, j) - k(i, i) - k(j, j);
    if (eta >= 0.0) return false;

    double aj = aj_old - ys[j] * (ei - ej) / eta;
    aj = std::clamp(aj, lo, hi);
    if (aj < 1e-12) aj = 0.0;
    if (aj > c - 1e-12) aj = c;
    if (std::abs(aj - aj_old) < 1e-12) return false;
    double ai = ai_old + ys[i] * ys[j] * (aj_old - aj);
    if (ai < 1e-12) ai = 0.0;
    if (ai > c - 1e-12) ai = c;

    const double b1 = bias - ei - ys[i] * (ai - ai_old) * k(i, i) -
                      ys[j] * (aj - aj_old) * k(i, j);
    const double b2 = bias - ej - ys[i] * (ai - ai_old) * k(i, j) -
                      ys[j] * (aj - aj_old) * k(j, j);
    if (ai > 0.0 && ai < c) {
      bias = b1;
    } else if (aj > 0.0 && aj < c) {
      bias = b2;
    } else {
      bias = 0.5 * (b1 + b2);
    }

    f += (ys[i] * (ai - ai_old)) * k.col(i) +
         (ys[j] * (aj - aj_old)) * k.col(j);
    alpha(i) = ai;
    alpha(j) = aj;
    return true;
  };

  int stale_passes = 0;
  while (stale_passes < 1) {
    int changed = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ri = error_of(i) * ys[i];
      const bool violates = (ri < -tol && alpha(i) < c) ||
                            (ri > tol && alpha(i) > 0.0);
      if (!violates) continue;

      // Preferred partner has the largest error gap (lowest index wins
      // ties); if it cannot move, every other index is tried in order.
      const double ei = error_of(i);
      Eigen::Index best = -1;
      double best_gap = -1.0;
      for (Eigen::Index cand = 0; cand < n; ++cand) {
        if (cand == i) continue;
        const double gap = std::abs(ei - error_of(cand));
        if (gap > best_gap + 1e-15) {
          best_gap = gap;
          best = cand;
        }
      }
      bool moved = best >= 0 && take_step(i, best);
      for (Eigen::Index cand = 0; cand < n && !moved; ++cand) {
        if (cand == best) continue;
        moved = take_step(i, cand);
      }
      if (moved) ++changed;
    }

    Eigen::VectorXd ay(n);
    for (Eigen::Index t = 0; t < n; ++t) ay(t) = alpha(t) * ys[t];
    model.dual_objective_trace.push_back(alpha.sum() - 0.5 * ay.dot(k * ay));
    if (changed == 0) {
      ++stale_passes;
    } else {
      stale_passes = 0;
    }
    if (static_cast<int>(model.dual_objective_trace.size()) >=
        config.max_passes) {
      break;
    }
  }

  // Keep only support vectors.
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) > 0.0) sv.push_back(i);
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  model.dual_coefs.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = x.row(sv[s]);
    model.dual_coefs(static_cast<Eigen::Index>(s)) = alpha(sv[s]) * ys[sv[s]];
  }
  model.bias = bias;

  if (config.fit_probability) {
    std::vector<double> margins(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      margins[i] = f(i) + bias;
    }
    FitPlatt(margins, ys, &model.platt_a, &model.platt_b);
    model.has_platt = true;
  }
  return model;
}

LdaScorer TrainLda(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  CADENCE_CHECK_DATA(n > 0 && static_cast<std::size_t>(n) == y.size(),
                     "lda training needs matching samples and labels");
  if (!x.allFinite()) {
    ThrowData("lda features must be finite");
  }

  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mu1 = Eigen::VectorXd::Zero(d);
  Eigen::Index n0 = 0, n1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] == 1) {
      mu1 += x.row(i).transpose();
      ++n1;
    } else {
      mu0 += x.row(i).transpose();
      ++n0;
    }
  }
  if (n0 == 0 || n1 == 0) {
    ThrowData("lda training set contains a single class",
              ErrorCode::kSingularModel);
  }
  mu0 /= static_cast<double>(n0);
  mu1 /= static_cast<double>(n1);

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd dev =
        x.row(i).transpose() - (y[i] == 1 ? mu1 : mu0);
    sw += dev * dev.transpose();
  }

  const Eigen::VectorXd dmu = mu1 - mu0;
  const auto solve = [&](const Eigen::MatrixXd& m) {
    return Eigen::VectorXd(m.ldlt().solve(dmu));
  };
  Eigen::VectorXd w = solve(sw);
  const double residual = (sw * w - dmu).norm();
  if (!w.allFinite() || residual > 1e-6 * (dmu.norm() + 1.0)) {
    // Singular within-class scatter: add the documented ridge.
    double eps = 1e-6 * sw.trace();
    if (eps <= 0.0) eps = 1e-12;
    w = solve(sw + eps * Eigen::MatrixXd::Identity(d, d));
  }
  if (!w.allFinite() || w.norm() == 0.0) {
    ThrowNumeric("lda projection collapsed to zero",
                 ErrorCode::kSingularModel);
  }

  LdaScorer scorer;
  scorer.w = w;
  scorer.threshold = 0.5 * (w.dot(mu1) + w.dot(mu0));
  return scorer;
}

// ---------------------------------------------------------------------------
// LSTM

namespace {

struct LstmTrace {
  // Per timestep: gate activations, cell states, hidden states.
  std::vector<Eigen::VectorXd> xs;  // masked inputs
  std::vector<Eigen::VectorXd> gi, gf, gg, go, c, h, tanh_c;
};

double ForwardTraced(const LstmModel& m, const Eigen::MatrixXd& seq,
                     const Eigen::MatrixXd* emb_mask,
                     const Eigen::VectorXd* out_mask, LstmTrace* trace,
                     Eigen::VectorXd* h_masked_out) {
  const int hid = m.hidden;
  const Eigen::Index steps = seq.rows();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(hid);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(hid);

  for (Eigen::Index t = 0; t < steps; ++t) {
    Eigen::VectorXd x = seq.row(t).transpose();
    if (emb_mask != nullptr) {
      x = x.cwiseProduct(emb_mask->row(t).transpose());
    }
    const Eigen::VectorXd z = m.w_x * x + m.w_h * h + m.b;
    Eigen::VectorXd gi(hid), gf(hid), gg(hid), go(hid), tanh_c(hid);
    Eigen::VectorXd c_new(hid), h_new(hid);
    for (int u = 0; u < hid; ++u) {
      gi(u) = Sigmoid(z(u));
      gf(u) = Sigmoid(z(hid + u));
      gg(u) = std::tanh(z(2 * hid + u));
      go(u) = Sigmoid(z(3 * hid + u));
      c_new(u) = gf(u) * c(u) + gi(u) * gg(u);
      tanh_c(u) = std::tanh(c_new(u));
      h_new(u) = go(u) * tanh_c(u);
    }
    if (trace != nullptr) {
      trace->xs.push_back(x);
      trace->gi.push_back(gi);
      trace->gf.push_back(gf);
      trace->gg.push_back(gg);
      trace->go.push_back(go);
      trace->c.push_back(c_new);
      trace->h.push_back(h_new);
      trace->tanh_c.push_back(tanh_c);
    }
    c = c_new;
    h = h_new;
  }

  Eigen::VectorXd h_masked = h;
  if (out_mask != nullptr) {
    h_masked = h.cwiseProduct(*out_mask);
  }
  if (h_masked_out != nullptr) *h_masked_out = h_masked;
  return Sigmoid(m.dense_w.dot(h_masked) + m.dense_b);
}

double BceLoss(double p, int label) {
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

}  // namespace

double LstmModel::Forward(const Eigen::MatrixXd& seq) const {
  CADENCE_CHECK_DATA(seq.cols() == input_dim,
                     "lstm input width does not match the model");
  return ForwardTraced(*this, seq, nullptr, nullptr, nullptr, nullptr);
}

LstmModel InitLstm(int input_dim, const LstmConfig& config) {
  CADENCE_CHECK_CONFIG(input_dim > 0 && config.hidden > 0,
                       "lstm dimensions must be positive");
  LstmModel m;
  m.input_dim = input_dim;
  m.hidden = config.hidden;
  const int hid = config.hidden;

  Rng rng = Rng(config.seed).Derive(0x1574);
  const auto glorot = [&rng](Eigen::MatrixXd& w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index cc = 0; cc < w.cols(); ++cc) {
        w(r, cc) = rng.Uniform(-limit, limit);
      }
    }
  };
  m.w_x.resize(4 * hid, input_dim);
  glorot(m.w_x, input_dim, 4 * hid);
  m.w_h.resize(4 * hid, hid);
  glorot(m.w_h, hid, 4 * hid);
  m.b = Eigen::VectorXd::Zero(4 * hid);
  m.b.segment(hid, hid).setOnes();  // forget-gate bias starts open

  Eigen::MatrixXd dw(hid, 1);
  glorot(dw, hid, 1);
  m.dense_w = dw.col(0);
  m.dense_b = 0.0;
  return m;
}

double LstmBatchLoss(const LstmModel& model,
                     const std::vector<Eigen::MatrixXd>& batch,
                     const std::vector<int>& labels) {
  CADENCE_CHECK_DATA(!batch.empty() && batch.size() == labels.size(),
                     "lstm loss needs matching sequences and labels");
  double loss = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    loss += BceLoss(model.Forward(batch[s]), labels[s]);
  }
  return loss / static_cast<double>(batch.size());
}

LstmGradients LstmLossGradients(
    const LstmModel& model, const std::vector<Eigen::MatrixXd>& batch,
    const std::vector<int>& labels,
    const std::vector<Eigen::MatrixXd>* embedding_masks,
    const std::vector<Eigen::VectorXd>* output_masks, double* loss_out) {
  CADENCE_CHECK_DATA(!batch.empty() && batch.size() == labels.size(),
                     "lstm gradients need matching sequences and labels");
  const int hid = model.hidden;

  LstmGradients g;
  g.w_x = Eigen::MatrixXd::Zero(4 * hid, model.input_dim);
  g.w_h = Eigen::MatrixXd::Zero(4 * hid, hid);
  g.b = Eigen::VectorXd::Zero(4 * hid);
  g.dense_w = Eigen::VectorXd::Zero(hid);
  g.dense_b = 0.0;

  double loss = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Eigen::MatrixXd* emb_mask =
        embedding_masks != nullptr ? &(*embedding_masks)[s] : nullptr;
    const Eigen::VectorXd* out_mask =
        output_masks != nullptr ? &(*output_masks)[s] : nullptr;

    LstmTrace trace;
    Eigen::VectorXd h_masked;
    const double p =
        ForwardTraced(model, batch[s], emb_mask, out_mask, &trace, &h_masked);
    loss += BceLoss(p, labels[s]);

    // d loss / d logit for the sigmoid + BCE pair.
    const double dlogit = p - (labels[s] == 1 ? 1.0 : 0.0);
    g.dense_w += dlogit * h_masked;
    g.dense_b += dlogit;

    Eigen::VectorXd dh = dlogit * model.dense_w;
    if (out_mask != nullptr) dh = dh.cwiseProduct(*out_mask);
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(hid);

    for (Eigen::Index t = static_cast<Eigen::Index>(trace.xs.size()) - 1;
         t >= 0; --t) {
      const Eigen::VectorXd& gi = trace.gi[t];
      const Eigen::VectorXd& gf = trace.gf[t];
      const Eigen::VectorXd& gg = trace.gg[t];
      const Eigen::VectorXd& go = trace.go[t];
      const Eigen::VectorXd& tanh_c = trace.tanh_c[t];
      const Eigen::VectorXd c_prev =
          t > 0 ? trace.c[t - 1] : Eigen::VectorXd::Zero(hid);
      const Eigen::VectorXd h_prev =
          t > 0 ? trace.h[t - 1] : Eigen::VectorXd::Zero(hid);

      dc += dh.cwiseProduct(go).cwiseProduct(
          (1.0 - tanh_c.array().square()).matrix());

      Eigen::VectorXd dz(4 * hid);
      for (int u = 0; u < hid; ++u) {
        const double dzi = dc(u) * gg(u) * gi(u) * (1.0 - gi(u));
        const double dzf = dc(u) * c_prev(u) * gf(u) * (1.0 - gf(u));
        const double dzg = dc(u) * gi(u) * (1.0 - gg(u) * gg(u));
        const double dzo = dh(u) * tanh_c(u) * go(u) * (1.0 - go(u));
        dz(u) = dzi;
        dz(hid + u) = dzf;
        dz(2 * hid + u) = dzg;
        dz(3 * hid + u) = dzo;
      }

      g.w_x += dz * trace.xs[t].transpose();
      g.w_h += dz * h_prev.transpose();
      g.b += dz;

      dh = model.w_h.transpose() * dz;
      dc = dc.cwiseProduct(gf);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  g.w_x *= inv_n;
  g.w_h *= inv_n;
  g.b *= inv_n;
  g.dense_w *= inv_n;
  g.dense_b *= inv_n;
  if (loss_out != nullptr) *loss_out = loss * inv_n;
  return g;
}

LstmModel TrainLstm(const std::vector<Eigen::MatrixXd>& sequences,
                    const std::vector<int>& labels, const LstmConfig& config) {
  if (sequences.empty()) {
    ThrowData("lstm training set is empty", ErrorCode::kEmptyInput);
  }
  CADENCE_CHECK_DATA(sequences.size() == labels.size(),
                     "lstm training needs matching sequences and labels");
  const bool has_pos = std::any_of(labels.begin(), labels.end(),
                                   [](int v) { return v == 1; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(),
                                   [](int v) { return v != 1; });
  if (!has_pos || !has_neg) {
    ThrowData("lstm training set contains a single class",
              ErrorCode::kSingularModel);
  }
  const Eigen::Index input_dim = sequences[0].cols();
  for (const auto& seq : sequences) {
    CADENCE_CHECK_DATA(seq.cols() == input_dim && seq.allFinite(),
                       "lstm sequences must be finite with equal width");
  }

  LstmModel model = InitLstm(static_cast<int>(input_dim), config);
  const int hid = model.hidden;

  // Adam moments, one pair per tensor.
  LstmGradients m1, m2;
  m1.w_x = Eigen::MatrixXd::Zero(4 * hid, input_dim);
  m1.w_h = Eigen::MatrixXd::Zero(4 * hid, hid);
  m1.b = Eigen::VectorXd::Zero(4 * hid);
  m1.dense_w = Eigen::VectorXd::Zero(hid);
  m2 = m1;
  long step = 0;

  const double keep = 1.0 - config.dropout;
  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // One stream per epoch; a fold-specific seed upstream gives the
    // per-(fold, epoch) streams the reproducibility contract asks for.
    Rng rng = Rng(config.seed).Derive(0xe90c + static_cast<std::uint64_t>(epoch));
    rng.Shuffle(order);

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<Eigen::MatrixXd> batch;
      std::vector<int> batch_labels;
      std::vector<Eigen::MatrixXd> emb_masks;
      std::vector<Eigen::VectorXd> out_masks;
      for (std::size_t idx = start; idx < stop; ++idx) {
        const auto& seq = sequences[order[idx]];
        batch.push_back(seq);
        batch_labels.push_back(labels[order[idx]]);
        Eigen::MatrixXd em(seq.rows(), seq.cols());
        for (Eigen::Index r = 0; r < em.rows(); ++r) {
          for (Eigen::Index cc = 0; cc < em.cols(); ++cc) {
            em(r, cc) = rng.Uniform() < config.dropout ? 0.0 : 1.0 / keep;
          }
        }
        emb_masks.push_back(std::move(em));
        Eigen::VectorXd om(hid);
        for (int u = 0; u < hid; ++u) {
          om(u) = rng.Uniform() < config.dropout ? 0.0 : 1.0 / keep;
        }
        out_masks.push_back(std::move(om));
      }

      const LstmGradients g = LstmLossGradients(model, batch, batch_labels,
                                                &emb_masks, &out_masks);
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      const auto adam = [&](auto& param, auto& mom1, auto& mom2,
                            const auto& grad) {
        mom1 = config.beta1 * mom1 + (1.0 - config.beta1) * grad;
        mom2 = (config.beta2 * mom2.array() +
                (1.0 - config.beta2) * grad.array().square())
                   .matrix();
        param.array() -= config.learning_rate * (mom1.array() / bc1) /
                         ((mom2.array() / bc2).sqrt() + config.epsilon);
      };
      adam(model.w_x, m1.w_x, m2.w_x, g.w_x);
      adam(model.w_h, m1.w_h, m2.w_h, g.w_h);
      adam(model.b, m1.b, m2.b, g.b);
      adam(model.dense_w, m1.dense_w, m2.dense_w, g.dense_w);
      // Scalar bias follows the same schedule.
      m1.dense_b = config.beta1 * m1.dense_b + (1.0 - config.beta1) * g.dense_b;
      m2.dense_b =
          config.beta2 * m2.dense_b + (1.0 - config.beta2) * g.dense_b * g.dense_b;
      model.dense_b -= config.learning_rate * (m1.dense_b / bc1) /
                       (std::sqrt(m2.dense_b / bc2) + config.epsilon);
    }
  }
  return model;
}

LstmModel TrainLstm(const std::vector<text::PaddedIntervention>& interventions,
                    const text::EmbeddingTable& table,
                    const std::vector<int>& labels, const LstmConfig& config) {
  CADENCE_CHECK_DATA(interventions.size() == labels.size(),
                     "lstm training needs matching interventions and labels");
  std::vector<Eigen::MatrixXd> sequences;
  std::vector<int> kept;
  for (std::size_t i = 0; i < interventions.size(); ++i) {
    if (interventions[i].empty) continue;
    sequences.push_back(text::EmbedIntervention(interventions[i], table));
    kept.push_back(labels[i]);
  }
  if (sequences.empty()) {
    ThrowData("lstm training set has no nonempty interventions",
              ErrorCode::kEmptyInput);
  }
  return TrainLstm(sequences, kept, config);
}

double LstmPredictSubject(
    const LstmModel& model,
    const std::vector<text::PaddedIntervention>& interventions,
    const text::EmbeddingTable& table) {
  double sum = 0.0;
  int used = 0;
  for (const auto& iv : interventions) {
    if (iv.empty) continue;
    sum += model.Forward(text::EmbedIntervention(iv, table));
    ++used;
  }
  if (used == 0) {
    ThrowData("subject has no nonempty interventions to score",
              ErrorCode::kEmptyInput);
  }
  return sum / static_cast<double>(used);
}

double AggregateWindowScores(const std::vector<double>& window_scores) {
  if (window_scores.empty()) {
    ThrowData("cannot aggregate an empty score list",
              ErrorCode::kEmptyInput);
  }
  double sum = 0.0;
  for (double s : window_scores) sum += s;
  return sum / static_cast<double>(window_scores.size());
}

}  // namespace cadence::classifiers
