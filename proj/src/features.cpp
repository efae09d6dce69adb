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

#include "cadence/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "cadence/common.hpp"

namespace cadence::features {

namespace {

constexpr double kEps = 1e-12;

const std::vector<std::string>& StatNames() {
  static const std::vector<std::string> v = {"mean", "std",   "skewness",
                                             "kurtosis", "min", "max",
                                             "range",    "slope", "regerr"};
  return v;
}

// Nine statistics of one track segment. Slope is per frame step; regerr is
// the RMS residual of the least-squares line.
std::array<double, 9> TrackStats(const double* y, int n) {
  std::array<double, 9> s{};
  double mean = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    mean += y[i];
    mn = std::min(mn, y[i]);
    mx = std::max(mx, y[i]);
  }
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = y[i] - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double sd = std::sqrt(m2);

  // Least squares on x = 0..n-1: slope = cov(x,y)/var(x).
  double slope = 0.0;
  if (n > 1) {
    const double xb = (n - 1) / 2.0;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < n; ++i) {
      sxy += (i - xb) * (y[i] - mean);
      sxx += (i - xb) * (i - xb);
    }
    slope = sxy / sxx;
  }
  double rss = 0.0;
  const double xb = (n - 1) / 2.0;
  for (int i = 0; i < n; ++i) {
    const double fit = mean + slope * (i - xb);
    rss += (y[i] - fit) * (y[i] - fit);
  }

  s[0] = mean;
  s[1] = sd;
  s[2] = sd > kEps ? m3 / (sd * sd * sd) : 0.0;
  s[3] = sd > kEps ? m4 / (m2 * m2) - 3.0 : 0.0;
  s[4] = mn;
  s[5] = mx;
  s[6] = mx - mn;
  s[7] = slope;
  s[8] = std::sqrt(rss / n);
  return s;
}

}  // namespace

FunctionalSet ComputeFunctionals(const dsp::FrameSeries& series,
                                 const FunctionalConfig& cfg) {
  CADENCE_CHECK_CONFIG(cfg.window_len > 0.0 && cfg.stride > 0.0,
                       "functional window and stride must be positive");
  CADENCE_CHECK_DATA(!series.frames.empty(), "frame series is empty");

  const auto& lld_names = dsp::FrameSeries::LldNames();
  const int n_lld = static_cast<int>(lld_names.size());
  const int n_frames = static_cast<int>(series.frames.size());

  FunctionalSet out;
  for (const auto& lld : lld_names) {
    for (const auto& stat : StatNames()) out.names.push_back(lld + "." + stat);
  }

  // Tracks as columns for contiguous per-window slices.
  Eigen::MatrixXd tracks(n_frames, n_lld);
  for (int i = 0; i < n_frames; ++i) {
    const auto row = series.LldRow(i);
    for (int j = 0; j < n_lld; ++j) tracks(i, j) = row[j];
  }

  std::vector<std::pair<int, int>> spans;  // [frame_begin, frame_end)
  const double t_total = series.duration;
  if (t_total + 1e-9 < cfg.window_len) {
    // Too short for one full window: single truncated window, flagged.
    spans.emplace_back(0, n_frames);
    out.window_starts.push_back(0.0);
    out.truncated = true;
  } else {
    for (double start = 0.0; start + cfg.window_len <= t_total + 1e-9;
         start += cfg.stride) {
      int b = n_frames, e = n_frames;
      for (int i = 0; i < n_frames; ++i) {
        if (series.frames[i].t0 >= start - 1e-9) {
          b = i;
          break;
        }
      }
      for (int i = b; i < n_frames; ++i) {
        if (series.frames[i].t0 >= start + cfg.window_len - 1e-9) {
          e = i;
          break;
        }
      }
      if (e > b) {
        spans.emplace_back(b, e);
        out.window_starts.push_back(start);
      }
    }
  }

  for (const auto& [b, e] : spans) {
    Eigen::VectorXd v(n_lld * 9);
    for (int j = 0; j < n_lld; ++j) {
      std::vector<double> seg(tracks.col(j).data() + b, tracks.col(j).data() + e);
      const auto stats = TrackStats(seg.data(), static_cast<int>(seg.size()));
      for (int k = 0; k < 9; ++k) v(j * 9 + k) = stats[k];
    }
    out.vectors.push_back(std::move(v));
  }
  return out;
}

namespace {

// Pearson correlation with a zero fill-in for constant columns.
double Pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean(), mb = b.mean();
  const Eigen::VectorXd da = a.array() - ma;
  const Eigen::VectorXd db = b.array() - mb;
  const double va = da.squaredNorm(), vb = db.squaredNorm();
  if (va <= kEps || vb <= kEps) return 0.0;
  return da.dot(db) / std::sqrt(va * vb);
}

struct CorrCache {
  Eigen::VectorXd label_corr;  // |r(f, y)|
  Eigen::MatrixXd feat_corr;   // |r(fi, fj)|
};

CorrCache BuildCorrCache(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const auto n = x.rows();
  const auto p = x.cols();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[i];

  CorrCache c;
  c.label_corr.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) c.label_corr(j) = std::abs(Pearson(x.col(j), y));

  // Standardize once; the correlation matrix is then a single product.
  Eigen::MatrixXd z(n, p);
  Eigen::VectorXd ok(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double m = x.col(j).mean();
    Eigen::VectorXd d = x.col(j).array() - m;
    const double norm = d.norm();
    ok(j) = norm > kEps ? 1.0 : 0.0;
    z.col(j) = norm > kEps ? Eigen::VectorXd(d / norm) : Eigen::VectorXd::Zero(n);
  }
  c.feat_corr = (z.transpose() * z).cwiseAbs();
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (ok(i) == 0.0 || ok(j) == 0.0) c.feat_corr(i, j) = 0.0;
    }
    c.feat_corr(i, i) = 1.0;
  }
  return c;
}

double MeritFromCache(const CorrCache& c, const std::vector<int>& subset) {
  const int k = static_cast<int>(subset.size());
  if (k == 0) return 0.0;
  double rcf = 0.0;
  for (int f : subset) rcf += c.label_corr(f);
  rcf /= k;
  double rff = 0.0;
  if (k > 1) {
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) rff += c.feat_corr(subset[i], subset[j]);
    }
    rff /= k * (k - 1) / 2.0;
  }
  const double denom = std::sqrt(k + k * (k - 1.0) * rff);
  return denom > kEps ? k * rcf / denom : 0.0;
}

}  // namespace

double CfsMerit(const Eigen::MatrixXd& matrix, const std::vector<int>& labels,
                const std::vector<int>& subset) {
  CADENCE_CHECK_DATA(matrix.rows() == static_cast<Eigen::Index>(labels.size()),
                     "labels must match matrix rows");
  const CorrCache cache = BuildCorrCache(matrix, labels);
  return MeritFromCache(cache, subset);
}

CfsSelection CfsSelect(const Eigen::MatrixXd& matrix, const std::vector<int>& labels,
                       int k_max) {
  CADENCE_CHECK_DATA(matrix.rows() == static_cast<Eigen::Index>(labels.size()),
                     "labels must match matrix rows");
  CADENCE_CHECK_DATA(matrix.rows() >= 3, "need at least 3 rows for selection");
  CADENCE_CHECK_CONFIG(k_max >= 1, "k_max must be positive");
  const CorrCache cache = BuildCorrCache(matrix, labels);
  const int p = static_cast<int>(matrix.cols());

  struct Node {
    double merit;
    std::vector<int> subset;
    // Highest merit first; lexicographically smallest subset on ties keeps
    // the search order deterministic.
    bool operator<(const Node& o) const {
      if (merit != o.merit) return merit > o.merit;
      return subset < o.subset;
    }
  };

  std::set<Node> frontier;
  std::set<std::vector<int>> visited;
  frontier.insert({0.0, {}});
  visited.insert({});

  std::vector<int> best;
  double best_merit = 0.0;
  int stale = 0;
  const int max_stale = 5;

  while (!frontier.empty() && stale < max_stale) {
    const Node node = *frontier.begin();
    frontier.erase(frontier.begin());
    bool improved = false;
    if (static_cast<int>(node.subset.size()) < k_max) {
      for (int f = 0; f < p; ++f) {
        if (std::binary_search(node.subset.begin(), node.subset.end(), f)) continue;
        std::vector<int> child = node.subset;
        child.insert(std::upper_bound(child.begin(), child.end(), f), f);
        if (!visited.insert(child).second) continue;
        const double m = MeritFromCache(cache, child);
        if (m > best_merit + kEps) {
          best_merit = m;
          best = child;
          improved = true;
        }
        frontier.insert({m, std::move(child)});
      }
    }
    stale = improved ? 0 : stale + 1;
  }

  CfsSelection sel;
  sel.selected_indices = best;
  sel.merit = best_merit;
  return sel;
}

Eigen::VectorXd FluencyVector::AsVector() const {
  Eigen::VectorXd v(11);
  v << n_syllables, rate_of_speech, speaking_duration, f0_mean, f0_median, f0_min,
      pron_posterior, mean_voiced_interval, mean_pair_duration, mean_energy,
      energy_mean_to_std_ratio;
  return v;
}

const std::vector<std::string>& FluencyVector::Names() {
  static const std::vector<std::string> v = {
      "n_syllables",     "rate_of_speech",
      "speaking_duration", "f0_mean",
      "f0_median",       "f0_min",
      "pron_posterior",  "mean_voiced_interval",
      "mean_pair_duration", "mean_energy",
      "energy_mean_to_std_ratio"};
  return v;
}

FluencyVector ComputeFluency(const Recording& rec, const dsp::FrameSeries& series,
                             const dsp::VadSegmentation& vad,
                             const SyllableConfig& cfg) {
  CADENCE_CHECK_DATA(!vad.segments.empty(), "empty VAD segmentation");
  FluencyVector out;
  const double duration = rec.duration();
  const double voiced_time = vad.TotalVoiced();
  if (voiced_time <= 0.0) {
    out.no_speech = true;
    return out;
  }

  // Frame membership by frame start time; VAD boundaries sit on frame
  // starts so the assignment is exact.
  const int n_frames = static_cast<int>(series.frames.size());
  auto segment_frames = [&](const dsp::VadSegment& s) {
    std::pair<int, int> span{n_frames, n_frames};
    for (int i = 0; i < n_frames; ++i) {
      const double t = series.frames[i].t0;
      if (t >= s.start - 1e-9 && span.first == n_frames) span.first = i;
      if (t >= s.end - 1e-9) {
        span.second = i;
        break;
      }
    }
    return span;
  };

  // Syllable nuclei: energy peaks inside voiced segments. The first peak of
  // a segment always counts; later peaks must clear the prominence over the
  // lowest dip since the previous accepted peak and the distance floor.
  int n_syllables = 0;
  const double lin_floor = 1e-12;
  std::vector<double> voiced_f0;
  double vp_sum = 0.0;
  int vp_n = 0;
  double energy_sum = 0.0, energy_sq = 0.0;
  int energy_n = 0;

  for (const auto& seg : vad.segments) {
    if (!seg.voiced) continue;
    const auto [b, e] = segment_frames(seg);
    if (e <= b) continue;
    int last_accept = -1;
    double run_min = std::numeric_limits<double>::infinity();
    for (int i = b; i < e; ++i) {
      const double ei = series.frames[i].energy_db;
      const bool rising = i == b || series.frames[i - 1].energy_db <= ei;
      const bool falling = i + 1 == e || series.frames[i + 1].energy_db <= ei;
      if (rising && falling) {
        bool accept = false;
        if (last_accept < 0) {
          accept = true;
        } else {
          const double dist = series.frames[i].t0 - series.frames[last_accept].t0;
          accept = dist >= cfg.min_distance - 1e-9 &&
                   ei - run_min >= cfg.min_prominence_db;
        }
        if (accept) {
          ++n_syllables;
          last_accept = i;
          run_min = std::numeric_limits<double>::infinity();
        }
      }
      run_min = std::min(run_min, ei);

      if (series.frames[i].f0 > 0.0) voiced_f0.push_back(series.frames[i].f0);
      vp_sum += series.frames[i].voicing_prob;
      ++vp_n;
      const double lin = std::pow(10.0, ei / 10.0);
      energy_sum += std::max(lin, lin_floor);
      energy_sq += std::max(lin, lin_floor) * std::max(lin, lin_floor);
      ++energy_n;
    }
  }

  out.n_syllables = n_syllables;
  out.rate_of_speech = duration > 0.0 ? n_syllables / duration : 0.0;
  out.speaking_duration = voiced_time;

  if (!voiced_f0.empty()) {
    std::sort(voiced_f0.begin(), voiced_f0.end());
    double sum = 0.0;
    for (double f : voiced_f0) sum += f;
    out.f0_mean = sum / static_cast<double>(voiced_f0.size());
    const std::size_t n = voiced_f0.size();
    out.f0_median = n % 2 == 1 ? voiced_f0[n / 2]
                               : 0.5 * (voiced_f0[n / 2 - 1] + voiced_f0[n / 2]);
    out.f0_min = voiced_f0.front();
  }
  out.pron_posterior = vp_n > 0 ? vp_sum / vp_n : 0.0;

  int n_voiced_segs = 0;
  double voiced_len_sum = 0.0;
  double pair_sum = 0.0;
  int pair_n = 0;
  for (std::size_t i = 0; i < vad.segments.size(); ++i) {
    const auto& s = vad.segments[i];
    if (!s.voiced) continue;
    ++n_voiced_segs;
    voiced_len_sum += s.end - s.start;
    if (i + 1 < vad.segments.size() && !vad.segments[i + 1].voiced) {
      pair_sum += (s.end - s.start) +
                  (vad.segments[i + 1].end - vad.segments[i + 1].start);
      ++pair_n;
    }
  }
  out.mean_voiced_interval = n_voiced_segs > 0 ? voiced_len_sum / n_voiced_segs : 0.0;
  out.mean_pair_duration = pair_n > 0 ? pair_sum / pair_n : 0.0;

  if (energy_n > 0) {
    const double mean = energy_sum / energy_n;
    const double var = std::max(0.0, energy_sq / energy_n - mean * mean);
    out.mean_energy = mean;
    out.energy_mean_to_std_ratio = mean / std::max(std::sqrt(var), 1e-8);
  }
  return out;
}

}  // namespace cadence::features
