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

#ifndef CADENCE_FEATURES_HPP_
#define CADENCE_FEATURES_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cadence/dsp.hpp"
#include "cadence/wav.hpp"

namespace cadence::features {

// Statistical functionals of the 39 low-level descriptor tracks, computed
// over 3 s windows advancing by 2 s. Nine statistics per descriptor: mean,
// population std, skewness, excess kurtosis, min, max, range, least-squares
// slope (per frame step) and the regression residual RMS.
struct FunctionalSet {
  std::vector<std::string> names;        // "lld.stat", 39 * 9 entries
  std::vector<Eigen::VectorXd> vectors;  // one per window
  std::vector<double> window_starts;     // seconds, one per window
  bool truncated = false;  // recording shorter than one full window
};

struct FunctionalConfig {
  double window_len = 3.0;  // seconds
  double stride = 2.0;      // 3 s window with 1 s overlap
};

// Windows that would run past the end are dropped; a recording shorter than
// one window yields a single truncated window flagged as such.
FunctionalSet ComputeFunctionals(const dsp::FrameSeries& series,
                                 const FunctionalConfig& cfg = {});

// Correlation-based subset selection. Best-first forward search on the
// merit k*rcf / sqrt(k + k(k-1)*rff), where rcf is the mean absolute
// feature-label Pearson correlation of the subset and rff the mean absolute
// feature-feature correlation. Constant columns correlate as 0. The search
// stops after five expansions without improvement or at k_max features.
struct CfsSelection {
  std::vector<int> selected_indices;  // sorted, unique
  double merit = 0.0;
};

CfsSelection CfsSelect(const Eigen::MatrixXd& matrix, const std::vector<int>& labels,
                       int k_max = 57);

// Merit of an explicit subset under the same correlation conventions;
// exposed so tests can brute-force small search spaces.
double CfsMerit(const Eigen::MatrixXd& matrix, const std::vector<int>& labels,
                const std::vector<int>& subset);

// The 11 rhythm and prosody parameters. Syllables are energy peaks inside
// voiced segments (2 dB prominence over the intervening dip, 100 ms minimum
// spacing); pairs are a voiced segment followed by an unvoiced one.
struct FluencyVector {
  double n_syllables = 0.0;
  double rate_of_speech = 0.0;      // syllables per second of original duration
  double speaking_duration = 0.0;   // total voiced time, seconds
  double f0_mean = 0.0;
  double f0_median = 0.0;
  double f0_min = 0.0;
  double pron_posterior = 0.0;      // mean voicing probability, voiced frames
  double mean_voiced_interval = 0.0;
  double mean_pair_duration = 0.0;
  double mean_energy = 0.0;         // linear windowed frame energy
  double energy_mean_to_std_ratio = 0.0;
  bool no_speech = false;           // zero voiced time; speech stats zeroed

  Eigen::VectorXd AsVector() const;
  static const std::vector<std::string>& Names();
};

struct SyllableConfig {
  double min_prominence_db = 2.0;
  double min_distance = 0.100;  // seconds
};

FluencyVector ComputeFluency(const Recording& rec, const dsp::FrameSeries& series,
                             const dsp::VadSegmentation& vad,
                             const SyllableConfig& cfg = {});

}  // namespace cadence::features

#endif  // CADENCE_FEATURES_HPP_
