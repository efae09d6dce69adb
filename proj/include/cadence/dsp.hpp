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

#ifndef CADENCE_DSP_HPP_
#define CADENCE_DSP_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cadence/wav.hpp"

namespace cadence::dsp {

enum class WindowKind { kHamming, kHann };

struct FrameConfig {
  double frame_len = 0.025;  // seconds
  double hop = 0.010;        // seconds
  WindowKind window = WindowKind::kHamming;
  int fft_size = 512;

  // F0 search band and the normalized-correlation level below which a frame
  // is called unvoiced.
  double f0_min = 60.0;
  double f0_max = 400.0;
  double voicing_threshold = 0.45;

  // Energy VAD: threshold sits vad_margin_db above the 10th-percentile frame
  // energy; voiced runs are extended by vad_hangover frames.
  double vad_margin_db = 8.0;
  int vad_hangover = 2;
};

// Throws a config error unless hop <= frame_len, fft_size is a power of two
// covering one frame, and the F0 band is ordered and positive.
void ValidateConfig(const FrameConfig& cfg, int sample_rate);

// One analysis frame. Descriptor definitions (none of them standardized by
// name alone) are:
//   energy_db     10*log10(mean (w.x)^2), floored at -120 dB
//   loudness      (sum of bark-band powers)^0.3
//   mfcc          26 mel filters, orthonormal DCT-II; coefficient 0 replaced
//                 by log of the windowed frame L2 norm, so a positive gain g
//                 shifts mfcc[0] by exactly log(g) and leaves 1..12 unchanged
//   plp           bark filterbank, equal-loudness weighting, cube-root
//                 compression, LPC order 12, cepstral recursion, c0 = log gain
//   f0            normalized cross-correlation peak in the lag band with
//                 sub-harmonic correction; 0 when unvoiced or out of band
//   voicing_prob  the correlation peak value clamped to [0,1]
//   band energies mean power over spectrum bins inside 250-650 / 1k-4k Hz
//   rolloff25     lowest frequency holding 25% of total spectral power
//   flux          L2 distance between consecutive L1-normalized magnitude
//                 spectra (0 for the first frame)
//   entropy       Shannon entropy (nats) of the L1-normalized magnitudes;
//                 an all-zero frame counts as the uniform spectrum
//   skewness      third standardized moment of the magnitude distribution
//                 over frequency
//   sharpness     specific-loudness weighted bark centroid with the
//                 conventional high-band emphasis g(z)=1 below 15.8 bark and
//                 0.066*exp(0.171 z) above
//   harmonicity   10*log10(r/(1-r)) of the correlation peak r, clamped to
//                 [-20, 40] dB
//   flatness      geometric over arithmetic mean of the power spectrum
//   jitter_local  period perturbation over a 7-frame neighbourhood, 0 when
//                 fewer than two adjacent voiced frames fall inside
struct Frame {
  double t0 = 0.0;  // frame start time, seconds
  double energy_db = 0.0;
  double loudness = 0.0;
  std::array<double, 13> mfcc{};
  std::array<double, 13> dmfcc{};
  std::array<double, 13> ddmfcc{};
  std::array<double, 13> plp{};
  double f0 = 0.0;
  double voicing_prob = 0.0;
  double band_energy_250_650 = 0.0;
  double band_energy_1k_4k = 0.0;
  double spectral_rolloff25 = 0.0;
  double spectral_flux = 0.0;
  double spectral_entropy = 0.0;
  double spectral_skewness = 0.0;
  double sharpness = 0.0;
  double harmonicity = 0.0;
  double flatness = 0.0;
  double jitter_local = 0.0;
};

struct FrameSeries {
  FrameConfig config;
  int sample_rate = 0;
  double duration = 0.0;  // of the source recording, seconds
  std::vector<Frame> frames;

  // The 39 low-level descriptors the functional statistics run over, in a
  // fixed documented order.
  static const std::vector<std::string>& LldNames();
  std::vector<double> LldRow(std::size_t frame_idx) const;
};

struct VadSegment {
  double start = 0.0;
  double end = 0.0;
  bool voiced = false;
};

// Contiguous, non-overlapping, covers [0, duration].
struct VadSegmentation {
  std::vector<VadSegment> segments;
  double TotalVoiced() const;
  double TotalDuration() const;
};

// Full per-frame analysis. Throws a data error when the recording is shorter
// than one frame.
FrameSeries Analyze(const Recording& rec, const FrameConfig& cfg);

// Normalized cross-correlation pitch tracker over lags sr/fmax .. sr/fmin.
// Sub-harmonic correction walks down to the shortest strong peak whose
// multiple the global peak sits on; if that true period falls above fmax the
// frame reports f0 = 0 while keeping the measured peak as voicing_prob.
// Returns (f0 Hz or 0, voicing_prob in [0,1]).
std::pair<double, double> EstimateF0(const double* frame, std::size_t n,
                                     int sample_rate, double fmin = 60.0,
                                     double fmax = 400.0,
                                     double voicing_threshold = 0.45);

// Energy VAD with hangover smoothing. When the dynamic range of the frame
// energies is below the margin the whole recording is one segment, voiced
// iff its level clears an absolute -60 dB floor.
VadSegmentation Vad(const Recording& rec, const FrameConfig& cfg);

// Mean absolute difference of consecutive voiced periods over the mean
// voiced period. Needs at least two adjacent voiced frames, otherwise empty.
std::optional<double> JitterOfTrack(const std::vector<double>& f0_track);

// Frontend matrices for the embedding pipelines; rows are frames.
// MfccMatrix generalizes the filter/cepstrum counts (mfcc[0] keeps the
// log-norm convention above). PlpPitchFeatures stacks 13 PLP + f0 +
// voicing_prob and appends delta and delta-delta, 45 columns total.
Eigen::MatrixXd MfccMatrix(const Recording& rec, const FrameConfig& cfg,
                           int n_filters, int n_ceps);
Eigen::MatrixXd PlpPitchFeatures(const Recording& rec, const FrameConfig& cfg);

// Appends delta and delta-delta columns computed by two-frame linear
// regression with edge replication.
Eigen::MatrixXd AddDeltas(const Eigen::MatrixXd& feats);

// Low-level helpers, exposed so tests can cross-check against brute-force
// oracles.
std::vector<double> WindowCoefficients(WindowKind kind, std::size_t n);
// Power spectrum |FFT|^2 of a windowed frame zero-padded to fft_size;
// returns fft_size/2 + 1 bins.
std::vector<double> PowerSpectrum(const std::vector<double>& windowed, int fft_size);

// Per-frame CSV with one named column per descriptor.
void WriteFramesCsv(const FrameSeries& series, std::ostream& out);

}  // namespace cadence::dsp

#endif  // CADENCE_DSP_HPP_
