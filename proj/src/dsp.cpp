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

#include "cadence/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "cadence/common.hpp"

namespace cadence::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEnergyFloorDb = -120.0;
// Absolute level a degenerate (flat-energy) recording must clear to count
// as speech.
constexpr double kUniformDecisionFloorDb = -60.0;

bool IsPowerOfTwo(int x) { return x > 0 && (x & (x - 1)) == 0; }

struct Framing {
  int frame_samps = 0;
  int hop_samps = 0;
  int n_frames = 0;
};

Framing MakeFraming(const Recording& rec, const FrameConfig& cfg) {
  ValidateConfig(cfg, rec.sample_rate);
  Framing fr;
  fr.frame_samps = static_cast<int>(std::lround(cfg.frame_len * rec.sample_rate));
  fr.hop_samps = static_cast<int>(std::lround(cfg.hop * rec.sample_rate));
  const auto n = static_cast<long long>(rec.samples.size());
  if (n < fr.frame_samps) {
    ThrowData("recording shorter than one analysis frame", ErrorCode::kEmptyInput);
  }
  fr.n_frames = 1 + static_cast<int>((n - fr.frame_samps) / fr.hop_samps);
  return fr;
}

double HzToMel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }

// Unit-peak triangles, linear in mel, spanning 0..Nyquist.
std::vector<std::vector<double>> MelFilterbank(int n_filters, int n_bins,
                                               int fft_size, int sample_rate) {
  const double mel_max = HzToMel(sample_rate / 2.0);
  std::vector<double> pts(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i) pts[i] = mel_max * i / (n_filters + 1);
  std::vector<std::vector<double>> fb(n_filters, std::vector<double>(n_bins, 0.0));
  for (int k = 0; k < n_bins; ++k) {
    const double mel = HzToMel(static_cast<double>(k) * sample_rate / fft_size);
    for (int m = 0; m < n_filters; ++m) {
      if (mel > pts[m] && mel < pts[m + 2]) {
        fb[m][k] = mel <= pts[m + 1] ? (mel - pts[m]) / (pts[m + 1] - pts[m])
                                     : (pts[m + 2] - mel) / (pts[m + 2] - pts[m + 1]);
      }
    }
  }
  return fb;
}

double HzToBark(double f) { return 6.0 * std::asinh(f / 600.0); }
double BarkToHz(double z) { return 600.0 * std::sinh(z / 6.0); }

// Critical-band masking curve: steep low skirt, shallow high skirt, unity in
// the +-0.5 bark core.
double BarkMask(double d) {
  if (d < -1.3 || d > 2.5) return 0.0;
  if (d < -0.5) return std::pow(10.0, 2.5 * (d + 0.5));
  if (d <= 0.5) return 1.0;
  return std::pow(10.0, -(d - 0.5));
}

// 40-phon equal-loudness approximation, angular-frequency form.
double EqualLoudness(double f) {
  const double w2 = (2.0 * kPi * f) * (2.0 * kPi * f);
  const double num = (w2 + 56.8e6) * w2 * w2;
  const double den = (w2 + 6.3e6) * (w2 + 6.3e6) * (w2 + 0.38e9);
  return num / den;
}

struct BarkBank {
  std::vector<double> center_hz;
  std::vector<std::vector<double>> weights;  // per band, per bin
};

BarkBank BarkFilterbank(int n_bins, int fft_size, int sample_rate) {
  const double z_max = HzToBark(sample_rate / 2.0);
  const int n_bands = static_cast<int>(std::floor(z_max - 0.5));
  CADENCE_CHECK_CONFIG(n_bands >= 4, "sample rate too low for the bark filterbank");
  BarkBank bank;
  bank.weights.assign(n_bands, std::vector<double>(n_bins, 0.0));
  for (int b = 0; b < n_bands; ++b) {
    const double zc = b + 1.0;
    bank.center_hz.push_back(BarkToHz(zc));
    for (int k = 0; k < n_bins; ++k) {
      const double z = HzToBark(static_cast<double>(k) * sample_rate / fft_size);
      bank.weights[b][k] = BarkMask(z - zc);
    }
  }
  return bank;
}

// Orthonormal DCT-II rows over M bands; row 0 is unused by callers (the
// zeroth cepstrum carries the log-norm convention instead).
Eigen::MatrixXd DctRows(int n_ceps, int n_bands) {
  Eigen::MatrixXd d(n_ceps, n_bands);
  for (int n = 0; n < n_ceps; ++n) {
    for (int m = 0; m < n_bands; ++m) {
      const double scale = n == 0 ? std::sqrt(1.0 / n_bands) : std::sqrt(2.0 / n_bands);
      d(n, m) = scale * std::cos(kPi * n * (m + 0.5) / n_bands);
    }
  }
  return d;
}

// Autocorrelation lags 0..p of the symmetric extension of the band spectrum.
std::vector<double> AutocorrFromBands(const std::vector<double>& phi, int p) {
  const int m_bands = static_cast<int>(phi.size());
  const int q = m_bands + 2;
  std::vector<double> y(q);
  y[0] = phi.front();
  for (int m = 0; m < m_bands; ++m) y[m + 1] = phi[m];
  y[q - 1] = phi.back();
  std::vector<double> r(p + 1, 0.0);
  for (int i = 0; i <= p; ++i) {
    double acc = y[0] + (i % 2 == 0 ? y[q - 1] : -y[q - 1]);
    for (int m = 1; m <= q - 2; ++m) {
      acc += 2.0 * y[m] * std::cos(kPi * i * m / (q - 1));
    }
    r[i] = acc / (2.0 * (q - 1));
  }
  return r;
}

// Levinson-Durbin; returns prediction coefficients a[0..p] (a[0] = 1) and
// the residual energy.
std::pair<std::vector<double>, double> Levinson(const std::vector<double>& r, int p) {
  std::vector<double> a(p + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  if (err <= 0.0) return {a, 0.0};
  for (int i = 1; i <= p; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    std::vector<double> next = a;
    next[i] = k;
    for (int j = 1; j < i; ++j) next[j] = a[j] + k * a[i - j];
    a = std::move(next);
    err *= 1.0 - k * k;
    if (err < 1e-12) err = 1e-12;
  }
  return {a, err};
}

std::array<double, 13> LpcCepstrum(const std::vector<double>& a, double gain2) {
  std::array<double, 13> c{};
  c[0] = 0.5 * std::log(std::max(gain2, 1e-12));
  for (int n = 1; n <= 12; ++n) {
    double acc = -a[n];
    for (int k = 1; k < n; ++k) acc -= static_cast<double>(k) / n * c[k] * a[n - k];
    c[n] = acc;
  }
  return c;
}

std::array<double, 13> PlpFromPower(const std::vector<double>& power,
                                    const BarkBank& bank) {
  const int n_bands = static_cast<int>(bank.weights.size());
  std::vector<double> phi(n_bands, 0.0);
  for (int b = 0; b < n_bands; ++b) {
    double acc = 0.0;
    const auto& w = bank.weights[b];
    for (std::size_t k = 0; k < power.size(); ++k) acc += w[k] * power[k];
    acc = std::max(acc, 1e-10);
    phi[b] = std::pow(acc * EqualLoudness(bank.center_hz[b]), 0.33);
  }
  const auto r = AutocorrFromBands(phi, 12);
  const auto [a, gain2] = Levinson(r, 12);
  return LpcCepstrum(a, gain2);
}

std::vector<double> FrameEnergiesDb(const Recording& rec, const FrameConfig& cfg,
                                    const Framing& fr) {
  const auto window = WindowCoefficients(cfg.window, fr.frame_samps);
  std::vector<double> energies(fr.n_frames);
  for (int i = 0; i < fr.n_frames; ++i) {
    const int s0 = i * fr.hop_samps;
    double sumsq = 0.0;
    for (int t = 0; t < fr.frame_samps; ++t) {
      const double v = rec.samples[s0 + t] * window[t];
      sumsq += v * v;
    }
    energies[i] = std::max(kEnergyFloorDb,
                           10.0 * std::log10(sumsq / fr.frame_samps + 1e-12));
  }
  return energies;
}

// Regression deltas with two frames of context and edge replication.
template <typename Get, typename Set>
void RegressionDeltas(int n_frames, const Get& get, const Set& set) {
  for (int t = 0; t < n_frames; ++t) {
    const auto at = [&](int i) { return get(std::clamp(i, 0, n_frames - 1)); };
    set(t, (1.0 * (at(t + 1) - at(t - 1)) + 2.0 * (at(t + 2) - at(t - 2))) / 10.0);
  }
}

double HarmonicityDb(double r) {
  const double lo = -20.0, hi = 40.0;
  if (r <= 0.0) return lo;
  if (r >= 1.0) return hi;
  return std::clamp(10.0 * std::log10(r / (1.0 - r)), lo, hi);
}

}  // namespace

void ValidateConfig(const FrameConfig& cfg, int sample_rate) {
  CADENCE_CHECK_CONFIG(sample_rate > 0, "sample rate must be positive");
  CADENCE_CHECK_CONFIG(cfg.frame_len > 0.0 && cfg.hop > 0.0,
                       "frame_len and hop must be positive");
  CADENCE_CHECK_CONFIG(cfg.hop <= cfg.frame_len + 1e-12, "hop must not exceed frame_len");
  CADENCE_CHECK_CONFIG(IsPowerOfTwo(cfg.fft_size), "fft_size must be a power of two");
  CADENCE_CHECK_CONFIG(
      cfg.fft_size >= static_cast<int>(std::lround(cfg.frame_len * sample_rate)),
      "fft_size must cover one frame");
  CADENCE_CHECK_CONFIG(cfg.f0_min > 0.0 && cfg.f0_max > cfg.f0_min,
                       "f0 band must satisfy 0 < f0_min < f0_max");
  CADENCE_CHECK_CONFIG(cfg.vad_hangover >= 0, "vad_hangover must be >= 0");
}

std::vector<double> WindowCoefficients(WindowKind kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(2.0 * kPi * static_cast<double>(i) / (n - 1));
    w[i] = kind == WindowKind::kHamming ? 0.54 - 0.46 * c : 0.5 - 0.5 * c;
  }
  return w;
}

std::vector<double> PowerSpectrum(const std::vector<double>& windowed, int fft_size) {
  CADENCE_CHECK_CONFIG(IsPowerOfTwo(fft_size), "fft_size must be a power of two");
  CADENCE_CHECK_CONFIG(static_cast<int>(windowed.size()) <= fft_size,
                       "frame longer than fft_size");
  Eigen::FFT<double> fft;
  std::vector<double> padded(fft_size, 0.0);
  std::copy(windowed.begin(), windowed.end(), padded.begin());
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, padded);
  std::vector<double> power(fft_size / 2 + 1);
  for (int k = 0; k <= fft_size / 2; ++k) power[k] = std::norm(spec[k]);
  return power;
}

std::pair<double, double> EstimateF0(const double* frame, std::size_t n,
                                     int sample_rate, double fmin, double fmax,
                                     double voicing_threshold) {
  const int tau_band_min =
      std::max(2, static_cast<int>(std::floor(sample_rate / fmax)));
  int tau_max = static_cast<int>(std::ceil(sample_rate / fmin));
  tau_max = std::min<int>(tau_max, static_cast<int>(n) / 2);
  if (tau_max < tau_band_min) return {0.0, 0.0};

  std::vector<double> sq(n + 1, 0.0);
  for (std::size_t t = 0; t < n; ++t) sq[t + 1] = sq[t] + frame[t] * frame[t];

  std::vector<double> ncc(tau_max + 2, 0.0);
  for (int tau = 2; tau <= tau_max; ++tau) {
    const std::size_t w = n - tau;
    double dot = 0.0;
    for (std::size_t t = 0; t < w; ++t) dot += frame[t] * frame[t + tau];
    const double e1 = sq[w];
    const double e2 = sq[w + tau] - sq[tau];
    ncc[tau] = (e1 > 0.0 && e2 > 0.0) ? dot / std::sqrt(e1 * e2) : 0.0;
  }

  int tau_star = 0;
  double r_star = 0.0;
  for (int tau = tau_band_min; tau <= tau_max; ++tau) {
    if (ncc[tau] > r_star) {
      r_star = ncc[tau];
      tau_star = tau;
    }
  }
  if (tau_star == 0) return {0.0, 0.0};
  const double prob = std::clamp(r_star, 0.0, 1.0);

  // Walk down to the shortest strong peak the global peak is a multiple of;
  // that peak is the true period even when it lies above the search band.
  int tau0 = tau_star;
  for (int tau = 3; tau < tau_star; ++tau) {
    if (ncc[tau] < 0.9 * r_star) continue;
    if (!(ncc[tau] >= ncc[tau - 1] && ncc[tau] >= ncc[tau + 1])) continue;
    const double mult = std::round(static_cast<double>(tau_star) / tau);
    if (mult < 2.0) continue;
    if (std::abs(tau_star - mult * tau) <= std::max(1.0, 0.06 * tau_star)) {
      tau0 = tau;
      break;
    }
  }

  if (prob < voicing_threshold) return {0.0, prob};
  if (tau0 < tau_band_min) return {0.0, prob};  // true pitch above fmax

  double lag = tau0;
  if (tau0 > 2 && tau0 < tau_max) {
    const double ym1 = ncc[tau0 - 1], y0 = ncc[tau0], yp1 = ncc[tau0 + 1];
    const double denom = ym1 - 2.0 * y0 + yp1;
    if (std::abs(denom) > 1e-12) {
      lag += std::clamp((ym1 - yp1) / (2.0 * denom), -0.5, 0.5);
    }
  }
  const double f0 = std::clamp(sample_rate / lag, fmin, fmax);
  return {f0, prob};
}

std::optional<double> JitterOfTrack(const std::vector<double>& f0_track) {
  double diff_sum = 0.0;
  int diff_n = 0;
  double period_sum = 0.0;
  int period_n = 0;
  for (std::size_t i = 0; i < f0_track.size(); ++i) {
    if (f0_track[i] <= 0.0) continue;
    period_sum += 1.0 / f0_track[i];
    ++period_n;
    if (i + 1 < f0_track.size() && f0_track[i + 1] > 0.0) {
      diff_sum += std::abs(1.0 / f0_track[i + 1] - 1.0 / f0_track[i]);
      ++diff_n;
    }
  }
  if (diff_n == 0 || period_n == 0) return std::nullopt;
  const double mean_period = period_sum / period_n;
  if (mean_period <= 0.0) return std::nullopt;
  return (diff_sum / diff_n) / mean_period;
}

FrameSeries Analyze(const Recording& rec, const FrameConfig& cfg) {
  const Framing fr = MakeFraming(rec, cfg);
  const int n_bins = cfg.fft_size / 2 + 1;
  const auto window = WindowCoefficients(cfg.window, fr.frame_samps);
  const auto melfb = MelFilterbank(26, n_bins, cfg.fft_size, rec.sample_rate);
  const auto barkfb = BarkFilterbank(n_bins, cfg.fft_size, rec.sample_rate);
  const Eigen::MatrixXd dct = DctRows(13, 26);
  const double bin_hz = static_cast<double>(rec.sample_rate) / cfg.fft_size;

  FrameSeries out;
  out.config = cfg;
  out.sample_rate = rec.sample_rate;
  out.duration = rec.duration();
  out.frames.resize(fr.n_frames);

  Eigen::FFT<double> fft;
  std::vector<double> padded(cfg.fft_size);
  std::vector<std::complex<double>> spec;
  std::vector<double> power(n_bins), mag_norm(n_bins), prev_mag;

  // A dedicated 40 ms window centered on each frame keeps two periods of
  // the lowest F0 inside the correlation even with 25 ms analysis frames.
  const int f0_len = static_cast<int>(std::lround(0.040 * rec.sample_rate));
  std::vector<double> f0_buf(f0_len);

  for (int i = 0; i < fr.n_frames; ++i) {
    Frame& f = out.frames[i];
    const int s0 = i * fr.hop_samps;
    f.t0 = static_cast<double>(s0) / rec.sample_rate;

    std::fill(padded.begin(), padded.end(), 0.0);
    double sumsq = 0.0;
    for (int t = 0; t < fr.frame_samps; ++t) {
      const double v = rec.samples[s0 + t] * window[t];
      padded[t] = v;
      sumsq += v * v;
    }
    f.energy_db = std::max(kEnergyFloorDb,
                           10.0 * std::log10(sumsq / fr.frame_samps + 1e-12));

    fft.fwd(spec, padded);
    double total_power = 0.0, total_mag = 0.0;
    for (int k = 0; k < n_bins; ++k) {
      power[k] = std::norm(spec[k]);
      total_power += power[k];
      total_mag += std::abs(spec[k]);
    }

    // MFCC: log mel energies through the truncated DCT; c0 is log |frame|.
    f.mfcc[0] = std::log(std::sqrt(sumsq) + 1e-10);
    std::vector<double> log_mel(26);
    for (int m = 0; m < 26; ++m) {
      double e = 0.0;
      for (int k = 0; k < n_bins; ++k) e += melfb[m][k] * power[k];
      log_mel[m] = std::log(e + 1e-10);
    }
    for (int n = 1; n < 13; ++n) {
      double acc = 0.0;
      for (int m = 0; m < 26; ++m) acc += dct(n, m) * log_mel[m];
      f.mfcc[n] = acc;
    }

    // Bark band powers drive both the loudness sum and PLP.
    double bark_total = 0.0;
    for (const auto& w : barkfb.weights) {
      double e = 0.0;
      for (int k = 0; k < n_bins; ++k) e += w[k] * power[k];
      bark_total += e;
    }
    f.loudness = std::pow(std::max(bark_total, 0.0), 0.3);
    f.plp = PlpFromPower(power, barkfb);

    // Band energies as mean bin power inside the range.
    auto band_mean = [&](double lo, double hi) {
      double acc = 0.0;
      int cnt = 0;
      for (int k = 0; k < n_bins; ++k) {
        const double hz = k * bin_hz;
        if (hz >= lo && hz <= hi) {
          acc += power[k];
          ++cnt;
        }
      }
      return cnt > 0 ? acc / cnt : 0.0;
    };
    f.band_energy_250_650 = band_mean(250.0, 650.0);
    f.band_energy_1k_4k = band_mean(1000.0, 4000.0);

    if (total_power > 0.0) {
      double acc = 0.0;
      int k = 0;
      for (; k < n_bins; ++k) {
        acc += power[k];
        if (acc >= 0.25 * total_power) break;
      }
      f.spectral_rolloff25 = std::min(k, n_bins - 1) * bin_hz;
    }

    // Magnitude pmf over frequency for flux, entropy and skewness; an empty
    // spectrum counts as uniform.
    if (total_mag > 0.0) {
      for (int k = 0; k < n_bins; ++k) mag_norm[k] = std::abs(spec[k]) / total_mag;
    } else {
      std::fill(mag_norm.begin(), mag_norm.end(), 1.0 / n_bins);
    }
    if (!prev_mag.empty()) {
      double acc = 0.0;
      for (int k = 0; k < n_bins; ++k) {
        const double d = mag_norm[k] - prev_mag[k];
        acc += d * d;
      }
      f.spectral_flux = std::sqrt(acc);
    }
    prev_mag = mag_norm;

    double entropy = 0.0, mu = 0.0;
    for (int k = 0; k < n_bins; ++k) {
      if (mag_norm[k] > 0.0) entropy -= mag_norm[k] * std::log(mag_norm[k]);
      mu += mag_norm[k] * k * bin_hz;
    }
    f.spectral_entropy = entropy;
    double var = 0.0, m3 = 0.0;
    for (int k = 0; k < n_bins; ++k) {
      const double d = k * bin_hz - mu;
      var += mag_norm[k] * d * d;
      m3 += mag_norm[k] * d * d * d;
    }
    f.spectral_skewness = var > 1e-12 ? m3 / std::pow(var, 1.5) : 0.0;

    // Sharpness: specific loudness (band power^0.23) centroid over bark with
    // high-band emphasis.
    double sh_num = 0.0, sh_den = 0.0;
    for (std::size_t b = 0; b < barkfb.weights.size(); ++b) {
      double e = 0.0;
      for (int k = 0; k < n_bins; ++k) e += barkfb.weights[b][k] * power[k];
      const double nprime = std::pow(std::max(e, 0.0), 0.23);
      const double z = b + 1.0;
      const double g = z <= 15.8 ? 1.0 : 0.066 * std::exp(0.171 * z);
      sh_num += nprime * g * z;
      sh_den += nprime;
    }
    f.sharpness = sh_den > 1e-12 ? 0.11 * sh_num / sh_den : 0.0;

    double log_acc = 0.0;
    for (int k = 0; k < n_bins; ++k) log_acc += std::log(power[k] + 1e-20);
    const double gm = std::exp(log_acc / n_bins);
    const double am = total_power / n_bins + 1e-20;
    f.flatness = std::clamp(gm / am, 0.0, 1.0);

    // F0 over the dedicated centered window, zero padded at the edges.
    const int center = s0 + fr.frame_samps / 2;
    for (int t = 0; t < f0_len; ++t) {
      const int idx = center - f0_len / 2 + t;
      f0_buf[t] = (idx >= 0 && idx < static_cast<int>(rec.samples.size()))
                      ? rec.samples[idx]
                      : 0.0;
    }
    const auto [f0, vp] = EstimateF0(f0_buf.data(), f0_buf.size(), rec.sample_rate,
                                     cfg.f0_min, cfg.f0_max, cfg.voicing_threshold);
    f.f0 = f0;
    f.voicing_prob = vp;
    f.harmonicity = HarmonicityDb(vp);
  }

  // Second pass: deltas and local jitter need the finished tracks.
  for (int c = 0; c < 13; ++c) {
    RegressionDeltas(
        fr.n_frames, [&](int t) { return out.frames[t].mfcc[c]; },
        [&](int t, double v) { out.frames[t].dmfcc[c] = v; });
    RegressionDeltas(
        fr.n_frames, [&](int t) { return out.frames[t].dmfcc[c]; },
        [&](int t, double v) { out.frames[t].ddmfcc[c] = v; });
  }
  for (int i = 0; i < fr.n_frames; ++i) {
    const int lo = std::max(0, i - 3);
    const int hi = std::min(fr.n_frames - 1, i + 3);
    double diff_sum = 0.0, period_sum = 0.0;
    int diff_n = 0, period_n = 0;
    for (int j = lo; j <= hi; ++j) {
      const double fj = out.frames[j].f0;
      if (fj <= 0.0) continue;
      period_sum += 1.0 / fj;
      ++period_n;
      if (j + 1 <= hi && out.frames[j + 1].f0 > 0.0) {
        diff_sum += std::abs(1.0 / out.frames[j + 1].f0 - 1.0 / fj);
        ++diff_n;
      }
    }
    out.frames[i].jitter_local =
        (diff_n > 0 && period_sum > 0.0)
            ? (diff_sum / diff_n) / (period_sum / period_n)
            : 0.0;
  }
  return out;
}

VadSegmentation Vad(const Recording& rec, const FrameConfig& cfg) {
  const Framing fr = MakeFraming(rec, cfg);
  const std::vector<double> energies = FrameEnergiesDb(rec, cfg, fr);

  std::vector<double> sorted = energies;
  std::sort(sorted.begin(), sorted.end());
  const double p10 = sorted[static_cast<std::size_t>(0.1 * (sorted.size() - 1))];
  const double emax = sorted.back();

  std::vector<char> voiced(fr.n_frames, 0);
  if (emax - p10 < cfg.vad_margin_db) {
    // Degenerate dynamic range: the recording is all one thing.
    const char all = emax > kUniformDecisionFloorDb ? 1 : 0;
    std::fill(voiced.begin(), voiced.end(), all);
  } else {
    const double threshold = p10 + cfg.vad_margin_db;
    int hang = 0;
    for (int i = 0; i < fr.n_frames; ++i) {
      if (energies[i] >= threshold) {
        voiced[i] = 1;
        hang = cfg.vad_hangover;
      } else if (hang > 0) {
        voiced[i] = 1;
        --hang;
      }
    }
  }

  VadSegmentation seg;
  const double hop_s = static_cast<double>(fr.hop_samps) / rec.sample_rate;
  const double duration = rec.duration();
  int run_start = 0;
  for (int i = 1; i <= fr.n_frames; ++i) {
    if (i == fr.n_frames || voiced[i] != voiced[run_start]) {
      VadSegment s;
      s.start = run_start * hop_s;
      s.end = i == fr.n_frames ? duration : i * hop_s;
      s.voiced = voiced[run_start] != 0;
      seg.segments.push_back(s);
      run_start = i;
    }
  }
  return seg;
}

double VadSegmentation::TotalVoiced() const {
  double acc = 0.0;
  for (const auto& s : segments) {
    if (s.voiced) acc += s.end - s.start;
  }
  return acc;
}

double VadSegmentation::TotalDuration() const {
  return segments.empty() ? 0.0 : segments.back().end;
}

Eigen::MatrixXd MfccMatrix(const Recording& rec, const FrameConfig& cfg,
                           int n_filters, int n_ceps) {
  CADENCE_CHECK_CONFIG(n_filters >= n_ceps && n_ceps >= 2,
                       "need n_filters >= n_ceps >= 2");
  const Framing fr = MakeFraming(rec, cfg);
  const int n_bins = cfg.fft_size / 2 + 1;
  const auto window = WindowCoefficients(cfg.window, fr.frame_samps);
  const auto melfb = MelFilterbank(n_filters, n_bins, cfg.fft_size, rec.sample_rate);
  const Eigen::MatrixXd dct = DctRows(n_ceps, n_filters);

  Eigen::MatrixXd out(fr.n_frames, n_ceps);
  Eigen::FFT<double> fft;
  std::vector<double> padded(cfg.fft_size);
  std::vector<std::complex<double>> spec;
  std::vector<double> log_mel(n_filters);
  for (int i = 0; i < fr.n_frames; ++i) {
    const int s0 = i * fr.hop_samps;
    std::fill(padded.begin(), padded.end(), 0.0);
    double sumsq = 0.0;
    for (int t = 0; t < fr.frame_samps; ++t) {
      const double v = rec.samples[s0 + t] * window[t];
      padded[t] = v;
      sumsq += v * v;
    }
    fft.fwd(spec, padded);
    for (int m = 0; m < n_filters; ++m) {
      double e = 0.0;
      for (int k = 0; k < n_bins; ++k) e += melfb[m][k] * std::norm(spec[k]);
      log_mel[m] = std::log(e + 1e-10);
    }
    out(i, 0) = std::log(std::sqrt(sumsq) + 1e-10);
    for (int n = 1; n < n_ceps; ++n) {
      double acc = 0.0;
      for (int m = 0; m < n_filters; ++m) acc += dct(n, m) * log_mel[m];
      out(i, n) = acc;
    }
  }
  return out;
}

Eigen::MatrixXd PlpPitchFeatures(const Recording& rec, const FrameConfig& cfg) {
  const FrameSeries series = Analyze(rec, cfg);
  const auto n = static_cast<Eigen::Index>(series.frames.size());
  Eigen::MatrixXd base(n, 15);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Frame& f = series.frames[i];
    for (int c = 0; c < 13; ++c) base(i, c) = f.plp[c];
    base(i, 13) = f.f0;
    base(i, 14) = f.voicing_prob;
  }
  return AddDeltas(base);
}

Eigen::MatrixXd AddDeltas(const Eigen::MatrixXd& feats) {
  const auto t_n = feats.rows();
  const auto c_n = feats.cols();
  Eigen::MatrixXd out(t_n, 3 * c_n);
  out.leftCols(c_n) = feats;
  for (Eigen::Index c = 0; c < c_n; ++c) {
    RegressionDeltas(
        static_cast<int>(t_n), [&](int t) { return feats(t, c); },
        [&](int t, double v) { out(t, c_n + c) = v; });
    RegressionDeltas(
        static_cast<int>(t_n), [&](int t) { return out(t, c_n + c); },
        [&](int t, double v) { out(t, 2 * c_n + c) = v; });
  }
  return out;
}

const std::vector<std::string>& FrameSeries::LldNames() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    v.push_back("loudness");
    for (int i = 0; i < 13; ++i) v.push_back("mfcc" + std::to_string(i));
    for (int i = 0; i < 13; ++i) v.push_back("dmfcc" + std::to_string(i));
    v.insert(v.end(),
             {"band_energy_250_650", "band_energy_1k_4k", "spectral_rolloff25",
              "spectral_flux", "spectral_entropy", "spectral_skewness", "sharpness",
              "harmonicity", "flatness", "f0", "voicing_prob", "jitter_local"});
    return v;
  }();
  return names;
}

std::vector<double> FrameSeries::LldRow(std::size_t frame_idx) const {
  const Frame& f = frames.at(frame_idx);
  std::vector<double> row;
  row.reserve(39);
  row.push_back(f.loudness);
  for (int i = 0; i < 13; ++i) row.push_back(f.mfcc[i]);
  for (int i = 0; i < 13; ++i) row.push_back(f.dmfcc[i]);
  row.push_back(f.band_energy_250_650);
  row.push_back(f.band_energy_1k_4k);
  row.push_back(f.spectral_rolloff25);
  row.push_back(f.spectral_flux);
  row.push_back(f.spectral_entropy);
  row.push_back(f.spectral_skewness);
  row.push_back(f.sharpness);
  row.push_back(f.harmonicity);
  row.push_back(f.flatness);
  row.push_back(f.f0);
  row.push_back(f.voicing_prob);
  row.push_back(f.jitter_local);
  return row;
}

void WriteFramesCsv(const FrameSeries& series, std::ostream& out) {
  out << "t,energy_db";
  for (const char* base : {"mfcc", "dmfcc", "ddmfcc", "plp"}) {
    for (int i = 0; i < 13; ++i) out << "," << base << i;
  }
  out << ",f0,voicing_prob,loudness,band_energy_250_650,band_energy_1k_4k,"
         "spectral_rolloff25,spectral_flux,spectral_entropy,spectral_skewness,"
         "sharpness,harmonicity,flatness,jitter_local\n";
  for (const Frame& f : series.frames) {
    out << FormatDouble(f.t0) << "," << FormatDouble(f.energy_db);
    for (const auto* arr : {&f.mfcc, &f.dmfcc, &f.ddmfcc, &f.plp}) {
      for (double v : *arr) out << "," << FormatDouble(v);
    }
    for (double v : {f.f0, f.voicing_prob, f.loudness, f.band_energy_250_650,
                     f.band_energy_1k_4k, f.spectral_rolloff25, f.spectral_flux,
                     f.spectral_entropy, f.spectral_skewness, f.sharpness,
                     f.harmonicity, f.flatness, f.jitter_local}) {
      out << "," << FormatDouble(v);
    }
    out << "\n";
  }
}

}  // namespace cadence::dsp
