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

#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "cadence/common.hpp"
#include "cadence/dsp.hpp"
#include "cadence/features.hpp"
#include "cadence/rng.hpp"

using namespace cadence;
using namespace cadence::features;

namespace {

constexpr double kTau = 6.283185307179586;

// Frame series with hand-chosen tracks; loudness carries the probe values.
dsp::FrameSeries MakeSeries(double duration, const std::vector<double>& loudness) {
  dsp::FrameSeries s;
  s.sample_rate = 16000;
  s.duration = duration;
  for (std::size_t i = 0; i < loudness.size(); ++i) {
    dsp::Frame f;
    f.t0 = 0.01 * static_cast<double>(i);
    f.loudness = loudness[i];
    s.frames.push_back(f);
  }
  return s;
}

std::vector<double> ConstantTrack(int n, double v) { return std::vector<double>(n, v); }

int FramesFor(double duration) {
  // 25 ms frames at a 10 ms hop.
  return 1 + static_cast<int>((duration * 16000 - 400) / 160);
}

Recording ToneBursts(const std::vector<std::pair<double, double>>& spans,
                     double total, double freq = 220.0, int rate = 16000) {
  Recording rec;
  rec.sample_rate = rate;
  rec.samples.assign(static_cast<std::size_t>(total * rate), 0.0);
  for (const auto& [start, len] : spans) {
    const auto a = static_cast<std::size_t>(start * rate);
    const auto b = std::min(rec.samples.size(),
                            static_cast<std::size_t>((start + len) * rate));
    for (std::size_t i = a; i < b; ++i) {
      rec.samples[i] = 0.5 * std::sin(kTau * freq * (i - a) / rate);
    }
  }
  return rec;
}

}  // namespace

TEST_CASE("functional windows follow the 3 s / 2 s stride rule") {
  SUBCASE("10 s recording yields 4 windows starting 0,2,4,6") {
    const auto s = MakeSeries(10.0, ConstantTrack(FramesFor(10.0), 1.0));
    const FunctionalSet fs = ComputeFunctionals(s);
    CHECK(!fs.truncated);
    CHECK(fs.vectors.size() == 4);
    CHECK(fs.window_starts == std::vector<double>{0.0, 2.0, 4.0, 6.0});
  }
  SUBCASE("window count is floor((T-3)/2)+1") {
    for (double t : {3.0, 4.9, 5.0, 7.2, 13.0}) {
      const auto s = MakeSeries(t, ConstantTrack(FramesFor(t), 1.0));
      const FunctionalSet fs = ComputeFunctionals(s);
      const auto expect = static_cast<std::size_t>(std::floor((t - 3.0) / 2.0)) + 1;
      CAPTURE(t);
      CHECK(fs.vectors.size() == expect);
    }
  }
  SUBCASE("short recording gives one flagged truncated window") {
    const auto s = MakeSeries(2.0, ConstantTrack(FramesFor(2.0), 1.0));
    const FunctionalSet fs = ComputeFunctionals(s);
    CHECK(fs.truncated);
    CHECK(fs.vectors.size() == 1);
  }
}

TEST_CASE("functional statistics on constructed tracks") {
  const int n = FramesFor(3.0);
  SUBCASE("constant track") {
    const auto s = MakeSeries(3.0, ConstantTrack(n, 7.5));
    const FunctionalSet fs = ComputeFunctionals(s);
    REQUIRE(fs.vectors.size() == 1);
    const auto& v = fs.vectors[0];
    // Loudness occupies the first statistic block.
    CHECK(v(0) == doctest::Approx(7.5));           // mean
    CHECK(v(1) == 0.0);                            // std
    CHECK(v(4) == doctest::Approx(7.5));           // min
    CHECK(v(5) == doctest::Approx(7.5));           // max
    CHECK(v(6) == 0.0);                            // range
    CHECK(v(7) == 0.0);                            // slope
  }
  SUBCASE("linear track has unit slope and no residual") {
    std::vector<double> ramp(n);
    for (int i = 0; i < n; ++i) ramp[i] = static_cast<double>(i);
    const auto s = MakeSeries(3.0, ramp);
    const FunctionalSet fs = ComputeFunctionals(s);
    const auto& v = fs.vectors[0];
    CHECK(v(7) == doctest::Approx(1.0));           // slope per frame step
    CHECK(v(8) == doctest::Approx(0.0).epsilon(1e-9));  // regression error
  }
}

TEST_CASE("functional names are the full lld-statistic grid") {
  const auto s = MakeSeries(3.0, ConstantTrack(FramesFor(3.0), 0.0));
  const FunctionalSet fs = ComputeFunctionals(s);
  CHECK(fs.names.size() == 39 * 9);
  CHECK(fs.names.front() == "loudness.mean");
  CHECK(fs.names[8] == "loudness.regerr");
  CHECK(fs.names.back() == "jitter_local.regerr");
  const std::set<std::string> unique(fs.names.begin(), fs.names.end());
  CHECK(unique.size() == fs.names.size());
  CHECK(fs.vectors[0].size() == 39 * 9);
}

TEST_CASE("cfs picks the informative feature and matches exhaustive search") {
  Rng rng(21);
  const int n = 60, p = 6;
  Eigen::MatrixXd x(n, p);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % 2;
    x(i, 0) = labels[i];
    for (int j = 1; j < p; ++j) x(i, j) = rng.Gaussian();
  }

  const CfsSelection sel = CfsSelect(x, labels);
  CHECK(sel.selected_indices == std::vector<int>{0});
  CHECK(sel.merit == doctest::Approx(1.0));

  // Exhaustive oracle over all non-empty subsets of the 6 features.
  double best_merit = -1.0;
  std::vector<int> best;
  for (int mask = 1; mask < (1 << p); ++mask) {
    std::vector<int> subset;
    for (int j = 0; j < p; ++j) {
      if (mask & (1 << j)) subset.push_back(j);
    }
    const double m = CfsMerit(x, labels, subset);
    if (m > best_merit + 1e-12) {
      best_merit = m;
      best = subset;
    }
  }
  CHECK(best == sel.selected_indices);
  CHECK(best_merit == doctest::Approx(sel.merit));
}

TEST_CASE("cfs keeps exactly one of two identical label copies") {
  Rng rng(77);
  const int n = 80;
  Eigen::MatrixXd x(n, 4);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % 2;
    x(i, 0) = labels[i];
    x(i, 1) = labels[i];  // exact duplicate
    x(i, 2) = rng.Gaussian();
    x(i, 3) = rng.Gaussian();
  }
  const CfsSelection sel = CfsSelect(x, labels);
  REQUIRE(sel.selected_indices.size() == 1);
  CHECK((sel.selected_indices[0] == 0 || sel.selected_indices[0] == 1));
}

TEST_CASE("cfs merit stays low on pure noise") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const int n = 200, p = 10;
    Eigen::MatrixXd x(n, p);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      labels[i] = i % 2;
      for (int j = 0; j < p; ++j) x(i, j) = rng.Gaussian();
    }
    const CfsSelection sel = CfsSelect(x, labels);
    CAPTURE(seed);
    CHECK(sel.merit < 0.3);
  }
}

TEST_CASE("cfs treats a constant column as uncorrelated") {
  const int n = 40;
  Eigen::MatrixXd x(n, 2);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % 2;
    x(i, 0) = 3.14;  // constant
    x(i, 1) = labels[i];
  }
  CHECK(CfsMerit(x, labels, {0}) == 0.0);
  const CfsSelection sel = CfsSelect(x, labels);
  CHECK(sel.selected_indices == std::vector<int>{1});
}

TEST_CASE("cfs selected merit dominates every singleton") {
  Rng rng(5);
  const int n = 120, p = 8;
  Eigen::MatrixXd x(n, p);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % 2;
    for (int j = 0; j < p; ++j) {
      x(i, j) = 0.4 * j * labels[i] / p + rng.Gaussian();
    }
  }
  const CfsSelection sel = CfsSelect(x, labels);
  for (int j = 0; j < p; ++j) {
    CHECK(sel.merit >= CfsMerit(x, labels, {j}) - 1e-12);
  }
}

TEST_CASE("fluency on the three-burst fixture") {
  // 0.4 s lead, three 0.3 s bursts with 0.4 s gaps, 0.4 s tail: 2.5 s total.
  const Recording rec = ToneBursts({{0.4, 0.3}, {1.1, 0.3}, {1.8, 0.3}}, 2.5);
  const dsp::FrameConfig cfg;
  const auto series = dsp::Analyze(rec, cfg);
  const auto vad = dsp::Vad(rec, cfg);
  const FluencyVector fv = ComputeFluency(rec, series, vad);

  CHECK(!fv.no_speech);
  CHECK(fv.n_syllables == 3.0);
  CHECK(fv.rate_of_speech == doctest::Approx(3.0 / 2.5));
  CHECK(fv.rate_of_speech * rec.duration() == doctest::Approx(fv.n_syllables));
  CHECK(fv.mean_pair_duration == doctest::Approx(0.7).epsilon(0.03));
  CHECK(fv.speaking_duration > 0.8);
  CHECK(fv.speaking_duration < 1.2);
  CHECK(fv.f0_mean == doctest::Approx(220.0).epsilon(0.02));
  CHECK(fv.f0_median == doctest::Approx(220.0).epsilon(0.02));
  CHECK(fv.f0_min > 200.0);
  CHECK(fv.pron_posterior > 0.5);
  CHECK(fv.mean_voiced_interval == doctest::Approx(0.32).epsilon(0.15));
}

TEST_CASE("fluency on a constant tone") {
  const Recording rec = ToneBursts({{0.0, 2.0}}, 2.0);
  const dsp::FrameConfig cfg;
  const auto series = dsp::Analyze(rec, cfg);
  const auto vad = dsp::Vad(rec, cfg);
  const FluencyVector fv = ComputeFluency(rec, series, vad);
  CHECK(fv.n_syllables == 1.0);
  CHECK(fv.speaking_duration == doctest::Approx(2.0));
  CHECK(fv.mean_voiced_interval == doctest::Approx(2.0));
  CHECK(fv.mean_pair_duration == 0.0);  // no unvoiced segment follows
  CHECK(fv.energy_mean_to_std_ratio > 100.0);
}

TEST_CASE("fluency flags silence") {
  Recording rec;
  rec.sample_rate = 16000;
  rec.samples.assign(32000, 0.0);
  const dsp::FrameConfig cfg;
  const auto series = dsp::Analyze(rec, cfg);
  const auto vad = dsp::Vad(rec, cfg);
  const FluencyVector fv = ComputeFluency(rec, series, vad);
  CHECK(fv.no_speech);
  CHECK(fv.n_syllables == 0.0);
  CHECK(fv.speaking_duration == 0.0);
  CHECK(fv.rate_of_speech == 0.0);
}

TEST_CASE("fluency vector layout") {
  CHECK(FluencyVector::Names().size() == 11);
  FluencyVector fv;
  fv.n_syllables = 3;
  fv.energy_mean_to_std_ratio = 9;
  const Eigen::VectorXd v = fv.AsVector();
  REQUIRE(v.size() == 11);
  CHECK(v(0) == 3.0);
  CHECK(v(10) == 9.0);
}
