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

#include "cadence/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cadence/common.hpp"
#include "cadence/rng.hpp"

namespace cadence::corpus {

namespace {

using json = nlohmann::json;

constexpr int kManifestSchemaVersion = 1;

Label ParseLabel(const std::string& s) {
  if (s == "AD") return Label::kAd;
  if (s == "nonAD") return Label::kNonAd;
  ThrowData("manifest: unknown label '" + s + "'", ErrorCode::kManifestInvalid);
}

Sex ParseSex(const std::string& s) {
  if (s == "M") return Sex::kMale;
  if (s == "F") return Sex::kFemale;
  ThrowData("manifest: unknown sex '" + s + "'", ErrorCode::kManifestInvalid);
}

}  // namespace

void ValidateManifest(const Manifest& m) {
  std::set<std::string> ids;
  std::map<std::string, int> counts;
  for (const auto& s : m.subjects) {
    if (!ids.insert(s.id).second) {
      ThrowData("manifest: duplicate subject id " + s.id, ErrorCode::kManifestInvalid);
    }
    if (s.age_band.lo < 50 || s.age_band.hi > 80 || s.age_band.lo >= s.age_band.hi) {
      ThrowData("manifest: subject " + s.id + " has invalid age band",
                ErrorCode::kManifestInvalid);
    }
    ++counts[LabelName(s.label)];
  }
  if (counts != m.class_counts) {
    ThrowData("manifest: class_counts inconsistent with subject list",
              ErrorCode::kManifestInvalid);
  }
}

Manifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::kData, ErrorCode::kIoFailure,
                "cannot open manifest: " + path.string());
  }
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    ThrowData("manifest is not valid json: " + path.string(), ErrorCode::kManifestInvalid);
  }
  if (j.value("schema_version", -1) != kManifestSchemaVersion) {
    ThrowData("manifest schema_version mismatch", ErrorCode::kManifestInvalid);
  }

  Manifest m;
  m.base_dir = path.parent_path();
  for (const auto& js : j.at("subjects")) {
    Subject s;
    s.id = js.at("id").get<std::string>();
    s.label = ParseLabel(js.at("label").get<std::string>());
    s.sex = ParseSex(js.at("sex").get<std::string>());
    const auto band = js.at("age_band");
    s.age_band.lo = band.at(0).get<int>();
    s.age_band.hi = band.at(1).get<int>();
    s.audio_path = js.at("audio").get<std::string>();
    s.transcript_path = js.at("transcript").get<std::string>();
    m.subjects.push_back(std::move(s));
  }
  for (auto& [k, v] : j.at("class_counts").items()) {
    m.class_counts[k] = v.get<int>();
  }
  ValidateManifest(m);
  return m;
}

void SaveManifest(const Manifest& m, const std::filesystem::path& path) {
  ValidateManifest(m);
  json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["class_counts"] = m.class_counts;
  j["subjects"] = json::array();
  for (const auto& s : m.subjects) {
    json js;
    js["id"] = s.id;
    js["label"] = LabelName(s.label);
    js["sex"] = SexName(s.sex);
    js["age_band"] = {s.age_band.lo, s.age_band.hi};
    js["audio"] = s.audio_path;
    js["transcript"] = s.transcript_path;
    j["subjects"].push_back(std::move(js));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::kData, ErrorCode::kIoFailure,
                "cannot write manifest: " + path.string());
  }
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Synthetic corpus generator.
//
// The class contrast is injected only in the dimensions the feature set
// measures: pause length, syllable-burst rate, F0 modulation range, and
// transcript length/vocabulary. Effect sizes are kept at >= 2 sigma so the
// end-to-end pipelines have clean learnable signal.
// ---------------------------------------------------------------------------

namespace {

struct VoiceParams {
  double f0_base;
  double f0_depth;        // relative slow-modulation depth of F0
  double syl_dur_mean;    // seconds
  double syl_dur_sd;
  double gap_log_mean;    // word-gap (pause) lognormal parameters
  double gap_log_sd;
  double gap_lo, gap_hi;  // clamp
  int words_lo, words_hi;
};

VoiceParams MakeVoice(Label label, Sex sex, Rng& rng) {
  VoiceParams v;
  const double base = sex == Sex::kFemale ? 185.0 : 125.0;
  v.f0_base = std::clamp(rng.Gaussian(base, 18.0), base - 45.0, base + 45.0);
  if (label == Label::kAd) {
    v.f0_depth = 0.035;
    v.syl_dur_mean = 0.26;
    v.syl_dur_sd = 0.03;
    v.gap_log_mean = std::log(0.85);
    v.gap_log_sd = 0.25;
    v.gap_lo = 0.40;
    v.gap_hi = 1.80;
    v.words_lo = 12;
    v.words_hi = 17;
  } else {
    v.f0_depth = 0.13;
    v.syl_dur_mean = 0.17;
    v.syl_dur_sd = 0.02;
    v.gap_log_mean = std::log(0.20);
    v.gap_log_sd = 0.22;
    v.gap_lo = 0.10;
    v.gap_hi = 0.45;
    v.words_lo = 16;
    v.words_hi = 22;
  }
  return v;
}

// Piecewise-constant amplitude plan; one entry per syllable or bridge.
struct Note {
  double t0, t1, amp;
};

Recording RenderVoice(const VoiceParams& v, int sample_rate, Rng& rng) {
  std::vector<Note> notes;
  double cursor = 0.35 + rng.Uniform() * 0.2;
  const int n_words = v.words_lo + static_cast<int>(rng.UniformInt(v.words_hi - v.words_lo + 1));
  for (int w = 0; w < n_words; ++w) {
    const double r = rng.Uniform();
    const int n_syl = r < 0.40 ? 1 : (r < 0.75 ? 2 : 3);
    for (int s = 0; s < n_syl; ++s) {
      double dur = std::clamp(rng.Gaussian(v.syl_dur_mean, v.syl_dur_sd),
                              v.syl_dur_mean - 3 * v.syl_dur_sd,
                              v.syl_dur_mean + 3 * v.syl_dur_sd);
      const double amp = 0.28 * rng.Uniform(0.85, 1.15);
      notes.push_back({cursor, cursor + dur, amp});
      cursor += dur;
      if (s + 1 < n_syl) {
        // Low-amplitude bridge keeps the word one voiced segment while
        // leaving a clear intensity dip between syllable nuclei.
        const double bridge = rng.Uniform(0.05, 0.08);
        notes.push_back({cursor, cursor + bridge, amp * 0.12});
        cursor += bridge;
      }
    }
    double gap = std::exp(rng.Gaussian(v.gap_log_mean, v.gap_log_sd));
    cursor += std::clamp(gap, v.gap_lo, v.gap_hi);
  }
  cursor += 0.35;

  Recording rec;
  rec.sample_rate = sample_rate;
  const auto n_samples = static_cast<std::size_t>(std::ceil(cursor * sample_rate));
  rec.samples.assign(n_samples, 0.0);

  // Amplitude envelope: plateau per note, then a 12 ms moving average to
  // remove steps.
  std::vector<double> env(n_samples, 0.0);
  for (const auto& note : notes) {
    auto a = static_cast<std::size_t>(note.t0 * sample_rate);
    auto b = std::min(n_samples, static_cast<std::size_t>(note.t1 * sample_rate));
    for (std::size_t i = a; i < b; ++i) env[i] = note.amp;
  }
  const int smooth = sample_rate * 12 / 1000;
  std::vector<double> smoothed(n_samples, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    acc += env[i];
    if (i >= static_cast<std::size_t>(smooth)) acc -= env[i - smooth];
    smoothed[i] = acc / smooth;
  }

  // Harmonic source with slowly modulated F0, plus a weak noise floor so
  // the VAD sees a realistic baseline. Harmonic amplitudes roll off as 1/k.
  const double phase0 = rng.Uniform() * 6.283185307179586;
  const double two_pi = 6.283185307179586;
  double phase = rng.Uniform() * two_pi;
  const double noise_amp = 3.0e-4;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f0 = v.f0_base * (1.0 + v.f0_depth * std::sin(two_pi * 0.7 * t + phase0));
    phase += two_pi * f0 / sample_rate;
    double wave = 0.0;
    for (int k = 1; k <= 6; ++k) {
      wave += std::sin(k * phase) / k;
    }
    rec.samples[i] = smoothed[i] * wave * 0.45 + noise_amp * (rng.Uniform() * 2.0 - 1.0);
  }
  return rec;
}

// --- transcript text -------------------------------------------------------

const std::vector<std::string>& RichNouns() {
  static const std::vector<std::string> v = {
      "cookie", "cookies", "jar", "water", "sink", "plate", "dishes", "window",
      "curtain", "cupboard", "counter", "floor", "garden", "cup", "towel",
      "shelf", "hand", "house", "apron", "faucet", "puddle", "lid", "chair"};
  return v;
}

const std::vector<std::string>& PoorNouns() {
  static const std::vector<std::string> v = {"thing", "water", "cookie", "jar", "stuff"};
  return v;
}

const std::vector<std::string>& RichVerbs() {
  static const std::vector<std::string> v = {
      "is",       "are",      "was",     "reaching", "standing", "falling",
      "washing",  "drying",   "taking",  "spilling", "running",  "climbing",
      "holding",  "laughing", "playing", "helping",  "wobbling", "tipping",
      "watching", "handing"};
  return v;
}

const std::vector<std::string>& PoorVerbs() {
  static const std::vector<std::string> v = {"is", "was", "going", "getting", "falling"};
  return v;
}

const std::vector<std::string>& RichAdjectives() {
  static const std::vector<std::string> v = {"little", "young", "busy", "wet", "full",
                                             "open",   "tall",  "small", "high", "dirty"};
  return v;
}

const std::vector<std::string>& Pronouns() {
  static const std::vector<std::string> v = {"he", "she", "it", "they", "her", "his", "them"};
  return v;
}

const std::vector<std::string>& Prepositions() {
  static const std::vector<std::string> v = {"on", "in", "of", "from", "under", "over",
                                             "with", "near", "by"};
  return v;
}

const std::vector<std::string>& Concepts() {
  static const std::vector<std::string> v = {"kitchen", "mother", "stool", "boy", "girl"};
  return v;
}

template <typename T>
const T& Pick(const std::vector<T>& pool, Rng& rng) {
  return pool[rng.UniformInt(pool.size())];
}

// One intervention as a token list (before CHAT annotation noise).
std::vector<std::string> BuildSentence(Label label, int target_len, Rng& rng,
                                       const std::vector<std::string>& forced_concepts) {
  const bool poor = label == Label::kAd;
  const auto& nouns = poor ? PoorNouns() : RichNouns();
  const auto& verbs = poor ? PoorVerbs() : RichVerbs();

  std::vector<std::string> toks;
  auto add_noun_phrase = [&](bool allow_concept) {
    toks.push_back(rng.Uniform() < (poor ? 0.45 : 0.15) ? Pick(Pronouns(), rng)
                                                        : std::string("the"));
    if (toks.back() == "the") {
      if (!poor && rng.Uniform() < 0.35) toks.push_back(Pick(RichAdjectives(), rng));
      if (allow_concept && !forced_concepts.empty() && rng.Uniform() < 0.7) {
        toks.push_back(forced_concepts[rng.UniformInt(forced_concepts.size())]);
      } else {
        toks.push_back(Pick(nouns, rng));
      }
    }
  };

  add_noun_phrase(true);
  toks.push_back(Pick(verbs, rng));
  while (static_cast<int>(toks.size()) < target_len) {
    if (rng.Uniform() < 0.5) {
      toks.push_back(Pick(Prepositions(), rng));
    }
    add_noun_phrase(rng.Uniform() < 0.4);
    if (static_cast<int>(toks.size()) < target_len - 2 && rng.Uniform() < 0.3) {
      toks.push_back("and");
      toks.push_back(Pick(verbs, rng));
    }
  }
  // Guarantee forced concepts appear even if the random draws missed them.
  for (const auto& c : forced_concepts) {
    if (std::find(toks.begin(), toks.end(), c) == toks.end()) {
      toks.push_back(c);
    }
  }
  return toks;
}

// Renders tokens as a CHAT main-tier line with annotation noise the parser
// and cleaner must strip again.
std::string AnnotateUtterance(const std::vector<std::string>& toks, Label label, Rng& rng) {
  std::ostringstream out;
  const bool ad = label == Label::kAd;
  bool first = true;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!first) out << " ";
    first = false;
    if (i == 0 && rng.Uniform() < (ad ? 0.45 : 0.12)) {
      out << (ad ? "&-uh " : "&-um ");
    }
    if (ad && i == 1 && rng.Uniform() < 0.35) {
      // Retrace: "<w> [//] w" -- the cleaner keeps both copies.
      out << "<" << toks[i - 1] << " " << toks[i] << "> [//] " << toks[i - 1] << " ";
    }
    out << toks[i];
    if (rng.Uniform() < (ad ? 0.20 : 0.06)) out << " (.)";
  }
  if (ad && rng.Uniform() < 0.18) out << " xxx";
  const double r = rng.Uniform();
  out << (r < 0.8 ? " ." : (r < 0.9 ? " ?" : " +..."));
  if (rng.Uniform() < 0.15) {
    const int ms = static_cast<int>(rng.UniformInt(90000));
    out << " \x15" << ms << "_" << ms + 1500 << "\x15";
  }
  return out.str();
}

std::string FakeMorTier(const std::vector<std::string>& toks) {
  std::ostringstream out;
  bool first = true;
  for (const auto& t : toks) {
    if (!first) out << " ";
    first = false;
    out << "w|" << t;
  }
  out << " .";
  return out.str();
}

// Wraps a tier line at ~72 columns with tab continuations.
void EmitWrapped(std::ostream& out, const std::string& line) {
  const std::size_t width = 72;
  if (line.size() <= width) {
    out << line << "\n";
    return;
  }
  std::size_t pos = 0;
  bool head = true;
  while (pos < line.size()) {
    std::size_t take = std::min(width, line.size() - pos);
    if (pos + take < line.size()) {
      std::size_t brk = line.rfind(' ', pos + take);
      if (brk != std::string::npos && brk > pos) take = brk - pos;
    }
    out << (head ? "" : "\t") << line.substr(pos, take) << "\n";
    pos += take;
    while (pos < line.size() && line[pos] == ' ') ++pos;
    head = false;
  }
}

void WriteChaFile(const std::filesystem::path& path, const Subject& subj, int age,
                  const std::vector<std::vector<std::string>>& sentences, Rng& rng) {
  std::ostringstream out;
  out << "@Begin\n";
  out << "@Languages:\teng\n";
  out << "@Participants:\tPAR " << subj.id << " Participant, INV Investigator\n";
  out << "@ID:\teng|synthetic|PAR|" << age << ";|"
      << (subj.sex == Sex::kMale ? "male" : "female") << "|||Participant|||\n";
  out << "@ID:\teng|synthetic|INV|||||Investigator|||\n";
  out << "@Media:\t" << subj.id << ", audio\n";
  out << "@Comment:\tsynthetic picture description\n";

  EmitWrapped(out, "*INV:\tokay tell me everything that you see going on in that picture .");
  int since_inv = 0;
  for (const auto& toks : sentences) {
    EmitWrapped(out, "*PAR:\t" + AnnotateUtterance(toks, subj.label, rng));
    if (rng.Uniform() < 0.3) {
      EmitWrapped(out, "%mor:\t" + FakeMorTier(toks));
    }
    if (++since_inv >= 4 && rng.Uniform() < 0.5) {
      const double r = rng.Uniform();
      EmitWrapped(out, r < 0.5 ? "*INV:\tmhm ." : "*INV:\tanything else ?");
      since_inv = 0;
    }
  }
  EmitWrapped(out, "*INV:\tthank you very much .");
  out << "@End\n";

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw Error(ErrorKind::kData, ErrorCode::kIoFailure,
                "cannot write transcript: " + path.string());
  }
  f << out.str();
}

const std::vector<std::pair<int, int>>& AgeBands() {
  static const std::vector<std::pair<int, int>> v = {
      {50, 55}, {55, 60}, {60, 65}, {65, 70}, {70, 75}, {75, 80}};
  return v;
}

// Band weights follow the training-set demographics table; both classes
// share the same marginal distribution.
AgeBand SampleAgeBand(Rng& rng) {
  static const int weights[] = {1, 9, 9, 16, 14, 5};  // sums to 54
  int r = static_cast<int>(rng.UniformInt(54));
  for (std::size_t i = 0; i < AgeBands().size(); ++i) {
    r -= weights[i];
    if (r < 0) return {AgeBands()[i].first, AgeBands()[i].second};
  }
  return {75, 80};
}

}  // namespace

Manifest GenerateSyntheticCorpus(const SynthConfig& config,
                                 const std::filesystem::path& out_dir) {
  CADENCE_CHECK_CONFIG(config.n_subjects >= 4, "synthetic corpus needs >= 4 subjects");
  CADENCE_CHECK_CONFIG(config.n_subjects % 2 == 0,
                       "synthetic corpus needs an even subject count for class balance");
  std::filesystem::create_directories(out_dir);

  Manifest m;
  m.base_dir = out_dir;

  Rng master(config.seed);
  for (int i = 0; i < config.n_subjects; ++i) {
    // Each subject gets an independent stream so the corpus is stable under
    // reordering and the per-subject content depends only on (seed, index).
    Rng rng = master.Derive(0x5a11c0de + static_cast<std::uint64_t>(i));

    Subject s;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%03d", i + 1);
    s.id = buf;
    s.label = (i % 2 == 0) ? Label::kAd : Label::kNonAd;
    s.sex = rng.UniformInt(54) < 24 ? Sex::kMale : Sex::kFemale;
    s.age_band = SampleAgeBand(rng);
    s.audio_path = s.id + ".wav";
    s.transcript_path = s.id + ".cha";

    const VoiceParams voice = MakeVoice(s.label, s.sex, rng);
    Recording rec = RenderVoice(voice, config.sample_rate, rng);
    WriteWav(out_dir / s.audio_path, rec);

    const bool ad = s.label == Label::kAd;
    const int n_sent = ad ? 4 + static_cast<int>(rng.UniformInt(4))
                          : 9 + static_cast<int>(rng.UniformInt(5));
    // Concept coverage plan: which key concepts this subject mentions at all.
    std::vector<std::vector<std::string>> plan(n_sent);
    for (const auto& c : Concepts()) {
      const double p = ad ? 0.22 : 0.92;
      if (rng.Uniform() < p) {
        plan[rng.UniformInt(n_sent)].push_back(c);
      }
    }
    std::vector<std::vector<std::string>> sentences;
    sentences.reserve(n_sent);
    for (int k = 0; k < n_sent; ++k) {
      const int len = ad ? 3 + static_cast<int>(rng.UniformInt(4))
                         : 8 + static_cast<int>(rng.UniformInt(6));
      sentences.push_back(BuildSentence(s.label, len, rng, plan[k]));
    }
    const int age = s.age_band.lo + static_cast<int>(rng.UniformInt(s.age_band.hi - s.age_band.lo));
    WriteChaFile(out_dir / s.transcript_path, s, age, sentences, rng);

    ++m.class_counts[LabelName(s.label)];
    m.subjects.push_back(std::move(s));
  }

  SaveManifest(m, out_dir / "manifest.json");
  return m;
}

void WriteSyntheticEmbeddingTable(const std::filesystem::path& path, std::uint64_t seed) {
  std::set<std::string> vocab;
  auto add_all = [&vocab](const std::vector<std::string>& v) {
    vocab.insert(v.begin(), v.end());
  };
  add_all(RichNouns());
  add_all(PoorNouns());
  add_all(RichVerbs());
  add_all(PoorVerbs());
  add_all(RichAdjectives());
  add_all(Pronouns());
  add_all(Prepositions());
  add_all(Concepts());
  for (const char* w : {"the", "a", "and", "uh", "um", "mhm", "okay", "tell", "me",
                        "everything", "that", "you", "see", "going", "on", "in",
                        "picture", "anything", "else", "thank", "very", "much"}) {
    vocab.insert(w);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::kData, ErrorCode::kIoFailure,
                "cannot write embedding table: " + path.string());
  }
  for (const auto& w : vocab) {
    // Vector depends only on (seed, token), so table content is stable under
    // vocabulary growth.
    Rng rng(Rng::Mix(seed, Fnv1a64(w)));
    out << w;
    char buf[32];
    for (int d = 0; d < 50; ++d) {
      std::snprintf(buf, sizeof(buf), " %.6f", rng.Gaussian() * 0.4);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace cadence::corpus
