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

#include "cadence/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "cadence/chat.hpp"
#include "cadence/common.hpp"
#include "cadence/corpus.hpp"
#include "cadence/dsp.hpp"
#include "cadence/embeddings.hpp"
#include "cadence/evaluation.hpp"
#include "cadence/features.hpp"
#include "cadence/model_io.hpp"
#include "cadence/pipeline.hpp"
#include "cadence/rng.hpp"
#include "cadence/text.hpp"
#include "cadence/wav.hpp"

namespace cadence::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Flag parsing. Values arrive as "--name value" or "--name=value"; switches
// take no value. A JSON config file supplies defaults for unset flags.
// ---------------------------------------------------------------------------

struct Flag {
  std::string name;
  std::string value;
  std::string help;
  bool is_switch = false;
  bool required = false;
  bool set = false;
};

class FlagSet {
 public:
  FlagSet(std::string command, std::string summary)
      : command_(std::move(command)), summary_(std::move(summary)) {
    AddValue("config", "", "JSON file of flag defaults; explicit flags win");
  }

  void AddValue(const std::string& name, const std::string& def,
                const std::string& help, bool required = false) {
    flags_.push_back({name, def, help, false, required, false});
  }

  void AddSwitch(const std::string& name, const std::string& help) {
    flags_.push_back({name, "false", help, true, false, false});
  }

  // Returns true when --help was consumed (help text already on `out`).
  bool Parse(const std::vector<std::string>& args, std::size_t start,
             std::ostream& out) {
    for (std::size_t i = start; i < args.size(); ++i) {
      std::string token = args[i];
      if (token == "--help" || token == "-h") {
        PrintHelp(out);
        return true;
      }
      CADENCE_CHECK_CONFIG(token.rfind("--", 0) == 0,
                           "unexpected argument '" + token + "' (flags only)");
      token = token.substr(2);
      std::string value;
      bool has_value = false;
      const std::size_t eq = token.find('=');
      if (eq != std::string::npos) {
        value = token.substr(eq + 1);
        token = token.substr(0, eq);
        has_value = true;
      }
      Flag* flag = Find(token);
      CADENCE_CHECK_CONFIG(flag != nullptr, "unknown flag '--" + token +
                                                "' for '" + command_ + "'");
      if (flag->is_switch) {
        CADENCE_CHECK_CONFIG(!has_value,
                             "flag '--" + token + "' takes no value");
        flag->value = "true";
      } else {
        if (!has_value) {
          CADENCE_CHECK_CONFIG(i + 1 < args.size(),
                               "flag '--" + token + "' needs a value");
          value = args[++i];
        }
        flag->value = value;
      }
      flag->set = true;
    }
    ApplyConfigFile();
    for (const Flag& flag : flags_) {
      CADENCE_CHECK_CONFIG(!flag.required || !flag.value.empty(),
                           "--" + flag.name + " is required");
    }
    return false;
  }

  const std::string& Get(const std::string& name) const {
    return FindChecked(name).value;
  }

  bool WasSet(const std::string& name) const { return FindChecked(name).set; }

  bool GetSwitch(const std::string& name) const {
    const Flag& flag = FindChecked(name);
    CADENCE_CHECK_CONFIG(flag.value == "true" || flag.value == "false",
                         "--" + name + " expects true or false, got '" +
                             flag.value + "'");
    return flag.value == "true";
  }

  long long GetInt(const std::string& name, long long lo,
                   long long hi) const {
    const std::string& text = FindChecked(name).value;
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    CADENCE_CHECK_CONFIG(
        errno == 0 && end != text.c_str() && *end == '\0' && !text.empty(),
        "--" + name + " expects an integer, got '" + text + "'");
    CADENCE_CHECK_CONFIG(v >= lo && v <= hi,
                         "--" + name + " must be in [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "], got " + text);
    return v;
  }

  double GetDouble(const std::string& name) const {
    const std::string& text = FindChecked(name).value;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    CADENCE_CHECK_CONFIG(
        errno == 0 && end != text.c_str() && *end == '\0' && !text.empty(),
        "--" + name + " expects a number, got '" + text + "'");
    return v;
  }

  std::uint64_t GetU64(const std::string& name) const {
    const std::string& text = FindChecked(name).value;
    CADENCE_CHECK_CONFIG(!text.empty() && text[0] != '-',
                         "--" + name + " expects a non-negative integer");
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    CADENCE_CHECK_CONFIG(errno == 0 && end != text.c_str() && *end == '\0',
                         "--" + name + " expects a non-negative integer, got '" +
                             text + "'");
    return v;
  }

  void PrintHelp(std::ostream& out) const {
    out << "usage: cadence " << command_ << " [flags]\n\n"
        << summary_ << "\n\nflags:\n";
    for (const Flag& flag : flags_) {
      std::string left = "  --" + flag.name;
      if (!flag.is_switch) left += " <value>";
      out << left;
      for (std::size_t i = left.size(); i < 28; ++i) out << ' ';
      out << flag.help;
      if (flag.required) {
        out << " (required)";
      } else if (!flag.is_switch && !flag.value.empty()) {
        out << " (default: " << flag.value << ")";
      }
      out << "\n";
    }
  }

 private:
  Flag* Find(const std::string& name) {
    for (Flag& flag : flags_) {
      if (flag.name == name) return &flag;
    }
    return nullptr;
  }

  const Flag& FindChecked(const std::string& name) const {
    for (const Flag& flag : flags_) {
      if (flag.name == name) return flag;
    }
    ThrowUsage("unknown flag '--" + name + "'");
  }

  void ApplyConfigFile() {
    const std::string& path = FindChecked("config").value;
    if (path.empty()) return;
    std::ifstream in(path);
    CADENCE_CHECK_CONFIG(static_cast<bool>(in),
                         "cannot read config file '" + path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      ThrowUsage("config file '" + path + "': " + e.what());
    }
    CADENCE_CHECK_CONFIG(j.is_object(),
                         "config file '" + path + "' must hold a JSON object");
    for (const auto& [key, val] : j.items()) {
      CADENCE_CHECK_CONFIG(key != "config",
                           "config file cannot set 'config'");
      Flag* flag = Find(key);
      CADENCE_CHECK_CONFIG(flag != nullptr, "config file '" + path +
                                                "': unknown key '" + key +
                                                "' for '" + command_ + "'");
      if (flag->set) continue;  // explicit flags win
      if (val.is_string()) {
        flag->value = val.get<std::string>();
      } else if (val.is_boolean()) {
        flag->value = val.get<bool>() ? "true" : "false";
      } else if (val.is_number_integer()) {
        flag->value = std::to_string(val.get<long long>());
      } else if (val.is_number_unsigned()) {
        flag->value = std::to_string(val.get<unsigned long long>());
      } else if (val.is_number_float()) {
        flag->value = FormatDouble(val.get<double>());
      } else {
        ThrowUsage("config key '" + key + "' must be a scalar");
      }
      flag->set = true;
    }
  }

  std::string command_;
  std::string summary_;
  std::vector<Flag> flags_;
};

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

int DefaultJobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Flag > config > CADENCE_SEED > 0.
std::uint64_t ResolveSeed(const FlagSet& flags) {
  if (flags.WasSet("seed")) return flags.GetU64("seed");
  if (const char* env = std::getenv("CADENCE_SEED")) {
    const std::string text(env);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    CADENCE_CHECK_CONFIG(!text.empty() && text[0] != '-' && errno == 0 &&
                             end != text.c_str() && *end == '\0',
                         "CADENCE_SEED must be a non-negative integer, got '" +
                             text + "'");
    return v;
  }
  return 0;
}

// One experiment = one directory; refuse to mix runs unless forced.
void PrepareOutDir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    CADENCE_CHECK_CONFIG(fs::is_directory(dir),
                         "'" + dir.string() + "' is not a directory");
    const bool empty = fs::directory_iterator(dir) == fs::directory_iterator();
    CADENCE_CHECK_CONFIG(empty || force, "output directory '" + dir.string() +
                                             "' is not empty (use --force)");
  } else {
    fs::create_directories(dir);
  }
}

std::vector<std::string> SplitCsv(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::ofstream OpenArtifact(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    ThrowData("cannot write '" + path.string() + "'", ErrorCode::kIoFailure);
  }
  return out;
}

corpus::Manifest LoadManifestFlag(const FlagSet& flags) {
  return corpus::LoadManifest(flags.Get("manifest"));
}

// Per-subject normalized spectral features for the embedding pipelines.
std::vector<Eigen::MatrixXd> PlpFrontends(const corpus::Manifest& manifest,
                                          const dsp::FrameConfig& frame,
                                          int jobs) {
  std::vector<Eigen::MatrixXd> out(manifest.subjects.size());
  ParallelFor(manifest.subjects.size(), jobs, [&](std::size_t i) {
    const corpus::Subject& subj = manifest.subjects[i];
    try {
      const Recording rec = LoadWav(manifest.AudioFile(subj));
      out[i] = embeddings::MeanVarianceNormalize(
          dsp::PlpPitchFeatures(rec, frame));
    } catch (const Error& e) {
      throw Error(e.kind(), e.code(), "subject '" + subj.id + "': " + e.what());
    }
  });
  return out;
}

// Even subsample of vertically stacked per-subject frames.
Eigen::MatrixXd PoolFrames(const std::vector<Eigen::MatrixXd>& frontends,
                           int max_frames) {
  Eigen::Index total = 0;
  for (const auto& m : frontends) total += m.rows();
  CADENCE_CHECK_DATA(total > 0, "no frames to pool");
  Eigen::Index stride =
      (total + max_frames - 1) / std::max<Eigen::Index>(1, max_frames);
  stride = std::max<Eigen::Index>(stride, 1);
  const Eigen::Index kept = (total + stride - 1) / stride;
  Eigen::MatrixXd pool(kept, frontends[0].cols());
  Eigen::Index row = 0, seen = 0;
  for (const auto& m : frontends) {
    for (Eigen::Index r = 0; r < m.rows(); ++r, ++seen) {
      if (seen % stride == 0) pool.row(row++) = m.row(r);
    }
  }
  return pool;
}

std::string CsvJoin(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += fields[i];
  }
  return line;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int CmdSynth(const std::vector<std::string>& args, std::ostream& out) {
  FlagSet flags("synth",
                "Generates a balanced synthetic corpus: manifest.json, one "
                "wav/cha pair per subject, and a word-embedding table.");
  flags.AddValue("out-dir", "", "corpus directory", /*required=*/true);
  flags.AddValue("subjects", "40", "even subject count, >= 4");
  flags.AddValue("seed", "0", "corpus seed; env CADENCE_SEED when unset");
  flags.AddValue("sample-rate", "16000", "wav sample rate in Hz");
  flags.AddSwitch("force", "write into a non-empty directory");
  if (flags.Parse(args, 1, out)) return 0;

  const fs::path dir = flags.Get("out-dir");
  PrepareOutDir(dir, flags.GetSwitch("force"));

  corpus::SynthConfig config;
  config.n_subjects = static_cast<int>(flags.GetInt("subjects", 4, 100000));
  config.seed = ResolveSeed(flags);
  config.sample_rate =
      static_cast<int>(flags.GetInt("sample-rate", 1000, 384000));

  const corpus::Manifest manifest =
      corpus::GenerateSyntheticCorpus(config, dir);
  corpus::WriteSyntheticEmbeddingTable(dir / "embeddings.tsv", config.seed);

  out << "wrote " << manifest.subjects.size() << " subjects to "
      << dir.string() << "\n";
  out << "wrote word-embedding table to " << (dir / "embeddings.tsv").string()
      << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// parse
// ---------------------------------------------------------------------------

int CmdParse(const std::vector<std::string>& args, std::ostream& out) {
  FlagSet flags("parse",
                "Parses one CHAT transcript and prints the cleaned "
                "interventions of a speaker as JSON.");
  flags.AddValue("in", "", "transcript (.cha) file", /*required=*/true);
  flags.AddValue("speaker", "PAR", "speaker code to keep");
  flags.AddValue("out-dir", "",
                 "write interventions.json here instead of stdout");
  flags.AddSwitch("force", "write into a non-empty directory");
  if (flags.Parse(args, 1, out)) return 0;

  const chat::ChatDocument doc = chat::ParseChatFile(flags.Get("in"));
  const chat::Transcript transcript =
      chat::ExtractInterventions(doc, flags.Get("speaker"));

  json j;
  j["subject_id"] = transcript.subject_id;
  j["speaker"] = flags.Get("speaker");
  j["interventions"] = json::array();
  for (const auto& tokens : transcript.interventions) {
    j["interventions"].push_back(tokens);
  }

  if (flags.Get("out-dir").empty()) {
    out << j.dump(2) << "\n";
  } else {
    const fs::path dir = flags.Get("out-dir");
    PrepareOutDir(dir, flags.GetSwitch("force"));
    OpenArtifact(dir / "interventions.json") << j.dump(2) << "\n";
    out << "wrote " << transcript.interventions.size() << " interventions to "
        << (dir / "interventions.json").string() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

void ExtractFunctionals(const corpus::Manifest& manifest,
                        const dsp::FrameConfig& frame, double window_len,
                        double window_hop, int jobs, const fs::path& dir) {
  std::vector<std::string> lines(manifest.subjects.size());
  ParallelFor(manifest.subjects.size(), jobs, [&](std::size_t i) {
    const corpus::Subject& subj = manifest.subjects[i];
    const Recording rec = LoadWav(manifest.AudioFile(subj));
    const dsp::FrameSeries series = dsp::Analyze(rec, frame);
    features::FunctionalConfig fc;
    fc.window_len = window_len;
    fc.stride = window_hop;
    const features::FunctionalSet set = features::ComputeFunctionals(series, fc);

    std::string text = "window_start," + CsvJoin(set.names) + "\n";
    for (std::size_t w = 0; w < set.vectors.size(); ++w) {
      text += FormatDouble(set.window_starts[w]);
      for (Eigen::Index k = 0; k < set.vectors[w].size(); ++k) {
        text += ',' + FormatDouble(set.vectors[w](k));
      }
      text += '\n';
    }
    lines[i] = std::move(text);
  });
  for (std::size_t i = 0; i < manifest.subjects.size(); ++i) {
    OpenArtifact(dir / (manifest.subjects[i].id + "_functionals.csv"))
        << lines[i];
  }
}

void ExtractFluency(const corpus::Manifest& manifest,
                    const dsp::FrameConfig& frame, int jobs,
                    const fs::path& dir) {
  std::vector<Eigen::VectorXd> rows(manifest.subjects.size());
  ParallelFor(manifest.subjects.size(), jobs, [&](std::size_t i) {
    const Recording rec = LoadWav(manifest.AudioFile(manifest.subjects[i]));
    const dsp::FrameSeries series = dsp::Analyze(rec, frame);
    const dsp::VadSegmentation vad = dsp::Vad(rec, frame);
    rows[i] = features::ComputeFluency(rec, series, vad).AsVector();
  });
  std::ofstream out = OpenArtifact(dir / "fluency.csv");
  out << "subject," << CsvJoin(features::FluencyVector::Names()) << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << manifest.subjects[i].id;
    for (Eigen::Index k = 0; k < rows[i].size(); ++k) {
      out << ',' << FormatDouble(rows[i](k));
    }
    out << "\n";
  }
}

void ExtractLinguistic(const corpus::Manifest& manifest, int jobs,
                       const fs::path& dir) {
  const text::PosTagger tagger;
  std::vector<Eigen::VectorXd> rows(manifest.subjects.size());
  ParallelFor(manifest.subjects.size(), jobs, [&](std::size_t i) {
    const chat::Transcript transcript = chat::ExtractInterventions(
        chat::ParseChatFile(manifest.TranscriptFile(manifest.subjects[i])));
    rows[i] = text::ComputeLinguistic(transcript, tagger).AsVector();
  });
  std::ofstream out = OpenArtifact(dir / "linguistic.csv");
  out << "subject," << CsvJoin(text::LinguisticVector::Names()) << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << manifest.subjects[i].id;
    for (Eigen::Index k = 0; k < rows[i].size(); ++k) {
      out << ',' << FormatDouble(rows[i](k));
    }
    out << "\n";
  }
}

void WriteEmbeddingCsv(const fs::path& path,
                       const std::vector<pipeline::WindowSlice>& slices,
                       const std::vector<Eigen::VectorXd>& vectors) {
  std::ofstream out = OpenArtifact(path);
  out << "window_start,window_end";
  if (!vectors.empty()) {
    for (Eigen::Index k = 0; k < vectors[0].size(); ++k) {
      out << ",dim" << k;
    }
  }
  out << "\n";
  for (std::size_t w = 0; w < vectors.size(); ++w) {
    out << FormatDouble(slices[w].span.start) << ','
        << FormatDouble(slices[w].span.end);
    for (Eigen::Index k = 0; k < vectors[w].size(); ++k) {
      out << ',' << FormatDouble(vectors[w](k));
    }
    out << "\n";
  }
}

void ExtractIvectors(const corpus::Manifest& manifest, const FlagSet& flags,
                     const dsp::FrameConfig& frame, double window_len,
                     double window_hop, int jobs, const fs::path& dir) {
  CADENCE_CHECK_CONFIG(!flags.Get("ubm").empty() && !flags.Get("tv").empty(),
                       "--kind ivector needs --ubm and --tv model files");
  const embeddings::Ubm ubm = model_io::LoadUbm(flags.Get("ubm"));
  const embeddings::TvModel tv = model_io::LoadTv(flags.Get("tv"));
  const embeddings::IvectorExtractor extractor(tv, ubm);

  std::vector<std::vector<pipeline::WindowSlice>> slices(
      manifest.subjects.size());
  std::vector<std::vector<Eigen::VectorXd>> vecs(manifest.subjects.size());
  ParallelFor(manifest.subjects.size(), jobs, [&](std::size_t i) {
    const Recording rec = LoadWav(manifest.AudioFile(manifest.subjects[i]));
    const Eigen::MatrixXd feats =
        embeddings::MeanVarianceNormalize(dsp::PlpPitchFeatures(rec, frame));
    slices[i] = pipeline::WindowSlices(
        rec.duration(), static_cast<int>(feats.rows()), rec.sample_rate,
        frame.hop, window_len, window_hop, /*min_rows=*/2);
    for (const pipeline::WindowSlice& slice : slices[i]) {
      const embeddings::BwStats stats = embeddings::AccumulateBwStats(
          ubm, feats.middleRows(slice.row_begin,
                                slice.row_end - slice.row_begin));
      vecs[i].push_back(extractor.Extract(stats).vector);
    }
  });
  for (std::size_t i = 0; i < manifest.subjects.size(); ++i) {
    WriteEmbeddingCsv(dir / (manifest.subjects[i].id + "_ivector.csv"),
                      slices[i], vecs[i]);
  }
}

void ExtractXvectors(const corpus::Manifest& manifest, const FlagSet& flags,
                     const dsp::FrameConfig& frame, double window_len,
                     double window_hop, int jobs, std::uint64_t seed,
                     const fs::path& dir) {
  const int n_filters = static_cast<int>(flags.GetInt("mfcc-filters", 2, 128));
  const int n_ceps = static_cast<int>(flags.GetInt("mfcc-ceps", 1, 128));
  const embeddings::TdnnModel tdnn =
      flags.Get("tdnn").empty() ? pipeline::DefaultTdnn(n_ceps, seed)
                                : model_io::LoadTdnn(flags.Get("tdnn"));
  CADENCE_CHECK_CONFIG(tdnn.InputDim() == n_ceps,
                       "network expects " + std::to_string(tdnn.InputDim()) +
                           " inputs but --mfcc-ceps is " +
                           std::to_string(n_ceps));

  std::vector<std::vector<pipeline::WindowSlice>> slices(
      manifest.subjects.size());
  std::vector<std::vector<Eigen::VectorXd>> vecs(manifest.subjects.size());
  ParallelFor(manifest.subjects.size(), jobs, [&](std::size_t i) {
    const Recording rec = LoadWav(manifest.AudioFile(manifest.subjects[i]));
    const Eigen::MatrixXd feats = embeddings::MeanVarianceNormalize(
        dsp::MfccMatrix(rec, frame, n_filters, n_ceps));
    slices[i] = pipeline::WindowSlices(
        rec.duration(), static_cast<int>(feats.rows()), rec.sample_rate,
        frame.hop, window_len, window_hop, tdnn.ReceptiveField());
    for (const pipeline::WindowSlice& slice : slices[i]) {
      vecs[i].push_back(embeddings::XvectorForward(
          tdnn, feats.middleRows(slice.row_begin,
                                 slice.row_end - slice.row_begin)));
    }
  });
  for (std::size_t i = 0; i < manifest.subjects.size(); ++i) {
    WriteEmbeddingCsv(dir / (manifest.subjects[i].id + "_xvector.csv"),
                      slices[i], vecs[i]);
  }
}

int CmdExtract(const std::vector<std::string>& args, std::ostream& out) {
  FlagSet flags("extract",
                "Extracts features or embeddings for every manifest subject "
                "into CSV files.");
  flags.AddValue("manifest", "", "manifest.json path", /*required=*/true);
  flags.AddValue("kind", "",
                 "functionals | fluency | linguistic | ivector | xvector",
                 /*required=*/true);
  flags.AddValue("out-dir", "", "artifact directory", /*required=*/true);
  flags.AddValue("seed", "0", "run seed; env CADENCE_SEED when unset");
  flags.AddValue("jobs", std::to_string(DefaultJobs()),
                 "parallel subjects; results independent of this");
  flags.AddValue("window", "3", "analysis window length, seconds");
  flags.AddValue("hop", "2", "analysis window hop, seconds");
  flags.AddValue("ubm", "", "background model file (ivector)");
  flags.AddValue("tv", "", "subspace model file (ivector)");
  flags.AddValue("tdnn", "",
                 "network weights file (xvector); seeded random when unset");
  flags.AddValue("mfcc-filters", "30", "mel filters (xvector)");
  flags.AddValue("mfcc-ceps", "30", "cepstral coefficients (xvector)");
  flags.AddSwitch("force", "write into a non-empty directory");
  if (flags.Parse(args, 1, out)) return 0;

  const corpus::Manifest manifest = LoadManifestFlag(flags);
  const fs::path dir = flags.Get("out-dir");
  PrepareOutDir(dir, flags.GetSwitch("force"));
  const int jobs = static_cast<int>(flags.GetInt("jobs", 1, 4096));
  const double window_len = flags.GetDouble("window");
  const double window_hop = flags.GetDouble("hop");
  CADENCE_CHECK_CONFIG(window_len > 0.0 && window_hop > 0.0,
                       "window length and hop must be positive");
  const dsp::FrameConfig frame;
  const std::string& kind = flags.Get("kind");

  if (kind == "functionals") {
    ExtractFunctionals(manifest, frame, window_len, window_hop, jobs, dir);
  } else if (kind == "fluency") {
    ExtractFluency(manifest, frame, jobs, dir);
  } else if (kind == "linguistic") {
    ExtractLinguistic(manifest, jobs, dir);
  } else if (kind == "ivector") {
    ExtractIvectors(manifest, flags, frame, window_len, window_hop, jobs, dir);
  } else if (kind == "xvector") {
    ExtractXvectors(manifest, flags, frame, window_len, window_hop, jobs,
                    ResolveSeed(flags), dir);
  } else {
    ThrowUsage("unknown --kind '" + kind + "'");
  }
  out << "extracted " << kind << " for " << manifest.subjects.size()
      << " subjects into " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int CmdTrain(const std::vector<std::string>& args, std::ostream& out) {
  FlagSet flags("train",
                "Trains a reusable background model (--stage ubm) or "
                "total-variability subspace (--stage tv).");
  flags.AddValue("manifest", "", "manifest.json path", /*required=*/true);
  flags.AddValue("stage", "", "ubm | tv", /*required=*/true);
  flags.AddValue("out-dir", "", "model directory", /*required=*/true);
  flags.AddValue("seed", "0", "training seed; env CADENCE_SEED when unset");
  flags.AddValue("jobs", std::to_string(DefaultJobs()),
                 "parallel subjects; results independent of this");
  flags.AddValue("components", "512", "mixture components (ubm)");
  flags.AddValue("em-iters", "0",
                 "EM iterations; 0 means the stage default (20 ubm, 10 tv)");
  flags.AddValue("kmeans-iters", "5", "initialization refinements (ubm)");
  flags.AddValue("max-frames", "200000", "frame budget for pooling (ubm)");
  flags.AddValue("dim", "125", "subspace dimension (tv)");
  flags.AddValue("ubm", "", "background model file (tv input)");
  flags.AddValue("window", "3", "statistics window length, seconds (tv)");
  flags.AddValue("hop", "2", "statistics window hop, seconds (tv)");
  flags.AddSwitch("force", "write into a non-empty directory");
  if (flags.Parse(args, 1, out)) return 0;

  const corpus::Manifest manifest = LoadManifestFlag(flags);
  const fs::path dir = flags.Get("out-dir");
  PrepareOutDir(dir, flags.GetSwitch("force"));
  const int jobs = static_cast<int>(flags.GetInt("jobs", 1, 4096));
  const std::uint64_t seed = ResolveSeed(flags);
  const int em_iters = static_cast<int>(flags.GetInt("em-iters", 0, 100000));
  const dsp::FrameConfig frame;
  const std::string& stage = flags.Get("stage");

  if (stage == "ubm") {
    const std::vector<Eigen::MatrixXd> frontends =
        PlpFrontends(manifest, frame, jobs);
    const Eigen::MatrixXd pool = PoolFrames(
        frontends, static_cast<int>(flags.GetInt("max-frames", 1, 100000000)));

    embeddings::UbmConfig config;
    config.n_components = static_cast<int>(flags.GetInt("components", 1, 65536));
    if (em_iters > 0) config.em_iters = em_iters;
    config.kmeans_iters =
        static_cast<int>(flags.GetInt("kmeans-iters", 0, 100000));
    config.seed = seed;
    const embeddings::Ubm ubm = embeddings::TrainUbm(pool, config);
    model_io::SaveUbm(dir / "ubm.bin", ubm);
    out << "trained " << ubm.Components() << "-component background model on "
        << pool.rows() << " frames; wrote " << (dir / "ubm.bin").string()
        << "\n";
    return 0;
  }

  if (stage == "tv") {
    CADENCE_CHECK_CONFIG(!flags.Get("ubm").empty(),
                         "--stage tv needs --ubm");
    const embeddings::Ubm ubm = model_io::LoadUbm(flags.Get("ubm"));
    const double window_len = flags.GetDouble("window");
    const double window_hop = flags.GetDouble("hop");
    CADENCE_CHECK_CONFIG(window_len > 0.0 && window_hop > 0.0,
                         "window length and hop must be positive");

    std::vector<std::vector<embeddings::BwStats>> stats(
        manifest.subjects.size());
    ParallelFor(manifest.subjects.size(), jobs, [&](std::size_t i) {
      const corpus::Subject& subj = manifest.subjects[i];
      try {
        const Recording rec = LoadWav(manifest.AudioFile(subj));
        const Eigen::MatrixXd feats = embeddings::MeanVarianceNormalize(
            dsp::PlpPitchFeatures(rec, frame));
        for (const pipeline::WindowSlice& slice : pipeline::WindowSlices(
                 rec.duration(), static_cast<int>(feats.rows()),
                 rec.sample_rate, frame.hop, window_len, window_hop,
                 /*min_rows=*/2)) {
          stats[i].push_back(embeddings::AccumulateBwStats(
              ubm, feats.middleRows(slice.row_begin,
                                    slice.row_end - slice.row_begin)));
        }
      } catch (const Error& e) {
        throw Error(e.kind(), e.code(),
                    "subject '" + subj.id + "': " + e.what());
      }
    });
    std::vector<embeddings::BwStats> all;
    for (auto& list : stats) {
      for (auto& s : list) all.push_back(std::move(s));
    }

    embeddings::TvConfig config;
    config.dim = static_cast<int>(flags.GetInt("dim", 1, 65536));
    if (em_iters > 0) config.em_iters = em_iters;
    config.seed = seed;
    const embeddings::TvModel tv = embeddings::TrainTv(all, ubm, config);
    model_io::SaveTv(dir / "tv.bin", tv);
    out << "trained " << config.dim << "-dimensional subspace on "
        << all.size() << " windows; wrote " << (dir / "tv.bin").string()
        << "\n";
    return 0;
  }

  ThrowUsage("unknown --stage '" + stage + "'");
}

// ---------------------------------------------------------------------------
// evaluate-loso
// ---------------------------------------------------------------------------

int CmdEvaluateLoso(const std::vector<std::string>& args, std::ostream& out) {
  FlagSet flags("evaluate-loso",
                "Runs leave-one-subject-out evaluation of the selected "
                "systems and writes scores, metrics and ROC artifacts.");
  flags.AddValue("manifest", "", "manifest.json path", /*required=*/true);
  flags.AddValue("out-dir", "", "artifact directory", /*required=*/true);
  flags.AddValue("systems",
                 "ivector,xvector,functionals,fluency,rnn,linguistic",
                 "comma-separated system list");
  flags.AddValue("seed", "0", "run seed; env CADENCE_SEED when unset");
  flags.AddValue("jobs", std::to_string(DefaultJobs()),
                 "parallel folds; results independent of this");
  flags.AddValue("embeddings", "",
                 "word-embedding table (rnn); defaults to embeddings.tsv "
                 "beside the manifest");
  flags.AddValue("window", "3", "analysis window length, seconds");
  flags.AddValue("hop", "2", "analysis window hop, seconds");
  flags.AddValue("ubm-components", "64", "background mixture components");
  flags.AddValue("ubm-em-iters", "8", "background EM iterations");
  flags.AddValue("ubm-kmeans-iters", "5", "background init refinements");
  flags.AddValue("ubm-max-frames", "20000", "background frame budget");
  flags.AddValue("tv-dim", "32", "subspace dimension");
  flags.AddValue("tv-em-iters", "5", "subspace EM iterations");
  flags.AddValue("mfcc-filters", "30", "mel filters (xvector)");
  flags.AddValue("mfcc-ceps", "30", "cepstral coefficients (xvector)");
  flags.AddValue("lda-dim", "150", "reduced embedding size (xvector)");
  flags.AddValue("cfs-max", "57", "selected functionals budget");
  flags.AddValue("svm-c", "1", "SVM box constraint");
  flags.AddValue("lstm-epochs", "10", "sequence model epochs (rnn)");
  flags.AddValue("lstm-hidden", "4", "sequence model units (rnn)");
  flags.AddValue("lstm-batch", "16", "sequence model batch size (rnn)");
  flags.AddValue("lstm-lr", "0.001", "sequence model learning rate (rnn)");
  flags.AddValue("lstm-dropout", "0.1", "sequence model dropout (rnn)");
  flags.AddSwitch("force", "write into a non-empty directory");
  if (flags.Parse(args, 1, out)) return 0;

  const corpus::Manifest manifest = LoadManifestFlag(flags);
  const fs::path dir = flags.Get("out-dir");
  PrepareOutDir(dir, flags.GetSwitch("force"));

  pipeline::PipelineConfig config;
  config.seed = ResolveSeed(flags);
  config.jobs = static_cast<int>(flags.GetInt("jobs", 1, 4096));
  config.systems = SplitCsv(flags.Get("systems"));
  CADENCE_CHECK_CONFIG(!config.systems.empty(), "--systems lists no system");
  config.window_len = flags.GetDouble("window");
  config.window_hop = flags.GetDouble("hop");
  config.ubm_components =
      static_cast<int>(flags.GetInt("ubm-components", 1, 65536));
  config.ubm_em_iters =
      static_cast<int>(flags.GetInt("ubm-em-iters", 1, 100000));
  config.ubm_kmeans_iters =
      static_cast<int>(flags.GetInt("ubm-kmeans-iters", 0, 100000));
  config.ubm_max_frames =
      static_cast<int>(flags.GetInt("ubm-max-frames", 1, 100000000));
  config.tv_dim = static_cast<int>(flags.GetInt("tv-dim", 1, 65536));
  config.tv_em_iters = static_cast<int>(flags.GetInt("tv-em-iters", 1, 100000));
  config.mfcc_filters = static_cast<int>(flags.GetInt("mfcc-filters", 2, 128));
  config.mfcc_ceps = static_cast<int>(flags.GetInt("mfcc-ceps", 1, 128));
  config.lda_dim = static_cast<int>(flags.GetInt("lda-dim", 1, 65536));
  config.cfs_max_features = static_cast<int>(flags.GetInt("cfs-max", 1, 65536));
  config.svm_c = flags.GetDouble("svm-c");
  config.lstm.epochs = static_cast<int>(flags.GetInt("lstm-epochs", 1, 100000));
  config.lstm.hidden = static_cast<int>(flags.GetInt("lstm-hidden", 1, 65536));
  config.lstm.batch_size =
      static_cast<int>(flags.GetInt("lstm-batch", 1, 1000000));
  config.lstm.learning_rate = flags.GetDouble("lstm-lr");
  config.lstm.dropout = flags.GetDouble("lstm-dropout");

  const bool wants_rnn =
      std::find(config.systems.begin(), config.systems.end(), "rnn") !=
      config.systems.end();
  if (wants_rnn) {
    if (!flags.Get("embeddings").empty()) {
      config.embedding_table = flags.Get("embeddings");
    } else {
      const fs::path beside = manifest.base_dir / "embeddings.tsv";
      CADENCE_CHECK_CONFIG(fs::exists(beside),
                           "the rnn system needs --embeddings (no " +
                               beside.string() + ")");
      config.embedding_table = beside;
    }
  }

  const pipeline::ExperimentResult result =
      pipeline::RunLoso(manifest, config);
  pipeline::WriteArtifacts(result, dir);

  for (const auto& [id, report] : result.reports) {
    out << id << ": accuracy " << FormatDouble(report.accuracy) << ", auc "
        << FormatDouble(report.roc.auc) << "\n";
  }
  out << "wrote artifacts to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fuse
// ---------------------------------------------------------------------------

int CmdFuse(const std::vector<std::string>& args, std::ostream& out) {
  FlagSet flags("fuse",
                "Re-derives the fusion rows of a scores file: the mean of "
                "standardized system scores, and the modality-balanced mean.");
  flags.AddValue("scores", "", "scores.csv to fuse", /*required=*/true);
  flags.AddValue("out-dir", "", "artifact directory", /*required=*/true);
  flags.AddSwitch("force", "write into a non-empty directory");
  if (flags.Parse(args, 1, out)) return 0;

  const fs::path in_path = flags.Get("scores");
  if (!fs::exists(in_path)) {
    ThrowData("scores file '" + in_path.string() + "' not found",
              ErrorCode::kIoFailure);
  }
  const fs::path dir = flags.Get("out-dir");
  PrepareOutDir(dir, flags.GetSwitch("force"));

  evaluation::ScoreTable table = evaluation::ReadScoresCsv(in_path);
  table.rows.erase(
      std::remove_if(table.rows.begin(), table.rows.end(),
                     [](const evaluation::ScoreRow& row) {
                       return row.modality == evaluation::Modality::kFused;
                     }),
      table.rows.end());
  CADENCE_CHECK_DATA(!table.rows.empty(),
                     "'" + in_path.string() + "' holds no system rows");

  bool has_speech = false, has_text = false;
  for (const auto& row : table.rows) {
    if (row.modality == evaluation::Modality::kSpeech) has_speech = true;
    if (row.modality == evaluation::Modality::kText) has_text = true;
  }
  const std::size_t n_systems = table.SystemIds().size();
  std::vector<evaluation::ScoreRow> fused_rows;
  if (n_systems >= 2) {
    const evaluation::ScoreTable fused = evaluation::FuseAll(table, "fusion_1");
    fused_rows.insert(fused_rows.end(), fused.rows.begin(), fused.rows.end());
  }
  if (has_speech && has_text) {
    const evaluation::ScoreTable fused =
        evaluation::FuseByModality(table, "fusion_2");
    fused_rows.insert(fused_rows.end(), fused.rows.begin(), fused.rows.end());
  }
  table.rows.insert(table.rows.end(), fused_rows.begin(), fused_rows.end());

  evaluation::WriteScoresCsv(dir / "scores.csv", table);
  out << "fused " << n_systems << " systems; wrote "
      << (dir / "scores.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int CmdReport(const std::vector<std::string>& args, std::ostream& out) {
  FlagSet flags("report",
                "Recomputes metrics and ROC artifacts from a scores.csv "
                "produced by evaluate-loso or fuse.");
  flags.AddValue("in", "", "directory holding scores.csv", /*required=*/true);
  flags.AddValue("manifest", "", "manifest.json path for labels",
                 /*required=*/true);
  flags.AddValue("out-dir", "",
                 "artifact directory; defaults to the --in directory");
  if (flags.Parse(args, 1, out)) return 0;

  const fs::path in_dir = flags.Get("in");
  const fs::path scores_path = in_dir / "scores.csv";
  if (!fs::exists(scores_path)) {
    ThrowData("scores file '" + scores_path.string() + "' not found",
              ErrorCode::kMissingScore);
  }
  const corpus::Manifest manifest = LoadManifestFlag(flags);
  const fs::path dir =
      flags.Get("out-dir").empty() ? in_dir : fs::path(flags.Get("out-dir"));
  fs::create_directories(dir);

  const evaluation::ScoreTable table = evaluation::ReadScoresCsv(scores_path);
  std::map<std::string, int> labels;
  for (const corpus::Subject& subj : manifest.subjects) {
    labels[subj.id] = subj.label == corpus::Label::kAd ? 1 : 0;
  }

  // Known systems first in canonical order, then the rest as encountered,
  // fusion rows last.
  const std::vector<std::string> present = table.SystemIds();
  auto contains = [&present](const std::string& id) {
    return std::find(present.begin(), present.end(), id) != present.end();
  };
  std::vector<std::string> ordered;
  for (const std::string& id : pipeline::AllSystemIds()) {
    if (contains(id)) ordered.push_back(id);
  }
  std::vector<std::string> fusions;
  for (const std::string& id : present) {
    if (std::find(ordered.begin(), ordered.end(), id) != ordered.end()) {
      continue;
    }
    const bool fused = !table.RowsForSystem(id).empty() &&
                       table.RowsForSystem(id)[0]->modality ==
                           evaluation::Modality::kFused;
    (fused ? fusions : ordered).push_back(id);
  }
  ordered.insert(ordered.end(), fusions.begin(), fusions.end());

  std::vector<std::pair<std::string, evaluation::MetricReport>> reports;
  for (const std::string& id : ordered) {
    const evaluation::DecisionRule rule =
        pipeline::IsKnownSystem(id)
            ? pipeline::RuleForSystem(id)
            : evaluation::DecisionRule::kZnormedAtZero;
    reports.emplace_back(id,
                         evaluation::EvaluateSystem(table, id, labels, rule));
  }

  evaluation::WriteMetricsJson(dir / "metrics.json", reports);
  std::vector<std::pair<std::string, evaluation::RocCurve>> curves;
  for (const auto& [id, report] : reports) {
    if (report.roc.points.empty()) continue;
    evaluation::WriteRocCsv(dir / ("roc_" + id + ".csv"), report.roc);
    curves.emplace_back(id, report.roc);
  }
  if (!curves.empty()) {
    evaluation::WriteRocSvg(dir / "roc_all.svg", curves);
  }

  for (const auto& [id, report] : reports) {
    out << id << ": accuracy " << FormatDouble(report.accuracy) << ", auc "
        << FormatDouble(report.roc.auc) << "\n";
  }
  out << "wrote report to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Dispatch.
// ---------------------------------------------------------------------------

void PrintGlobalHelp(std::ostream& out) {
  out << "usage: cadence <command> [flags]\n\n"
         "commands:\n"
         "  synth          generate a synthetic corpus with manifest\n"
         "  parse          parse one CHAT transcript to intervention JSON\n"
         "  extract        per-subject features or embeddings as CSV\n"
         "  train          reusable background/subspace models\n"
         "  evaluate-loso  leave-one-subject-out evaluation with artifacts\n"
         "  fuse           re-derive fusion rows of a scores.csv\n"
         "  report         metrics and ROC artifacts from a scores.csv\n\n"
         "run 'cadence <command> --help' for the command's flags.\n"
         "exit codes: 0 ok, 2 usage, 3 data error, 4 numeric failure.\n";
}

std::string OneLine(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

const char* KindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return "usage";
    case ErrorKind::kData:
      return "data";
    case ErrorKind::kNumeric:
      return "numeric";
  }
  return "data";
}

int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 2;
    case ErrorKind::kData:
      return 3;
    case ErrorKind::kNumeric:
      return 4;
  }
  return 3;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  try {
    if (args.empty()) {
      ThrowUsage(
          "no command given (expected one of synth, parse, extract, train, "
          "evaluate-loso, fuse, report)");
    }
    const std::string& command = args[0];
    if (command == "--help" || command == "-h" || command == "help") {
      PrintGlobalHelp(out);
      return 0;
    }
    if (command == "synth") return CmdSynth(args, out);
    if (command == "parse") return CmdParse(args, out);
    if (command == "extract") return CmdExtract(args, out);
    if (command == "train") return CmdTrain(args, out);
    if (command == "evaluate-loso") return CmdEvaluateLoso(args, out);
    if (command == "fuse") return CmdFuse(args, out);
    if (command == "report") return CmdReport(args, out);
    ThrowUsage("unknown command '" + command + "'");
  } catch (const Error& e) {
    err << "error: " << KindName(e.kind()) << ": " << OneLine(e.what())
        << "\n";
    return ExitCode(e.kind());
  } catch (const std::exception& e) {
    err << "error: data: " << OneLine(e.what()) << "\n";
    return 3;
  }
}

}  // namespace cadence::cli
