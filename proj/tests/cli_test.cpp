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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"

namespace cadence {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int rc = -1;
  std::string out;
  std::string err;
};

CliResult RunCli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliResult result;
  result.rc = cli::Run(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

int CountLines(const std::string& text) {
  int n = 0;
  for (char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

// One corpus shared across cases; synthesized through the CLI itself.
struct CliFixture {
  testing::ScopedTempDir dir{"cli"};
  fs::path corpus;

  CliFixture() {
    corpus = dir.path() / "corpus";
    const CliResult r = RunCli({"synth", "--out-dir", corpus.string(),
                                "--subjects", "6", "--seed", "11"});
    REQUIRE(r.rc == 0);
    REQUIRE(r.err.empty());
  }
};

CliFixture& Fixture() {
  static CliFixture fixture;
  return fixture;
}

TEST_CASE("cli: global help lists every command") {
  const CliResult r = RunCli({"--help"});
  CHECK(r.rc == 0);
  CHECK(r.err.empty());
  for (const char* cmd : {"synth", "parse", "extract", "train",
                          "evaluate-loso", "fuse", "report"}) {
    CAPTURE(cmd);
    CHECK(r.out.find(cmd) != std::string::npos);
  }
  CHECK(r.out.find("exit codes") != std::string::npos);
}

TEST_CASE("cli: subcommand help lists flags with defaults") {
  const CliResult synth = RunCli({"synth", "--help"});
  CHECK(synth.rc == 0);
  CHECK(synth.out.find("--out-dir") != std::string::npos);
  CHECK(synth.out.find("(required)") != std::string::npos);
  CHECK(synth.out.find("--subjects") != std::string::npos);
  CHECK(synth.out.find("(default: 40)") != std::string::npos);
  CHECK(synth.out.find("--force") != std::string::npos);

  const CliResult loso = RunCli({"evaluate-loso", "--help"});
  CHECK(loso.rc == 0);
  for (const char* flag :
       {"--manifest", "--out-dir", "--systems", "--seed", "--jobs",
        "--embeddings", "--window", "--hop", "--ubm-components",
        "--ubm-em-iters", "--ubm-kmeans-iters", "--ubm-max-frames", "--tv-dim",
        "--tv-em-iters", "--mfcc-filters", "--mfcc-ceps", "--lda-dim",
        "--cfs-max", "--svm-c", "--lstm-epochs", "--lstm-hidden",
        "--lstm-batch", "--lstm-lr", "--lstm-dropout", "--force", "--config"}) {
    CAPTURE(flag);
    CHECK(loso.out.find(flag) != std::string::npos);
  }
  CHECK(loso.out.find("(default: 64)") != std::string::npos);
  CHECK(loso.out.find("(default: 150)") != std::string::npos);
}

TEST_CASE("cli: usage failures exit 2 with one error line") {
  const CliResult none = RunCli({});
  CHECK(none.rc == 2);
  CHECK(none.err.rfind("error: usage:", 0) == 0);
  CHECK(CountLines(none.err) == 1);

  const CliResult unknown = RunCli({"frobnicate"});
  CHECK(unknown.rc == 2);
  CHECK(unknown.err.find("frobnicate") != std::string::npos);
  CHECK(CountLines(unknown.err) == 1);

  const CliResult flag = RunCli({"synth", "--bogus", "1"});
  CHECK(flag.rc == 2);
  CHECK(flag.err.rfind("error: usage:", 0) == 0);
  CHECK(flag.err.find("--bogus") != std::string::npos);

  const CliResult missing = RunCli({"synth"});
  CHECK(missing.rc == 2);
  CHECK(missing.err.find("--out-dir") != std::string::npos);

  const CliResult positional = RunCli({"synth", "corpus"});
  CHECK(positional.rc == 2);

  const CliResult bad_int =
      RunCli({"synth", "--out-dir", "x", "--subjects", "many"});
  CHECK(bad_int.rc == 2);
  CHECK(bad_int.err.find("--subjects") != std::string::npos);
}

TEST_CASE("cli: data failures exit 3 and name the missing file") {
  CliFixture& fx = Fixture();

  const fs::path empty = fx.dir.path() / "empty_run";
  fs::create_directories(empty);
  const CliResult report =
      RunCli({"report", "--in", empty.string(), "--manifest",
              (fx.corpus / "manifest.json").string()});
  CHECK(report.rc == 3);
  CHECK(report.err.rfind("error: data:", 0) == 0);
  CHECK(report.err.find("scores.csv") != std::string::npos);
  CHECK(CountLines(report.err) == 1);

  const CliResult manifest =
      RunCli({"evaluate-loso", "--manifest", "no_such_manifest.json",
              "--out-dir", (fx.dir.path() / "never").string()});
  CHECK(manifest.rc == 3);
  CHECK(manifest.err.rfind("error: data:", 0) == 0);
}

TEST_CASE("cli: synth then evaluate-loso then report round trip") {
  CliFixture& fx = Fixture();
  const fs::path run = fx.dir.path() / "run";

  const CliResult loso =
      RunCli({"evaluate-loso", "--manifest",
              (fx.corpus / "manifest.json").string(), "--out-dir",
              run.string(), "--systems", "fluency,linguistic", "--seed", "5",
              "--jobs", "2"});
  REQUIRE(loso.rc == 0);
  CHECK(loso.err.empty());
  CHECK(loso.out.find("fluency: accuracy") != std::string::npos);
  CHECK(loso.out.find("linguistic: accuracy") != std::string::npos);
  CHECK(loso.out.find("fusion_1: accuracy") != std::string::npos);
  CHECK(loso.out.find("fusion_2: accuracy") != std::string::npos);
  for (const char* name : {"scores.csv", "metrics.json", "roc_fluency.csv",
                           "roc_linguistic.csv", "roc_fusion_1.csv",
                           "roc_fusion_2.csv", "roc_all.svg"}) {
    CAPTURE(name);
    CHECK(fs::exists(run / name));
  }

  // report into a fresh directory reproduces the metrics byte for byte.
  const fs::path rerun = fx.dir.path() / "rerun";
  const CliResult report = RunCli(
      {"report", "--in", run.string(), "--manifest",
       (fx.corpus / "manifest.json").string(), "--out-dir", rerun.string()});
  REQUIRE(report.rc == 0);
  CHECK(testing::ReadAllBytes(rerun / "metrics.json") ==
        testing::ReadAllBytes(run / "metrics.json"));
  CHECK(testing::ReadAllBytes(rerun / "roc_all.svg") ==
        testing::ReadAllBytes(run / "roc_all.svg"));

  // fuse drops and re-derives the fusion rows; the table must round trip.
  const fs::path refused = fx.dir.path() / "refused";
  const CliResult fuse = RunCli({"fuse", "--scores",
                                 (run / "scores.csv").string(), "--out-dir",
                                 refused.string()});
  REQUIRE(fuse.rc == 0);
  CHECK(testing::ReadAllBytes(refused / "scores.csv") ==
        testing::ReadAllBytes(run / "scores.csv"));
}

TEST_CASE("cli: output directory guard honours --force") {
  CliFixture& fx = Fixture();
  const fs::path run = fx.dir.path() / "guarded";

  auto args = [&](bool force) {
    std::vector<std::string> a{"evaluate-loso",
                               "--manifest",
                               (fx.corpus / "manifest.json").string(),
                               "--out-dir",
                               run.string(),
                               "--systems",
                               "fluency",
                               "--seed",
                               "5"};
    if (force) a.push_back("--force");
    return a;
  };

  REQUIRE(RunCli(args(false)).rc == 0);
  const CliResult blocked = RunCli(args(false));
  CHECK(blocked.rc == 2);
  CHECK(blocked.err.find("--force") != std::string::npos);
  CHECK(RunCli(args(true)).rc == 0);
}

TEST_CASE("cli: config file supplies defaults and flags win") {
  CliFixture& fx = Fixture();
  const fs::path cfg = fx.dir.path() / "cfg.json";
  testing::WriteAllText(cfg, "{\"subjects\": 6, \"seed\": 11}\n");

  const fs::path from_cfg = fx.dir.path() / "from_cfg";
  REQUIRE(RunCli({"synth", "--config", cfg.string(), "--out-dir",
                  from_cfg.string()})
              .rc == 0);
  CHECK(testing::ReadAllBytes(from_cfg / "manifest.json") ==
        testing::ReadAllBytes(fx.corpus / "manifest.json"));

  const fs::path overridden = fx.dir.path() / "overridden";
  REQUIRE(RunCli({"synth", "--config", cfg.string(), "--subjects", "4",
                  "--out-dir", overridden.string()})
              .rc == 0);
  int wavs = 0;
  for (const auto& entry : fs::directory_iterator(overridden)) {
    if (entry.path().extension() == ".wav") ++wavs;
  }
  CHECK(wavs == 4);

  const fs::path bad = fx.dir.path() / "bad.json";
  testing::WriteAllText(bad, "{\"no_such_flag\": 1}\n");
  const CliResult rejected =
      RunCli({"synth", "--config", bad.string(), "--out-dir",
              (fx.dir.path() / "never2").string()});
  CHECK(rejected.rc == 2);
  CHECK(rejected.err.find("no_such_flag") != std::string::npos);
}

TEST_CASE("cli: CADENCE_SEED fills in when --seed is absent") {
  CliFixture& fx = Fixture();

  REQUIRE(::setenv("CADENCE_SEED", "11", 1) == 0);
  const fs::path from_env = fx.dir.path() / "from_env";
  const CliResult r = RunCli(
      {"synth", "--subjects", "6", "--out-dir", from_env.string()});
  ::unsetenv("CADENCE_SEED");
  REQUIRE(r.rc == 0);
  CHECK(testing::ReadAllBytes(from_env / "manifest.json") ==
        testing::ReadAllBytes(fx.corpus / "manifest.json"));

  REQUIRE(::setenv("CADENCE_SEED", "not_a_seed", 1) == 0);
  const CliResult bad = RunCli(
      {"synth", "--subjects", "6",
       "--out-dir", (fx.dir.path() / "never3").string()});
  ::unsetenv("CADENCE_SEED");
  CHECK(bad.rc == 2);
  CHECK(bad.err.find("CADENCE_SEED") != std::string::npos);
}

TEST_CASE("cli: reruns are byte-identical across --jobs") {
  CliFixture& fx = Fixture();
  const fs::path a = fx.dir.path() / "jobs1";
  const fs::path b = fx.dir.path() / "jobs3";

  auto args = [&](const fs::path& dir, const char* jobs) {
    return std::vector<std::string>{"evaluate-loso",
                                    "--manifest",
                                    (fx.corpus / "manifest.json").string(),
                                    "--out-dir",
                                    dir.string(),
                                    "--systems",
                                    "fluency,linguistic",
                                    "--seed",
                                    "5",
                                    "--jobs",
                                    jobs};
  };
  REQUIRE(RunCli(args(a, "1")).rc == 0);
  REQUIRE(RunCli(args(b, "3")).rc == 0);
  for (const char* name : {"scores.csv", "metrics.json", "roc_all.svg"}) {
    CAPTURE(name);
    CHECK(testing::ReadAllBytes(a / name) == testing::ReadAllBytes(b / name));
  }
}

TEST_CASE("cli: parse prints cleaned interventions as JSON") {
  CliFixture& fx = Fixture();
  fs::path cha;
  for (const auto& entry : fs::directory_iterator(fx.corpus)) {
    if (entry.path().extension() == ".cha") {
      cha = entry.path();
      break;
    }
  }
  REQUIRE(!cha.empty());

  const CliResult r = RunCli({"parse", "--in", cha.string()});
  CHECK(r.rc == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("\"subject_id\"") != std::string::npos);
  CHECK(r.out.find("\"interventions\"") != std::string::npos);

  const CliResult missing = RunCli({"parse", "--in", "no_such.cha"});
  CHECK(missing.rc == 3);
}

TEST_CASE("cli: extract writes per-subject feature tables") {
  CliFixture& fx = Fixture();
  const fs::path dir = fx.dir.path() / "feats";

  const CliResult fluency =
      RunCli({"extract", "--manifest", (fx.corpus / "manifest.json").string(),
              "--kind", "fluency", "--out-dir", dir.string()});
  REQUIRE(fluency.rc == 0);
  const std::string table = testing::ReadAllText(dir / "fluency.csv");
  CHECK(table.rfind("subject,n_syllables,", 0) == 0);
  CHECK(CountLines(table) == 7);  // header plus six subjects

  const CliResult linguistic =
      RunCli({"extract", "--manifest", (fx.corpus / "manifest.json").string(),
              "--kind", "linguistic", "--out-dir", dir.string(), "--force"});
  REQUIRE(linguistic.rc == 0);
  const std::string lng = testing::ReadAllText(dir / "linguistic.csv");
  CHECK(lng.rfind("subject,n_interventions,", 0) == 0);
  CHECK(CountLines(lng) == 7);

  const CliResult unknown =
      RunCli({"extract", "--manifest", (fx.corpus / "manifest.json").string(),
              "--kind", "sonnets", "--out-dir", dir.string(), "--force"});
  CHECK(unknown.rc == 2);
  CHECK(unknown.err.find("sonnets") != std::string::npos);
}

TEST_CASE("cli: train produces models that feed extraction") {
  CliFixture& fx = Fixture();
  const fs::path models = fx.dir.path() / "models";

  const CliResult ubm = RunCli(
      {"train", "--manifest", (fx.corpus / "manifest.json").string(),
       "--stage", "ubm", "--out-dir", models.string(), "--components", "4",
       "--em-iters", "2", "--kmeans-iters", "2", "--max-frames", "2000",
       "--seed", "5"});
  REQUIRE(ubm.rc == 0);
  CHECK(fs::exists(models / "ubm.bin"));

  const CliResult tv = RunCli(
      {"train", "--manifest", (fx.corpus / "manifest.json").string(),
       "--stage", "tv", "--out-dir", models.string(), "--force", "--ubm",
       (models / "ubm.bin").string(), "--dim", "3", "--em-iters", "2",
       "--seed", "5"});
  REQUIRE(tv.rc == 0);
  CHECK(fs::exists(models / "tv.bin"));

  const fs::path ivecs = fx.dir.path() / "ivecs";
  const CliResult extract = RunCli(
      {"extract", "--manifest", (fx.corpus / "manifest.json").string(),
       "--kind", "ivector", "--out-dir", ivecs.string(), "--ubm",
       (models / "ubm.bin").string(), "--tv", (models / "tv.bin").string()});
  REQUIRE(extract.rc == 0);
  const std::string csv = testing::ReadAllText(ivecs / "S001_ivector.csv");
  CHECK(csv.rfind("window_start,window_end,dim0,dim1,dim2\n", 0) == 0);
  CHECK(CountLines(csv) > 1);

  const CliResult no_models = RunCli(
      {"extract", "--manifest", (fx.corpus / "manifest.json").string(),
       "--kind", "ivector", "--out-dir", ivecs.string(), "--force"});
  CHECK(no_models.rc == 2);

  const CliResult bad_stage = RunCli(
      {"train", "--manifest", (fx.corpus / "manifest.json").string(),
       "--stage", "quantum", "--out-dir", models.string(), "--force"});
  CHECK(bad_stage.rc == 2);
}

}  // namespace
}  // namespace cadence
