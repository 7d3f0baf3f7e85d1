/* Copyright 2026 The corpusforge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "corpusforge/cli.hpp"
#include "corpusforge/geometry.hpp"
#include "corpusforge/log.hpp"
#include "corpusforge/manifest.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace corpusforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kMockConfig = R"(seed = 17
[retry]
base_delay_ms = 0
[backends]
translators = a, b
scorer = qe
generator = gen
[backends.a]
kind = mock-echo
variant = a
[backends.b]
kind = mock-echo
variant = b
[backends.qe]
kind = mock-hash
seed = 3
[backends.gen]
kind = mock-template
lines = 4
style = enumerated
)";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("corpusforge-cli-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    set_log_sink(&log_);
    write_file(path("mock.ini"), kMockConfig);

    DatasetManifest asr;
    for (int i = 0; i < 30; ++i) {
      asr.records.push_back(testing::make_asr("u" + std::to_string(i), 5.0 + 4.0 * i,
                                              "utterance number " + std::to_string(i)));
    }
    write_file(path("asr.jsonl"), serialize_manifest(asr));
    write_file(path("contexts.jsonl"),
               R"({"context_id":"c0","transcript":"a passage","audio_path":"c0.wav","duration_s":30,"qa_pairs":[{"question":"q0?","answer":"a0"},{"question":"q1?","answer":"a1"}]})"
               "\n");
  }
  void TearDown() override {
    set_log_sink(&std::cerr);
    fs::remove_all(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args, std::map<std::string, std::string> env = {}) {
    args.insert(args.begin(), "corpusforge");
    cli::Environment e;
    e.env = [env](const std::string& k) -> std::optional<std::string> {
      auto it = env.find(k);
      if (it == env.end()) return std::nullopt;
      return it->second;
    };
    stdout_.str("");
    e.out = &stdout_;
    return cli::run(args, e);
  }

  fs::path dir_;
  std::ostringstream log_;
  std::ostringstream stdout_;
};

TEST_F(CliTest, PseudolabelWritesManifestReportAndSidecar) {
  ASSERT_EQ(run({"--config", path("mock.ini"), "pseudolabel", "--input", path("asr.jsonl"),
                 "--target-lang", "de", "--out", path("st.jsonl"), "--report", path("r.json")}),
            cli::kExitOk)
      << log_.str();
  DatasetManifest st = load_manifest(path("st.jsonl"), Stage::kIft, ParseOptions{true});
  for (const auto& r : st.records) {
    EXPECT_EQ(r.task, Task::kSt);
    EXPECT_GE(*r.provenance.qe_score, 0.85);
  }
  json report = json::parse(read_file(path("r.json")));
  EXPECT_EQ(report["rows"].back()["kept"], st.records.size());
  EXPECT_EQ(report["run"]["command"], "pseudolabel");
  EXPECT_EQ(report["run"]["seed"], 17);
  json meta = json::parse(read_file(path("st.jsonl.meta.json")));
  EXPECT_EQ(meta, report["run"]);
  for (const auto& entry : fs::directory_iterator(dir_)) {
    EXPECT_EQ(entry.path().string().find(".tmp."), std::string::npos);
  }
}

TEST_F(CliTest, ThresholdFlagOverridesConfig) {
  ASSERT_EQ(run({"--config", path("mock.ini"), "pseudolabel", "--input", path("asr.jsonl"),
                 "--target-lang", "zh", "--threshold", "0", "--out", path("st.jsonl"), "--report",
                 path("r.json")}),
            cli::kExitOk);
  EXPECT_EQ(load_manifest(path("st.jsonl"), Stage::kIft).records.size(), 30u);
  EXPECT_EQ(run({"--config", path("mock.ini"), "pseudolabel", "--input", path("asr.jsonl"),
                 "--target-lang", "zh", "--threshold", "1.5", "--out", path("st.jsonl"),
                 "--report", path("r.json")}),
            cli::kExitValidation);
}

TEST_F(CliTest, ValidationExitCodes) {
  EXPECT_EQ(run({"validate", "--input", path("missing.jsonl")}), cli::kExitValidation);
  write_file(path("bad.jsonl"), "{\"id\":1}\n");
  EXPECT_EQ(run({"validate", "--input", path("bad.jsonl")}), cli::kExitValidation);
  EXPECT_NE(log_.str().find("manifest_invalid"), std::string::npos);
  EXPECT_EQ(run({"--config", path("nope.ini"), "validate", "--input", path("asr.jsonl")}),
            cli::kExitValidation);
  EXPECT_EQ(run({"pseudolabel", "--bogus"}), cli::kExitValidation);
  EXPECT_EQ(run({}), cli::kExitValidation);
  EXPECT_EQ(run({"--config", path("mock.ini"), "pseudolabel", "--input", path("asr.jsonl"),
                 "--target-lang", "fr", "--out", path("o"), "--report", path("r")}),
            cli::kExitValidation);
  // No registry configured.
  EXPECT_EQ(run({"pseudolabel", "--input", path("asr.jsonl"), "--target-lang", "de", "--out",
                 path("o"), "--report", path("r")}),
            cli::kExitValidation);
  EXPECT_FALSE(fs::exists(path("o")));
}

TEST_F(CliTest, ValidatePrintsSummary) {
  ASSERT_EQ(run({"validate", "--input", path("asr.jsonl"), "--stage", "ma"}), cli::kExitOk);
  json summary = json::parse(stdout_.str());
  EXPECT_EQ(summary["records"], 30);
  EXPECT_EQ(summary["valid"], true);
}

TEST_F(CliTest, BackendExhaustionExitsThree) {
  std::string cfg = kMockConfig;
  cfg.replace(cfg.find("kind = mock-echo\nvariant = a"), 28, "kind = mock-down");
  cfg.replace(cfg.find("kind = mock-echo\nvariant = b"), 28, "kind = mock-down");
  cfg.replace(cfg.find("base_delay_ms = 0"), 17, "base_delay_ms = 0\nmax_attempts = 2");
  write_file(path("down.ini"), cfg);
  EXPECT_EQ(run({"--config", path("down.ini"), "pseudolabel", "--input", path("asr.jsonl"),
                 "--target-lang", "de", "--out", path("st.jsonl"), "--report", path("r.json")}),
            cli::kExitBackendExhausted);
  json report = json::parse(read_file(path("r.json")));
  EXPECT_EQ(report["outcome"]["failed_exhausted"], 30);
}

TEST_F(CliTest, EnvOverridesFlags) {
  ASSERT_EQ(run({"--config", path("mock.ini"), "--seed", "5", "validate", "--input",
                 path("asr.jsonl")},
                {{"CORPUSFORGE_SEED", "9"}}),
            cli::kExitOk);
  EXPECT_EQ(json::parse(stdout_.str())["run"]["seed"], 9);
  ASSERT_EQ(run({"--config", path("mock.ini"), "--seed", "5", "validate", "--input",
                 path("asr.jsonl")}),
            cli::kExitOk);
  EXPECT_EQ(json::parse(stdout_.str())["run"]["seed"], 5);
}

TEST_F(CliTest, FullPipelineIsReproducible) {
  auto pipeline = [&](const std::string& tag, const std::string& jobs) {
    const std::vector<std::string> base{"--config", path("mock.ini"), "--jobs", jobs};
    auto with = [&](std::vector<std::string> rest) {
      std::vector<std::string> args = base;
      args.insert(args.end(), rest.begin(), rest.end());
      return args;
    };
    EXPECT_EQ(run(with({"pseudolabel", "--input", path("asr.jsonl"), "--target-lang", "de",
                        "--out", path(tag + "st.jsonl"), "--report", path(tag + "pl.json")})),
              0);
    EXPECT_EQ(run(with({"synth-qa", "--contexts", path("contexts.jsonl"), "--out",
                        path(tag + "sqa.jsonl"), "--report", path(tag + "qa.json")})),
              0);
    EXPECT_EQ(run(with({"assemble", "--stage", "ift", "--inputs",
                        path("asr.jsonl") + "," + path(tag + "st.jsonl") + "," + path(tag + "sqa.jsonl"),
                        "--out", path(tag + "ift.jsonl"), "--stats", path(tag + "stats.json")})),
              0);
  };
  pipeline("x-", "1");
  pipeline("y-", "3");
  for (const char* f : {"st.jsonl", "pl.json", "sqa.jsonl", "qa.json", "ift.jsonl", "stats.json",
                        "ift.jsonl.meta.json"}) {
    EXPECT_EQ(read_file(path(std::string("x-") + f)), read_file(path(std::string("y-") + f))) << f;
    EXPECT_FALSE(read_file(path(std::string("x-") + f)).empty()) << f;
  }
  json qa = json::parse(read_file(path("x-qa.json")));
  EXPECT_EQ(qa["unanswerable"]["records"], 6);
}

TEST_F(CliTest, AssembleMaRejectsNonAsr) {
  DatasetManifest st;
  st.records.push_back(testing::make_st("s1", 3.0, "x", Language::kDe));
  write_file(path("st.jsonl"), serialize_manifest(st));
  EXPECT_EQ(run({"assemble", "--stage", "ma", "--inputs", path("asr.jsonl") + "," + path("st.jsonl"),
                 "--out", path("ma.jsonl"), "--stats", path("s.json")}),
            cli::kExitValidation);
  EXPECT_NE(log_.str().find("st.jsonl:s1"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("ma.jsonl")));
}

TEST_F(CliTest, StatsAndMask) {
  ASSERT_EQ(run({"stats", "--inputs", path("asr.jsonl")}), cli::kExitOk);
  json stats = json::parse(stdout_.str());
  EXPECT_EQ(stats["records"], 30);
  ASSERT_EQ(stats["mixture"]["rows"].size(), 1u);

  ASSERT_EQ(run({"mask", "--audio-len", "2", "--text-len", "2"}), cli::kExitOk);
  EXPECT_EQ(stdout_.str(), "0-1\n0-1\n0-2\n0-3\n");
  ASSERT_EQ(run({"mask", "--duration", "10", "--text-len", "1", "--out", path("m.txt")}),
            cli::kExitOk);
  EXPECT_EQ(parse_mask_text(read_file(path("m.txt"))).begin.size(), 17u);
  EXPECT_EQ(run({"mask", "--text-len", "1"}), cli::kExitValidation);
}

TEST(WriteAtomic, ReplacesContent) {
  const auto p = (fs::temp_directory_path() / "corpusforge-atomic.txt").string();
  cli::write_atomic(p, "one");
  cli::write_atomic(p, "two");
  EXPECT_EQ(read_file(p), "two");
  fs::remove(p);
  EXPECT_THROW(cli::write_atomic("/nonexistent-dir/x", "y"), std::runtime_error);
}

}  // namespace
}  // namespace corpusforge
