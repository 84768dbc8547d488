// tests/cli_test.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "fdt/error.h"
#include "fdt/evaluate.h"
#include "fdt/matrix_container.h"
#include "fdt/synth.h"
#include "fdt/train.h"
#include "oracles.h"
#include "run_config.h"

namespace fdt::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome Fdt(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome r;
  r.code = Dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fdt_cli_" + std::string(::testing::UnitTest::GetInstance()
                                         ->current_test_info()
                                         ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  void Write(const std::string& name, const std::string& text) {
    WriteFileBytes(dir_ / name, text);
  }

  // Vocabulary and lexicon with single-piece words "a" and "b".
  void WriteAbInventory() {
    Write("vocab.txt", "<blk>\na\nb\n");
    Write("lexicon.txt", "a\ta\nb\tb\n");
  }

  void WriteGrids(const std::string& name,
                  const std::vector<std::pair<std::string, std::vector<int>>>& paths,
                  int num_ids) {
    MatrixContainer c;
    for (const auto& [id, tokens] : paths) {
      c.add(id, oracle::OneHotLogPosteriors(tokens, num_ids, 1e-6));
    }
    WriteContainer(c, dir_ / name);
  }

  fs::path dir_;
};

TEST(RunConfigTest, DefaultsRoundTrip) {
  const RunConfig c;
  const RunConfig back = ParseRunConfig(RunConfigToJson(c));
  EXPECT_EQ(RunConfigToJson(back), RunConfigToJson(c));
  EXPECT_EQ(ConfigHash(back), ConfigHash(c));
  EXPECT_EQ(back.finetune.adam.lr, 3e-5);
  EXPECT_EQ(back.train.epochs, 20);
}

TEST(RunConfigTest, PartialDocumentKeepsDefaults) {
  const RunConfig c =
      ParseRunConfig(R"({"seed": 9, "train": {"epochs": 2}, "decode": {"n": 2}})");
  EXPECT_EQ(c.train.epochs, 2);
  EXPECT_EQ(c.decode_n, 2);
  EXPECT_EQ(c.train.hidden, 64);
  EXPECT_EQ(c.synth.seed, 9u);
  EXPECT_EQ(c.finetune.seed, 9u);
  EXPECT_NE(ConfigHash(c), ConfigHash(RunConfig{}));
}

TEST(RunConfigTest, RejectsBadDocuments) {
  for (const char* text :
       {R"({"train": {"epoch": 2}})", R"({"optimizer": {}})",
        R"({"train": {"epochs": "two"}})", R"({"train": 3})",
        R"({"decode": {"beam": 2, "n": 4}})", R"([1, 2])", "{"}) {
    try {
      ParseRunConfig(text);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig) << text;
    }
  }
}

TEST(RunConfigTest, Fnv1aVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Fdt({}).code, kExitUnknownCommand);
  const Outcome unknown = Fdt({"train-mmi"});
  EXPECT_EQ(unknown.code, kExitUnknownCommand);
  EXPECT_NE(unknown.err.find("\"exit_code\":2"), std::string::npos);
  EXPECT_EQ(Fdt({"decode", "--beam"}).code, kExitConfig);
  EXPECT_EQ(Fdt({"gen-data"}).code, kExitConfig);
  EXPECT_EQ(Fdt({"decode", "--data", Path("missing"), "--ckpt", "x"}).code,
            kExitData);
  EXPECT_EQ(Fdt({"--help"}).code, kExitOk);
}

TEST_F(CliTest, GradCheckPasses) {
  const Outcome r = Fdt({"grad-check", "--seed", "7"});
  EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
  int passes = 0;
  for (std::size_t p = 0; (p = r.out.find("\tPASS\n", p)) != std::string::npos; ++p) {
    ++passes;
  }
  EXPECT_EQ(passes, 5);
}

TEST_F(CliTest, AlignSegmentsTheWorkedExample) {
  WriteAbInventory();
  Write("refs.tsv", "u1\ta b\n");
  WriteGrids("grids.fdt", {{"u1", {0, 0, 1, 0, 0, 2}}}, 3);
  const Outcome r = Fdt({"align", "--grids", Path("grids.fdt"), "--vocab",
                     Path("vocab.txt"), "--lexicon", Path("lexicon.txt"),
                     "--refs", Path("refs.tsv"), "--n", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("alignment\t<blk> <blk> a <blk> <blk> b\n"),
            std::string::npos);
  EXPECT_NE(r.out.find("word\t1\ta\t1\t3\ta\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("word\t2\tb\t3\t6\tb\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("hyp\t1\t"), std::string::npos);
}

TEST_F(CliTest, AlignListsFlaggedSegments) {
  WriteAbInventory();
  // The grid says "a a" but the reference is "a b".
  Write("refs.tsv", "u1\ta b\n");
  WriteGrids("grids.fdt", {{"u1", {1, 0, 0, 1, 0, 0}}}, 3);
  const Outcome r = Fdt({"align", "--grids", Path("grids.fdt"), "--vocab",
                     Path("vocab.txt"), "--lexicon", Path("lexicon.txt"),
                     "--refs", Path("refs.tsv"), "--n", "1", "--beam", "4"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("hyp\t1\t1\t"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("segment\t1\t2\t"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("\tb\ta\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, DecodeOneHotFixture) {
  WriteAbInventory();
  WriteGrids("grids.fdt",
             {{"u1", {1, 0, 2, 2}}, {"u2", {2, 0, 2, 0, 1}}}, 3);
  const Outcome r = Fdt({"decode", "--grids", Path("grids.fdt"), "--vocab",
                     Path("vocab.txt"), "--beam", "4", "--n", "2", "--out",
                     Path("nbest.txt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string dump = ReadFileBytes(dir_ / "nbest.txt");
  EXPECT_NE(dump.find("u1\t1\t"), std::string::npos);
  EXPECT_NE(dump.find("\ta b\nu1\t2\t"), std::string::npos) << dump;
  EXPECT_NE(dump.find("\tb b a\n"), std::string::npos) << dump;
}

// A tiny end-to-end run through the binary's entry point.
TEST_F(CliTest, PipelineAndOfflineRescoring) {
  Write("run.json", R"({"synth": {"train_size": 40, "finetune_size": 8,
    "eval_general_size": 6, "eval_rare_size": 6}, "train": {"epochs": 2,
    "hidden": 8}, "finetune": {"beam": 4, "nbest": 2}})");
  const std::string cfg = Path("run.json"), data = Path("data");
  ASSERT_EQ(Fdt({"gen-data", "--config", cfg, "--seed", "4", "--out", data}).code, 0);
  ASSERT_EQ(Fdt({"train-ctc", "--config", cfg, "--seed", "4", "--data", data,
                 "--out", Path("base.ckpt")}).code, 0);
  for (const char* loss : {"fdt", "mmi", "mwer", "ctc-control"}) {
    const Outcome r = Fdt({"finetune", "--config", cfg, "--seed", "4", "--data", data,
                       "--init", Path("base.ckpt"), "--loss", loss, "--out",
                       Path(std::string(loss) + ".ckpt")});
    ASSERT_EQ(r.code, 0) << loss << r.err;
  }
  const TrainState tuned = LoadCheckpoint(Path("fdt.ckpt"));

  ASSERT_EQ(Fdt({"decode", "--data", data, "--ckpt", Path("fdt.ckpt"), "--split",
                 "eval_rare", "--beam", "8", "--n", "3", "--out",
                 Path("nbest.txt")}).code, 0);
  const Outcome offline = Fdt({"eval-wer", "--data", data, "--split", "eval_rare",
                           "--nbest", Path("nbest.txt")});
  const Outcome online = Fdt({"eval-wer", "--data", data, "--split", "eval_rare",
                          "--ckpt", Path("fdt.ckpt"), "--beam", "8"});
  ASSERT_EQ(offline.code, 0) << offline.err;
  EXPECT_EQ(offline.out, online.out);

  const Dataset d = LoadDataset(data);
  const WerReport lib = Evaluate(tuned.params, d.split("eval_rare"), d.inventory, 8, 1);
  char line[64];
  std::snprintf(line, sizeof(line), "\nwer\t%.6f\n", lib.wer());
  EXPECT_NE(offline.out.find(line), std::string::npos) << offline.out;

  const Outcome entropy = Fdt({"entropy", "--data", data, "--ckpt", Path("fdt.ckpt"),
                           "--bins", "5"});
  ASSERT_EQ(entropy.code, 0);
  EXPECT_EQ(entropy.out.rfind("mean\t", 0), 0u);
}

TEST_F(CliTest, ConfigHashIsRecorded) {
  Write("run.json", R"({"synth": {"train_size": 16, "finetune_size": 8,
    "eval_general_size": 4, "eval_rare_size": 4}, "train": {"epochs": 1,
    "hidden": 4}})");
  const std::string cfg = Path("run.json"), data = Path("data");
  ASSERT_EQ(Fdt({"gen-data", "--config", cfg, "--out", data}).code, 0);
  ASSERT_EQ(Fdt({"train-ctc", "--config", cfg, "--seed", "2", "--data", data,
                 "--out", Path("a.ckpt")}).code, 0);
  CheckpointMeta meta;
  LoadCheckpoint(Path("a.ckpt"), &meta);
  RunConfig c = LoadRunConfig(cfg);
  c.seed = 2;
  c.ApplySeed();
  EXPECT_EQ(meta.config_hash, ConfigHash(c));
  EXPECT_EQ(meta.seed, 2u);
}

TEST_F(CliTest, DivergenceExitCode) {
  Write("run.json", R"({"synth": {"train_size": 40, "finetune_size": 8,
    "eval_general_size": 4, "eval_rare_size": 4}, "train": {"epochs": 1,
    "lr": 1e38}})");
  const std::string cfg = Path("run.json"), data = Path("data");
  ASSERT_EQ(Fdt({"gen-data", "--config", cfg, "--out", data}).code, 0);
  const Outcome r = Fdt({"train-ctc", "--config", cfg, "--data", data, "--out",
                     Path("a.ckpt")});
  EXPECT_EQ(r.code, kExitDivergence) << r.err;
  EXPECT_NE(r.err.find("\"error\":\"Divergence\""), std::string::npos);
}

}  // namespace
}  // namespace fdt::cli
