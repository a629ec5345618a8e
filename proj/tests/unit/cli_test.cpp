#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "dicoh/synthetic.hpp"

namespace dicoh::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const fs::path kFixture = fs::path(DICOH_TEST_DATA_DIR) / "dailydialog";

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "dicoh-cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"prepare", "--no-such-flag", "x"}).code, 2);
  EXPECT_EQ(cli({"prepare"}).code, 2);
  const CliRun missing = cli({"prepare", "--input", "/nonexistent/dailydialog"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("no such file"), std::string::npos) << missing.err;
  EXPECT_EQ(cli({"train", "--pairs", kFixture.string(), "--regime", "x-dicoh", "--embeddings", "random"}).code, 2);
}

TEST(Cli, UnknownConfigKeyIsAnError) {
  const fs::path dir = temp_dir("config");
  write(dir / "bad.cfg", "seed = 3\nlearning_rate = 0.1\n");
  const CliRun r = cli({"prepare", "--config", (dir / "bad.cfg").string(), "--input", kFixture.string(), "--out",
                     (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.cfg:2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("learning_rate"), std::string::npos) << r.err;
}

TEST(Cli, PrepareMatchesHandCountsAndWritesResolvedConfig) {
  const fs::path dir = temp_dir("prepare");
  write(dir / "run.cfg", "# fixture\nseed = 11\n");
  const CliRun r = cli({"prepare", "--config", (dir / "run.cfg").string(), "--input", kFixture.string(), "--out",
                     (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json expected = json::parse(slurp(kFixture / "expected_stats.json"));
  const json stats = json::parse(slurp(dir / "out" / "stats.json"));
  EXPECT_EQ(stats["total"]["dialogues"], expected["dialogues"]);
  EXPECT_EQ(stats["total"]["utterances"], expected["utterances"]);
  EXPECT_EQ(stats["total"]["words"], expected["words"]);
  EXPECT_EQ(stats["total"]["label_counts"], expected["label_counts"]);
  for (const auto& [split, n] : expected["splits"].items()) EXPECT_EQ(stats["splits"][split]["dialogues"], n) << split;
  EXPECT_EQ(stats["skipped_empty"], 0);
  const std::string resolved = slurp(dir / "out" / "config.resolved");
  EXPECT_NE(resolved.find("seed = 11"), std::string::npos) << resolved;
  EXPECT_NE(resolved.find("input = "), std::string::npos) << resolved;
  for (const char* s : {"train", "validation", "test"}) EXPECT_TRUE(fs::exists(dir / "out" / (std::string(s) + ".jsonl")));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path dir = temp_dir("override");
  write(dir / "run.cfg", "seed = 11\n");
  const CliRun r = cli({"prepare", "--config", (dir / "run.cfg").string(), "--seed", "12", "--input", kFixture.string(),
                     "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(dir / "out" / "config.resolved").find("seed = 12"), std::string::npos);
}

TEST(Cli, DataRootResolvesRelativeInputs) {
  const fs::path dir = temp_dir("root");
  fs::create_directories(dir / "raw");
  fs::copy(kFixture / "dialogues_text.txt", dir / "raw" / "dialogues_text.txt");
  fs::copy(kFixture / "dialogues_act.txt", dir / "raw" / "dialogues_act.txt");
  ::setenv(kDataRootEnv, dir.c_str(), 1);
  const CliRun r = cli({"prepare", "--input", "raw", "--out", (dir / "out").string()});
  ::unsetenv(kDataRootEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "stats.json"));
}

TEST(Cli, PipelineIsDeterministic) {
  const fs::path dir = temp_dir("pipeline");
  SyntheticCorpusOptions opt;
  opt.dialogues = 30;
  opt.seed = 2;
  const SyntheticCorpus raw = synthetic_dailydialog(opt);
  fs::create_directories(dir / "raw");
  write(dir / "raw" / "dialogues_text.txt", raw.text);
  write(dir / "raw" / "dialogues_act.txt", raw.acts);
  const std::string d = dir.string();
  ASSERT_EQ(cli({"prepare", "--input", d + "/raw", "--out", d + "/corpus"}).code, 0);
  ASSERT_EQ(cli({"perturb", "--corpus", d + "/corpus", "--domain", "uo", "--per-dialogue", "2", "--out", d + "/uo"})
                .code,
            0);
  for (const char* run : {"a", "b"}) {
    const CliRun r = cli({"train", "--pairs", d + "/uo", "--regime", "m-dicoh", "--epochs", "2", "--batch-size", "8",
                       "--embeddings", "random", "--embed-dim", "8", "--utt-hidden", "4", "--dial-hidden", "4",
                       "--lr", "0.01", "--seed", "4", "--out", d + "/" + run});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(dir / "a" / "train.log"), slurp(dir / "b" / "train.log"));
  EXPECT_FALSE(slurp(dir / "a" / "train.log").empty());
  EXPECT_EQ(slurp(dir / "a" / "model.ckpt"), slurp(dir / "b" / "model.ckpt"));
  EXPECT_NE(slurp(dir / "a" / "config.resolved").find("regime = m-dicoh"), std::string::npos);

  const CliRun eval = cli({"eval", "--checkpoint", d + "/a/model.ckpt", "--pairs", d + "/uo", "--out", d + "/eval"});
  ASSERT_EQ(eval.code, 0) << eval.err;
  const json report = json::parse(slurp(dir / "eval" / "report.json"));
  EXPECT_EQ(report["cells"].size(), 1u);
  EXPECT_EQ(report["cells"][0]["domain"], "uo");

  const CliRun score = cli({"score", "--checkpoint", d + "/a/model.ckpt", "--input", d + "/corpus/test.jsonl", "--out",
                         d + "/score"});
  ASSERT_EQ(score.code, 0) << score.err;
  EXPECT_FALSE(score.out.empty());

  const CliRun inspect = cli({"inspect", "--checkpoint", d + "/a/model.ckpt", "--input", d + "/corpus/test.jsonl"});
  EXPECT_EQ(inspect.code, 2);
  EXPECT_NE(inspect.err.find("--dialogue"), std::string::npos);

  const CliRun random = cli({"eval", "--model", "random", "--seeds", "3", "--pairs", d + "/uo", "--out", d + "/random"});
  ASSERT_EQ(random.code, 0) << random.err;
  EXPECT_NE(random.out.find("±"), std::string::npos) << random.out;
}

TEST(Cli, VocabularyMismatchIsRejected) {
  const fs::path dir = temp_dir("mismatch");
  ASSERT_EQ(cli({"prepare", "--input", kFixture.string(), "--out", (dir / "corpus").string()}).code, 0);
  ASSERT_EQ(cli({"perturb", "--corpus", (dir / "corpus").string(), "--per-dialogue", "1", "--out",
                 (dir / "uo").string()})
                .code,
            0);
  write(dir / "uo" / "vocab.txt", slurp(dir / "uo" / "vocab.txt") + "extraword\n");
  const CliRun r = cli({"train", "--pairs", (dir / "uo").string(), "--embeddings", "random", "--out",
                     (dir / "run").string()});
  EXPECT_EQ(r.code, 2) << r.err;
}

}  // namespace
}  // namespace dicoh::cli
