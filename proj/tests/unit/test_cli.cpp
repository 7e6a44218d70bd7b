#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "support.hpp"

using namespace mtlaqa;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Invocation r;
  args.insert(args.begin(), "mtlaqa");
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

TEST(Cli, HelpDocumentsEveryCommand) {
  const auto top = run({"--help"});
  EXPECT_EQ(top.code, cli::kExitOk);
  for (const char* cmd : {"synth", "train", "eval", "ablate", "sweep", "probe"}) {
    EXPECT_NE(top.out.find(cmd), std::string::npos) << cmd;
    const auto sub = run({cmd, "--help"});
    EXPECT_EQ(sub.code, cli::kExitOk) << cmd;
    EXPECT_NE(sub.out.find("--seed"), std::string::npos) << cmd;
    EXPECT_NE(sub.out.find("--format"), std::string::npos) << cmd;
  }
}

TEST(Cli, ValidationErrorsExitOne) {
  EXPECT_EQ(run({}).code, cli::kExitValidation);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"train", "--data", "/tmp", "--bogus"}).code, cli::kExitValidation);

  testkit::TempDir dir("cli_missing");
  const auto missing = run({"train", "--data", dir.path().string(), "--out", (dir.path() / "run").string()});
  EXPECT_EQ(missing.code, cli::kExitValidation);
  EXPECT_NE(missing.err.find((dir.path() / "annotations.jsonl").string()), std::string::npos);
  EXPECT_FALSE(fs::exists(dir.path() / "run"));

  const auto unknown = run({"train", "--data", dir.path().string(), "--set", "optimizer.momentum=1"});
  EXPECT_EQ(unknown.code, cli::kExitValidation);
  EXPECT_NE(unknown.err.find("optimizer.momentum"), std::string::npos);

  std::ofstream(dir.path() / "cfg.json") << R"({"epochz": 3})";
  const auto bad_file = run({"train", "--data", dir.path().string(), "--config", (dir.path() / "cfg.json").string()});
  EXPECT_EQ(bad_file.code, cli::kExitValidation);
  EXPECT_NE(bad_file.err.find("epochz"), std::string::npos);

  EXPECT_EQ(run({"eval", "--ckpt", (dir.path() / "nope").string(), "--data", dir.path().string()}).code,
            cli::kExitValidation);
}

TEST(Cli, SynthTrainEvalSmokePath) {
  testkit::TempDir dir("cli_smoke");
  const auto data = (dir.path() / "data").string();
  const auto runs = (dir.path() / "run").string();
  const auto synth = run({"synth", "--seed", "7", "--samples", "16", "--out", data});
  ASSERT_EQ(synth.code, cli::kExitOk) << synth.err;
  EXPECT_TRUE(fs::exists(fs::path(data) / "annotations.jsonl"));

  const auto trained = run({"train", "--data", data, "--out", runs, "--profile", "tiny", "--epochs", "1",
                            "--seed", "7"});
  ASSERT_EQ(trained.code, cli::kExitOk) << trained.err;
  for (const char* name : {"config.json", "log.jsonl", "ckpt_best", "ckpt_final", "report.json"}) {
    EXPECT_TRUE(fs::exists(fs::path(runs) / name)) << name;
  }
  const auto cfg = nlohmann::json::parse(std::ifstream(fs::path(runs) / "config.json"));
  EXPECT_EQ(cfg.at("seed"), 7);
  EXPECT_EQ(cfg.at("profile"), "tiny");

  const auto evaluated = run({"eval", "--ckpt", (fs::path(runs) / "ckpt_best").string(), "--data", data});
  ASSERT_EQ(evaluated.code, cli::kExitOk) << evaluated.err;
  const auto report = nlohmann::json::parse(evaluated.out);
  EXPECT_TRUE(report.contains("sp_corr"));
  EXPECT_EQ(report.at("samples"), 4);

  const auto csv = run({"eval", "--ckpt", (fs::path(runs) / "ckpt_best").string(), "--data", data, "--format",
                        "csv", "--split", "train"});
  ASSERT_EQ(csv.code, cli::kExitOk) << csv.err;
  EXPECT_EQ(csv.out.rfind("sp_corr", 0), 0u);
}
