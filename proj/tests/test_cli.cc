#include <gtest/gtest.h>
#include <sys/wait.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "mtdata/digest.h"
#include "support/temp_dir.h"

namespace {

const std::filesystem::path kSource = MTDATA_SOURCE_DIR;
const std::string kCli = MTDATA_CLI;

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with `args`; stderr goes to a file in `tmp`.
Run cli(const TempDir& tmp, const std::string& args) {
  const auto out_file = tmp / "stdout.txt";
  const std::string cmd = kCli + " " + args + " > " + out_file.string() + " 2> " + (tmp / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_file);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1,
          {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}};
}

std::string corpus() { return (kSource / "tests/data/tiny_corpus").string(); }

}  // namespace

TEST(Cli, ExitCodes) {
  TempDir tmp;
  EXPECT_EQ(cli(tmp, "--help").code, 0);
  EXPECT_EQ(cli(tmp, "").code, 1);
  EXPECT_EQ(cli(tmp, "balance --bogus-flag 3").code, 1);
  EXPECT_EQ(cli(tmp, "balance --input " + corpus() + " --out " + (tmp / "b").string()).code, 1);  // no seed
  EXPECT_EQ(cli(tmp, "balance --input " + (tmp / "none").string() + " --seed 1 --out " + (tmp / "b").string()).code, 2);
  EXPECT_EQ(cli(tmp, "eval judge --refs " + tmp.path().string() + " --hyps " + tmp.path().string() +
                         " --judge-endpoint http://127.0.0.1:1/x")
                .code,
            2);
}

TEST(Cli, RemoteErrorsExitThree) {
  TempDir tmp;
  std::filesystem::create_directories(tmp / "refs");
  std::filesystem::create_directories(tmp / "hyps");
  std::ofstream(tmp / "refs" / "de.devtest") << "Hallo Welt\n";
  std::ofstream(tmp / "refs" / "en.devtest") << "Hello world\n";
  std::ofstream(tmp / "hyps" / "de-en.txt") << "Hello world\n";
  const auto args = "eval judge --refs " + (tmp / "refs").string() + " --hyps " + (tmp / "hyps").string() +
                    " --judge-endpoint http://127.0.0.1:1/v1 --judge-api-key-env MTDATA_UNSET_KEY_FOR_TEST";
  EXPECT_EQ(cli(tmp, args).code, 3);

  auto bleu = cli(tmp, "eval bleu --system mine --refs " + (tmp / "refs").string() + " --hyps " + (tmp / "hyps").string());
  EXPECT_EQ(bleu.code, 0);
  EXPECT_EQ(bleu.out, "direction\tmine\nde-en\t100\n");
}

TEST(Cli, StagesMatchPipelineRun) {
  TempDir tmp;
  const auto config = (kSource / "tests/data/tiny_config.yaml").string();
  ASSERT_EQ(cli(tmp, "run --config " + config + " --input " + corpus() + " --out " + (tmp / "run").string()).code, 0);

  // Stage by stage with the same root seed (7, from the config file).
  ASSERT_EQ(cli(tmp, "balance --config " + config + " --input " + corpus() + " --out " + (tmp / "corpus").string()).code, 0);
  for (const auto& e : std::filesystem::directory_iterator(tmp / "corpus")) {
    if (e.path().extension() != ".tsv") continue;
    EXPECT_EQ(mtdata::sha256_file(e.path()),
              mtdata::sha256_file(tmp / "run" / "corpus" / e.path().filename()));
  }
  ASSERT_EQ(cli(tmp, "vocab train --config " + config + " --input " + (tmp / "corpus").string() + " --out " +
                         (tmp / "vocab.json").string())
                .code,
            0);
  EXPECT_EQ(mtdata::sha256_file(tmp / "vocab.json"), mtdata::sha256_file(tmp / "run" / "vocab.json"));
  ASSERT_EQ(cli(tmp, "pack --config " + config + " --input " + (tmp / "corpus").string() + " --vocab " +
                         (tmp / "vocab.json").string() + " --out " + (tmp / "packed").string())
                .code,
            0);
  EXPECT_EQ(mtdata::sha256_file(tmp / "packed" / "packed_stats.json"),
            mtdata::sha256_file(tmp / "run" / "packed_stats.json"));
  ASSERT_EQ(cli(tmp, "schedule run --config " + config + " --buckets " + (tmp / "packed" / "packed_stats.json").string() +
                         " --trace " + (tmp / "trace.jsonl").string())
                .code,
            0);
  EXPECT_EQ(mtdata::sha256_file(tmp / "trace.jsonl"), mtdata::sha256_file(tmp / "run" / "schedule.jsonl"));
  ASSERT_EQ(cli(tmp, "instruct build --config " + config + " --input " + (tmp / "corpus").string() + " --out " +
                         (tmp / "instruct.jsonl").string())
                .code,
            0);
  EXPECT_EQ(mtdata::sha256_file(tmp / "instruct.jsonl"), mtdata::sha256_file(tmp / "run" / "instruct.jsonl"));

  const auto sim = cli(tmp, "schedule simulate --trace " + (tmp / "trace.jsonl").string());
  EXPECT_EQ(sim.code, 0);
  EXPECT_TRUE(sim.out.starts_with("direction\tdeclared\tconsumed"));
}

TEST(Cli, SeedFlagOverridesConfigFile) {
  TempDir tmp;
  const auto config = (kSource / "tests/data/tiny_config.yaml").string();
  ASSERT_EQ(cli(tmp, "run --config " + config + " --seed 42 --input " + corpus() + " --out " + (tmp / "a").string()).code, 0);
  const auto j = nlohmann::json::parse(std::ifstream(tmp / "a" / "manifest.json"));
  EXPECT_EQ(j["config"]["seed"], "42");
  EXPECT_EQ(j["config"]["pack_length"], "64");
}

TEST(Cli, ReportSortedByFirstSystem) {
  TempDir tmp;
  const auto r = cli(tmp, "eval report --sort-by BigTranslate --fixtures " + (kSource / "data/table1.tsv").string() +
                              " --wins " + (tmp / "wins.tsv").string() + " --series " + (tmp / "s.json").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.starts_with("direction\tBigTranslate\tChatGPT\tGoogle Translate\nfr-en\t41.4\t"));
  EXPECT_TRUE(std::filesystem::exists(tmp / "wins.tsv"));
  EXPECT_TRUE(std::filesystem::exists(tmp / "s.json"));
}
