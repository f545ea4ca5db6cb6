#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "mtdata/config.h"
#include "mtdata/digest.h"
#include "mtdata/error.h"
#include "mtdata/pipeline.h"
#include "support/temp_dir.h"

using namespace mtdata;

namespace {

const std::filesystem::path kSource = MTDATA_SOURCE_DIR;

PipelineConfig tiny_config(const std::filesystem::path& out) {
  auto config = resolve_config(read_config_file(kSource / "tests/data/tiny_config.yaml"), {});
  config.corpus_dir = kSource / "tests/data/tiny_corpus";
  config.output_dir = out;
  return config;
}

std::map<std::string, std::string> artifact_digests(const RunManifest& m) {
  std::map<std::string, std::string> out;
  for (const auto& a : m.artifacts) out[a.file.path] = a.file.sha256;
  return out;
}

std::map<std::string, std::string> load_golden() {
  std::ifstream in(kSource / "tests/data/tiny_golden_digests.json");
  const auto j = nlohmann::json::parse(in);
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
  return out;
}

}  // namespace

TEST(Config, DefaultsAndValidation) {
  PipelineConfig c;
  EXPECT_EQ(c.flip_threshold, 1'000'000u);
  EXPECT_EQ(c.max_num, 1'000'000u);
  EXPECT_EQ(c.pack_length, 1'024u);
  EXPECT_EQ(c.s_high, 10'000u);
  EXPECT_EQ(c.s_low, 5'000u);
  EXPECT_EQ(c.cutover, 10'000u);
  EXPECT_EQ(c.per_direction, 1'000u);
  EXPECT_THROW(c.validate(), UsageError);  // no seed
  c.set("seed", "42");
  EXPECT_NO_THROW(c.validate());
  c.set("batch_size", "0");
  EXPECT_THROW(c.validate(), UsageError);
  EXPECT_THROW(c.set("nonsense", "1"), UsageError);
  EXPECT_THROW(c.set("pack_length", "-3"), UsageError);
  EXPECT_THROW(c.set("pack_length", "abc"), UsageError);
}

TEST(Config, FlagsOverrideFile) {
  TempDir tmp;
  std::ofstream(tmp / "c.yaml") << "seed: 7\npack_length: 512\ncorpus_dir: corpora/main\n";
  const auto file = read_config_file(tmp / "c.yaml");
  const auto c = resolve_config(file, {{"seed", "42"}});
  EXPECT_EQ(*c.seed, 42u);
  EXPECT_EQ(c.pack_length, 512u);
  EXPECT_EQ(c.corpus_dir, "corpora/main");
  EXPECT_EQ(c.get("seed"), "42");

  std::ofstream(tmp / "bad.yaml") << "unknown_key: 1\n";
  EXPECT_THROW(resolve_config(read_config_file(tmp / "bad.yaml"), {}), UsageError);
  std::ofstream(tmp / "nested.yaml") << "judge:\n  model: x\n";
  EXPECT_THROW(read_config_file(tmp / "nested.yaml"), UsageError);
  EXPECT_THROW(read_config_file(tmp / "missing.yaml"), UsageError);
}

TEST(Config, EveryKeyRoundTrips) {
  PipelineConfig c;
  c.seed = 3;
  for (const auto& [key, value] : c.entries()) {
    PipelineConfig other;
    other.set(key, value);
    EXPECT_EQ(other.get(key), value) << key;
  }
  EXPECT_EQ(config_keys().size(), c.entries().size());
}

TEST(Pipeline, MatchesGoldenDigests) {
  TempDir tmp;
  const auto manifest = run_pipeline(tiny_config(tmp / "out"));
  const auto golden = load_golden();
  EXPECT_EQ(artifact_digests(manifest), golden);
  for (const auto& a : manifest.artifacts) {
    EXPECT_EQ(sha256_file(tmp / "out" / a.file.path), a.file.sha256) << a.file.path;
  }
}

TEST(Pipeline, RerunReproducesManifest) {
  TempDir tmp;
  const auto config = tiny_config(tmp / "out");
  run_pipeline(config);
  const auto first = sha256_file(tmp / "out" / "manifest.json");
  run_pipeline(config);
  EXPECT_EQ(sha256_file(tmp / "out" / "manifest.json"), first);
}

TEST(Pipeline, NoOrphanOutputs) {
  TempDir tmp;
  const auto out = tmp / "out";
  std::filesystem::create_directories(out / "packed");
  std::ofstream(out / "packed" / "xx-yy.bin") << "stale";
  const auto manifest = run_pipeline(tiny_config(out));
  std::set<std::string> listed = {"manifest.json"};
  for (const auto& a : manifest.artifacts) listed.insert(a.file.path);
  for (const auto& e : std::filesystem::recursive_directory_iterator(out)) {
    if (e.is_regular_file()) {
      EXPECT_TRUE(listed.contains(std::filesystem::relative(e.path(), out).generic_string())) << e.path();
    }
  }
  const auto j = nlohmann::json::parse(std::ifstream(out / "manifest.json"));
  EXPECT_EQ(j["training"]["pretrain"]["learning_rate"], 5e-5);
  EXPECT_EQ(j["training"]["pretrain"]["batch_size"], 65536);
  EXPECT_EQ(j["training"]["finetune"]["epochs"], 3);
  EXPECT_EQ(j["training"]["inference"]["beam_size"], 5);
  EXPECT_EQ(j["training"]["executed"], false);
  EXPECT_EQ(j["inputs"].size(), 3u);
}

TEST(Pipeline, MissingCorpusNamesBalanceStage) {
  TempDir tmp;
  auto config = tiny_config(tmp / "out");
  config.corpus_dir = tmp / "nowhere";
  try {
    run_pipeline(config);
    FAIL() << "expected a DataError";
  } catch (const DataError& e) {
    EXPECT_TRUE(std::string(e.what()).starts_with("stage balance:")) << e.what();
  }
  EXPECT_FALSE(std::filesystem::exists(tmp / "out" / "corpus_stats.json"));
  EXPECT_FALSE(std::filesystem::exists(tmp / "out" / ".mtdata.lock"));
}

TEST(Pipeline, FailingStageCleansUp) {
  TempDir tmp;
  auto config = tiny_config(tmp / "out");
  std::ofstream(tmp / "base.json") << "{broken";
  config.base_vocab = tmp / "base.json";
  EXPECT_THROW(run_pipeline(config), DataError);
  EXPECT_FALSE(std::filesystem::exists(tmp / "out" / "vocab.json"));
  EXPECT_FALSE(std::filesystem::exists(tmp / "out" / "manifest.json"));
}

TEST(Pipeline, LockedOutputDirectoryIsRefused) {
  TempDir tmp;
  DirectoryLock held(tmp / "out");
  EXPECT_THROW(run_pipeline(tiny_config(tmp / "out")), UsageError);
}
