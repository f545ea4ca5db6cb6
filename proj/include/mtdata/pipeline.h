#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtdata/config.h"
#include "mtdata/corpus.h"
#include "mtdata/packing.h"
#include "mtdata/scheduler.h"

namespace mtdata {

struct FileDigest {
  std::string path;  // relative to the corpus or output directory
  std::string sha256;
  uint64_t bytes = 0;
};

struct ArtifactRecord {
  std::string stage;
  FileDigest file;
};

struct StageSummary {
  std::string stage;
  std::vector<std::pair<std::string, std::string>> values;
};

// Everything needed to reproduce a run: the resolved configuration, input
// and artifact digests, and the training hyperparameters that downstream
// trainers are expected to use (recorded, never executed here).
struct RunManifest {
  std::string tool_version;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<FileDigest> inputs;
  std::vector<ArtifactRecord> artifacts;
  std::vector<StageSummary> stages;
};

// Stage seeds are forked from the root seed by stage name ("balance",
// "vocab", "schedule", "instruct"), so a stage run on its own through the
// CLI reproduces the pipeline's artifact for that stage.
uint64_t stage_seed(uint64_t root_seed, std::string_view stage);

struct PackedDirection {
  Direction direction;
  PackResult result;
};

// Packs every corpus (in parallel, one direction per task).
std::vector<PackedDirection> pack_corpora(const CorpusMap& corpora, const Vocabulary& vocab,
                                          const PackConfig& config);

// Writes packed/{dir}.bin and packed/{dir}.json under `dir` for every
// direction; returns the written paths.
std::vector<std::filesystem::path> write_packed(const std::filesystem::path& dir,
                                                std::span<const PackedDirection> packed,
                                                const PackConfig& config);

// {"pack_length": L, "directions": {"en-ro": {"samples": n, ...}}}; readable
// by load_buckets.
std::string packed_stats_to_json(std::span<const PackedDirection> packed, size_t pack_length);
std::vector<PairBucket> buckets_from_packed(std::span<const PackedDirection> packed);

// Runs balance -> vocab -> pack -> partition -> schedule -> instruct, writing
// each stage's artifacts under config.output_dir and the manifest to
// manifest.json there.  Reruns with the same inputs reproduce identical
// artifacts.  A failing stage removes the files it wrote and rethrows with
// the stage name in the message.  The output directory is locked for the
// duration of the run.
RunManifest run_pipeline(const PipelineConfig& config);

std::string manifest_to_json(const RunManifest& manifest);

// Exclusive lock on an output directory, held for the object's lifetime.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path lock_path_;
};

}  // namespace mtdata
