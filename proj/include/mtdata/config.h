#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtdata/eval/judge.h"

namespace mtdata {

// Every tunable of a pipeline run.  Defaults are the full-scale data
// recipe; `seed` has no default so no run is implicitly nondeterministic.
struct PipelineConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path base_vocab;  // empty: the 256-byte base
  std::filesystem::path output_dir;
  uint64_t flip_threshold = 1'000'000;
  uint64_t max_num = 1'000'000;
  uint64_t vocab_target_size = 53'613;
  uint64_t pack_length = 1'024;
  uint64_t s_high = 10'000;
  uint64_t s_low = 5'000;
  uint64_t cutover = 10'000;
  uint64_t batch_size = 64;  // packed samples per scheduling step
  uint64_t per_direction = 1'000;
  std::optional<uint64_t> seed;
  std::string judge_endpoint;
  std::string judge_model = "gpt-4";
  std::string judge_api_key_env = "OPENAI_API_KEY";
  uint64_t judge_timeout_s = 60;
  uint64_t judge_max_retries = 4;
  uint64_t judge_parallelism = 4;

  // Keys are the field names above.  Throws UsageError for unknown keys or
  // values that do not parse.
  void set(std::string_view key, std::string_view value);
  std::optional<std::string> get(std::string_view key) const;

  // Throws UsageError if a count is zero or the seed is missing.
  void validate() const;

  eval::JudgeConfig judge_config() const;

  // Snapshot of every key, as strings, in declaration order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

const std::vector<std::string_view>& config_keys();

// Reads a flat YAML mapping of config keys to scalar values, e.g.
//   corpus_dir: data/corpus
//   seed: 42
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Applies file values, then flag values.  Flags win on conflict; each
// override of a differing file value is logged.
PipelineConfig resolve_config(const std::map<std::string, std::string>& file_values,
                              const std::map<std::string, std::string>& flag_values,
                              PipelineConfig base = {});

}  // namespace mtdata
