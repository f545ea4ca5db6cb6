#include "mtdata/config.h"

#include <yaml-cpp/yaml.h>
#include <spdlog/spdlog.h>

#include <charconv>

#include "mtdata/error.h"

namespace mtdata {
namespace {

uint64_t parse_count(std::string_view key, std::string_view value) {
  uint64_t v = 0;
  std::string digits;
  for (char c : value) {
    if (c != '_' && c != ',') digits.push_back(c);
  }
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw UsageError("config key " + std::string(key) + ": '" + std::string(value) +
                     "' is not a non-negative integer");
  }
  return v;
}

struct Field {
  std::string_view key;
  uint64_t PipelineConfig::*count = nullptr;
  std::string PipelineConfig::*text = nullptr;
  std::filesystem::path PipelineConfig::*path = nullptr;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      {"corpus_dir", nullptr, nullptr, &PipelineConfig::corpus_dir},
      {"base_vocab", nullptr, nullptr, &PipelineConfig::base_vocab},
      {"output_dir", nullptr, nullptr, &PipelineConfig::output_dir},
      {"flip_threshold", &PipelineConfig::flip_threshold},
      {"max_num", &PipelineConfig::max_num},
      {"vocab_target_size", &PipelineConfig::vocab_target_size},
      {"pack_length", &PipelineConfig::pack_length},
      {"s_high", &PipelineConfig::s_high},
      {"s_low", &PipelineConfig::s_low},
      {"cutover", &PipelineConfig::cutover},
      {"batch_size", &PipelineConfig::batch_size},
      {"per_direction", &PipelineConfig::per_direction},
      {"seed"},
      {"judge_endpoint", nullptr, &PipelineConfig::judge_endpoint},
      {"judge_model", nullptr, &PipelineConfig::judge_model},
      {"judge_api_key_env", nullptr, &PipelineConfig::judge_api_key_env},
      {"judge_timeout_s", &PipelineConfig::judge_timeout_s},
      {"judge_max_retries", &PipelineConfig::judge_max_retries},
      {"judge_parallelism", &PipelineConfig::judge_parallelism},
  };
  return kFields;
}

const Field& field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw UsageError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  const auto& f = field(key);
  if (f.count) {
    this->*f.count = parse_count(key, value);
  } else if (f.text) {
    this->*f.text = std::string(value);
  } else if (f.path) {
    this->*f.path = std::filesystem::path(std::string(value));
  } else {
    seed = parse_count(key, value);
  }
}

std::optional<std::string> PipelineConfig::get(std::string_view key) const {
  const auto& f = field(key);
  if (f.count) return std::to_string(this->*f.count);
  if (f.text) return this->*f.text;
  if (f.path) return (this->*f.path).string();
  if (seed) return std::to_string(*seed);
  return std::nullopt;
}

void PipelineConfig::validate() const {
  if (!seed) throw UsageError("a seed is required (config key 'seed' or --seed)");
  for (const auto& f : fields()) {
    if (f.count && this->*f.count == 0 && f.key != "judge_max_retries") {
      throw UsageError("config key " + std::string(f.key) + " must be positive");
    }
  }
}

eval::JudgeConfig PipelineConfig::judge_config() const {
  eval::JudgeConfig j;
  j.endpoint = judge_endpoint;
  j.model = judge_model;
  j.api_key_env = judge_api_key_env;
  j.timeout = std::chrono::seconds(judge_timeout_s);
  j.max_retries = static_cast<int>(judge_max_retries);
  j.parallelism = judge_parallelism;
  return j;
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) {
    auto v = get(f.key);
    out.emplace_back(std::string(f.key), v.value_or(""));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw UsageError("cannot read config " + path.string() + ": " + e.what());
  }
  std::map<std::string, std::string> values;
  if (root.IsNull()) return values;
  if (!root.IsMap()) throw UsageError("config " + path.string() + " must be a key-value mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    field(key);
    if (!kv.second.IsScalar()) {
      throw UsageError("config key " + key + " must have a scalar value");
    }
    values[key] = kv.second.as<std::string>();
  }
  return values;
}

PipelineConfig resolve_config(const std::map<std::string, std::string>& file_values,
                              const std::map<std::string, std::string>& flag_values,
                              PipelineConfig base) {
  for (const auto& [k, v] : file_values) base.set(k, v);
  for (const auto& [k, v] : flag_values) {
    if (auto it = file_values.find(k); it != file_values.end() && it->second != v) {
      spdlog::info("flag overrides config file: {} = {} (file had {})", k, v, it->second);
    }
    base.set(k, v);
  }
  return base;
}

}  // namespace mtdata
