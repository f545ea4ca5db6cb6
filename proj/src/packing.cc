#include "mtdata/packing.h"

#include <bit>
#include <fstream>
#include <nlohmann/json.hpp>

#include "mtdata/error.h"

namespace mtdata {
namespace {

void check_config(const PackConfig& config, const Vocabulary& vocab) {
  if (config.pack_length < 3) {
    throw UsageError("pack_length " + std::to_string(config.pack_length) +
                     " cannot hold source, separator and end-of-sequence");
  }
  if (config.pad_id == config.sep_id || config.pad_id == config.eos_id) {
    throw UsageError("pad id must differ from separator and end-of-sequence ids");
  }
  if (config.pad_id < vocab.size()) {
    throw UsageError("pad id " + std::to_string(config.pad_id) + " collides with a vocabulary token");
  }
}

void put_u32(std::ostream& out, uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

bool get_u32(std::istream& in, uint32_t& v) {
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) return false;
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  return true;
}

}  // namespace

PackConfig PackConfig::after_vocabulary(const Vocabulary& vocab, size_t pack_length) {
  const auto n = static_cast<TokenId>(vocab.size());
  return PackConfig{pack_length, n, n + 1, n + 2};
}

PackResult pack(const ParallelCorpus& corpus, const Vocabulary& vocab, const PackConfig& config) {
  check_config(config, vocab);
  const size_t limit = config.pack_length;
  PackResult result;
  auto& report = result.report;

  PackedSample current{corpus.direction, {}, 0, 0};
  current.ids.reserve(limit);
  auto emit = [&] {
    current.padding = limit - current.ids.size();
    current.ids.resize(limit, config.pad_id);
    report.padding_tokens += current.padding;
    report.final_sample_padded = current.padding > 0;
    result.samples.push_back(std::move(current));
    current = PackedSample{corpus.direction, {}, 0, 0};
    current.ids.reserve(limit);
  };

  for (const auto& pair : corpus.pairs) {
    auto src = vocab.tokenize(pair.source);
    auto tgt = vocab.tokenize(pair.target);
    const size_t framed = src.size() + tgt.size() + 2;
    report.encoded_tokens += framed;

    if (framed > limit) {
      if (!current.ids.empty()) emit();
      const size_t budget = limit - 2;
      const size_t keep_src = std::min(src.size(), budget);
      const size_t keep_tgt = std::min(tgt.size(), budget - keep_src);
      report.truncated_tokens += framed - (keep_src + keep_tgt + 2);
      ++report.pairs_truncated;
      current.ids.insert(current.ids.end(), src.begin(), src.begin() + keep_src);
      current.ids.push_back(config.sep_id);
      current.ids.insert(current.ids.end(), tgt.begin(), tgt.begin() + keep_tgt);
      current.ids.push_back(config.eos_id);
      current.pair_span_count = 1;
      emit();
      continue;
    }
    if (current.ids.size() + framed > limit) emit();
    current.ids.insert(current.ids.end(), src.begin(), src.end());
    current.ids.push_back(config.sep_id);
    current.ids.insert(current.ids.end(), tgt.begin(), tgt.end());
    current.ids.push_back(config.eos_id);
    ++current.pair_span_count;
    ++report.pairs_packed;
  }
  if (!current.ids.empty()) emit();
  report.samples = result.samples.size();
  return result;
}

void write_samples(const std::filesystem::path& path, const std::vector<PackedSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& s : samples) {
    put_u32(out, static_cast<uint32_t>(s.ids.size()));
    for (TokenId id : s.ids) put_u32(out, id);
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<std::vector<TokenId>> read_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<std::vector<TokenId>> out;
  uint32_t len = 0;
  while (get_u32(in, len)) {
    std::vector<TokenId> ids(len);
    for (auto& id : ids) {
      if (!get_u32(in, id)) throw DataError(path.string() + ": truncated record");
    }
    out.push_back(std::move(ids));
  }
  return out;
}

std::string report_to_json(const PackingReport& report, const Direction& direction,
                           const PackConfig& config) {
  nlohmann::ordered_json j;
  j["direction"] = direction.str();
  j["pack_length"] = config.pack_length;
  j["sep_id"] = config.sep_id;
  j["eos_id"] = config.eos_id;
  j["pad_id"] = config.pad_id;
  j["samples"] = report.samples;
  j["pairs_packed"] = report.pairs_packed;
  j["pairs_truncated"] = report.pairs_truncated;
  j["encoded_tokens"] = report.encoded_tokens;
  j["truncated_tokens"] = report.truncated_tokens;
  j["padding_tokens"] = report.padding_tokens;
  j["final_sample_padded"] = report.final_sample_padded;
  return j.dump(2) + "\n";
}

}  // namespace mtdata
