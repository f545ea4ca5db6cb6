#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mtdata/corpus.h"
#include "mtdata/vocab.h"

namespace mtdata {

inline constexpr size_t kDefaultPackLength = 1024;

// Framing ids.  A pair is encoded as source ++ [sep] ++ target ++ [eos];
// samples are right-padded with pad.  The pad id must differ from sep and
// eos and lie outside the vocabulary so padding is never confused with text.
struct PackConfig {
  size_t pack_length = kDefaultPackLength;
  TokenId sep_id = 0;
  TokenId eos_id = 0;
  TokenId pad_id = 0;

  // Reserves the three ids directly after the vocabulary.
  static PackConfig after_vocabulary(const Vocabulary& vocab,
                                     size_t pack_length = kDefaultPackLength);
};

struct PackedSample {
  Direction direction;
  std::vector<TokenId> ids;  // always pack_length long
  size_t pair_span_count = 0;
  size_t padding = 0;
};

struct PackingReport {
  size_t samples = 0;
  size_t pairs_packed = 0;     // pairs stored whole
  size_t pairs_truncated = 0;  // pairs longer than pack_length, cut to fit
  size_t encoded_tokens = 0;   // framed length of every pair before truncation
  size_t truncated_tokens = 0;
  size_t padding_tokens = 0;
  bool final_sample_padded = false;
};

struct PackResult {
  std::vector<PackedSample> samples;
  PackingReport report;
};

// Greedily concatenates framed pairs of one direction into fixed-length
// samples.  A pair that does not fit in the current sample opens the next
// one; pairs never straddle samples.  A pair longer than pack_length is cut
// to fit a sample of its own: its target side is shortened first, then the
// source, always keeping sep and eos.  Throws UsageError if pack_length < 3
// or the framing ids are inconsistent.
PackResult pack(const ParallelCorpus& corpus, const Vocabulary& vocab, const PackConfig& config);

// Binary record stream: per sample a little-endian u32 length, then that many
// little-endian u32 ids.
void write_samples(const std::filesystem::path& path, const std::vector<PackedSample>& samples);
std::vector<std::vector<TokenId>> read_samples(const std::filesystem::path& path);

std::string report_to_json(const PackingReport& report, const Direction& direction,
                           const PackConfig& config);

}  // namespace mtdata
