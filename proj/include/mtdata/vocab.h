#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mtdata/corpus.h"

namespace mtdata {

using TokenId = uint32_t;

// A BPE merge rule: adjacent tokens `left` and `right` (byte strings) fuse
// into left + right.
struct Merge {
  std::string left;
  std::string right;

  std::string result() const { return left + right; }
  bool operator==(const Merge&) const = default;
};

// Byte-level BPE vocabulary.  Token ids are positions in `tokens()`; merges
// are applied in list order (earlier = higher priority).  Every single byte
// is a token, so any input can be encoded.
//
// The first base_size() tokens and all merges up to the parent's merge count
// are inherited unchanged from the vocabulary this one extends.
class Vocabulary {
 public:
  // Throws DataError if tokens repeat, a byte token is missing, or a merge
  // refers to (or produces) a token outside the inventory.
  Vocabulary(std::vector<std::string> tokens, std::vector<Merge> merges, size_t base_size);

  // The 256 single-byte tokens, ids equal to byte values.
  static Vocabulary byte_level();

  // A deterministic stand-in for a pretrained base vocabulary of exactly
  // `size` tokens: the 256 bytes followed by merged ASCII strings of
  // increasing length.  Useful where only the inventory size matters.
  static Vocabulary synthetic_base(size_t size);

  size_t size() const { return tokens_.size(); }
  size_t base_size() const { return base_size_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<Merge>& merges() const { return merges_; }

  std::optional<TokenId> id_of(std::string_view token) const;
  bool contains_merge(std::string_view left, std::string_view right) const;

  // Byte-level BPE encoding.  Repeatedly applies the highest-priority merge
  // available among adjacent tokens, leftmost occurrence first.  Pure and
  // reentrant; never fails.
  std::vector<TokenId> tokenize(std::string_view text) const;

  // Concatenates token bytes.  Throws DataError for out-of-range ids or when
  // the bytes are not valid UTF-8.
  std::string detokenize(std::span<const TokenId> ids) const;

  std::string to_json() const;
  static Vocabulary from_json(std::string_view json);

 private:
  struct MergeRule {
    uint32_t rank;
    TokenId result;
  };

  static uint64_t pair_key(TokenId l, TokenId r) { return (uint64_t{l} << 32) | r; }

  std::vector<std::string> tokens_;
  std::vector<Merge> merges_;
  size_t base_size_ = 0;
  std::unordered_map<std::string, TokenId> index_;
  std::unordered_map<uint64_t, MergeRule> merge_table_;
  TokenId byte_ids_[256] = {};
};

// Appends `new_tokens` not already present (in order, first occurrence wins)
// and `new_merges` not already present after the base merges.  Base token ids
// are unchanged; the result's base_size() is base.size().
Vocabulary extend_vocabulary(const Vocabulary& base, std::span<const std::string> new_tokens,
                             std::span<const Merge> new_merges);

// Greedy byte-level BPE: repeatedly merges the most frequent adjacent pair,
// counting overlapping occurrences.  Ties go to the lexicographically
// smallest (left, right) byte strings.  Stops after num_merges merges or when
// no pair occurs at least twice.
std::vector<Merge> train_bpe(std::span<const std::string> texts, size_t num_merges);

// Incremental form of train_bpe; each next_merge() call performs one round.
class BpeTrainer {
 public:
  explicit BpeTrainer(std::span<const std::string> texts);
  ~BpeTrainer();
  BpeTrainer(const BpeTrainer&) = delete;
  BpeTrainer& operator=(const BpeTrainer&) = delete;

  std::optional<Merge> next_merge();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

struct ExtensionResult {
  Vocabulary vocab;
  size_t novel_tokens = 0;
  size_t merges_trained = 0;
  bool reached_target = false;
};

// Trains BPE on `texts` from raw bytes and extends `base` with the novel
// merge outputs, in training order, until the vocabulary holds target_size
// tokens or the texts offer no further merges.
ExtensionResult extend_with_bpe(const Vocabulary& base, std::span<const std::string> texts,
                                size_t target_size);

inline constexpr size_t kDefaultMaxNum = 1'000'000;

// Per-language training sample: up to max_num sentences drawn uniformly
// without replacement from every side of every corpus written in that
// language.  Each language draws from its own seeded stream.
std::map<std::string, std::vector<std::string>> sample_for_vocab(const CorpusMap& corpora,
                                                                 size_t max_num, uint64_t seed);

}  // namespace mtdata
