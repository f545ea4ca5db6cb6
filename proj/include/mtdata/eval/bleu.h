#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtdata/eval/types.h"

namespace mtdata::eval {

// BLEU tokenization: text splits on Unicode whitespace, and every
// punctuation code point becomes a token of its own.  Punctuation covers
// ASCII punctuation, Latin-1 punctuation, General Punctuation, CJK symbols
// and punctuation, fullwidth ASCII punctuation, and the Arabic and
// Devanagari sentence marks.
std::vector<std::string> bleu_tokenize(std::string_view text);

struct BleuStats {
  std::array<uint64_t, 4> matches{};  // clipped n-gram matches, n = 1..4
  std::array<uint64_t, 4> totals{};   // hypothesis n-grams
  uint64_t hyp_length = 0;
  uint64_t ref_length = 0;

  BleuStats& operator+=(const BleuStats& o);
};

BleuStats sentence_stats(std::string_view hypothesis, std::string_view reference);

// Corpus BLEU on a 0-100 scale from accumulated statistics: brevity penalty
// times the geometric mean of the n-gram precisions over the orders with at
// least one hypothesis n-gram.  Zero if any of those precisions is zero or
// the hypotheses are empty.
double bleu_from_stats(const BleuStats& stats);

// Throws DataError on an empty item list.
double corpus_bleu(std::span<const EvalItem> items);

}  // namespace mtdata::eval
