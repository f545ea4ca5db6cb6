#include "mtdata/eval/bleu.h"

#include <cmath>
#include <map>

#include "mtdata/error.h"
#include "mtdata/utf8.h"

namespace mtdata::eval {
namespace {

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x060C: case 0x061B: case 0x061F: case 0x06D4: case 0x0964: case 0x0965:
      return true;
    default:
      break;
  }
  return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) ||
         (cp >= 0x3014 && cp <= 0x301F) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
         (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65);
}

using NgramCounts = std::map<std::vector<std::string_view>, uint64_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, size_t n) {
  NgramCounts counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + i, tokens.begin() + i + n);
    ++counts[std::move(gram)];
  }
  return counts;
}

}  // namespace

std::vector<std::string> bleu_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  auto cps = utf8::decode(text);
  if (!cps) throw DataError("bleu: text is not valid UTF-8");
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char32_t cp : *cps) {
    if (utf8::is_space(cp)) {
      flush();
    } else if (is_punct(cp)) {
      flush();
      utf8::append(current, cp);
      flush();
    } else {
      utf8::append(current, cp);
    }
  }
  flush();
  return tokens;
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (size_t n = 0; n < 4; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_length += o.hyp_length;
  ref_length += o.ref_length;
  return *this;
}

BleuStats sentence_stats(std::string_view hypothesis, std::string_view reference) {
  const auto hyp = bleu_tokenize(hypothesis);
  const auto ref = bleu_tokenize(reference);
  BleuStats s;
  s.hyp_length = hyp.size();
  s.ref_length = ref.size();
  for (size_t n = 1; n <= 4; ++n) {
    const auto h = count_ngrams(hyp, n);
    const auto r = count_ngrams(ref, n);
    for (const auto& [gram, count] : h) {
      s.totals[n - 1] += count;
      if (auto it = r.find(gram); it != r.end()) s.matches[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

double bleu_from_stats(const BleuStats& s) {
  if (s.hyp_length == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (size_t n = 0; n < 4; ++n) {
    if (s.totals[n] == 0) continue;
    if (s.matches[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]));
    ++orders;
  }
  const double c = static_cast<double>(s.hyp_length);
  const double r = static_cast<double>(s.ref_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::exp(log_sum / orders);
}

double corpus_bleu(std::span<const EvalItem> items) {
  if (items.empty()) throw DataError("bleu: no items");
  BleuStats total;
  for (const auto& item : items) total += sentence_stats(item.hypothesis, item.reference);
  return bleu_from_stats(total);
}

}  // namespace mtdata::eval
