#include "mtdata/vocab.h"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <queue>
#include <unordered_set>

#include "mtdata/digest.h"
#include "mtdata/error.h"
#include "mtdata/rng.h"
#include "mtdata/utf8.h"

namespace mtdata {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<Merge> merges,
                       size_t base_size)
    : tokens_(std::move(tokens)), merges_(std::move(merges)), base_size_(base_size) {
  if (base_size_ > tokens_.size()) throw DataError("vocabulary: base_size exceeds token count");
  if (tokens_.size() > UINT32_MAX) throw DataError("vocabulary: too many tokens");
  index_.reserve(tokens_.size());
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw DataError("vocabulary: empty token at id " + std::to_string(i));
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw DataError("vocabulary: duplicate token at id " + std::to_string(i));
    }
  }
  for (int b = 0; b < 256; ++b) {
    auto it = index_.find(std::string(1, static_cast<char>(b)));
    if (it == index_.end()) throw DataError("vocabulary: missing byte token " + std::to_string(b));
    byte_ids_[b] = it->second;
  }
  merge_table_.reserve(merges_.size());
  for (size_t rank = 0; rank < merges_.size(); ++rank) {
    const auto& m = merges_[rank];
    auto l = index_.find(m.left);
    auto r = index_.find(m.right);
    auto out = index_.find(m.result());
    if (l == index_.end() || r == index_.end() || out == index_.end()) {
      throw DataError("vocabulary: merge " + std::to_string(rank) +
                      " refers to a token outside the inventory");
    }
    const MergeRule rule{static_cast<uint32_t>(rank), out->second};
    if (!merge_table_.emplace(pair_key(l->second, r->second), rule).second) {
      throw DataError("vocabulary: duplicate merge at rank " + std::to_string(rank));
    }
  }
}

Vocabulary Vocabulary::byte_level() {
  std::vector<std::string> tokens;
  tokens.reserve(256);
  for (int b = 0; b < 256; ++b) tokens.emplace_back(1, static_cast<char>(b));
  return Vocabulary(std::move(tokens), {}, 0);
}

Vocabulary Vocabulary::synthetic_base(size_t size) {
  if (size < 256) throw UsageError("synthetic base vocabulary needs at least 256 tokens");
  static constexpr std::string_view kAlphabet =
      " etaoinshrdlcumwfgypbvkjxqzETAOINSHRDLCUMWFGYPBVKJXQZ0123456789.,'-";

  std::vector<std::string> tokens;
  std::vector<Merge> merges;
  tokens.reserve(size);
  for (int b = 0; b < 256; ++b) tokens.emplace_back(1, static_cast<char>(b));

  // Level n+1 tokens extend level n tokens by one alphabet character, in
  // generation order.  All strings of one level have equal length, so they
  // are distinct from each other and from every other level.
  std::vector<std::string> level;
  for (char c : kAlphabet) level.emplace_back(1, c);
  while (tokens.size() < size) {
    std::vector<std::string> next_level;
    for (const auto& prefix : level) {
      for (char c : kAlphabet) {
        if (tokens.size() == size) break;
        merges.push_back({prefix, std::string(1, c)});
        tokens.push_back(prefix + c);
        next_level.push_back(tokens.back());
      }
      if (tokens.size() == size) break;
    }
    level = std::move(next_level);
  }
  return Vocabulary(std::move(tokens), std::move(merges), 256);
}

std::optional<TokenId> Vocabulary::id_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Vocabulary::contains_merge(std::string_view left, std::string_view right) const {
  auto l = id_of(left);
  auto r = id_of(right);
  return l && r && merge_table_.contains(pair_key(*l, *r));
}

std::vector<TokenId> Vocabulary::tokenize(std::string_view text) const {
  const size_t n = text.size();
  std::vector<TokenId> ids(n);
  for (size_t i = 0; i < n; ++i) ids[i] = byte_ids_[static_cast<unsigned char>(text[i])];
  if (n < 2 || merge_table_.empty()) return ids;

  // Doubly linked list over symbol slots; dead slots are skipped via links.
  constexpr size_t kNone = static_cast<size_t>(-1);
  std::vector<size_t> prev(n), next(n);
  std::vector<bool> alive(n, true);
  for (size_t i = 0; i < n; ++i) {
    prev[i] = i == 0 ? kNone : i - 1;
    next[i] = i + 1 == n ? kNone : i + 1;
  }

  struct Candidate {
    uint32_t rank;
    size_t pos;
    TokenId left;
    TokenId right;
    bool operator>(const Candidate& o) const {
      return rank != o.rank ? rank > o.rank : pos > o.pos;
    }
  };
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap;
  auto push = [&](size_t pos) {
    if (pos == kNone || next[pos] == kNone) return;
    auto it = merge_table_.find(pair_key(ids[pos], ids[next[pos]]));
    if (it != merge_table_.end()) heap.push({it->second.rank, pos, ids[pos], ids[next[pos]]});
  };
  for (size_t i = 0; i + 1 < n; ++i) push(i);

  while (!heap.empty()) {
    const Candidate c = heap.top();
    heap.pop();
    // Stale if either side was merged away or changed since the push.
    if (!alive[c.pos] || ids[c.pos] != c.left) continue;
    const size_t r = next[c.pos];
    if (r == kNone || ids[r] != c.right) continue;

    ids[c.pos] = merge_table_.at(pair_key(c.left, c.right)).result;
    alive[r] = false;
    next[c.pos] = next[r];
    if (next[r] != kNone) prev[next[r]] = c.pos;
    push(prev[c.pos]);
    push(c.pos);
  }

  std::vector<TokenId> out;
  for (size_t i = 0; i != kNone; i = next[i]) out.push_back(ids[i]);
  return out;
}

std::string Vocabulary::detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id >= tokens_.size()) {
      throw DataError("detokenize: token id " + std::to_string(id) + " out of range (size " +
                      std::to_string(tokens_.size()) + ")");
    }
    out += tokens_[id];
  }
  if (!utf8::is_valid(out)) throw DataError("detokenize: token bytes are not valid UTF-8");
  return out;
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json j;
  j["base_size"] = base_size_;
  auto& toks = j["tokens"] = nlohmann::ordered_json::array();
  for (const auto& t : tokens_) toks.push_back(base64_encode(t));
  auto& merges = j["merges"] = nlohmann::ordered_json::array();
  for (const auto& m : merges_) {
    merges.push_back({base64_encode(m.left), base64_encode(m.right)});
  }
  return j.dump() + "\n";
}

Vocabulary Vocabulary::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
    std::vector<std::string> tokens;
    for (const auto& t : j.at("tokens")) tokens.push_back(base64_decode(t.get<std::string>()));
    std::vector<Merge> merges;
    for (const auto& m : j.at("merges")) {
      if (m.size() != 2) throw DataError("vocabulary json: merge must be a pair");
      merges.push_back(
          {base64_decode(m[0].get<std::string>()), base64_decode(m[1].get<std::string>())});
    }
    return Vocabulary(std::move(tokens), std::move(merges), j.at("base_size").get<size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("vocabulary json: ") + e.what());
  }
}

Vocabulary extend_vocabulary(const Vocabulary& base, std::span<const std::string> new_tokens,
                             std::span<const Merge> new_merges) {
  std::vector<std::string> tokens = base.tokens();
  std::unordered_set<std::string> seen(tokens.begin(), tokens.end());
  for (const auto& t : new_tokens) {
    if (seen.insert(t).second) tokens.push_back(t);
  }
  std::vector<Merge> merges = base.merges();
  std::unordered_set<std::string> seen_merges;
  auto merge_key = [](const Merge& m) {
    return std::to_string(m.left.size()) + ":" + m.left + m.right;
  };
  for (const auto& m : merges) seen_merges.insert(merge_key(m));
  for (const auto& m : new_merges) {
    if (seen_merges.insert(merge_key(m)).second) merges.push_back(m);
  }
  return Vocabulary(std::move(tokens), std::move(merges), base.size());
}

ExtensionResult extend_with_bpe(const Vocabulary& base, std::span<const std::string> texts,
                                size_t target_size) {
  if (target_size <= base.size()) {
    throw UsageError("target size " + std::to_string(target_size) +
                     " must exceed the base vocabulary size " + std::to_string(base.size()));
  }
  std::vector<std::string> novel;
  std::unordered_set<std::string> novel_set;
  std::vector<Merge> merges;
  size_t trained = 0;
  BpeTrainer trainer(texts);
  while (base.size() + novel.size() < target_size) {
    auto m = trainer.next_merge();
    if (!m) break;
    ++trained;
    auto out = m->result();
    if (!base.id_of(out) && novel_set.insert(out).second) novel.push_back(std::move(out));
    merges.push_back(std::move(*m));
  }
  ExtensionResult result{extend_vocabulary(base, novel, merges), novel.size(), trained, false};
  result.reached_target = result.vocab.size() == target_size;
  return result;
}

std::map<std::string, std::vector<std::string>> sample_for_vocab(const CorpusMap& corpora,
                                                                 size_t max_num, uint64_t seed) {
  if (max_num == 0) throw UsageError("max_num must be positive");
  std::map<std::string, std::vector<const std::string*>> by_language;
  for (const auto& [dir, corpus] : corpora) {
    auto& src = by_language[dir.src()];
    auto& tgt = by_language[dir.tgt()];
    for (const auto& p : corpus.pairs) {
      src.push_back(&p.source);
      tgt.push_back(&p.target);
    }
  }
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [lang, sentences] : by_language) {
    Rng rng(seed, "vocab-sample:" + lang);
    auto& picked = out[lang];
    for (size_t i : rng.sample_indices(sentences.size(), max_num)) {
      picked.push_back(*sentences[i]);
    }
  }
  return out;
}

}  // namespace mtdata
