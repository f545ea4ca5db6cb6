#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "mtdata/vocab.h"

namespace mtdata {

// All texts live in one symbol array threaded by prev/next links that stop at
// text boundaries.  Each pair keeps a list of the positions where it starts,
// so a merge touches only its own occurrences and their two neighbours.
struct BpeTrainer::State {
  static constexpr uint32_t kNone = UINT32_MAX;

  struct Entry {
    int64_t count;
    uint32_t left;
    uint32_t right;
  };

  // Highest count first; ties by (left bytes, right bytes) ascending.
  struct Order {
    const std::vector<std::string>* tokens;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.count != b.count) return a.count > b.count;
      const auto& t = *tokens;
      if (a.left != b.left) {
        if (int c = t[a.left].compare(t[b.left]); c != 0) return c < 0;
      }
      if (a.right != b.right) return t[a.right] < t[b.right];
      return false;
    }
  };

  static uint64_t key(uint32_t l, uint32_t r) { return (uint64_t{l} << 32) | r; }

  std::vector<std::string> tokens;
  std::vector<uint32_t> sym;  // kNone once absorbed by a merge
  std::vector<uint32_t> prev;
  std::vector<uint32_t> next;
  std::vector<int64_t> weight;  // weight of the text each position belongs to
  std::unordered_map<uint64_t, int64_t> counts;
  std::unordered_map<uint64_t, std::vector<uint32_t>> where;  // may hold stale positions
  std::set<Entry, Order> queue{Order{&tokens}};
  std::unordered_map<uint64_t, int64_t> touched;  // key -> count before this round

  void adjust(uint32_t l, uint32_t r, int64_t delta) {
    const auto k = key(l, r);
    auto& c = counts[k];
    if (touched.emplace(k, c).second && c > 0) queue.erase(Entry{c, l, r});
    c += delta;
  }
};

BpeTrainer::BpeTrainer(std::span<const std::string> texts) : state_(std::make_unique<State>()) {
  auto& s = *state_;
  s.tokens.reserve(256);
  for (int b = 0; b < 256; ++b) s.tokens.emplace_back(1, static_cast<char>(b));

  std::map<std::string_view, int64_t> unique;
  for (const auto& t : texts) {
    if (t.size() >= 2) ++unique[t];
  }
  size_t total = 0;
  for (const auto& [text, w] : unique) total += text.size();
  s.sym.reserve(total);
  s.prev.reserve(total);
  s.next.reserve(total);
  s.weight.reserve(total);
  for (const auto& [text, w] : unique) {
    const auto start = static_cast<uint32_t>(s.sym.size());
    for (size_t i = 0; i < text.size(); ++i) {
      const auto pos = static_cast<uint32_t>(s.sym.size());
      s.sym.push_back(static_cast<unsigned char>(text[i]));
      s.prev.push_back(i == 0 ? State::kNone : pos - 1);
      s.next.push_back(i + 1 == text.size() ? State::kNone : pos + 1);
      s.weight.push_back(w);
    }
    for (uint32_t p = start; p + 1 < s.sym.size(); ++p) {
      const auto k = State::key(s.sym[p], s.sym[p + 1]);
      s.counts[k] += w;
      s.where[k].push_back(p);
    }
  }
  for (const auto& [k, c] : s.counts) {
    s.queue.insert({c, static_cast<uint32_t>(k >> 32), static_cast<uint32_t>(k)});
  }
}

BpeTrainer::~BpeTrainer() = default;

std::optional<Merge> BpeTrainer::next_merge() {
  auto& s = *state_;
  if (s.queue.empty() || s.queue.begin()->count < 2) return std::nullopt;

  const auto best = *s.queue.begin();
  const uint32_t left = best.left;
  const uint32_t right = best.right;
  const auto merged_key = State::key(left, right);
  const auto new_id = static_cast<uint32_t>(s.tokens.size());
  Merge merge{s.tokens[left], s.tokens[right]};
  s.tokens.push_back(merge.result());

  s.touched.clear();
  auto positions = std::move(s.where[merged_key]);
  s.where.erase(merged_key);
  // Ascending order replaces overlapping runs such as "aaa" leftmost first.
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());

  for (uint32_t i : positions) {
    if (s.sym[i] != left) continue;
    const uint32_t j = s.next[i];
    if (j == State::kNone || s.sym[j] != right) continue;
    const int64_t w = s.weight[i];
    const uint32_t p = s.prev[i];
    const uint32_t n = s.next[j];

    s.adjust(left, right, -w);
    if (p != State::kNone) {
      s.adjust(s.sym[p], left, -w);
      s.adjust(s.sym[p], new_id, w);
      s.where[State::key(s.sym[p], new_id)].push_back(p);
    }
    if (n != State::kNone) {
      s.adjust(right, s.sym[n], -w);
      s.adjust(new_id, s.sym[n], w);
      s.where[State::key(new_id, s.sym[n])].push_back(i);
      s.prev[n] = i;
    }
    s.sym[i] = new_id;
    s.next[i] = n;
    s.sym[j] = State::kNone;
  }

  for (const auto& [k, before] : s.touched) {
    const int64_t now = s.counts[k];
    if (now > 0) {
      s.queue.insert({now, static_cast<uint32_t>(k >> 32), static_cast<uint32_t>(k)});
    } else {
      s.counts.erase(k);
      s.where.erase(k);
    }
  }
  return merge;
}

std::vector<Merge> train_bpe(std::span<const std::string> texts, size_t num_merges) {
  std::vector<Merge> merges;
  if (num_merges == 0) return merges;
  BpeTrainer trainer(texts);
  while (merges.size() < num_merges) {
    auto m = trainer.next_merge();
    if (!m) break;
    merges.push_back(std::move(*m));
  }
  return merges;
}

}  // namespace mtdata
