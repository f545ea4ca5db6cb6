#include "mtdata/rng.h"

#include <algorithm>
#include <numeric>

namespace mtdata {
namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

uint64_t derive_seed(uint64_t root, std::string_view label) {
  return splitmix64(splitmix64(root) ^ fnv1a64(label));
}

uint64_t Rng::below(uint64_t bound) {
  // Rejection sampling: discard the low partial block so every residue is
  // equally likely.
  const uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const uint64_t x = engine_();
    if (x >= threshold) return x % bound;
  }
}

std::vector<size_t> Rng::sample_indices(size_t n, size_t k) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (k >= n) return idx;
  // Partial Fisher-Yates: the first k slots end up holding a uniform k-subset.
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + static_cast<size_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace mtdata
