#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mtdata {

// Derives an independent 64-bit seed for a named sub-stream.  Every stage
// forks its generator from the root seed with a fixed label, so a stage can
// be rerun in isolation and reproduce its output.
uint64_t derive_seed(uint64_t root, std::string_view label);

// Deterministic generator.  Wraps mt19937_64, whose output sequence is fixed
// by the standard, and avoids std::uniform_int_distribution, whose mapping is
// implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  Rng(uint64_t root, std::string_view label) : Rng(derive_seed(root, label)) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound).  bound must be > 0.
  uint64_t below(uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  // k distinct indices drawn uniformly from [0, n), returned in ascending
  // order.  If k >= n, returns all indices.
  std::vector<size_t> sample_indices(size_t n, size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mtdata
