#pragma once

// Reference implementations used as test oracles.  They favour the most
// literal reading of each algorithm over speed and share no code with the
// library beyond the seeded Rng, whose draw protocol is part of the contract.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mtdata/corpus.h"
#include "mtdata/scheduler.h"

namespace oracle {

// Replays the interval curriculum step by step on materialized sample pools
// and renders the trace in the library's JSONL layout.
std::string naive_schedule_trace(const std::vector<mtdata::Interval>& sorted_intervals,
                                 uint64_t batch_size, uint64_t seed);

// Corpus BLEU for whitespace-separated inputs, counting n-grams by
// enumeration.
double brute_force_bleu(const std::vector<std::string>& hypotheses,
                        const std::vector<std::string>& references);

// Scheduler instance generator: up to max_directions directions with up to
// max_samples samples each (some possibly zero), plus interval settings.
struct ScheduleInstance {
  std::vector<mtdata::PairBucket> buckets;
  mtdata::IntervalConfig config;
  uint64_t batch_size = 1;
  uint64_t seed = 0;
};
ScheduleInstance random_schedule_instance(std::mt19937_64& gen, size_t max_directions = 10,
                                          uint64_t max_samples = 1000);

// Random valid UTF-8: ASCII, control bytes, Latin, CJK, emoji and
// supplementary-plane characters.
std::string random_utf8(std::mt19937_64& gen, size_t max_code_points);

// 242 directions (English and Chinese hubs, both ways) holding 1,000 or
// more pairs each, except eight directions whose shortfalls below 1,000 add
// up to 872.
mtdata::CorpusMap instruction_fixture();
inline constexpr uint64_t kInstructionFixtureDeficit = 872;

// Synthetic running text over a fixed word list drawn from the given Unicode
// ranges: `words` distinct words of 1-4 characters, sentences of 5-15 words
// chosen with a Zipf-like skew so word-internal byte pairs recur.
struct Script {
  uint32_t first;
  uint32_t last;
};
std::vector<std::string> synthetic_sentences(uint64_t seed, const std::vector<Script>& scripts,
                                             size_t words, size_t sentences);

// Picks n distinct registered language codes.
std::vector<std::string> pick_languages(std::mt19937_64& gen, size_t n);

}  // namespace oracle
