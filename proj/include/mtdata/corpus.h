#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mtdata/language.h"

namespace mtdata {

enum class Origin { kOriginal, kFlipped, kMixed };

std::string to_string(Origin origin);
Origin origin_from_string(std::string_view text);

struct SentencePair {
  std::string source;
  std::string target;

  auto operator<=>(const SentencePair&) const = default;
};

// All sentence pairs of one direction.  Treated as immutable once built;
// safe to share across threads.
struct ParallelCorpus {
  Direction direction;
  std::vector<SentencePair> pairs;
  Origin origin = Origin::kOriginal;
};

using CorpusMap = std::map<Direction, ParallelCorpus>;

struct LoadedCorpus {
  ParallelCorpus corpus;
  size_t skipped_lines = 0;
};

// Reads a UTF-8 TSV file with one "source<TAB>target" pair per line.  Lines
// without exactly one tab, with a side that is blank after trimming, or with
// invalid UTF-8 are skipped and counted.  Throws DataError if the file
// cannot be read or holds no valid line.
LoadedCorpus load_corpus(const std::filesystem::path& path, const Direction& direction);

// Swaps source and target of every pair and reverses the direction.
ParallelCorpus flip(const ParallelCorpus& corpus);

inline constexpr uint64_t kDefaultFlipThreshold = 1'000'000;

// Creates each missing reverse direction.  A corpus smaller than
// flip_threshold is flipped whole; otherwise a uniformly drawn half
// (floor(n/2) pairs, kept in original order) is flipped.  Directions whose
// reverse already exists are left as they are.  Every direction draws from
// its own stream forked from `seed`, so the result does not depend on
// processing order.
CorpusMap balance_directions(const CorpusMap& corpora, uint64_t flip_threshold, uint64_t seed);

struct DirectionStats {
  size_t pairs = 0;
  size_t skipped = 0;
  Origin origin = Origin::kOriginal;
};

struct CorpusStats {
  std::map<Direction, DirectionStats> directions;
  size_t total_pairs = 0;
};

CorpusStats compute_stats(const CorpusMap& corpora,
                          const std::map<Direction, size_t>& skipped = {});
std::string stats_to_json(const CorpusStats& stats);

struct LoadedCorpusDir {
  CorpusMap corpora;
  std::map<Direction, size_t> skipped;
};

// Loads every "{src}-{tgt}.tsv" file of a directory.  Other files are
// ignored.  Throws DataError if the directory is missing or has no corpus.
LoadedCorpusDir load_corpus_dir(const std::filesystem::path& dir);

// Writes "{src}-{tgt}.tsv" per direction; returns the written paths in
// direction order.
std::vector<std::filesystem::path> write_corpus_dir(const std::filesystem::path& dir,
                                                    const CorpusMap& corpora);

}  // namespace mtdata
