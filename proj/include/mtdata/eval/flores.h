#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mtdata/eval/types.h"

namespace mtdata::eval {

inline constexpr size_t kDefaultFloresPerDirection = 50;

struct FloresSubset {
  std::vector<EvalItem> items;               // hypotheses left empty
  std::map<std::string, size_t> shortfall;   // direction -> sentences missing
};

// Reads line-aligned per-language files "{code}.devtest" (or "{code}.txt")
// from `dir` and pairs the first per_direction lines of each direction's
// source and target files.  Throws DataError for a missing language file,
// files of different line counts, or an empty reference line.
FloresSubset load_flores_subset(const std::filesystem::path& dir,
                                std::span<const Direction> directions,
                                size_t per_direction = kDefaultFloresPerDirection);

std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace mtdata::eval
