#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mtdata::eval {

inline constexpr size_t kMaxRubricSamples = 5;

struct RubricSample {
  std::string hypothesis;
  std::string reference;
};

// Instantiates the 0-5 rubric judging prompt for 1-5 (hypothesis,
// reference) samples.  Throws UsageError outside that range.
std::string build_rubric_prompt(std::span<const RubricSample> batch);

struct ParsedScores {
  std::vector<double> values;
  bool overall_mode = false;  // one number replicated to every sample
};

// Reads `expected` scores from a judge reply: either exactly `expected`
// numbers, or a single overall number which is replicated.  "Sample N"
// labels are ignored.  Throws DataError when no number is found, a value is
// outside [0, 5], or the count fits neither shape.
ParsedScores parse_scores(std::string_view response, size_t expected);

}  // namespace mtdata::eval
