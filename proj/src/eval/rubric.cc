#include "mtdata/eval/rubric.h"

#include <regex>

#include "mtdata/error.h"

namespace mtdata::eval {
namespace {

constexpr std::string_view kHeader =
    "You will be given two sentences, translated sentence is translated from source sentence, "
    "reference sentence is the ground truth of translation.\n"
    "\n"
    "Your task is to rate the translation result between translated sentence and reference "
    "sentence.\n"
    "\n"
    "Assign a score for translation result on a scale of 0 to 5, where 0 is the lowest and 5 is "
    "the highest based on the Evaluation Criteria.\n"
    "\n"
    "Evaluation Criteria:\n"
    "\n"
    "Semantic similarity refers to the measurement of how similar or related two sentences are "
    "in terms of their meaning or semantics. It focuses on capturing the similarity in the "
    "underlying concepts, ideas, or information conveyed by the sentences, rather than just the "
    "surface-level lexical or syntactic similarities.\n"
    "\n"
    "The translated sentence can completely express the meaning of the reference sentence. The "
    "closer the translated sentence is to the reference sentence, the higher the score.\n"
    "\n"
    "The style of the translated sentence should be as consistent as possible with the reference "
    "sentence\n"
    "\n";

constexpr std::string_view kFooter =
    "Evaluation Form (Please output score ONLY):\n"
    "\n"
    "-Overall rating";

}  // namespace

std::string build_rubric_prompt(std::span<const RubricSample> batch) {
  if (batch.empty()) throw UsageError("rubric prompt: empty batch");
  if (batch.size() > kMaxRubricSamples) {
    throw UsageError("rubric prompt: at most " + std::to_string(kMaxRubricSamples) +
                     " samples per prompt, got " + std::to_string(batch.size()));
  }
  std::string out(kHeader);
  for (size_t i = 0; i < batch.size(); ++i) {
    out += "Sample " + std::to_string(i + 1) + ":\n\n";
    out += "Translated Sentence: " + batch[i].hypothesis + "\n\n";
    out += "Reference Sentence: " + batch[i].reference + "\n\n";
  }
  out += kFooter;
  return out;
}

ParsedScores parse_scores(std::string_view response, size_t expected) {
  if (expected == 0) throw UsageError("parse_scores: expected must be positive");
  static const std::regex kLabel(R"((sample|translation)\s*#?\s*\d+)", std::regex::icase);
  static const std::regex kScale(R"((/|out\s+of)\s*5(?:\.0+)?)", std::regex::icase);
  static const std::regex kNumber(R"([-+]?\d+(?:\.\d+)?)");

  std::string text = std::regex_replace(std::string(response), kLabel, " ");
  text = std::regex_replace(text, kScale, " ");
  std::vector<double> values;
  for (std::sregex_iterator it(text.begin(), text.end(), kNumber), end; it != end; ++it) {
    values.push_back(std::stod(it->str()));
  }
  if (values.empty()) throw DataError("judge reply holds no score: '" + std::string(response) + "'");
  for (double v : values) {
    if (v < 0.0 || v > 5.0) {
      throw DataError("judge score " + std::to_string(v) + " outside [0, 5]");
    }
  }
  if (values.size() == expected) return {std::move(values), false};
  if (values.size() == 1) return {std::vector<double>(expected, values.front()), true};
  throw DataError("judge reply has " + std::to_string(values.size()) + " scores, expected " +
                  std::to_string(expected) + " or a single overall score");
}

}  // namespace mtdata::eval
