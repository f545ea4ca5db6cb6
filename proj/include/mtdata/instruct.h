#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mtdata/corpus.h"

namespace mtdata {

struct PromptTemplate {
  size_t id = 0;
  std::string text;  // contains {src_lang}, {tgt_lang} and {src_text}
};

inline constexpr size_t kTemplateCount = 28;

class TemplateRegistry {
 public:
  // The bundled registry (data/prompt_templates.json).
  static const TemplateRegistry& builtin();

  // Parses {"templates": [{"id": 0, "text": "..."}, ...]}.  Requires exactly
  // kTemplateCount templates with ids 0..27, each containing every
  // placeholder.  Throws DataError otherwise.
  static TemplateRegistry from_json(std::string_view json);

  const std::vector<PromptTemplate>& templates() const { return templates_; }
  size_t size() const { return templates_.size(); }

  std::string render(size_t id, std::string_view src_lang, std::string_view tgt_lang,
                     std::string_view src_text) const;

 private:
  std::vector<PromptTemplate> templates_;
};

struct InstructionRecord {
  Direction direction;
  size_t template_id = 0;
  std::string instruction;
  std::string completion;

  bool operator==(const InstructionRecord&) const = default;
};

inline constexpr size_t kDefaultPerDirection = 1000;

// Selects min(|corpus|, per_direction) pairs per direction uniformly without
// replacement, gives each a uniformly drawn template, and shuffles the whole
// list.  Throws UsageError if `train` is empty or per_direction is zero.
std::vector<InstructionRecord> build_instruction_dataset(
    const CorpusMap& train, size_t per_direction, uint64_t seed,
    const TemplateRegistry& templates = TemplateRegistry::builtin());

std::string to_json_line(const InstructionRecord& record);
void write_instructions(std::ostream& out, const std::vector<InstructionRecord>& records);

}  // namespace mtdata
