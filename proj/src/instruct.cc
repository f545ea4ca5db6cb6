#include "mtdata/instruct.h"

#include <nlohmann/json.hpp>
#include <ostream>

#include "mtdata/error.h"
#include "mtdata/rng.h"

namespace mtdata {
namespace embedded {
extern const std::string_view kPromptTemplatesJson;
}

namespace {

constexpr std::string_view kPlaceholders[] = {"{src_lang}", "{tgt_lang}", "{src_text}"};

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

const TemplateRegistry& TemplateRegistry::builtin() {
  static const TemplateRegistry registry = from_json(embedded::kPromptTemplatesJson);
  return registry;
}

TemplateRegistry TemplateRegistry::from_json(std::string_view json) {
  TemplateRegistry reg;
  try {
    const auto j = nlohmann::json::parse(json);
    for (const auto& t : j.at("templates")) {
      reg.templates_.push_back({t.at("id").get<size_t>(), t.at("text").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("template registry: ") + e.what());
  }
  if (reg.templates_.size() != kTemplateCount) {
    throw DataError("template registry: expected " + std::to_string(kTemplateCount) +
                    " templates, found " + std::to_string(reg.templates_.size()));
  }
  for (size_t i = 0; i < reg.templates_.size(); ++i) {
    const auto& t = reg.templates_[i];
    if (t.id != i) throw DataError("template registry: ids must run 0.." + std::to_string(kTemplateCount - 1));
    for (auto p : kPlaceholders) {
      if (t.text.find(p) == std::string::npos) {
        throw DataError("template " + std::to_string(i) + " lacks placeholder " + std::string(p));
      }
    }
  }
  return reg;
}

std::string TemplateRegistry::render(size_t id, std::string_view src_lang,
                                     std::string_view tgt_lang, std::string_view src_text) const {
  std::string out = templates_.at(id).text;
  replace_all(out, "{src_lang}", src_lang);
  replace_all(out, "{tgt_lang}", tgt_lang);
  // Source text last, so braces inside it are never treated as placeholders.
  replace_all(out, "{src_text}", src_text);
  return out;
}

std::vector<InstructionRecord> build_instruction_dataset(const CorpusMap& train,
                                                         size_t per_direction, uint64_t seed,
                                                         const TemplateRegistry& templates) {
  if (train.empty()) throw UsageError("instruction dataset: empty training map");
  if (per_direction == 0) throw UsageError("instruction dataset: per_direction must be positive");

  const auto& languages = LanguageRegistry::builtin();
  std::vector<InstructionRecord> records;
  for (const auto& [dir, corpus] : train) {
    Rng select(seed, "instruct:select:" + dir.str());
    Rng pick_template(seed, "instruct:template:" + dir.str());
    const auto& src_name = languages.at(dir.src()).name;
    const auto& tgt_name = languages.at(dir.tgt()).name;
    for (size_t idx : select.sample_indices(corpus.pairs.size(), per_direction)) {
      const auto& pair = corpus.pairs[idx];
      const auto tid = static_cast<size_t>(pick_template.below(templates.size()));
      records.push_back(
          {dir, tid, templates.render(tid, src_name, tgt_name, pair.source), pair.target});
    }
  }
  Rng shuffle(seed, "instruct:shuffle");
  shuffle.shuffle(records);
  return records;
}

std::string to_json_line(const InstructionRecord& r) {
  nlohmann::ordered_json j;
  j["direction"] = r.direction.str();
  j["template_id"] = r.template_id;
  j["instruction"] = r.instruction;
  j["completion"] = r.completion;
  return j.dump();
}

void write_instructions(std::ostream& out, const std::vector<InstructionRecord>& records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

}  // namespace mtdata
