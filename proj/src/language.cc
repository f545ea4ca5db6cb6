#include "mtdata/language.h"

#include <algorithm>

#include "mtdata/error.h"

namespace mtdata {
namespace embedded {
extern const std::string_view kLanguagesTsv;
}

namespace {

bool valid_code(std::string_view code) {
  if (code.size() < 2 || code.size() > 3) return false;
  return std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

const LanguageRegistry& LanguageRegistry::builtin() {
  static const LanguageRegistry registry = parse(embedded::kLanguagesTsv);
  return registry;
}

LanguageRegistry LanguageRegistry::parse(std::string_view tsv) {
  LanguageRegistry reg;
  size_t line_no = 0;
  while (!tsv.empty()) {
    const auto nl = tsv.find('\n');
    std::string_view line = tsv.substr(0, nl);
    tsv = nl == std::string_view::npos ? std::string_view{} : tsv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("language registry line " + std::to_string(line_no) + ": missing tab");
    }
    const auto code = line.substr(0, tab);
    if (!valid_code(code)) {
      throw DataError("language registry line " + std::to_string(line_no) + ": bad code '" +
                      std::string(code) + "'");
    }
    reg.languages_.push_back({std::string(code), std::string(line.substr(tab + 1))});
  }
  std::sort(reg.languages_.begin(), reg.languages_.end(),
            [](const auto& a, const auto& b) { return a.code < b.code; });
  auto dup = std::adjacent_find(reg.languages_.begin(), reg.languages_.end(),
                                [](const auto& a, const auto& b) { return a.code == b.code; });
  if (dup != reg.languages_.end()) {
    throw DataError("language registry: duplicate code '" + dup->code + "'");
  }
  return reg;
}

const LanguageCode* LanguageRegistry::find(std::string_view code) const {
  auto it = std::lower_bound(languages_.begin(), languages_.end(), code,
                             [](const LanguageCode& l, std::string_view c) { return l.code < c; });
  if (it == languages_.end() || it->code != code) return nullptr;
  return &*it;
}

const LanguageCode& LanguageRegistry::at(std::string_view code) const {
  if (const auto* l = find(code)) return *l;
  throw DataError("unknown language code '" + std::string(code) + "'");
}

Direction::Direction(std::string_view src, std::string_view tgt, const LanguageRegistry& registry)
    : src_(registry.at(src).code), tgt_(registry.at(tgt).code) {
  if (src_ == tgt_) throw DataError("direction source and target are both '" + src_ + "'");
}

Direction Direction::parse(std::string_view text, const LanguageRegistry& registry) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos || text.find('-', dash + 1) != std::string_view::npos) {
    throw DataError("malformed direction '" + std::string(text) + "', expected src-tgt");
  }
  return Direction(text.substr(0, dash), text.substr(dash + 1), registry);
}

Direction Direction::reversed() const {
  Direction d;
  d.src_ = tgt_;
  d.tgt_ = src_;
  return d;
}

}  // namespace mtdata
