#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace mtdata {

struct LanguageCode {
  std::string code;
  std::string name;
};

// Table of supported languages.  The built-in registry holds the 102
// languages of the training corpus and is compiled in from
// data/languages.tsv.
class LanguageRegistry {
 public:
  static const LanguageRegistry& builtin();

  // Parses "code<TAB>name" lines; '#' starts a comment line.  Codes must be
  // lowercase ASCII, 2-3 letters, and unique.
  static LanguageRegistry parse(std::string_view tsv);

  const LanguageCode* find(std::string_view code) const;
  bool contains(std::string_view code) const { return find(code) != nullptr; }
  // Throws DataError for unknown codes.
  const LanguageCode& at(std::string_view code) const;

  const std::vector<LanguageCode>& all() const { return languages_; }
  size_t size() const { return languages_.size(); }

 private:
  std::vector<LanguageCode> languages_;  // sorted by code
};

// An ordered translation direction.  Canonical text form is "src-tgt".
class Direction {
 public:
  // Both codes must be registered and distinct; throws DataError otherwise.
  Direction(std::string_view src, std::string_view tgt,
            const LanguageRegistry& registry = LanguageRegistry::builtin());

  static Direction parse(std::string_view text,
                         const LanguageRegistry& registry = LanguageRegistry::builtin());

  const std::string& src() const { return src_; }
  const std::string& tgt() const { return tgt_; }
  std::string str() const { return src_ + "-" + tgt_; }
  Direction reversed() const;

  auto operator<=>(const Direction&) const = default;
  bool operator==(const Direction&) const = default;

 private:
  Direction() = default;

  std::string src_;
  std::string tgt_;
};

}  // namespace mtdata
