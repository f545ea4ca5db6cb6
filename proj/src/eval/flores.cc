#include "mtdata/eval/flores.h"

#include <fstream>

#include "mtdata/error.h"
#include "mtdata/utf8.h"

namespace mtdata::eval {

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

FloresSubset load_flores_subset(const fs::path& dir, std::span<const Direction> directions,
                                size_t per_direction) {
  std::map<std::string, std::vector<std::string>> cache;
  auto language = [&](const std::string& code) -> const std::vector<std::string>& {
    if (auto it = cache.find(code); it != cache.end()) return it->second;
    for (const char* ext : {".devtest", ".txt"}) {
      const auto path = dir / (code + ext);
      if (fs::exists(path)) return cache.emplace(code, read_lines(path)).first->second;
    }
    throw DataError("no FLORES file for language '" + code + "' in " + dir.string());
  };

  FloresSubset out;
  for (const auto& d : directions) {
    const auto& src = language(d.src());
    const auto& tgt = language(d.tgt());
    if (src.size() != tgt.size()) {
      throw DataError("FLORES files for " + d.str() + " are misaligned: " +
                      std::to_string(src.size()) + " vs " + std::to_string(tgt.size()) + " lines");
    }
    const size_t n = std::min(src.size(), per_direction);
    for (size_t i = 0; i < n; ++i) {
      if (utf8::trim(tgt[i]).empty()) {
        throw DataError("FLORES reference line " + std::to_string(i + 1) + " of " + d.tgt() +
                        " is empty");
      }
      out.items.push_back({d, src[i], {}, tgt[i]});
    }
    if (n < per_direction) out.shortfall[d.str()] = per_direction - n;
  }
  return out;
}

}  // namespace mtdata::eval
