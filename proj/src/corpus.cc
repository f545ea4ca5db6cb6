#include "mtdata/corpus.h"

#include <algorithm>
#include <fstream>
#include <optional>
#include <nlohmann/json.hpp>

#include "mtdata/error.h"
#include "mtdata/parallel.h"
#include "mtdata/rng.h"
#include "mtdata/utf8.h"

namespace mtdata {

namespace fs = std::filesystem;

std::string to_string(Origin origin) {
  switch (origin) {
    case Origin::kOriginal: return "original";
    case Origin::kFlipped: return "flipped";
    case Origin::kMixed: return "mixed";
  }
  return "original";
}

Origin origin_from_string(std::string_view text) {
  if (text == "original") return Origin::kOriginal;
  if (text == "flipped") return Origin::kFlipped;
  if (text == "mixed") return Origin::kMixed;
  throw DataError("unknown corpus origin '" + std::string(text) + "'");
}

LoadedCorpus load_corpus(const fs::path& path, const Direction& direction) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file " + path.string());

  LoadedCorpus out{ParallelCorpus{direction, {}, Origin::kOriginal}, 0};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos ||
        !utf8::is_valid(line)) {
      ++out.skipped_lines;
      continue;
    }
    std::string_view view(line);
    auto src = view.substr(0, tab);
    auto tgt = view.substr(tab + 1);
    if (utf8::trim(src).empty() || utf8::trim(tgt).empty()) {
      ++out.skipped_lines;
      continue;
    }
    out.corpus.pairs.push_back({std::string(src), std::string(tgt)});
  }
  if (out.corpus.pairs.empty()) {
    throw DataError(path.string() + ": zero valid lines (" + std::to_string(out.skipped_lines) +
                    " skipped)");
  }
  return out;
}

ParallelCorpus flip(const ParallelCorpus& corpus) {
  ParallelCorpus out{corpus.direction.reversed(), {}, Origin::kFlipped};
  out.pairs.reserve(corpus.pairs.size());
  for (const auto& p : corpus.pairs) out.pairs.push_back({p.target, p.source});
  return out;
}

CorpusMap balance_directions(const CorpusMap& corpora, uint64_t flip_threshold, uint64_t seed) {
  if (flip_threshold == 0) throw UsageError("flip_threshold must be positive");

  std::vector<const ParallelCorpus*> needs_reverse;
  for (const auto& [dir, corpus] : corpora) {
    if (!corpora.contains(dir.reversed())) needs_reverse.push_back(&corpus);
  }

  std::vector<std::optional<ParallelCorpus>> created(needs_reverse.size());
  parallel_for(needs_reverse.size(), [&](size_t i) {
    const ParallelCorpus& src = *needs_reverse[i];
    const size_t n = src.pairs.size();
    if (n < flip_threshold) {
      created[i] = flip(src);
      return;
    }
    Rng rng(seed, "balance:" + src.direction.str());
    ParallelCorpus half{src.direction, {}, src.origin};
    for (size_t idx : rng.sample_indices(n, n / 2)) half.pairs.push_back(src.pairs[idx]);
    created[i] = flip(half);
  });

  CorpusMap out = corpora;
  for (auto& c : created) {
    auto dir = c->direction;
    out.emplace(std::move(dir), std::move(*c));
  }
  return out;
}

CorpusStats compute_stats(const CorpusMap& corpora, const std::map<Direction, size_t>& skipped) {
  CorpusStats stats;
  for (const auto& [dir, corpus] : corpora) {
    DirectionStats s;
    s.pairs = corpus.pairs.size();
    s.origin = corpus.origin;
    if (auto it = skipped.find(dir); it != skipped.end()) s.skipped = it->second;
    stats.total_pairs += s.pairs;
    stats.directions.emplace(dir, s);
  }
  return stats;
}

std::string stats_to_json(const CorpusStats& stats) {
  nlohmann::ordered_json j;
  j["total_pairs"] = stats.total_pairs;
  j["direction_count"] = stats.directions.size();
  auto& dirs = j["directions"] = nlohmann::ordered_json::object();
  for (const auto& [dir, s] : stats.directions) {
    dirs[dir.str()] = {{"pairs", s.pairs}, {"skipped", s.skipped}, {"origin", to_string(s.origin)}};
  }
  return j.dump(2) + "\n";
}

LoadedCorpusDir load_corpus_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("corpus directory not found: " + dir.string());

  std::vector<std::pair<Direction, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".tsv") continue;
    files.emplace_back(Direction::parse(entry.path().stem().string()), entry.path());
  }
  if (files.empty()) throw DataError("no {src}-{tgt}.tsv files in " + dir.string());
  std::sort(files.begin(), files.end());

  std::vector<std::optional<LoadedCorpus>> loaded(files.size());
  parallel_for(files.size(), [&](size_t i) {
    loaded[i] = load_corpus(files[i].second, files[i].first);
  });

  LoadedCorpusDir out;
  for (auto& l : loaded) {
    const auto dir_key = l->corpus.direction;
    out.skipped[dir_key] = l->skipped_lines;
    out.corpora.emplace(dir_key, std::move(l->corpus));
  }
  return out;
}

std::vector<fs::path> write_corpus_dir(const fs::path& dir, const CorpusMap& corpora) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (const auto& [d, corpus] : corpora) {
    const auto path = dir / (d.str() + ".tsv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& p : corpus.pairs) out << p.source << '\t' << p.target << '\n';
    if (!out) throw DataError("write failed: " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace mtdata
