#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mtdata::eval {

struct DirectionScore {
  double score = 0.0;
  std::optional<size_t> sentences;  // unknown for bundled fixture tables
  size_t missing = 0;
};

// Per-direction scores of one system (BLEU or mean rubric score).
struct SystemReport {
  std::string system;
  std::map<std::string, DirectionScore> scores;  // keyed by "src-tgt"
};

struct ComparisonRow {
  std::string direction;
  std::vector<double> scores;  // one per system, in ComparisonReport::systems order
};

// Directions where `winner` scores strictly higher than `loser`, in row order.
struct WinSet {
  std::string winner;
  std::string loser;
  std::vector<std::string> directions;
};

struct ComparisonReport {
  std::vector<std::string> systems;
  std::string sort_by;
  std::vector<ComparisonRow> rows;
  std::map<std::string, std::vector<std::string>> omitted;  // system -> dropped directions
  std::vector<WinSet> wins;  // every ordered pair of distinct systems
};

// Restricts all systems to their shared directions, sorts rows by the
// `sort_by` system's score (descending, ties by direction name), and counts
// pairwise wins.  Throws UsageError for an unknown sort system and DataError
// when the systems share no direction.
ComparisonReport comparison_report(std::span<const SystemReport> reports, std::string_view sort_by);

const WinSet* find_wins(const ComparisonReport& report, std::string_view winner,
                        std::string_view loser);

std::string report_to_tsv(const ComparisonReport& report);
std::string series_to_json(const ComparisonReport& report);
std::string wins_to_tsv(const ComparisonReport& report);

// Score tables: header "direction<TAB>System A<TAB>System B...", one row per
// direction.  Directions must parse as registered "src-tgt" pairs.
std::vector<SystemReport> parse_score_table(std::string_view tsv);
std::vector<SystemReport> load_score_table(const std::filesystem::path& path);
std::string score_table_to_tsv(std::span<const SystemReport> reports);

std::string format_score(double value);

}  // namespace mtdata::eval
