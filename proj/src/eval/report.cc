#include "mtdata/eval/report.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "mtdata/error.h"
#include "mtdata/language.h"

namespace mtdata::eval {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cells;
  size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    cells.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cells;
}

double parse_double(std::string_view cell, size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError("score table line " + std::to_string(line_no) + ": bad number '" +
                    std::string(cell) + "'");
  }
  return v;
}

}  // namespace

std::string format_score(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

ComparisonReport comparison_report(std::span<const SystemReport> reports,
                                   std::string_view sort_by) {
  ComparisonReport out;
  out.sort_by = sort_by;
  size_t key = reports.size();
  for (size_t i = 0; i < reports.size(); ++i) {
    out.systems.push_back(reports[i].system);
    if (reports[i].system == sort_by) key = i;
  }
  if (key == reports.size()) {
    throw UsageError("sort system '" + std::string(sort_by) + "' is not among the reports");
  }

  std::set<std::string> shared;
  for (const auto& [dir, s] : reports.front().scores) shared.insert(dir);
  for (const auto& r : reports) {
    std::set<std::string> next;
    for (const auto& d : shared) {
      if (r.scores.contains(d)) next.insert(d);
    }
    shared = std::move(next);
  }
  if (shared.empty()) throw DataError("comparison report: systems share no direction");
  for (const auto& r : reports) {
    for (const auto& [dir, s] : r.scores) {
      if (!shared.contains(dir)) out.omitted[r.system].push_back(dir);
    }
  }

  for (const auto& dir : shared) {
    ComparisonRow row{dir, {}};
    for (const auto& r : reports) row.scores.push_back(r.scores.at(dir).score);
    out.rows.push_back(std::move(row));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [key](const auto& a, const auto& b) {
    return a.scores[key] > b.scores[key];
  });

  for (size_t a = 0; a < reports.size(); ++a) {
    for (size_t b = 0; b < reports.size(); ++b) {
      if (a == b) continue;
      WinSet w{out.systems[a], out.systems[b], {}};
      for (const auto& row : out.rows) {
        if (row.scores[a] > row.scores[b]) w.directions.push_back(row.direction);
      }
      out.wins.push_back(std::move(w));
    }
  }
  return out;
}

const WinSet* find_wins(const ComparisonReport& report, std::string_view winner,
                        std::string_view loser) {
  for (const auto& w : report.wins) {
    if (w.winner == winner && w.loser == loser) return &w;
  }
  return nullptr;
}

std::string report_to_tsv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "direction";
  for (const auto& s : report.systems) out << '\t' << s;
  out << '\n';
  for (const auto& row : report.rows) {
    out << row.direction;
    for (double v : row.scores) out << '\t' << format_score(v);
    out << '\n';
  }
  return out.str();
}

std::string series_to_json(const ComparisonReport& report) {
  nlohmann::ordered_json j;
  j["sort_by"] = report.sort_by;
  j["directions"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) j["directions"].push_back(row.direction);
  auto& series = j["series"] = nlohmann::ordered_json::object();
  for (size_t i = 0; i < report.systems.size(); ++i) {
    auto& s = series[report.systems[i]] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) s.push_back(row.scores[i]);
  }
  auto& omitted = j["omitted"] = nlohmann::ordered_json::object();
  for (const auto& [system, dirs] : report.omitted) omitted[system] = dirs;
  return j.dump(2) + "\n";
}

std::string wins_to_tsv(const ComparisonReport& report) {
  std::ostringstream out;
  out << "winner\tloser\tcount\tdirections\n";
  for (const auto& w : report.wins) {
    out << w.winner << '\t' << w.loser << '\t' << w.directions.size() << '\t';
    for (size_t i = 0; i < w.directions.size(); ++i) out << (i ? "," : "") << w.directions[i];
    out << '\n';
  }
  return out.str();
}

std::vector<SystemReport> parse_score_table(std::string_view tsv) {
  std::vector<SystemReport> reports;
  size_t line_no = 0;
  bool header = true;
  while (!tsv.empty()) {
    const auto nl = tsv.find('\n');
    std::string_view line = tsv.substr(0, nl);
    tsv = nl == std::string_view::npos ? std::string_view{} : tsv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    if (header) {
      if (cells.size() < 2 || cells[0] != "direction") {
        throw DataError("score table: header must be 'direction<TAB>system...'");
      }
      for (size_t i = 1; i < cells.size(); ++i) reports.push_back({std::string(cells[i]), {}});
      header = false;
      continue;
    }
    if (cells.size() != reports.size() + 1) {
      throw DataError("score table line " + std::to_string(line_no) + ": expected " +
                      std::to_string(reports.size() + 1) + " cells");
    }
    const auto dir = Direction::parse(cells[0]).str();
    for (size_t i = 0; i < reports.size(); ++i) {
      if (cells[i + 1].empty() || cells[i + 1] == "-") continue;
      if (!reports[i].scores.emplace(dir, DirectionScore{parse_double(cells[i + 1], line_no)}).second) {
        throw DataError("score table: duplicate direction " + dir);
      }
    }
  }
  if (reports.empty()) throw DataError("score table: missing header");
  return reports;
}

std::vector<SystemReport> load_score_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_score_table(buf.str());
}

std::string score_table_to_tsv(std::span<const SystemReport> reports) {
  std::set<std::string> dirs;
  for (const auto& r : reports) {
    for (const auto& [d, s] : r.scores) dirs.insert(d);
  }
  std::ostringstream out;
  out << "direction";
  for (const auto& r : reports) out << '\t' << r.system;
  out << '\n';
  for (const auto& d : dirs) {
    out << d;
    for (const auto& r : reports) {
      auto it = r.scores.find(d);
      out << '\t' << (it == r.scores.end() ? "-" : format_score(it->second.score));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mtdata::eval
