#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mtdata/language.h"
#include "mtdata/rng.h"

namespace oracle {

using ojson = nlohmann::ordered_json;

namespace {

struct Member {
  std::string src;
  std::string tgt;
  uint64_t remaining = 0;
  std::string name() const { return src + "-" + tgt; }
};

struct Pool {
  std::string label;
  std::vector<Member> members;
  uint64_t mean_sum = 0;
  uint64_t mean_count = 0;
};

uint64_t remaining_sum(const Pool& p) {
  uint64_t s = 0;
  for (const auto& m : p.members) s += m.remaining;
  return s;
}

void sort_members(Pool& p) {
  std::sort(p.members.begin(), p.members.end(), [](const Member& a, const Member& b) {
    return std::tie(a.src, a.tgt) < std::tie(b.src, b.tgt);
  });
}

}  // namespace

std::string naive_schedule_trace(const std::vector<mtdata::Interval>& sorted_intervals,
                                 uint64_t batch_size, uint64_t seed) {
  std::vector<Pool> pools;
  for (const auto& in : sorted_intervals) {
    Pool p{"[" + std::to_string(in.lo) + "," + std::to_string(in.hi) + ")", {}, 0, 0};
    for (const auto& b : in.members) {
      p.members.push_back({b.direction.src(), b.direction.tgt(), b.remaining_samples});
      p.mean_sum += b.remaining_samples;
    }
    p.mean_count = p.members.size();
    pools.push_back(std::move(p));
  }

  std::ostringstream out;
  uint64_t batches = 0;
  uint64_t emitted = 0;
  for (size_t i = 0; i < pools.size(); ++i) {
    Pool& cur = pools[i];
    sort_members(cur);
    const uint64_t start_sum = remaining_sum(cur);
    ojson start;
    start["kind"] = "interval_start";
    start["phase"] = i;
    start["batch_index"] = batches;
    start["interval"] = cur.label;
    start["mean"] = static_cast<double>(start_sum) / cur.members.size();
    start["samples"] = start_sum;
    start["members"] = ojson::object();
    for (const auto& m : cur.members) start["members"][m.name()] = m.remaining;
    out << start.dump() << '\n';

    // Shuffle: draw a uniform position from the remaining pool, remove it.
    std::vector<size_t> pool;
    for (size_t k = 0; k < cur.members.size(); ++k) pool.insert(pool.end(), cur.members[k].remaining, k);
    mtdata::Rng rng(seed, "schedule:phase:" + std::to_string(i));
    std::vector<size_t> order;
    while (!pool.empty()) {
      const auto r = rng.below(pool.size());
      order.push_back(pool[r]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(r));
    }

    size_t pos = 0;
    const bool last = i + 1 == pools.size();
    while (true) {
      const uint64_t rem = remaining_sum(cur);
      const double m_ut = static_cast<double>(rem) / cur.members.size();
      if (!last) {
        Pool& next = pools[i + 1];
        // rem / |cur| <= next_sum / next_count
        const bool merge = static_cast<unsigned __int128>(rem) * next.mean_count <=
                           static_cast<unsigned __int128>(next.mean_sum) * cur.members.size();
        if (merge) {
          ojson ev;
          ev["kind"] = "merge";
          ev["batch_index"] = batches;
          ev["phase"] = i;
          ev["from"] = cur.label;
          ev["to"] = next.label;
          ev["moved"] = rem;
          ev["composition"] = ojson::object();
          for (const auto& m : cur.members) {
            if (m.remaining > 0) ev["composition"][m.name()] = m.remaining;
          }
          ev["m_ut"] = m_ut;
          ev["next_mean"] = static_cast<double>(next.mean_sum) / next.mean_count;
          out << ev.dump() << '\n';
          for (const auto& m : cur.members) {
            if (m.remaining > 0) next.members.push_back(m);
          }
          next.mean_sum = remaining_sum(next);
          next.mean_count = next.members.size();
          break;
        }
      } else if (rem == 0) {
        ojson ev;
        ev["kind"] = "done";
        ev["batches"] = batches;
        ev["samples"] = emitted;
        out << ev.dump() << '\n';
        return out.str();
      }
      const uint64_t take = std::min<uint64_t>(batch_size, rem);
      std::map<std::string, uint64_t> comp;
      for (uint64_t k = 0; k < take; ++k) {
        auto& m = cur.members[order[pos++]];
        --m.remaining;
        ++comp[m.name()];
      }
      emitted += take;
      ojson ev;
      ev["kind"] = "batch";
      ev["batch_index"] = batches++;
      ev["phase"] = i;
      ev["interval"] = cur.label;
      ev["composition"] = ojson::object();
      for (const auto& [k, v] : comp) ev["composition"][k] = v;
      ev["m_ut"] = static_cast<double>(remaining_sum(cur)) / cur.members.size();
      out << ev.dump() << '\n';
    }
  }
  return out.str();
}

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::map<std::vector<std::string>, uint64_t> ngrams(const std::vector<std::string>& toks, size_t n) {
  std::map<std::vector<std::string>, uint64_t> out;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    ++out[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  }
  return out;
}

}  // namespace

double brute_force_bleu(const std::vector<std::string>& hypotheses,
                        const std::vector<std::string>& references) {
  uint64_t match[5] = {};
  uint64_t total[5] = {};
  uint64_t c = 0;
  uint64_t r = 0;
  for (size_t s = 0; s < hypotheses.size(); ++s) {
    const auto h = split_ws(hypotheses[s]);
    const auto ref = split_ws(references[s]);
    c += h.size();
    r += ref.size();
    for (size_t n = 1; n <= 4; ++n) {
      const auto hn = ngrams(h, n);
      const auto rn = ngrams(ref, n);
      for (const auto& [g, cnt] : hn) {
        total[n] += cnt;
        auto it = rn.find(g);
        match[n] += std::min(cnt, it == rn.end() ? uint64_t{0} : it->second);
      }
    }
  }
  if (c == 0) return 0.0;
  double product = 1.0;
  int orders = 0;
  for (size_t n = 1; n <= 4; ++n) {
    if (total[n] == 0) continue;
    if (match[n] == 0) return 0.0;
    product *= static_cast<double>(match[n]) / static_cast<double>(total[n]);
    ++orders;
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return 100.0 * bp * std::pow(product, 1.0 / orders);
}

mtdata::CorpusMap instruction_fixture() {
  using mtdata::Direction;
  const auto& all = mtdata::LanguageRegistry::builtin().all();
  std::vector<Direction> dirs;
  for (const auto& l : all) {
    if (l.code == "en") continue;
    dirs.emplace_back(l.code, "en");
    dirs.emplace_back("en", l.code);
  }
  size_t zh_pairs = 0;
  for (const auto& l : all) {
    if (l.code == "en" || l.code == "zh" || zh_pairs == 20) continue;
    dirs.emplace_back(l.code, "zh");
    dirs.emplace_back("zh", l.code);
    ++zh_pairs;
  }
  // Shortfalls 500 + 200 + 100 + 50 + 12 + 5 + 3 + 2 = 872.
  const uint64_t shortfalls[] = {500, 200, 100, 50, 12, 5, 3, 2};
  mtdata::CorpusMap out;
  for (size_t i = 0; i < dirs.size(); ++i) {
    size_t n = 1000 + (i % 3) * 150;
    if (i % 30 == 7 && i / 30 < 8) n = 1000 - shortfalls[i / 30];
    mtdata::ParallelCorpus c{dirs[i], {}, mtdata::Origin::kOriginal};
    c.pairs.reserve(n);
    const auto tag = dirs[i].str();
    for (size_t k = 0; k < n; ++k) {
      c.pairs.push_back({tag + " source " + std::to_string(k), tag + " target " + std::to_string(k)});
    }
    out.emplace(dirs[i], std::move(c));
  }
  return out;
}

std::vector<std::string> pick_languages(std::mt19937_64& gen, size_t n) {
  const auto& all = mtdata::LanguageRegistry::builtin().all();
  std::vector<std::string> codes;
  for (const auto& l : all) codes.push_back(l.code);
  std::shuffle(codes.begin(), codes.end(), gen);
  codes.resize(n);
  return codes;
}

ScheduleInstance random_schedule_instance(std::mt19937_64& gen, size_t max_directions,
                                          uint64_t max_samples) {
  auto uni = [&](uint64_t lo, uint64_t hi) {
    return std::uniform_int_distribution<uint64_t>(lo, hi)(gen);
  };
  ScheduleInstance inst;
  const size_t k = uni(1, max_directions);
  // Directions out of and into a hub language keep them distinct.
  const auto langs = pick_languages(gen, k + 1);
  bool any = false;
  for (size_t i = 0; i < k; ++i) {
    uint64_t n = uni(0, 9) == 0 ? 0 : uni(1, max_samples);
    if (i + 1 == k && !any && n == 0) n = uni(1, max_samples);
    any = any || n > 0;
    const bool outbound = uni(0, 1) == 0;
    mtdata::Direction d = outbound ? mtdata::Direction(langs[0], langs[i + 1])
                                   : mtdata::Direction(langs[i + 1], langs[0]);
    inst.buckets.push_back({d, n, n});
  }
  inst.config.s_high = uni(20, 400);
  inst.config.s_low = uni(5, inst.config.s_high);
  inst.config.cutover = uni(1, max_samples);
  inst.batch_size = uni(1, 64);
  inst.seed = gen();
  return inst;
}

namespace {

void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace

std::vector<std::string> synthetic_sentences(uint64_t seed, const std::vector<Script>& scripts,
                                             size_t words, size_t sentences) {
  std::mt19937_64 gen(seed);
  std::vector<std::string> lexicon;
  for (size_t i = 0; i < words; ++i) {
    const auto& sc = scripts[i % scripts.size()];
    std::string w;
    const size_t len = 1 + gen() % 4;
    for (size_t k = 0; k < len; ++k) append_utf8(w, sc.first + static_cast<uint32_t>(gen() % (sc.last - sc.first + 1)));
    lexicon.push_back(std::move(w));
  }
  std::vector<std::string> out;
  out.reserve(sentences);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (size_t s = 0; s < sentences; ++s) {
    std::string line;
    const size_t n = 5 + gen() % 11;
    for (size_t k = 0; k < n; ++k) {
      // Squaring a uniform draw favours the start of the lexicon.
      const double u = unit(gen);
      const auto idx = static_cast<size_t>(u * u * static_cast<double>(lexicon.size()));
      if (k) line += ' ';
      line += lexicon[std::min(idx, lexicon.size() - 1)];
    }
    out.push_back(std::move(line));
  }
  return out;
}

std::string random_utf8(std::mt19937_64& gen, size_t max_code_points) {
  auto uni = [&](uint32_t lo, uint32_t hi) {
    return std::uniform_int_distribution<uint32_t>(lo, hi)(gen);
  };
  const size_t n = uni(0, static_cast<uint32_t>(max_code_points));
  std::string out;
  for (size_t i = 0; i < n; ++i) {
    uint32_t cp = 0;
    switch (uni(0, 6)) {
      case 0: cp = uni(0x00, 0x1F); break;          // control bytes, including NUL
      case 1: cp = uni(0x20, 0x7E); break;          // printable ASCII
      case 2: cp = uni(0x80, 0x7FF); break;         // two-byte forms
      case 3: cp = uni(0x4E00, 0x9FFF); break;      // CJK ideographs
      case 4: cp = uni(0x1F300, 0x1FAFF); break;    // emoji
      case 5: cp = uni(0x10000, 0x10FFFF); break;   // any supplementary plane
      default: cp = uni(0xE000, 0xFFFD); break;     // BMP above the surrogates
    }
    if (cp >= 0xD800 && cp <= 0xDFFF) cp = 0xFFFD;
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }
  return out;
}

}  // namespace oracle
