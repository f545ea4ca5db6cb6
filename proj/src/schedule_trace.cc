#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "mtdata/error.h"
#include "mtdata/scheduler.h"

namespace mtdata {

using ojson = nlohmann::ordered_json;

namespace {

EventKind kind_from_string(std::string_view s) {
  if (s == "interval_start") return EventKind::kIntervalStart;
  if (s == "batch") return EventKind::kBatch;
  if (s == "merge") return EventKind::kMerge;
  if (s == "done") return EventKind::kDone;
  throw DataError("trace: unknown event kind '" + std::string(s) + "'");
}

ojson counts_json(const std::map<std::string, uint64_t>& counts) {
  ojson j = ojson::object();
  for (const auto& [k, v] : counts) j[k] = v;
  return j;
}

}  // namespace

std::string to_json_line(const ScheduleEvent& ev) {
  ojson j;
  j["kind"] = to_string(ev.kind);
  switch (ev.kind) {
    case EventKind::kIntervalStart:
      j["phase"] = ev.phase;
      j["batch_index"] = ev.batch_index;
      j["interval"] = ev.interval;
      j["mean"] = ev.mean;
      j["samples"] = ev.samples;
      j["members"] = counts_json(ev.counts);
      break;
    case EventKind::kBatch:
      j["batch_index"] = ev.batch_index;
      j["phase"] = ev.phase;
      j["interval"] = ev.interval;
      j["composition"] = counts_json(ev.counts);
      j["m_ut"] = ev.mean;
      break;
    case EventKind::kMerge:
      j["batch_index"] = ev.batch_index;
      j["phase"] = ev.phase;
      j["from"] = ev.interval;
      j["to"] = ev.target;
      j["moved"] = ev.samples;
      j["composition"] = counts_json(ev.counts);
      j["m_ut"] = ev.mean;
      j["next_mean"] = ev.next_mean;
      break;
    case EventKind::kDone:
      j["batches"] = ev.batch_index;
      j["samples"] = ev.samples;
      break;
  }
  return j.dump();
}

ScheduleEvent event_from_json_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ScheduleEvent ev;
    ev.kind = kind_from_string(j.at("kind").get<std::string>());
    auto read_counts = [&](const char* key) {
      for (const auto& [k, v] : j.at(key).items()) ev.counts[k] = v.get<uint64_t>();
    };
    switch (ev.kind) {
      case EventKind::kIntervalStart:
        ev.phase = j.at("phase").get<size_t>();
        ev.batch_index = j.at("batch_index").get<uint64_t>();
        ev.interval = j.at("interval").get<std::string>();
        ev.mean = j.at("mean").get<double>();
        ev.samples = j.at("samples").get<uint64_t>();
        read_counts("members");
        break;
      case EventKind::kBatch:
        ev.batch_index = j.at("batch_index").get<uint64_t>();
        ev.phase = j.at("phase").get<size_t>();
        ev.interval = j.at("interval").get<std::string>();
        read_counts("composition");
        ev.mean = j.at("m_ut").get<double>();
        for (const auto& [k, v] : ev.counts) ev.samples += v;
        break;
      case EventKind::kMerge:
        ev.batch_index = j.at("batch_index").get<uint64_t>();
        ev.phase = j.at("phase").get<size_t>();
        ev.interval = j.at("from").get<std::string>();
        ev.target = j.at("to").get<std::string>();
        ev.samples = j.at("moved").get<uint64_t>();
        read_counts("composition");
        ev.mean = j.at("m_ut").get<double>();
        ev.next_mean = j.at("next_mean").get<double>();
        break;
      case EventKind::kDone:
        ev.batch_index = j.at("batches").get<uint64_t>();
        ev.samples = j.at("samples").get<uint64_t>();
        break;
    }
    return ev;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("trace: ") + e.what());
  }
}

void write_trace(std::ostream& out, std::span<const ScheduleEvent> events) {
  for (const auto& ev : events) out << to_json_line(ev) << '\n';
}

std::vector<ScheduleEvent> read_trace(std::istream& in) {
  std::vector<ScheduleEvent> events;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      events.push_back(event_from_json_line(line));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return events;
}

ExposureTable simulate_exposure(std::span<const ScheduleEvent> events) {
  ExposureTable table;
  bool in_phase = false;
  bool done = false;
  for (const auto& ev : events) {
    if (done) throw DataError("trace: events after done");
    switch (ev.kind) {
      case EventKind::kIntervalStart:
        in_phase = true;
        for (const auto& [dir, n] : ev.counts) {
          // A direction is declared once, when it first enters training; a
          // merged direction reappears with its untrained remainder.
          if (!table.directions.contains(dir)) table.directions[dir].declared = n;
        }
        break;
      case EventKind::kBatch: {
        if (!in_phase) throw DataError("trace: batch outside an interval phase");
        if (ev.batch_index != table.batches) {
          throw DataError("trace: expected batch " + std::to_string(table.batches) + ", got " +
                          std::to_string(ev.batch_index));
        }
        for (const auto& [dir, n] : ev.counts) {
          auto it = table.directions.find(dir);
          if (it == table.directions.end()) {
            throw DataError("trace: batch draws from undeclared direction " + dir);
          }
          auto& d = it->second;
          d.consumed += n;
          if (d.consumed > d.declared) {
            throw DataError("trace: " + dir + " consumed more samples than declared");
          }
          if (!d.first_batch) d.first_batch = ev.batch_index;
          d.last_batch = ev.batch_index;
          table.samples += n;
        }
        ++table.batches;
        break;
      }
      case EventKind::kMerge:
        if (!in_phase) throw DataError("trace: merge outside an interval phase");
        for (const auto& [dir, n] : ev.counts) {
          auto it = table.directions.find(dir);
          if (it == table.directions.end()) {
            throw DataError("trace: merge moves undeclared direction " + dir);
          }
          if (it->second.declared - it->second.consumed != n) {
            throw DataError("trace: merge of " + dir + " moves " + std::to_string(n) +
                            " samples but " +
                            std::to_string(it->second.declared - it->second.consumed) +
                            " are untrained");
          }
          it->second.merges.push_back({ev.batch_index, ev.interval, ev.target, n});
        }
        in_phase = false;
        break;
      case EventKind::kDone:
        if (ev.batch_index != table.batches || ev.samples != table.samples) {
          throw DataError("trace: done event totals disagree with the batches");
        }
        for (const auto& [dir, d] : table.directions) {
          if (d.consumed != d.declared) {
            throw DataError("trace: " + dir + " consumed " + std::to_string(d.consumed) + " of " +
                            std::to_string(d.declared) + " samples");
          }
        }
        done = true;
        break;
    }
  }
  return table;
}

std::string exposure_to_tsv(const ExposureTable& table) {
  std::ostringstream out;
  out << "direction\tdeclared\tconsumed\tfirst_batch\tlast_batch\tmerges\n";
  for (const auto& [dir, d] : table.directions) {
    out << dir << '\t' << d.declared << '\t' << d.consumed << '\t'
        << (d.first_batch ? std::to_string(*d.first_batch) : "-") << '\t'
        << (d.last_batch ? std::to_string(*d.last_batch) : "-") << '\t';
    if (d.merges.empty()) out << '-';
    for (size_t i = 0; i < d.merges.size(); ++i) {
      const auto& m = d.merges[i];
      out << (i ? ";" : "") << m.from << "->" << m.to << "@" << m.batch_index << ":" << m.moved;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<PairBucket> load_buckets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    std::vector<PairBucket> out;
    if (j.contains("buckets")) {
      for (const auto& [dir, n] : j.at("buckets").items()) {
        const auto total = n.get<uint64_t>();
        out.push_back({Direction::parse(dir), total, total});
      }
    } else if (j.contains("directions")) {
      for (const auto& [dir, entry] : j.at("directions").items()) {
        const auto total = entry.at("samples").get<uint64_t>();
        out.push_back({Direction::parse(dir), total, total});
      }
    } else {
      throw DataError(path.string() + ": expected a \"buckets\" or \"directions\" object");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string buckets_to_json(std::span<const PairBucket> buckets) {
  ojson j;
  auto& b = j["buckets"] = ojson::object();
  for (const auto& bucket : buckets) b[bucket.direction.str()] = bucket.total_samples;
  return j.dump(2) + "\n";
}

std::string intervals_to_json(std::span<const Interval> intervals,
                              std::span<const Direction> excluded) {
  ojson j;
  auto& list = j["intervals"] = ojson::array();
  for (const auto& interval : intervals) {
    ojson entry;
    entry["interval"] = interval.label();
    entry["mean"] = interval.mean.value();
    entry["mean_sum"] = interval.mean.sum;
    entry["members"] = ojson::object();
    for (const auto& m : interval.members) entry["members"][m.direction.str()] = m.total_samples;
    list.push_back(std::move(entry));
  }
  auto& ex = j["excluded"] = ojson::array();
  for (const auto& d : excluded) ex.push_back(d.str());
  return j.dump(2) + "\n";
}

}  // namespace mtdata
