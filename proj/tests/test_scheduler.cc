#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mtdata/error.h"
#include "mtdata/scheduler.h"
#include "support/oracles.h"
#include "support/temp_dir.h"

using namespace mtdata;

namespace {

PairBucket bucket(const char* dir, uint64_t n) { return {Direction::parse(dir), n, n}; }

std::string trace_of(const std::vector<ScheduleEvent>& events) {
  std::ostringstream out;
  write_trace(out, events);
  return out.str();
}

std::vector<Interval> build(const std::vector<PairBucket>& buckets, IntervalConfig config = {}) {
  return interval_means(partition_intervals(buckets, config).intervals);
}

// {A: 10} over {B: 6}: two intervals of width 5 starting at 10 and 5.
std::vector<Interval> merge_case() {
  return build({bucket("en-ro", 10), bucket("ro-en", 6)}, {5, 5, 1});
}

}  // namespace

TEST(Intervals, WorkedExamples) {
  const auto part = partition_intervals(std::vector{bucket("en-ro", 80'980), bucket("mr-en", 5'080)}, {});
  ASSERT_EQ(part.intervals.size(), 2u);
  EXPECT_EQ(part.intervals[0].label(), "[5000,10000)");
  EXPECT_EQ(part.intervals[0].members.front().direction.str(), "mr-en");
  EXPECT_EQ(part.intervals[1].label(), "[80000,90000)");
  EXPECT_EQ(part.intervals[1].members.front().direction.str(), "en-ro");
}

TEST(Intervals, CutoverAndZeroBuckets) {
  const auto part = partition_intervals(
      std::vector{bucket("en-de", 10'000), bucket("en-fr", 9'999), bucket("en-it", 0)}, {});
  ASSERT_EQ(part.intervals.size(), 2u);
  EXPECT_EQ(part.intervals[0].label(), "[5000,10000)");
  EXPECT_EQ(part.intervals[1].label(), "[10000,20000)");
  ASSERT_EQ(part.excluded.size(), 1u);
  EXPECT_EQ(part.excluded[0].str(), "en-it");
  EXPECT_THROW(partition_intervals(std::vector{bucket("en-de", 1)}, {0, 1, 1}), UsageError);
}

TEST(Intervals, MembersFallInsideBounds) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_schedule_instance(gen);
    const auto part = partition_intervals(inst.buckets, inst.config);
    size_t members = 0;
    for (const auto& in : part.intervals) {
      const auto width = in.hi - in.lo;
      EXPECT_TRUE(width == inst.config.s_high || width == inst.config.s_low);
      for (const auto& m : in.members) {
        EXPECT_GE(m.total_samples, in.lo);
        EXPECT_LT(m.total_samples, in.hi);
      }
      members += in.members.size();
    }
    EXPECT_EQ(members + part.excluded.size(), inst.buckets.size());
  }
}

TEST(Intervals, MeansAndOrdering) {
  auto single = build({bucket("en-de", 7'200)});
  EXPECT_EQ(single[0].mean.value(), 7'200.0);
  auto pair = build({bucket("en-de", 12'000), bucket("en-fr", 14'000)}, {10'000, 5'000, 10'000});
  ASSERT_EQ(pair.size(), 1u);
  EXPECT_EQ(pair[0].mean.value(), 13'000.0);

  // Means 103,251 and 95,280 order the first interval ahead.
  auto two = build({bucket("en-de", 95'280), bucket("en-fr", 103'251)});
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].mean.value(), 103'251.0);
  EXPECT_EQ(two[1].mean.value(), 95'280.0);
  EXPECT_THROW(interval_means({}), DataError);
}

TEST(Intervals, TiesOrderByLowerBoundDescending) {
  // Equal means of 12 in overlapping intervals of different widths.
  auto split = interval_means({Interval{0, 20, {bucket("en-de", 12)}, {}},
                               Interval{12, 16, {bucket("en-fr", 12)}, {}}});
  EXPECT_EQ(split[0].lo, 12u);
  EXPECT_EQ(split[1].lo, 0u);
}

TEST(Scheduler, HandWorkedMergeCase) {
  const auto events = schedule(merge_case(), 2, 42);
  std::vector<std::string> kinds;
  size_t batches = 0;
  size_t merge_at = 0;
  for (const auto& e : events) {
    kinds.push_back(to_string(e.kind));
    if (e.kind == EventKind::kBatch) ++batches;
    if (e.kind == EventKind::kMerge) {
      merge_at = e.batch_index;
      EXPECT_EQ(e.samples, 6u);
      EXPECT_EQ(e.counts.at("en-ro"), 6u);
      EXPECT_EQ(e.mean, 6.0);
      EXPECT_EQ(e.next_mean, 6.0);
    }
  }
  EXPECT_EQ(batches, 8u);
  EXPECT_EQ(merge_at, 2u);
  const std::vector<std::string> expected = {"interval_start", "batch", "batch", "merge",
                                             "interval_start", "batch", "batch", "batch",
                                             "batch", "batch", "batch", "done"};
  EXPECT_EQ(kinds, expected);
  // The merged pool holds 12 samples over two members.
  EXPECT_EQ(events[4].samples, 12u);
  EXPECT_EQ(events[4].mean, 6.0);
  EXPECT_EQ(trace_of(events), oracle::naive_schedule_trace(merge_case(), 2, 42));

  const auto table = simulate_exposure(events);
  EXPECT_EQ(table.directions.at("en-ro").consumed, 10u);
  EXPECT_EQ(table.directions.at("ro-en").consumed, 6u);
  EXPECT_EQ(table.batches, 8u);
}

TEST(Scheduler, SingleIntervalIsAPlainShuffle) {
  const auto intervals = build({bucket("en-de", 7), bucket("en-fr", 5)}, {100, 100, 1000});
  const auto events = schedule(intervals, 5, 1);
  size_t batches = 0;
  for (const auto& e : events) {
    EXPECT_NE(e.kind, EventKind::kMerge);
    if (e.kind == EventKind::kBatch) {
      ++batches;
      uint64_t n = 0;
      for (const auto& [d, c] : e.counts) n += c;
      EXPECT_EQ(n, batches < 3 ? 5u : 2u);
    }
  }
  EXPECT_EQ(batches, 3u);
}

TEST(Scheduler, MatchesNaiveReplayOnRandomInstances) {
  std::mt19937_64 gen(20231);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_schedule_instance(gen);
    const auto intervals = interval_means(partition_intervals(inst.buckets, inst.config).intervals);
    const auto trace = trace_of(schedule(intervals, inst.batch_size, inst.seed));
    ASSERT_EQ(trace, oracle::naive_schedule_trace(intervals, inst.batch_size, inst.seed))
        << "trial " << trial;
  }
}

TEST(Scheduler, InvariantsOnRandomInstances) {
  std::mt19937_64 gen(777);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_schedule_instance(gen);
    const auto intervals = interval_means(partition_intervals(inst.buckets, inst.config).intervals);
    const auto events = schedule(intervals, inst.batch_size, inst.seed);

    std::map<std::string, uint64_t> consumed;
    std::map<std::string, uint64_t> remaining;
    for (const auto& b : inst.buckets) remaining[b.direction.str()] = b.total_samples;
    double last_mut = 0.0;
    bool in_phase = false;
    std::vector<size_t> short_batches;
    for (size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      if (e.kind == EventKind::kIntervalStart) {
        last_mut = e.mean;
        in_phase = true;
      } else if (e.kind == EventKind::kBatch) {
        uint64_t n = 0;
        for (const auto& [d, c] : e.counts) {
          consumed[d] += c;
          remaining[d] -= c;
          n += c;
        }
        ASSERT_GE(n, 1u);
        if (n < inst.batch_size) short_batches.push_back(i);
        // Monotone drain within a phase.
        ASSERT_TRUE(in_phase);
        EXPECT_LT(e.mean, last_mut);
        last_mut = e.mean;
      } else if (e.kind == EventKind::kMerge) {
        uint64_t moved = 0;
        for (const auto& [d, c] : e.counts) {
          EXPECT_EQ(c, remaining[d]);
          moved += c;
        }
        EXPECT_EQ(moved, e.samples);
        EXPECT_LE(e.mean, e.next_mean);
        in_phase = false;
      }
    }
    // Conservation: consumed equals input, per direction.
    for (const auto& b : inst.buckets) {
      EXPECT_EQ(consumed[b.direction.str()], b.total_samples);
    }
    // A short batch only ends a phase.
    for (size_t i : short_batches) {
      ASSERT_LT(i + 1, events.size());
      EXPECT_NE(events[i + 1].kind, EventKind::kBatch);
    }
    // First phase starts from the largest mean.
    ASSERT_EQ(events.front().kind, EventKind::kIntervalStart);
    for (const auto& in : intervals) EXPECT_LE(in.mean.value(), events.front().mean);

    const auto table = simulate_exposure(events);
    for (const auto& b : inst.buckets) {
      if (b.total_samples == 0) continue;
      const auto& row = table.directions.at(b.direction.str());
      EXPECT_EQ(row.declared, b.total_samples);
      EXPECT_EQ(row.consumed, b.total_samples);
    }
  }
}

TEST(Scheduler, DeterministicAndSeedSensitive) {
  const auto intervals = build({bucket("en-de", 40), bucket("en-fr", 33), bucket("en-it", 12)}, {10, 10, 1});
  EXPECT_EQ(trace_of(schedule(intervals, 3, 9)), trace_of(schedule(intervals, 3, 9)));
  EXPECT_NE(trace_of(schedule(intervals, 3, 9)), trace_of(schedule(intervals, 3, 10)));
}

TEST(Scheduler, RejectsBadInput) {
  EXPECT_THROW(Scheduler(merge_case(), 0, 1), UsageError);
  auto reversed = merge_case();
  std::swap(reversed[0], reversed[1]);
  EXPECT_THROW(Scheduler(reversed, 2, 1), UsageError);
  EXPECT_TRUE(schedule({}, 2, 1).empty());
}

TEST(Trace, JsonLinesRoundTrip) {
  const auto events = schedule(merge_case(), 3, 5);
  std::istringstream in(trace_of(events));
  EXPECT_EQ(read_trace(in), events);
  const auto merge = nlohmann::json::parse(to_json_line(events[3]));
  EXPECT_EQ(merge["kind"], "merge");
  EXPECT_EQ(merge["from"], "[10,15)");
  EXPECT_EQ(merge["to"], "[5,10)");
  EXPECT_TRUE(merge.contains("moved"));
  EXPECT_THROW(event_from_json_line("{\"kind\":\"nope\"}"), DataError);
  EXPECT_THROW(event_from_json_line("not json"), DataError);
}

TEST(Trace, SimulateEmptyAndMalformed) {
  EXPECT_TRUE(simulate_exposure({}).directions.empty());
  ScheduleEvent stray;
  stray.kind = EventKind::kBatch;
  stray.counts["en-de"] = 1;
  EXPECT_THROW(simulate_exposure(std::vector{stray}), DataError);
}

TEST(Trace, ExposureTsvAndBuckets) {
  const auto table = simulate_exposure(schedule(merge_case(), 2, 42));
  const auto tsv = exposure_to_tsv(table);
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "direction\tdeclared\tconsumed\tfirst_batch\tlast_batch\tmerges");
  EXPECT_NE(tsv.find("en-ro\t10\t10\t0\t"), std::string::npos);

  TempDir tmp;
  const std::vector<PairBucket> buckets = {bucket("en-de", 3), bucket("en-fr", 0)};
  std::ofstream(tmp / "b.json") << buckets_to_json(buckets);
  const auto back = load_buckets(tmp / "b.json");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].total_samples, 3u);
  std::ofstream(tmp / "s.json") << R"({"directions":{"en-ro":{"samples":12,"pairs_packed":40}}})";
  EXPECT_EQ(load_buckets(tmp / "s.json").at(0).total_samples, 12u);
}
