#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtdata/language.h"
#include "mtdata/rng.h"

namespace mtdata {

// Packed-sample count of one direction, and how many are still untrained.
struct PairBucket {
  Direction direction;
  uint64_t total_samples = 0;
  uint64_t remaining_samples = 0;
};

// Exact arithmetic mean sum / count.  Means are compared by cross
// multiplication so ties and merge points never depend on rounding.
struct Mean {
  uint64_t sum = 0;
  uint64_t count = 0;

  double value() const { return count == 0 ? 0.0 : static_cast<double>(sum) / count; }
};

// <0, 0, >0 as a < b, a == b, a > b.
int compare(const Mean& a, const Mean& b);

// Half-open range [lo, hi) of per-direction sample counts.
struct Interval {
  uint64_t lo = 0;
  uint64_t hi = 0;
  std::vector<PairBucket> members;  // ordered by direction
  Mean mean;

  std::string label() const;
};

struct IntervalConfig {
  uint64_t s_high = 10'000;
  uint64_t s_low = 5'000;
  uint64_t cutover = 10'000;
};

struct Partition {
  std::vector<Interval> intervals;  // ascending by (lo, hi); means unset
  std::vector<Direction> excluded;  // buckets with zero samples
};

// Assigns each bucket to the interval containing its total: width s_high
// (aligned to multiples of s_high) for totals >= cutover, width s_low below.
// Zero-sample buckets are excluded and reported.
Partition partition_intervals(std::span<const PairBucket> buckets, const IntervalConfig& config);

// Sets each interval's mean to the mean member total and sorts descending by
// mean.  Ties: higher lower bound first, then first member direction.
// Throws DataError on an empty list or an interval without members.
std::vector<Interval> interval_means(std::vector<Interval> intervals);

enum class EventKind { kIntervalStart, kBatch, kMerge, kDone };

std::string to_string(EventKind kind);

// One step of the schedule trace.
//  interval_start: phase, interval, mean (of untrained samples per member),
//                  samples (pool size), counts = untrained samples per member.
//  batch:          batch_index, phase, interval, counts = samples drawn per
//                  direction, mean = untrained mean after the batch.
//  merge:          batch_index (batches so far), interval -> target, samples
//                  moved, counts = moved per direction, mean = untrained mean,
//                  next_mean = mean of the receiving interval.
//  done:           batch_index = total batches, samples = total emitted.
struct ScheduleEvent {
  EventKind kind = EventKind::kBatch;
  uint64_t batch_index = 0;
  size_t phase = 0;
  std::string interval;
  std::string target;
  std::map<std::string, uint64_t> counts;
  uint64_t samples = 0;
  double mean = 0.0;
  double next_mean = 0.0;

  bool operator==(const ScheduleEvent&) const = default;
};

// Streaming incremental multilingual schedule.  Trains the intervals in
// order; after every batch the untrained mean of the current interval is
// recomputed, and at the first boundary where it is not greater than the
// next interval's mean, the untrained samples move into the next interval,
// which is then reshuffled and its mean recomputed over the merged members.
// The last interval drains completely; its final batch may be short.
//
// Sampling within a phase is uniform over the untrained pool: each draw picks
// position r = rng.below(untrained) in the pool laid out member by member in
// direction order.  Each phase draws from Rng(seed, "schedule:phase:<i>").
class Scheduler {
 public:
  // `intervals` must be sorted non-increasing by mean (see interval_means);
  // means are recomputed here.  Throws UsageError on unsorted input, a zero
  // batch size, or a direction listed twice.
  Scheduler(std::vector<Interval> intervals, uint64_t batch_size, uint64_t seed);

  // Next event, or nullopt after the done event.
  std::optional<ScheduleEvent> next();

 private:
  enum class Step { kStart, kRun, kFinished };

  Mean untrained_mean() const;
  void begin_phase();
  ScheduleEvent draw_batch();
  ScheduleEvent merge_into_next();
  size_t find_member(uint64_t position) const;
  void fenwick_add(size_t index, int64_t delta);

  std::vector<Interval> intervals_;
  uint64_t batch_size_;
  uint64_t seed_;
  size_t phase_ = 0;
  Step step_ = Step::kStart;
  std::optional<Rng> rng_;
  std::vector<uint64_t> fenwick_;
  uint64_t untrained_ = 0;
  uint64_t batches_ = 0;
  uint64_t emitted_ = 0;
};

std::vector<ScheduleEvent> schedule(std::vector<Interval> intervals, uint64_t batch_size,
                                    uint64_t seed);

// JSON Lines trace, one event per line.
std::string to_json_line(const ScheduleEvent& event);
ScheduleEvent event_from_json_line(std::string_view line);
void write_trace(std::ostream& out, std::span<const ScheduleEvent> events);
std::vector<ScheduleEvent> read_trace(std::istream& in);

struct MergeExposure {
  uint64_t batch_index = 0;
  std::string from;
  std::string to;
  uint64_t moved = 0;
};

struct DirectionExposure {
  uint64_t declared = 0;
  uint64_t consumed = 0;
  std::optional<uint64_t> first_batch;
  std::optional<uint64_t> last_batch;
  std::vector<MergeExposure> merges;
};

struct ExposureTable {
  std::map<std::string, DirectionExposure> directions;
  uint64_t batches = 0;
  uint64_t samples = 0;
};

// Replays a trace as a trainer would consume it.  Throws DataError if the
// trace is malformed: out-of-order batch indices, batches outside a phase,
// directions consuming more than declared, or a done event whose totals
// disagree with the batches.
ExposureTable simulate_exposure(std::span<const ScheduleEvent> events);
std::string exposure_to_tsv(const ExposureTable& table);

// Reads bucket totals from {"buckets": {"en-ro": 12, ...}} or
// {"directions": {"en-ro": {"samples": 12, ...}, ...}}.
std::vector<PairBucket> load_buckets(const std::filesystem::path& path);
std::string buckets_to_json(std::span<const PairBucket> buckets);
std::string intervals_to_json(std::span<const Interval> intervals,
                              std::span<const Direction> excluded);

}  // namespace mtdata
