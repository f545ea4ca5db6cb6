#include "mtdata/scheduler.h"

#include <algorithm>
#include <set>

#include "mtdata/error.h"

namespace mtdata {

int compare(const Mean& a, const Mean& b) {
  using u128 = unsigned __int128;
  const u128 lhs = static_cast<u128>(a.sum) * b.count;
  const u128 rhs = static_cast<u128>(b.sum) * a.count;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

std::string Interval::label() const {
  return "[" + std::to_string(lo) + "," + std::to_string(hi) + ")";
}

Partition partition_intervals(std::span<const PairBucket> buckets, const IntervalConfig& config) {
  if (config.s_high == 0 || config.s_low == 0 || config.cutover == 0) {
    throw UsageError("interval sizes and cutover must be positive");
  }
  std::map<std::pair<uint64_t, uint64_t>, Interval> by_bounds;
  Partition out;
  for (const auto& b : buckets) {
    if (b.total_samples == 0) {
      out.excluded.push_back(b.direction);
      continue;
    }
    const uint64_t width = b.total_samples >= config.cutover ? config.s_high : config.s_low;
    const uint64_t lo = b.total_samples / width * width;
    auto& interval = by_bounds[{lo, lo + width}];
    interval.lo = lo;
    interval.hi = lo + width;
    interval.members.push_back({b.direction, b.total_samples, b.total_samples});
  }
  for (auto& [bounds, interval] : by_bounds) {
    std::sort(interval.members.begin(), interval.members.end(),
              [](const auto& a, const auto& b) { return a.direction < b.direction; });
    out.intervals.push_back(std::move(interval));
  }
  std::sort(out.excluded.begin(), out.excluded.end());
  return out;
}

std::vector<Interval> interval_means(std::vector<Interval> intervals) {
  if (intervals.empty()) throw DataError("interval_means: no intervals");
  for (auto& interval : intervals) {
    if (interval.members.empty()) {
      throw DataError("interval_means: interval " + interval.label() + " has no members");
    }
    interval.mean = Mean{0, interval.members.size()};
    for (const auto& m : interval.members) interval.mean.sum += m.total_samples;
  }
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    if (int c = compare(a.mean, b.mean); c != 0) return c > 0;
    if (a.lo != b.lo) return a.lo > b.lo;
    return a.members.front().direction < b.members.front().direction;
  });
  return intervals;
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kIntervalStart: return "interval_start";
    case EventKind::kBatch: return "batch";
    case EventKind::kMerge: return "merge";
    case EventKind::kDone: return "done";
  }
  return "batch";
}

Scheduler::Scheduler(std::vector<Interval> intervals, uint64_t batch_size, uint64_t seed)
    : intervals_(std::move(intervals)), batch_size_(batch_size), seed_(seed) {
  if (batch_size_ == 0) throw UsageError("batch size must be positive");
  std::set<Direction> seen;
  for (auto& interval : intervals_) {
    if (interval.members.empty()) {
      throw UsageError("interval " + interval.label() + " has no members");
    }
    std::sort(interval.members.begin(), interval.members.end(),
              [](const auto& a, const auto& b) { return a.direction < b.direction; });
    interval.mean = Mean{0, interval.members.size()};
    for (const auto& m : interval.members) {
      if (m.remaining_samples > m.total_samples) {
        throw UsageError(m.direction.str() + ": remaining exceeds total");
      }
      if (!seen.insert(m.direction).second) {
        throw UsageError(m.direction.str() + " appears in more than one interval");
      }
      interval.mean.sum += m.remaining_samples;
    }
  }
  for (size_t i = 1; i < intervals_.size(); ++i) {
    if (compare(intervals_[i - 1].mean, intervals_[i].mean) < 0) {
      throw UsageError("intervals must be sorted in descending order of mean");
    }
  }
  if (intervals_.empty()) step_ = Step::kFinished;
}

Mean Scheduler::untrained_mean() const {
  return Mean{untrained_, intervals_[phase_].members.size()};
}

void Scheduler::fenwick_add(size_t index, int64_t delta) {
  for (size_t i = index + 1; i < fenwick_.size(); i += i & (~i + 1)) {
    fenwick_[i] = static_cast<uint64_t>(static_cast<int64_t>(fenwick_[i]) + delta);
  }
}

// Smallest member index whose cumulative untrained count exceeds `position`.
size_t Scheduler::find_member(uint64_t position) const {
  size_t idx = 0;
  size_t step = 1;
  while (step * 2 < fenwick_.size()) step *= 2;
  for (; step > 0; step /= 2) {
    if (idx + step < fenwick_.size() && fenwick_[idx + step] <= position) {
      idx += step;
      position -= fenwick_[idx];
    }
  }
  return idx;
}

void Scheduler::begin_phase() {
  const auto& members = intervals_[phase_].members;
  fenwick_.assign(members.size() + 1, 0);
  untrained_ = 0;
  for (size_t i = 0; i < members.size(); ++i) {
    fenwick_add(i, static_cast<int64_t>(members[i].remaining_samples));
    untrained_ += members[i].remaining_samples;
  }
  rng_.emplace(seed_, "schedule:phase:" + std::to_string(phase_));
}

ScheduleEvent Scheduler::draw_batch() {
  auto& interval = intervals_[phase_];
  ScheduleEvent ev;
  ev.kind = EventKind::kBatch;
  ev.batch_index = batches_++;
  ev.phase = phase_;
  ev.interval = interval.label();
  const uint64_t take = std::min(batch_size_, untrained_);
  for (uint64_t k = 0; k < take; ++k) {
    const size_t m = find_member(rng_->below(untrained_));
    fenwick_add(m, -1);
    --interval.members[m].remaining_samples;
    --untrained_;
    ++ev.counts[interval.members[m].direction.str()];
  }
  emitted_ += take;
  ev.samples = take;
  ev.mean = untrained_mean().value();
  return ev;
}

ScheduleEvent Scheduler::merge_into_next() {
  auto& donor = intervals_[phase_];
  auto& receiver = intervals_[phase_ + 1];
  ScheduleEvent ev;
  ev.kind = EventKind::kMerge;
  ev.batch_index = batches_;
  ev.phase = phase_;
  ev.interval = donor.label();
  ev.target = receiver.label();
  ev.samples = untrained_;
  ev.mean = untrained_mean().value();
  ev.next_mean = receiver.mean.value();

  // Only directions with untrained samples join the next interval.
  for (auto& m : donor.members) {
    if (m.remaining_samples == 0) continue;
    ev.counts[m.direction.str()] = m.remaining_samples;
    receiver.members.push_back(m);
  }
  std::sort(receiver.members.begin(), receiver.members.end(),
            [](const auto& a, const auto& b) { return a.direction < b.direction; });
  receiver.mean = Mean{0, receiver.members.size()};
  for (const auto& m : receiver.members) receiver.mean.sum += m.remaining_samples;
  donor.members.clear();
  ++phase_;
  return ev;
}

std::optional<ScheduleEvent> Scheduler::next() {
  switch (step_) {
    case Step::kFinished:
      return std::nullopt;

    case Step::kStart: {
      begin_phase();
      const auto& interval = intervals_[phase_];
      ScheduleEvent ev;
      ev.kind = EventKind::kIntervalStart;
      ev.batch_index = batches_;
      ev.phase = phase_;
      ev.interval = interval.label();
      ev.samples = untrained_;
      ev.mean = untrained_mean().value();
      for (const auto& m : interval.members) ev.counts[m.direction.str()] = m.remaining_samples;
      step_ = Step::kRun;
      return ev;
    }

    case Step::kRun: {
      const bool last = phase_ + 1 == intervals_.size();
      if (!last && compare(untrained_mean(), intervals_[phase_ + 1].mean) <= 0) {
        step_ = Step::kStart;
        return merge_into_next();
      }
      if (last && untrained_ == 0) {
        step_ = Step::kFinished;
        ScheduleEvent ev;
        ev.kind = EventKind::kDone;
        ev.batch_index = batches_;
        ev.samples = emitted_;
        return ev;
      }
      return draw_batch();
    }
  }
  return std::nullopt;
}

std::vector<ScheduleEvent> schedule(std::vector<Interval> intervals, uint64_t batch_size,
                                    uint64_t seed) {
  Scheduler scheduler(std::move(intervals), batch_size, seed);
  std::vector<ScheduleEvent> events;
  while (auto ev = scheduler.next()) events.push_back(std::move(*ev));
  return events;
}

}  // namespace mtdata
