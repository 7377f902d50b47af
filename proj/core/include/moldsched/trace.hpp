#pragma once

// Scheduling traces: every dispatch decision, the per-key schedule map built
// from them, and the width-percentage table across DAG parallelisms.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moldsched/perf_model.hpp"
#include "moldsched/topology.hpp"

namespace moldsched {

/// One dispatch: `worker` decided to run the task keyed by (type, sta_key)
/// on `partition` at `time` (seconds since run start; virtual seconds under
/// the virtual-time executor). `seq` orders decisions within a run.
struct Decision {
  std::uint64_t seq = 0;
  double time = 0.0;
  int worker = 0;
  TypeId type = 0;
  std::uint64_t sta_key = 0;
  ResourcePartition partition;
};

struct ScheduleTrace {
  using Histogram = std::map<ResourcePartition, std::uint64_t>;

  std::map<ModelKey, Histogram> frequencies;
  double elapsed = 0.0;
  std::uint64_t task_count = 0;
  int parallelism = 0;

  static ScheduleTrace from_decisions(std::span<const Decision> decisions);

  std::uint64_t total() const;

  /// Percentage of all decisions per width.
  std::map<int, double> width_percentages() const;

  friend bool operator==(const ScheduleTrace& a, const ScheduleTrace& b) {
    return a.frequencies == b.frequencies;
  }
};

/// Width percentages after dropping the first `skip_per_key` decisions of
/// every key (by seq).
std::map<int, double> width_percentages(std::span<const Decision> decisions,
                                        std::size_t skip_per_key = 0);

/// CSV "type_id,sta_key,leader,width,count", sorted by key then partition.
std::string emit_schedule_map(const ScheduleTrace& trace);
ScheduleTrace parse_schedule_map(std::string_view csv);

/// CSV "seq,time,worker,type_id,sta_key,leader,width" in seq order.
std::string emit_decision_log(std::span<const Decision> decisions);

/// Rows are widths, columns are the runs' parallelism values, cells are the
/// percentage of decisions at that width. Every run must have the same task
/// count; throws std::invalid_argument otherwise.
std::string emit_width_table(std::span<const ScheduleTrace> runs);

}  // namespace moldsched
