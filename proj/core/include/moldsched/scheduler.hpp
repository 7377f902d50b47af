#pragma once

// Scheduling policies driving the runtime one decision at a time.
//
// A step for worker w under the adaptive policies:
//   1. run one piece from w's sharing queue;
//   2. else pop w's own stealing queue and place the task on the cheapest
//      partition that contains w;
//   3. else steal from the workers sharing a partition with w (round-robin)
//      and place the same way;
//   4. else look at one random worker outside that set. Once w has been
//      rejected `idle_tries` times it takes the task unconditionally;
//      before that it takes it only if w belongs to the task's globally
//      cheapest partition, and runs it there.
// Random stealing: own queue, else one uniformly random victim; width 1.

#include <optional>
#include <span>
#include <vector>

#include "moldsched/runtime.hpp"

namespace moldsched {

class Scheduler {
 public:
  explicit Scheduler(Runtime& rt);

  /// One scheduling step for worker `w`. Returns false when the worker found
  /// nothing to do.
  bool step(int w);

  /// Workers sharing some partition with `w`, minus `w`, in the order they
  /// are probed: ascending ids rotated to start at (w + 1) mod set size.
  std::span<const int> local_probe_order(int w) const;

  /// Workers w may steal from in the non-local phase.
  std::span<const int> remote_victims(int w) const;

  /// First task stolen from the local probe order, or nullptr.
  Task* select_local_steal_victim(int w);

  /// Cheapest partition containing `w` for `task`; (w, 1) when width is
  /// pinned to one.
  ResourcePartition place_local(int w, const Task& task) const;

  /// Cheapest partition anywhere for `task` (width-1 partitions only when
  /// width is pinned to one).
  ResourcePartition place_global(const Task& task) const;

  Runtime& runtime() noexcept { return rt_; }

 private:
  bool adaptive_step(int w);
  bool random_step(int w);
  bool width_pinned(const Task& task) const;
  void run_task(int w, Task& task, const ResourcePartition& part);

  Runtime& rt_;
  std::vector<std::vector<int>> probe_;
  std::vector<std::vector<int>> remote_;
  std::vector<std::vector<ResourcePartition>> single_;  // {(w, 1)}
  std::vector<ResourcePartition> all_single_;
};

}  // namespace moldsched
