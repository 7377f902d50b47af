#pragma once

// Executors own the worker loop. ThreadedExecutor runs one OS thread per
// worker against the wall clock. VirtualExecutor runs every worker on the
// calling thread in virtual time: the worker with the smallest clock always
// steps next (at equal clocks, workers holding work of their own first, then
// the lower index), so a run is a pure function of the DAG, the
// configuration and the duration model.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "moldsched/runtime.hpp"
#include "moldsched/scheduler.hpp"

namespace moldsched {

struct RunStats {
  double elapsed = 0.0;
  std::uint64_t tasks_executed = 0;
  int iterations = 0;
};

struct ThreadedOptions {
  bool pin = true;
  /// Nonzero: every step is preceded by a random yield or short sleep drawn
  /// from this seed, to shake out interleavings.
  std::uint64_t stress_seed = 0;
};

class ThreadedExecutor {
 public:
  explicit ThreadedExecutor(Runtime& rt, ThreadedOptions options = {});

  /// Runs all iterations of `dag`. Rethrows the first failure of a work
  /// function or of the runtime after the workers have stopped.
  RunStats run(Dag& dag);

 private:
  Runtime& rt_;
  Scheduler sched_;
  ThreadedOptions options_;
};

/// Virtual seconds one piece takes.
using DurationModel = std::function<double(const Task&, const PieceContext&)>;

/// Piece time for a task of `task_seconds` sequential work over a working set
/// of `working_set` bytes: task_seconds / width plus a fixed per-piece
/// overhead. The compute part is divided by `cache_speedup` when the
/// per-piece working set fits in `cache_bytes` and the worker's previous
/// piece had the same key, i.e. its data is still cached. The returned model
/// keeps that per-worker history, so it is not thread-safe.
struct AnalyticCosts {
  double task_seconds = 1e-3;
  double working_set = 0.0;
  double cache_bytes = 0.0;
  double cache_speedup = 1.0;
  double piece_overhead = 0.0;
};
DurationModel analytic_durations(AnalyticCosts costs);

/// Piece time = parallel cost / width, looked up per (key, partition); keys
/// or partitions without an entry fall back to `fallback` per piece.
DurationModel table_durations(std::map<ModelKey, std::map<ResourcePartition, double>> costs,
                              double fallback = 1.0);

class VirtualClock final : public TimeSource {
 public:
  VirtualClock(int workers, DurationModel durations, bool execute_work = true);

  double now(int worker) override { return clocks_.at(static_cast<std::size_t>(worker)); }
  double horizon(int worker) override { return now(worker); }
  void on_acquire(int worker, double ready_at) override;
  Interval run_piece(int worker, const Task& task, const Piece& piece, const PieceContext& ctx,
                     const WorkFunction& work) override;

  void advance_to(int worker, double t);
  void reset();
  std::span<const double> clocks() const noexcept { return clocks_; }

 private:
  std::vector<double> clocks_;
  DurationModel durations_;
  bool execute_work_;
};

struct VirtualOptions {
  /// Smallest idle advance; keeps a lone idle worker moving.
  double idle_quantum = 1e-7;
  /// Consecutive idle steps after which the run is declared stuck.
  std::uint64_t stall_limit = 50'000'000;
};

class VirtualExecutor {
 public:
  VirtualExecutor(Runtime& rt, DurationModel durations, bool execute_work = true,
                  VirtualOptions options = {});
  ~VirtualExecutor();
  VirtualExecutor(const VirtualExecutor&) = delete;
  VirtualExecutor& operator=(const VirtualExecutor&) = delete;

  /// Runs all iterations of `dag`; elapsed is the virtual makespan.
  RunStats run(Dag& dag);

  VirtualClock& clock() noexcept { return clock_; }
  Scheduler& scheduler() noexcept { return sched_; }

 private:
  double next_event(int w) const;
  int next_worker() const;

  Runtime& rt_;
  Scheduler sched_;
  VirtualClock clock_;
  VirtualOptions options_;
};

}  // namespace moldsched
