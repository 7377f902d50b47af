#pragma once

// Runtime core: per-worker queues, readiness tracking, moldable dispatch and
// the completion protocol that feeds the cost model. Policies (scheduler.hpp)
// decide *what* to run where; executors (executor.hpp) decide *when* each
// worker gets to make a decision.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <vector>

#include "moldsched/config.hpp"
#include "moldsched/perf_model.hpp"
#include "moldsched/queues.hpp"
#include "moldsched/sta.hpp"
#include "moldsched/task.hpp"
#include "moldsched/topology.hpp"
#include "moldsched/trace.hpp"

namespace moldsched {

/// Source of timestamps for decisions and piece execution.
class TimeSource {
 public:
  struct Interval {
    double start = 0.0;
    double end = 0.0;
  };

  virtual ~TimeSource() = default;

  virtual double now(int worker) = 0;

  /// Latest ready time `worker` may observe in the queues.
  virtual double horizon(int /*worker*/) { return kNoHorizon; }

  /// `worker` took ownership of a task that became ready at `ready_at`.
  virtual void on_acquire(int /*worker*/, double /*ready_at*/) {}

  /// Executes one piece on `worker` and reports when it ran.
  virtual Interval run_piece(int worker, const Task& task, const Piece& piece,
                             const PieceContext& ctx, const WorkFunction& work) = 0;
};

/// Monotonic wall clock; seconds since `reset()`.
class WallClock final : public TimeSource {
 public:
  WallClock() { reset(); }
  void reset() { epoch_ = std::chrono::steady_clock::now(); }
  double now(int worker) override;
  Interval run_piece(int worker, const Task& task, const Piece& piece,
                     const PieceContext& ctx, const WorkFunction& work) override;

 private:
  std::chrono::steady_clock::time_point epoch_;
};

/// Sleep/wake handle for one worker thread.
class Parker {
 public:
  template <typename Rep, typename Period>
  void park_for(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [this] { return signaled_; });
    signaled_ = false;
  }
  void unpark() {
    {
      std::lock_guard lock(mu_);
      signaled_ = true;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool signaled_ = false;
};

struct WorkerStats {
  std::uint64_t pieces = 0;
  std::uint64_t local_pops = 0;
  std::uint64_t local_steals = 0;
  std::uint64_t global_steals = 0;
  std::uint64_t forced_steals = 0;
  std::uint64_t rejected_steals = 0;
};

struct WorkerState {
  explicit WorkerState(int idx, std::uint64_t seed) : index(idx), rng(seed) {}

  int index;
  StealingQueue stealing;
  SharingQueue sharing;
  int stealing_attempts = 0;
  std::mt19937_64 rng;
  std::vector<Decision> decisions;  // written only by this worker
  WorkerStats stats;
  Parker parker;
};

class Runtime {
 public:
  explicit Runtime(Layout layout, SchedulerConfig config = {});
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const Layout& layout() const noexcept { return layout_; }
  const SchedulerConfig& config() const noexcept { return config_; }
  int worker_count() const noexcept { return layout_.worker_count(); }
  int key_bits() const noexcept { return key_bits_; }

  TaskTypeRegistry& types() noexcept { return types_; }
  PerfModel& model() noexcept { return model_; }
  const PerfModel& model() const noexcept { return model_; }
  WorkerState& worker(int w) { return *workers_.at(static_cast<std::size_t>(w)); }
  const WorkerState& worker(int w) const { return *workers_.at(static_cast<std::size_t>(w)); }

  Sta make_sta(std::uint64_t key) const { return Sta::from_key(key, worker_count()); }
  Sta make_sta(const LogicalLocation& loc) const {
    return Sta::from_location(loc, worker_count());
  }

  /// Installs a time source; nullptr restores the wall clock.
  void set_time_source(TimeSource* source);
  TimeSource& time() noexcept { return *time_; }
  double now(int worker) { return time_->now(worker); }

  // --- iteration lifecycle (call only while no worker is stepping) ---

  /// Re-arms every task of `dag` for one round and sizes the cost model for
  /// all registered types.
  void prepare(Dag& dag);

  /// Submits a task of the prepared round. Ready tasks go to the stealing
  /// queue of their initial worker; tasks with unmet dependencies are parked
  /// until released. Throws std::logic_error on a duplicate spawn.
  void spawn(Task& task, double ready_at = 0.0);
  void spawn_roots(Dag& dag, double ready_at = 0.0);

  /// Tasks of the current round not yet completed.
  std::size_t remaining() const noexcept { return remaining_.load(std::memory_order_acquire); }

  bool round_done() const noexcept { return round_done_.load(std::memory_order_acquire) != 0; }

  /// Blocks until the current round completes or is aborted.
  void wait_round();

  /// Records `e` and releases everyone blocked in wait_round().
  void abort_round(std::exception_ptr e);

  // --- worker-side primitives ---

  /// Worker whose stealing queue receives `task` when it becomes ready.
  int route(const Task& task, std::mt19937_64& rng) const;

  /// Takes ownership of an acquired task (advances virtual clocks).
  void acquire(int worker, Task& task);

  /// Splits `task` into `part.width` pieces; piece i goes to the sharing
  /// queue of worker part.leader + i. Validates before enqueueing anything.
  void dispatch_moldable(Task& task, const ResourcePartition& part, int by_worker);

  /// Runs the oldest piece in `worker`'s sharing queue, if there is one.
  bool run_sharing(int worker);

  /// Marks piece `piece` finished. The last piece records the task's cost,
  /// releases successors to their own initial workers and retires the task.
  void complete_piece(Task& task, int piece, TimeSource::Interval when, int by_worker);

  void wake(int w) { worker(w).parker.unpark(); }

  // --- results ---

  std::vector<Decision> decisions() const;
  void clear_decisions();
  WorkerStats total_stats() const;

  /// First exception thrown by a work function, if any.
  std::exception_ptr failure() const;
  void record_failure(std::exception_ptr e);

 private:
  void release(Task& task, int by_worker, double ready_at);
  void finish(Task& task, int by_worker);
  void signal_round_done();

  Layout layout_;
  SchedulerConfig config_;
  int key_bits_;
  TaskTypeRegistry types_;
  PerfModel model_;
  std::vector<std::unique_ptr<WorkerState>> workers_;
  WallClock wall_;
  TimeSource* time_;
  std::mt19937_64 spawn_rng_;
  std::atomic<std::size_t> remaining_{0};
  std::atomic<int> round_done_{1};
  std::atomic<std::uint64_t> seq_{0};
  mutable std::mutex failure_mu_;
  std::exception_ptr failure_;
};

}  // namespace moldsched
