#pragma once

// Per-worker queues.
//
// StealingQueue holds whole ready tasks. The owner works at the back (LIFO);
// thieves take from the front. Any thread may push, because newly ready
// successors are routed to the worker their STA maps to, which is usually not
// the thread that released them. Every operation is linearizable (one short
// critical section each). `steal_if` evaluates the caller's predicate on the
// front task and removes exactly that task, so a gated steal can never take a
// task it did not inspect.
//
// SharingQueue holds pieces of already-scheduled moldable tasks. Any worker
// may push; only the owner pops.
//
// Entries carry a ready time. The threaded executor always reads with an
// infinite horizon; the virtual-time executor hides entries that become
// ready after the reading worker's clock.

#include <atomic>
#include <cstddef>
#include <deque>
#include <limits>
#include <mutex>
#include <optional>

namespace moldsched {

class Task;

inline constexpr double kNoHorizon = std::numeric_limits<double>::infinity();

class StealingQueue {
 public:
  void push(Task* task, double ready_at = 0.0);

  /// Owner end: most recently pushed visible task.
  Task* pop(double horizon = kNoHorizon);

  /// Thief end: oldest visible task.
  Task* steal(double horizon = kNoHorizon);

  /// Oldest visible task, not removed. The pointer stays valid (tasks are
  /// owned by their DAG) but may already have been taken by someone else.
  Task* peek(double horizon = kNoHorizon) const;

  /// Removes and returns the oldest visible task only if `pred(task)` holds.
  template <typename Pred>
  Task* steal_if(Pred&& pred, double horizon = kNoHorizon) {
    std::lock_guard lock(mu_);
    const auto it = front_visible(horizon);
    if (it == items_.end() || !pred(it->task)) return nullptr;
    Task* t = it->task;
    items_.erase(it);
    size_.fetch_sub(1, std::memory_order_relaxed);
    return t;
  }

  /// Smallest ready time strictly after `t`; +inf when there is none.
  double next_ready_after(double t) const;

  bool empty() const noexcept { return size() == 0; }
  std::size_t size() const noexcept { return size_.load(std::memory_order_relaxed); }

 private:
  struct Entry {
    Task* task;
    double ready_at;
  };
  using Items = std::deque<Entry>;

  Items::iterator front_visible(double horizon);
  Items::const_iterator front_visible(double horizon) const;

  mutable std::mutex mu_;
  Items items_;
  std::atomic<std::size_t> size_{0};
};

struct Piece {
  Task* task = nullptr;
  int index = 0;
  double enqueued_at = 0.0;
};

class SharingQueue {
 public:
  void push(const Piece& piece);
  std::optional<Piece> pop();

  bool empty() const noexcept { return size() == 0; }
  std::size_t size() const noexcept { return size_.load(std::memory_order_relaxed); }

 private:
  std::mutex mu_;
  std::deque<Piece> items_;
  std::atomic<std::size_t> size_{0};
};

}  // namespace moldsched
