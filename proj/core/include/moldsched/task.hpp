#pragma once

// Task graph data: registered task types, tasks with SPMD work functions and
// dependency counters, and the DAG container that owns them.

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "moldsched/perf_model.hpp"
#include "moldsched/sta.hpp"
#include "moldsched/topology.hpp"

namespace moldsched {

/// Dense ids for task work functions: the first name registered gets 0.
class TaskTypeRegistry {
 public:
  TypeId register_type(std::string_view name);

  /// Type id for `name` specialised to a DAG depth ("name@depth"), so nodes at
  /// different depths keep separate cost models.
  TypeId register_type_at_depth(std::string_view name, std::uint32_t depth);

  std::size_t size() const;
  std::string name(TypeId id) const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, TypeId> ids_;
  std::vector<std::string> names_;
};

/// What a piece of a moldable task sees: its index in [0, width) and the
/// partition the task was dispatched to. Piece i always runs on worker
/// partition.leader + i.
struct PieceContext {
  int index = 0;
  int width = 1;
  ResourcePartition partition;
  int worker = 0;
};

/// [begin, end) slice of `n` items owned by piece `index` of `width`.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};
IndexRange piece_range(int index, int width, std::size_t n);

using WorkFunction = std::function<void(const PieceContext&)>;

enum class EdgeKind { kData, kExecution };

using TaskId = std::uint32_t;

class Runtime;
class Dag;

class Task {
 public:
  Task(TaskId id, TypeId type, Sta sta, WorkFunction work, bool moldable);
  Task(const Task&) = delete;
  Task& operator=(const Task&) = delete;

  TaskId id() const noexcept { return id_; }
  TypeId type() const noexcept { return type_; }
  const Sta& sta() const noexcept { return sta_; }
  ModelKey model_key() const noexcept { return {type_, sta_.key}; }
  bool moldable() const noexcept { return moldable_; }

  std::span<Task* const> successors() const noexcept { return successors_; }
  int predecessor_count() const noexcept { return predecessors_; }
  int deps_remaining() const noexcept { return deps_.load(std::memory_order_acquire); }
  int pending_pieces() const noexcept { return pending_.load(std::memory_order_acquire); }

  /// Partition of the most recent dispatch (valid once dispatched).
  ResourcePartition assigned_partition() const noexcept { return assigned_; }

  /// Completed executions since the DAG was created (all pieces finished).
  int executions() const noexcept { return executions_.load(std::memory_order_acquire); }
  /// Pieces executed since the DAG was created.
  int piece_executions() const noexcept {
    return piece_runs_.load(std::memory_order_acquire);
  }

 private:
  friend class Runtime;
  friend class Dag;

  enum State : int { kIdle, kWaiting, kParked, kQueued, kDispatched, kDone };

  TaskId id_;
  TypeId type_;
  Sta sta_;
  WorkFunction work_;
  bool moldable_;

  std::vector<Task*> successors_;
  int predecessors_ = 0;

  std::atomic<int> state_{kIdle};
  std::atomic<int> deps_{0};
  std::atomic<int> pending_{0};
  ResourcePartition assigned_{};
  std::unique_ptr<std::atomic<bool>[]> piece_done_;
  int piece_capacity_ = 0;
  double dispatched_at_ = 0.0;
  std::atomic<double> leader_start_{0.0};
  std::atomic<double> leader_end_{0.0};
  std::atomic<double> last_end_{0.0};
  double ready_at_ = 0.0;
  std::atomic<int> executions_{0};
  std::atomic<int> piece_runs_{0};
};

/// Owns the tasks of one DAG. Edges must point from an earlier-added task to
/// a later-added one, which keeps every DAG acyclic by construction.
/// `iterations` > 1 replays the whole DAG, re-arming the counters between
/// rounds.
class Dag {
 public:
  Dag() = default;
  Dag(const Dag&) = delete;
  Dag& operator=(const Dag&) = delete;
  Dag(Dag&&) = default;
  Dag& operator=(Dag&&) = default;

  Task& add_task(TypeId type, Sta sta, WorkFunction work, bool moldable = true);
  void add_edge(Task& from, Task& to, EdgeKind kind = EdgeKind::kData);

  std::size_t size() const noexcept { return tasks_.size(); }
  Task& task(std::size_t i) { return tasks_.at(i); }
  const Task& task(std::size_t i) const { return tasks_.at(i); }

  std::vector<Task*> roots();

  std::size_t edge_count(EdgeKind kind) const noexcept {
    return kind == EdgeKind::kData ? data_edges_ : execution_edges_;
  }

  int iterations() const noexcept { return iterations_; }
  void set_iterations(int n);

  auto begin() { return tasks_.begin(); }
  auto end() { return tasks_.end(); }
  auto begin() const { return tasks_.begin(); }
  auto end() const { return tasks_.end(); }

 private:
  std::deque<Task> tasks_;
  std::size_t data_edges_ = 0;
  std::size_t execution_edges_ = 0;
  int iterations_ = 1;
};

}  // namespace moldsched
