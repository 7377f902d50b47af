#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <moldsched/executor.hpp>
#include <moldsched/runtime.hpp>
#include <moldsched/topology.hpp>

namespace moldsched::testing {

// Eight workers on threads 0,2,4,8,1,3,5,7. Workers 0 and 4 lead widths
// 1,2,4; workers 2 and 6 lead 1,2; the rest lead 1 only.
inline constexpr const char* kEightWorkerLayout =
    "0,2,4,8,1,3,5,7\n1,2,4\n1\n1,2\n1\n1,2,4\n1\n1,2\n1";

inline constexpr const char* kFourWorkerLayout = "0,1,2,3\n1,2,4\n1\n1,2\n1";

Layout eight_worker_layout();
Layout four_worker_layout();

/// Random DAG whose work functions count piece runs and check that every
/// predecessor had already completed when a piece started.
class RandomDag {
 public:
  RandomDag(Runtime& rt, std::mt19937_64& rng, std::size_t max_tasks, double edge_prob);

  Dag& dag() noexcept { return dag_; }

  /// Empty when every task completed exactly once with every piece run once
  /// and no piece ran before its predecessors; a description otherwise.
  std::string check() const;

 private:
  Dag dag_;
  std::vector<std::vector<Task*>> preds_;
  std::unique_ptr<std::atomic<int>[]> order_violations_;
};

/// Decisions of `rt` as (worker, leader, width) triples, in seq order.
std::string decision_summary(const Runtime& rt);

/// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace moldsched::testing
