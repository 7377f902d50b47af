#pragma once

// Online history-based timetable: for every (task type, STA key) the model
// keeps one cost cell per resource partition of the layout. A cell is either
// unexplored or holds the parallel cost (leader time x width) observed there.

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moldsched/topology.hpp"

namespace moldsched {

using TypeId = std::uint32_t;

struct ModelKey {
  TypeId type = 0;
  std::uint64_t sta_key = 0;

  friend auto operator<=>(const ModelKey&, const ModelKey&) = default;
};

struct CostCell {
  bool measured = false;
  double cost = 0.0;
};

/// One row of an injected or dumped cost table.
struct CostEntry {
  ModelKey key;
  ResourcePartition partition;
  double cost = 0.0;
};

class PerfModel {
 public:
  PerfModel(const Layout& layout, int key_bits, double alpha = 0.5);

  PerfModel(const PerfModel&) = delete;
  PerfModel& operator=(const PerfModel&) = delete;

  /// Allocates tables for type ids [0, count). Must not race with readers.
  void ensure_types(std::size_t count);
  std::size_t type_count() const noexcept { return tables_.size(); }

  /// Folds one observation into the cell: cost = alpha * sample + (1 - alpha)
  /// * old, where sample = leader_time * width and alpha = 1 for the first
  /// sample. Non-positive or non-finite times are rejected and counted;
  /// the return value is then the unchanged cell cost (0 if unexplored).
  double record(const ModelKey& key, const ResourcePartition& part, double leader_time);

  /// Unexplored candidates first, smallest width (then leader) among them;
  /// otherwise the cheapest measured candidate, ties to smaller width, then
  /// smaller leader.
  ResourcePartition min_cost_partition(const ModelKey& key,
                                       std::span<const ResourcePartition> candidates) const;

  ResourcePartition global_min_partition(const ModelKey& key) const;

  /// Overwrites cells as measured. All partitions are validated first.
  void inject_costs(const ModelKey& key, const std::map<ResourcePartition, double>& costs);
  void inject(std::span<const CostEntry> entries);

  CostCell cell(const ModelKey& key, const ResourcePartition& part) const;

  std::uint64_t rejected_samples() const noexcept {
    return rejected_.load(std::memory_order_relaxed);
  }
  double alpha() const noexcept { return alpha_; }
  int key_bits() const noexcept { return key_bits_; }
  const Layout& layout() const noexcept { return layout_; }

  /// Full timetable as CSV: type_id,sta_key,leader,width,state,cost.
  /// Only keys with at least one measured cell are listed.
  void write_csv(std::ostream& os) const;

 private:
  std::atomic<double>* row(const ModelKey& key) const;
  std::size_t slot(const ResourcePartition& part) const;

  const Layout& layout_;
  int key_bits_;
  std::uint64_t keys_per_type_;
  std::size_t parts_;
  double alpha_;
  // 0.0 marks an unexplored cell; measured costs are strictly positive.
  std::vector<std::unique_ptr<std::atomic<double>[]>> tables_;
  mutable std::atomic<std::uint64_t> rejected_{0};
};

/// Parses cost rows "type_id,sta_key,leader,width,cost" (header optional,
/// an extra state column as written by `write_csv` is accepted).
std::vector<CostEntry> parse_cost_csv(std::string_view text);

}  // namespace moldsched
