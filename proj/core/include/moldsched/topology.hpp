#pragma once

// Resource layout: which hardware thread each logical worker is pinned to and
// which aligned, contiguous worker groups (resource partitions) each worker
// may lead.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace moldsched {

/// A contiguous group of workers {leader, ..., leader + width - 1}.
struct ResourcePartition {
  int leader = 0;
  int width = 1;

  constexpr bool contains(int worker) const noexcept {
    return worker >= leader && worker < leader + width;
  }
  constexpr int last() const noexcept { return leader + width - 1; }

  friend constexpr auto operator<=>(const ResourcePartition&,
                                    const ResourcePartition&) = default;
};

std::ostream& operator<<(std::ostream& os, const ResourcePartition& p);
std::string to_string(const ResourcePartition& p);

/// Raised for malformed or inconsistent layout descriptions. `line()` is the
/// 1-based line of the offending entry, or 0 when the problem is global.
class LayoutError : public std::runtime_error {
 public:
  LayoutError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parsed layout description. Immutable once built; safe for concurrent
/// reads.
///
/// Text format: line 1 lists the hardware thread id of every worker, line
/// k + 1 lists the widths worker k - 1 may lead. All values are
/// comma-separated integers; blank lines and comments are rejected.
class Layout {
 public:
  /// Parses and validates a layout description.
  static Layout parse(std::string_view text);
  static Layout load(const std::filesystem::path& path);

  /// Builds a layout from explicit tables, applying the same validation as
  /// `parse`. Width lists are sorted and deduplicated.
  static Layout from_tables(std::vector<int> affinities,
                            std::vector<std::vector<int>> widths_per_leader);

  /// Layout with `workers` workers mapped to hardware threads 0..n-1 where
  /// every aligned power-of-two block up to `max_width` is a partition.
  static Layout power_of_two(int workers, int max_width);

  int worker_count() const noexcept { return static_cast<int>(affinities_.size()); }
  std::span<const int> affinities() const noexcept { return affinities_; }
  std::span<const int> widths(int leader) const;

  bool is_legal(const ResourcePartition& p) const noexcept;

  /// Every partition containing `worker`, ascending by width.
  std::span<const ResourcePartition> inclusive_partitions(int worker) const;

  /// Every legal partition, leader-major then width-ascending.
  std::span<const ResourcePartition> all_partitions() const noexcept {
    return all_;
  }

  /// Dense index of `p` into `all_partitions()`; -1 when illegal.
  int partition_index(const ResourcePartition& p) const noexcept;

  std::size_t partition_count() const noexcept { return all_.size(); }

  /// Canonical text form; `parse(serialize())` reproduces this layout.
  std::string serialize() const;

  friend bool operator==(const Layout& a, const Layout& b) {
    return a.affinities_ == b.affinities_ && a.widths_ == b.widths_;
  }

 private:
  Layout(std::vector<int> affinities, std::vector<std::vector<int>> widths);
  static void validate(const std::vector<int>& affinities,
                       const std::vector<std::vector<int>>& widths,
                       bool with_lines);

  std::vector<int> affinities_;
  std::vector<std::vector<int>> widths_;
  std::vector<ResourcePartition> all_;
  std::vector<int> first_index_;  // all_ offset of each leader's partitions
  std::vector<std::vector<ResourcePartition>> inclusive_;
};

}  // namespace moldsched
