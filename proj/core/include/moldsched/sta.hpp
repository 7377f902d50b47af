#pragma once

// Software topology addresses: integer keys derived from where a task's data
// lives, used both to pick the task's initial worker and to index its cost
// model.

#include <cstdint>
#include <variant>
#include <vector>

namespace moldsched {

/// Point in a d-dimensional unit box; every coordinate in [0, 1]. The value
/// 1.0 is clamped into the last quantization cell.
struct CartesianLocation {
  std::vector<double> coords;
};

/// Block (row, col) of a 2^level x 2^level block grid.
struct MatrixBlockLocation {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::uint32_t level = 0;
};

/// Node position inside an a-priori known DAG. Depth does not enter the key;
/// callers fold it into the task type when depths must not share a model.
struct DagLocation {
  std::uint32_t depth = 0;
  std::uint64_t breadth_index = 0;
  std::uint64_t breadth_count = 1;
};

using LogicalLocation =
    std::variant<CartesianLocation, MatrixBlockLocation, DagLocation>;

/// Bits of key space for `worker_count` workers: ceil(log2(4 * workers)).
int max_bits(int worker_count);

/// Space-filling (Morton) order of `loc` within a `bits`-bit key space.
std::uint64_t sfo_encode(const LogicalLocation& loc, int bits);

/// Morton interleave of already-quantized cell coordinates, `bits_per_dim`
/// bits each; dimension 0 takes the most significant bit of every group.
std::uint64_t morton_interleave(const std::vector<std::uint64_t>& cells,
                                int bits_per_dim);

/// key / 2^bits. Exact for bits <= 53.
double relative_loc(std::uint64_t key, int bits);

/// floor(relative_loc * worker_count), clamped below worker_count.
int initial_worker(double relative_loc, int worker_count);

/// Integer form of initial_worker(relative_loc(key, bits), workers) that stays
/// exact for every key.
int initial_worker(std::uint64_t key, int bits, int worker_count);

struct Sta {
  std::uint64_t key = 0;
  int bits = 2;
  int initial_worker = 0;

  double relative_loc() const { return moldsched::relative_loc(key, bits); }

  /// Validates `key` against the key space of `worker_count` workers.
  static Sta from_key(std::uint64_t key, int worker_count);
  static Sta from_location(const LogicalLocation& loc, int worker_count);

  friend bool operator==(const Sta&, const Sta&) = default;
};

}  // namespace moldsched
