#include "moldsched/sta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace moldsched {

__extension__ using u128 = unsigned __int128;

int max_bits(int worker_count) {
  if (worker_count < 1) throw std::invalid_argument("max_bits: worker count must be >= 1");
  // ceil(log2(4 * n)) without floating point.
  const std::uint64_t slots = 4ULL * static_cast<std::uint64_t>(worker_count);
  int bits = 0;
  while ((1ULL << bits) < slots) ++bits;
  return bits;
}

std::uint64_t morton_interleave(const std::vector<std::uint64_t>& cells,
                                int bits_per_dim) {
  const auto d = static_cast<int>(cells.size());
  std::uint64_t key = 0;
  for (int bit = bits_per_dim - 1; bit >= 0; --bit) {
    for (int dim = 0; dim < d; ++dim) {
      key = (key << 1) | ((cells[static_cast<std::size_t>(dim)] >> bit) & 1ULL);
    }
  }
  return key;
}

namespace {

void check_bits(int bits) {
  if (bits < 1 || bits > 62) {
    throw std::invalid_argument("key space of " + std::to_string(bits) +
                                " bits is not supported");
  }
}

std::uint64_t quantize(double x, int bits_per_dim) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("coordinate outside [0, 1]");
  }
  const std::uint64_t cells = 1ULL << bits_per_dim;
  const auto q = static_cast<std::uint64_t>(std::floor(x * static_cast<double>(cells)));
  return std::min(q, cells - 1);
}

// Morton code of `cells` placed in the most significant bits of the key so
// that the relative location spans [0, 1) regardless of leftover bits.
std::uint64_t encode_cells(const std::vector<std::uint64_t>& cells, int bits_per_dim,
                           int bits) {
  const int used = bits_per_dim * static_cast<int>(cells.size());
  return morton_interleave(cells, bits_per_dim) << (bits - used);
}

struct Encoder {
  int bits;

  std::uint64_t operator()(const CartesianLocation& loc) const {
    const int d = static_cast<int>(loc.coords.size());
    if (d == 0) throw std::invalid_argument("Cartesian location has no coordinates");
    if (d > bits) throw std::invalid_argument("dimension exceeds key bits");
    const int per_dim = bits / d;
    std::vector<std::uint64_t> cells;
    cells.reserve(loc.coords.size());
    for (double x : loc.coords) cells.push_back(quantize(x, per_dim));
    return encode_cells(cells, per_dim, bits);
  }

  std::uint64_t operator()(const MatrixBlockLocation& loc) const {
    if (bits < 2) throw std::invalid_argument("matrix location needs >= 2 key bits");
    if (loc.level > 31) throw std::invalid_argument("matrix level too deep");
    const std::uint64_t extent = 1ULL << loc.level;
    if (loc.row >= extent || loc.col >= extent) {
      throw std::invalid_argument("matrix block index outside its level's grid");
    }
    const int per_dim = bits / 2;
    std::vector<std::uint64_t> cells{loc.row, loc.col};
    if (static_cast<int>(loc.level) > per_dim) {
      // Coarsen to the available resolution.
      for (auto& c : cells) c >>= (static_cast<int>(loc.level) - per_dim);
    } else {
      for (auto& c : cells) c <<= (per_dim - static_cast<int>(loc.level));
    }
    return encode_cells(cells, per_dim, bits);
  }

  std::uint64_t operator()(const DagLocation& loc) const {
    if (loc.breadth_count == 0 || loc.breadth_index >= loc.breadth_count) {
      throw std::invalid_argument("DAG breadth index outside breadth count");
    }
    // floor(index / count * 2^bits) in 128-bit integer arithmetic.
    const auto scaled = (static_cast<u128>(loc.breadth_index) << bits) /
                        loc.breadth_count;
    return static_cast<std::uint64_t>(scaled);
  }
};

}  // namespace

std::uint64_t sfo_encode(const LogicalLocation& loc, int bits) {
  check_bits(bits);
  return std::visit(Encoder{bits}, loc);
}

double relative_loc(std::uint64_t key, int bits) {
  check_bits(bits);
  if (key >= (1ULL << bits)) {
    throw std::invalid_argument("key " + std::to_string(key) + " outside " +
                                std::to_string(bits) + "-bit key space");
  }
  return std::ldexp(static_cast<double>(key), -bits);
}

int initial_worker(double relative_loc, int worker_count) {
  if (worker_count < 1) throw std::invalid_argument("worker count must be >= 1");
  const auto w = static_cast<int>(std::floor(relative_loc * worker_count));
  return std::clamp(w, 0, worker_count - 1);
}

int initial_worker(std::uint64_t key, int bits, int worker_count) {
  if (worker_count < 1) throw std::invalid_argument("worker count must be >= 1");
  const auto w = (static_cast<u128>(key) * static_cast<unsigned>(worker_count)) >> bits;
  return std::min(static_cast<int>(w), worker_count - 1);
}

Sta Sta::from_key(std::uint64_t key, int worker_count) {
  const int bits = max_bits(worker_count);
  if (key >= (1ULL << bits)) {
    throw std::invalid_argument("STA key " + std::to_string(key) + " outside " +
                                std::to_string(bits) + "-bit key space");
  }
  return Sta{key, bits, moldsched::initial_worker(key, bits, worker_count)};
}

Sta Sta::from_location(const LogicalLocation& loc, int worker_count) {
  return from_key(sfo_encode(loc, max_bits(worker_count)), worker_count);
}

}  // namespace moldsched
