#include "moldsched/bench/sparselu.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace moldsched::bench {

namespace {

using Block = std::vector<double>;

void lu0(Block& d, std::size_t m) {
  for (std::size_t k = 0; k < m; ++k) {
    const double pivot = d[k * m + k];
    if (std::abs(pivot) < 1e-300) {
      throw std::domain_error("singular diagonal block at pivot " + std::to_string(k));
    }
    for (std::size_t i = k + 1; i < m; ++i) {
      d[i * m + k] /= pivot;
      for (std::size_t j = k + 1; j < m; ++j) d[i * m + j] -= d[i * m + k] * d[k * m + j];
    }
  }
}

// Columns [c0, c1) of col := L^-1 col, L the unit lower part of diag.
void fwd(const Block& diag, Block& col, std::size_t m, std::size_t c0, std::size_t c1) {
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = k + 1; i < m; ++i) {
      for (std::size_t j = c0; j < c1; ++j) col[i * m + j] -= diag[i * m + k] * col[k * m + j];
    }
  }
}

// Rows [r0, r1) of row := row U^-1, U the upper part of diag.
void bdiv(const Block& diag, Block& row, std::size_t m, std::size_t r0, std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      row[i * m + k] /= diag[k * m + k];
      for (std::size_t j = k + 1; j < m; ++j) row[i * m + j] -= row[i * m + k] * diag[k * m + j];
    }
  }
}

// Rows [r0, r1) of inner -= row * col.
void bmod(const Block& row, const Block& col, Block& inner, std::size_t m, std::size_t r0,
          std::size_t r1) {
  for (std::size_t i = r0; i < r1; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const double a = row[i * m + k];
      for (std::size_t j = 0; j < m; ++j) inner[i * m + j] -= a * col[k * m + j];
    }
  }
}

// Read/write hazards per block, turned into DAG edges.
class AccessTracker {
 public:
  explicit AccessTracker(Dag& dag) : dag_(dag) {}

  void read(Task& t, std::size_t block) {
    auto& s = state_[block];
    if (s.writer) edge(*s.writer, t);
    s.readers.push_back(&t);
  }

  void write(Task& t, std::size_t block) {
    auto& s = state_[block];
    if (s.writer) edge(*s.writer, t);
    for (Task* r : s.readers) {
      if (r != &t) edge(*r, t);
    }
    s.readers.clear();
    s.writer = &t;
  }

 private:
  struct State {
    Task* writer = nullptr;
    std::vector<Task*> readers;
  };

  void edge(Task& from, Task& to) {
    if (&from == &to) return;
    if (linked_.insert({from.id(), to.id()}).second) dag_.add_edge(from, to);
  }

  Dag& dag_;
  std::map<std::size_t, State> state_;
  std::set<std::pair<TaskId, TaskId>> linked_;
};

}  // namespace

SparseLuWorkload::SparseLuWorkload(const SparseLuSpec& spec, const BuildContext& ctx)
    : spec_(spec) {
  const std::size_t n = spec.blocks;
  const std::size_t m = spec.block_size;
  if (n == 0 || m == 0) throw std::invalid_argument("sparselu needs at least one block");

  present_.assign(n * n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      bool empty = false;
      if (!spec.dense) {
        if (i < j && i % 3 != 0) empty = true;
        if (i > j && j % 3 != 0) empty = true;
        if (i % 2 == 1) empty = true;
        if (j % 2 == 1) empty = true;
        if (i == j || i + 1 == j || i == j + 1) empty = false;
      }
      present_[i * n + j] = !empty;
    }
  }

  // Values from the classic linear congruential generator, with the diagonal
  // raised so factorisation without pivoting stays stable.
  std::uint32_t state = spec.seed;
  initial_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!present_[i * n + j]) continue;
      auto b = std::make_unique<Block>(m * m);
      for (std::size_t e = 0; e < m * m; ++e) {
        state = (3125u * state) % 65536u;
        (*b)[e] = (static_cast<double>(state) - 32768.0) / 16384.0;
      }
      if (i == j && spec.boost_diagonal) {
        for (std::size_t d = 0; d < m; ++d) (*b)[d * m + d] += 2.0 * static_cast<double>(n * m);
      }
      initial_[i * n + j] = std::move(b);
    }
  }

  // Symbolic pass: which blocks exist once fill-in is accounted for.
  std::vector<bool> filled = present_;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = k + 1; i < n; ++i) {
      if (!filled[i * n + k]) continue;
      for (std::size_t j = k + 1; j < n; ++j) {
        if (filled[k * n + j]) filled[i * n + j] = true;
      }
    }
  }
  blocks_.resize(n * n);
  for (std::size_t b = 0; b < n * n; ++b) {
    if (filled[b]) blocks_[b] = std::make_unique<Block>(m * m, 0.0);
  }
  reset();

  const TypeId t_lu0 = ctx.types.register_type("lu0");
  const TypeId t_fwd = ctx.types.register_type("fwd");
  const TypeId t_bdiv = ctx.types.register_type("bdiv");
  const TypeId t_bmod = ctx.types.register_type("bmod");
  const auto level = static_cast<std::uint32_t>(std::bit_width(std::bit_ceil(n)) - 1);
  auto sta_of = [&](std::size_t i, std::size_t j) {
    return Sta::from_location(
        MatrixBlockLocation{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), level},
        ctx.workers);
  };

  AccessTracker tracker(dag_);
  for (std::size_t k = 0; k < n; ++k) {
    Block* diag = at(k, k);
    Task& f = dag_.add_task(
        t_lu0, sta_of(k, k), [diag, m](const PieceContext&) { lu0(*diag, m); }, false);
    tracker.write(f, k * n + k);
    ++counts_.lu0;

    for (std::size_t j = k + 1; j < n; ++j) {
      Block* col = at(k, j);
      if (!col) continue;
      Task& t = dag_.add_task(t_fwd, sta_of(k, j), [diag, col, m](const PieceContext& pc) {
        const auto r = piece_range(pc.index, pc.width, m);
        fwd(*diag, *col, m, r.begin, r.end);
      });
      tracker.read(t, k * n + k);
      tracker.write(t, k * n + j);
      ++counts_.fwd;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      Block* row = at(i, k);
      if (!row) continue;
      Task& t = dag_.add_task(t_bdiv, sta_of(i, k), [diag, row, m](const PieceContext& pc) {
        const auto r = piece_range(pc.index, pc.width, m);
        bdiv(*diag, *row, m, r.begin, r.end);
      });
      tracker.read(t, k * n + k);
      tracker.write(t, i * n + k);
      ++counts_.bdiv;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      Block* row = at(i, k);
      if (!row) continue;
      for (std::size_t j = k + 1; j < n; ++j) {
        Block* col = at(k, j);
        if (!col) continue;
        Block* inner = at(i, j);
        Task& t = dag_.add_task(t_bmod, sta_of(i, j), [row, col, inner, m](const PieceContext& pc) {
          const auto r = piece_range(pc.index, pc.width, m);
          bmod(*row, *col, *inner, m, r.begin, r.end);
        });
        tracker.read(t, i * n + k);
        tracker.read(t, k * n + j);
        tracker.write(t, i * n + j);
        ++counts_.bmod;
      }
    }
  }
}

bool SparseLuWorkload::present(std::size_t i, std::size_t j) const {
  return present_.at(i * spec_.blocks + j);
}

void SparseLuWorkload::reset() {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (!blocks_[b]) continue;
    if (initial_[b]) {
      *blocks_[b] = *initial_[b];
    } else {
      std::fill(blocks_[b]->begin(), blocks_[b]->end(), 0.0);
    }
  }
}

std::vector<double> SparseLuWorkload::assemble(bool original) const {
  const std::size_t n = spec_.blocks;
  const std::size_t m = spec_.block_size;
  const std::size_t dim = n * m;
  std::vector<double> out(dim * dim, 0.0);
  for (std::size_t bi = 0; bi < n; ++bi) {
    for (std::size_t bj = 0; bj < n; ++bj) {
      const Block* b = original ? initial_[bi * n + bj].get() : at(bi, bj);
      if (!b) continue;
      for (std::size_t i = 0; i < m; ++i) {
        std::copy_n(b->begin() + static_cast<std::ptrdiff_t>(i * m), m,
                    out.begin() + static_cast<std::ptrdiff_t>((bi * m + i) * dim + bj * m));
      }
    }
  }
  return out;
}

double SparseLuWorkload::reconstruction_error() const {
  const std::size_t dim = spec_.blocks * spec_.block_size;
  const auto a = assemble(true);
  const auto lu = assemble(false);
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      // (L U)_ij with L unit lower and U upper, both packed in `lu`.
      double s = i <= j ? lu[i * dim + j] : 0.0;
      const std::size_t kmax = std::min(i, j + 1);
      for (std::size_t k = 0; k < kmax; ++k) s += lu[i * dim + k] * lu[k * dim + j];
      const double d = s - a[i * dim + j];
      diff += d * d;
      norm += a[i * dim + j] * a[i * dim + j];
    }
  }
  return std::sqrt(diff) / std::sqrt(norm);
}

Verdict SparseLuWorkload::verify() const {
  Verdict v;
  v.tolerance = 1e-8;
  v.error = reconstruction_error();
  v.ok = v.error <= v.tolerance;
  if (!v.ok) v.detail = "L*U does not reconstruct the input";
  return v;
}

double SparseLuWorkload::checksum() const {
  double sum = 0.0;
  for (const auto& b : blocks_) {
    if (!b) continue;
    for (double x : *b) sum += x;
  }
  return sum;
}

}  // namespace moldsched::bench
