#include "moldsched/bench/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace moldsched::bench {

namespace {

void jacobi_rows(const std::vector<double>& u, std::vector<double>& next, std::size_t rows,
                 std::size_t cols, std::size_t r0, std::size_t r1, std::size_t c0,
                 std::size_t c1) {
  for (std::size_t i = r0; i < r1; ++i) {
    for (std::size_t j = c0; j < c1; ++j) {
      const std::size_t at = i * cols + j;
      if (i == 0 || j == 0 || i + 1 == rows || j + 1 == cols) {
        next[at] = u[at];
      } else {
        next[at] = 0.25 * (u[at - cols] + u[at + cols] + u[at + 1] + u[at - 1]);
      }
    }
  }
}

}  // namespace

StencilWorkload::StencilWorkload(const GridSpec& spec, const BuildContext& ctx) : spec_(spec) {
  if (spec.block == 0 || spec.rows == 0 || spec.cols == 0 || spec.rows % spec.block != 0 ||
      spec.cols % spec.block != 0) {
    throw std::invalid_argument("stencil block size must tile the mesh exactly");
  }
  if (spec.timesteps < 1) throw std::invalid_argument("stencil needs at least one timestep");
  brows_ = spec.rows / spec.block;
  bcols_ = spec.cols / spec.block;

  initial_.resize(spec.rows * spec.cols);
  std::mt19937_64 rng(0x5713);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& x : initial_) x = unit(rng);
  reset();

  const TypeId compute_type = ctx.types.register_type("stencil.compute");
  const TypeId copy_type = ctx.types.register_type("stencil.copy");
  auto sta_of = [&](std::size_t bi, std::size_t bj) {
    return Sta::from_location(
        CartesianLocation{{static_cast<double>(bi) / static_cast<double>(brows_),
                           static_cast<double>(bj) / static_cast<double>(bcols_)}},
        ctx.workers);
  };

  for (std::size_t bi = 0; bi < brows_; ++bi) {
    for (std::size_t bj = 0; bj < bcols_; ++bj) {
      compute_.push_back(&dag_.add_task(compute_type, sta_of(bi, bj),
                                        [this, bi, bj](const PieceContext& pc) {
                                          compute(bi, bj, pc.index, pc.width);
                                        }));
    }
  }
  for (std::size_t bi = 0; bi < brows_; ++bi) {
    for (std::size_t bj = 0; bj < bcols_; ++bj) {
      Task& c = dag_.add_task(copy_type, sta_of(bi, bj), [this, bi, bj](const PieceContext& pc) {
        copy(bi, bj, pc.index, pc.width);
      });
      copy_.push_back(&c);
      dag_.add_edge(compute_task(bi, bj), c);
      if (bi > 0) dag_.add_edge(compute_task(bi - 1, bj), c);
      if (bi + 1 < brows_) dag_.add_edge(compute_task(bi + 1, bj), c);
      if (bj > 0) dag_.add_edge(compute_task(bi, bj - 1), c);
      if (bj + 1 < bcols_) dag_.add_edge(compute_task(bi, bj + 1), c);
    }
  }
  dag_.set_iterations(spec.timesteps);
}

Task& StencilWorkload::compute_task(std::size_t bi, std::size_t bj) {
  return *compute_.at(bi * bcols_ + bj);
}

Task& StencilWorkload::copy_task(std::size_t bi, std::size_t bj) {
  return *copy_.at(bi * bcols_ + bj);
}

void StencilWorkload::compute(std::size_t bi, std::size_t bj, int piece, int width) {
  const auto r = piece_range(piece, width, spec_.block);
  const std::size_t r0 = bi * spec_.block;
  const std::size_t c0 = bj * spec_.block;
  jacobi_rows(u_, next_, spec_.rows, spec_.cols, r0 + r.begin, r0 + r.end, c0, c0 + spec_.block);
}

void StencilWorkload::copy(std::size_t bi, std::size_t bj, int piece, int width) {
  const auto r = piece_range(piece, width, spec_.block);
  const std::size_t c0 = bj * spec_.block;
  for (std::size_t i = bi * spec_.block + r.begin; i < bi * spec_.block + r.end; ++i) {
    std::copy_n(next_.begin() + static_cast<std::ptrdiff_t>(i * spec_.cols + c0), spec_.block,
                u_.begin() + static_cast<std::ptrdiff_t>(i * spec_.cols + c0));
  }
}

void StencilWorkload::reset() {
  u_ = initial_;
  next_.assign(initial_.size(), 0.0);
}

std::vector<double> StencilWorkload::reference(const std::vector<double>& initial,
                                               std::size_t rows, std::size_t cols, int steps) {
  std::vector<double> u = initial;
  std::vector<double> next(u.size());
  for (int s = 0; s < steps; ++s) {
    jacobi_rows(u, next, rows, cols, 0, rows, 0, cols);
    u.swap(next);
  }
  return u;
}

Verdict StencilWorkload::verify() const {
  Verdict v;
  v.tolerance = 1e-12;
  const auto want = reference(initial_, spec_.rows, spec_.cols, spec_.timesteps);
  for (std::size_t i = 0; i < want.size(); ++i) {
    const double e = std::abs(u_[i] - want[i]);
    v.error = std::isnan(e) ? INFINITY : std::max(v.error, e);
  }
  v.ok = v.error <= v.tolerance;
  if (!v.ok) v.detail = "stencil grid differs from sequential Jacobi";
  return v;
}

double StencilWorkload::checksum() const {
  double sum = 0.0;
  for (double x : u_) sum += x;
  return sum;
}

}  // namespace moldsched::bench
