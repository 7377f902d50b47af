#include "moldsched/bench/matmul.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

namespace moldsched::bench {

MatmulWorkload::MatmulWorkload(const MatmulSpec& spec, const BuildContext& ctx) : spec_(spec) {
  if (!std::has_single_bit(spec.n) || !std::has_single_bit(spec.leaf) || spec.leaf > spec.n) {
    throw std::invalid_argument("matmul size and leaf must be powers of two with leaf <= size");
  }
  splits_ = static_cast<unsigned>(std::countr_zero(spec.n / spec.leaf));
  const std::size_t nn = spec.n * spec.n;
  std::mt19937_64 rng(0x3a7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  a_.resize(nn);
  b_.resize(nn);
  for (auto& x : a_) x = unit(rng);
  for (auto& x : b_) x = unit(rng);
  reset();

  const std::size_t per_side = spec.n / spec.leaf;
  last_.assign(per_side * per_side, nullptr);
  split(0, 0, 0, spec.n, ctx.types.register_type("matmul.leaf"), ctx);
}

void MatmulWorkload::split(std::size_t i, std::size_t j, std::size_t k, std::size_t size,
                           TypeId type, const BuildContext& ctx) {
  if (size == spec_.leaf) {
    const std::size_t bi = i / size;
    const std::size_t bj = j / size;
    const std::size_t bk = k / size;
    const Sta sta = Sta::from_location(
        MatrixBlockLocation{static_cast<std::uint32_t>(bi), static_cast<std::uint32_t>(bj),
                            splits_},
        ctx.workers);
    Task& t = dag_.add_task(type, sta, [this, bi, bj, bk](const PieceContext& pc) {
      leaf(bi, bj, bk, pc.index, pc.width);
    });
    Task*& prev = last_[bi * (spec_.n / spec_.leaf) + bj];
    if (prev) dag_.add_edge(*prev, t);
    prev = &t;
    return;
  }
  const std::size_t h = size / 2;
  for (std::size_t di : {std::size_t{0}, h}) {
    for (std::size_t dj : {std::size_t{0}, h}) {
      split(i + di, j + dj, k, h, type, ctx);
      split(i + di, j + dj, k + h, h, type, ctx);
    }
  }
}

void MatmulWorkload::leaf(std::size_t bi, std::size_t bj, std::size_t bk, int piece, int width) {
  const std::size_t n = spec_.n;
  const std::size_t l = spec_.leaf;
  const auto r = piece_range(piece, width, l);
  for (std::size_t i = bi * l + r.begin; i < bi * l + r.end; ++i) {
    double* row = c_.data() + i * n + bj * l;
    for (std::size_t k = bk * l; k < (bk + 1) * l; ++k) {
      const double aik = a_[i * n + k];
      const double* bk_row = b_.data() + k * n + bj * l;
      for (std::size_t j = 0; j < l; ++j) row[j] += aik * bk_row[j];
    }
  }
}

void MatmulWorkload::reset() { c_.assign(spec_.n * spec_.n, 0.0); }

Verdict MatmulWorkload::verify() const {
  const std::size_t n = spec_.n;
  Verdict v;
  v.tolerance = 1e-10 * static_cast<double>(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a_[i * n + k];
      for (std::size_t j = 0; j < n; ++j) row[j] += aik * b_[k * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double e = std::abs(row[j] - c_[i * n + j]);
      v.error = std::isnan(e) ? INFINITY : std::max(v.error, e);
    }
  }
  v.ok = v.error <= v.tolerance;
  if (!v.ok) v.detail = "C differs from the naive product";
  return v;
}

double MatmulWorkload::checksum() const {
  double sum = 0.0;
  for (double x : c_) sum += x;
  return sum;
}

}  // namespace moldsched::bench
