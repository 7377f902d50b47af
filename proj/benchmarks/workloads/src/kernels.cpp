#include "moldsched/bench/kernels.hpp"

#include <cmath>

#include <moldsched/task.hpp>

namespace moldsched::bench {

void nbody_rows(std::span<double> target, std::span<const double> source, double dt,
                std::size_t begin, std::size_t end) {
  const std::size_t n = source.size();
  for (std::size_t i = begin; i < end; ++i) {
    double fx = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = target[i] - source[j];
      const double inv_dist = 1.0 / std::sqrt(dx * dx + kSoftening);
      fx += dx * inv_dist;
    }
    target[i] += fx * dt;
  }
}

void nbody_task(std::span<double> target, std::span<const double> source, double dt, int piece,
                int width) {
  const auto r = piece_range(piece, width, target.size());
  nbody_rows(target, source, dt, r.begin, r.end);
}

void triad_rows(std::span<double> dst, std::span<const double> src, std::span<const double> c,
                double scale, double s, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) dst[i] = scale * src[i] + s * c[i];
}

void copy_rows(std::span<double> dst, std::span<const double> src, std::size_t begin,
               std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) dst[i] = src[i];
}

void matmul_rows(std::span<double> dst, std::span<const double> a, std::span<const double> b,
                 std::size_t n, std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) {
    double* row = dst.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      const double* bk = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aik * bk[j];
    }
  }
}

}  // namespace moldsched::bench
