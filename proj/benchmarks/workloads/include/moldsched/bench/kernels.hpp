#pragma once

// Sequential kernels shared by the task work functions and the oracles. Each
// takes the [begin, end) slice a piece owns.

#include <cstddef>
#include <span>

namespace moldsched::bench {

inline constexpr double kSoftening = 1e-9;

/// 1D N-Body step for unit masses over targets [begin, end):
/// target[i] += dt * sum_j (target[i] - source[j]) / sqrt((target[i] - source[j])^2 + soft).
void nbody_rows(std::span<double> target, std::span<const double> source, double dt,
                std::size_t begin, std::size_t end);

/// One piece of an N-Body task: the rows of piece_range(piece, width, n).
void nbody_task(std::span<double> target, std::span<const double> source, double dt, int piece,
                int width);

/// dst[i] = scale * src[i] + s * c[i].
void triad_rows(std::span<double> dst, std::span<const double> src, std::span<const double> c,
                double scale, double s, std::size_t begin, std::size_t end);

void copy_rows(std::span<double> dst, std::span<const double> src, std::size_t begin,
               std::size_t end);

/// Rows [begin, end) of dst = a * b for n x n row-major matrices.
void matmul_rows(std::span<double> dst, std::span<const double> a, std::span<const double> b,
                 std::size_t n, std::size_t begin, std::size_t end);

}  // namespace moldsched::bench
