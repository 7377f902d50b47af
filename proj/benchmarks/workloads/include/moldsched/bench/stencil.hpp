#pragma once

// 2D 5-point Jacobi stencil over a blocked mesh. One DAG round is one
// timestep: a compute task per block writes the next grid from the current
// one, then a copy task per block publishes its block once it and its four
// neighbours have finished reading. The mesh's outer ring is held fixed.

#include <vector>

#include "moldsched/bench/workload.hpp"

namespace moldsched::bench {

struct GridSpec {
  std::size_t rows = 64;
  std::size_t cols = 64;
  std::size_t block = 16;
  int timesteps = 10;
};

class StencilWorkload final : public Workload {
 public:
  StencilWorkload(const GridSpec& spec, const BuildContext& ctx);

  std::string name() const override { return "stencil"; }
  Dag& dag() override { return dag_; }
  void reset() override;
  Verdict verify() const override;
  double checksum() const override;

  std::size_t block_rows() const noexcept { return brows_; }
  std::size_t block_cols() const noexcept { return bcols_; }
  Task& compute_task(std::size_t bi, std::size_t bj);
  Task& copy_task(std::size_t bi, std::size_t bj);
  const std::vector<double>& grid() const noexcept { return u_; }

  /// Sequential Jacobi reference for `steps` timesteps from `initial`.
  static std::vector<double> reference(const std::vector<double>& initial, std::size_t rows,
                                       std::size_t cols, int steps);

 private:
  void compute(std::size_t bi, std::size_t bj, int piece, int width);
  void copy(std::size_t bi, std::size_t bj, int piece, int width);

  GridSpec spec_;
  std::size_t brows_;
  std::size_t bcols_;
  std::vector<double> initial_;
  std::vector<double> u_;
  std::vector<double> next_;
  std::vector<Task*> compute_;
  std::vector<Task*> copy_;
  Dag dag_;
};

}  // namespace moldsched::bench
