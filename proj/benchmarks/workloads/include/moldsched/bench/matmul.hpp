#pragma once

// Cache-oblivious dense C = A * B by recursive 8-way splitting. Only the leaf
// products become tasks; the leaf updates of one C block run in ascending k,
// chained by data dependencies, which is the order the recursion visits them.

#include <vector>

#include "moldsched/bench/workload.hpp"

namespace moldsched::bench {

struct MatmulSpec {
  std::size_t n = 512;
  std::size_t leaf = 128;
};

class MatmulWorkload final : public Workload {
 public:
  MatmulWorkload(const MatmulSpec& spec, const BuildContext& ctx);

  std::string name() const override { return "matmul"; }
  Dag& dag() override { return dag_; }
  void reset() override;
  Verdict verify() const override;
  double checksum() const override;

  std::size_t leaf_tasks() const noexcept { return dag_.size(); }
  /// log2(n / leaf): number of recursive splits above the leaves.
  unsigned splits() const noexcept { return splits_; }
  const std::vector<double>& c() const noexcept { return c_; }

 private:
  void split(std::size_t i, std::size_t j, std::size_t k, std::size_t size, TypeId type,
             const BuildContext& ctx);
  void leaf(std::size_t bi, std::size_t bj, std::size_t bk, int piece, int width);

  MatmulSpec spec_;
  unsigned splits_ = 0;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> c_;
  std::vector<Task*> last_;  // most recent leaf task per C block
  Dag dag_;
};

}  // namespace moldsched::bench
