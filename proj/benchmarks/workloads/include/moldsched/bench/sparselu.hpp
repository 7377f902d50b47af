#pragma once

// Blocked sparse LU factorisation without pivoting, in four task kinds:
// lu0 factors a diagonal block, fwd and bdiv solve the blocks of its row and
// column, bmod updates the trailing blocks. Dependencies follow block reads
// and writes in program order. Fill-in is resolved at build time.

#include <cstdint>
#include <memory>
#include <vector>

#include "moldsched/bench/workload.hpp"

namespace moldsched::bench {

struct SparseLuSpec {
  std::size_t blocks = 8;       // N x N blocks
  std::size_t block_size = 32;  // M x M elements each
  bool dense = false;           // every block present
  std::uint32_t seed = 1325;
  /// Adds 2 * N * M to every diagonal entry so no pivot vanishes.
  bool boost_diagonal = true;
};

struct SparseLuCounts {
  std::size_t lu0 = 0;
  std::size_t fwd = 0;
  std::size_t bdiv = 0;
  std::size_t bmod = 0;
};

class SparseLuWorkload final : public Workload {
 public:
  SparseLuWorkload(const SparseLuSpec& spec, const BuildContext& ctx);

  std::string name() const override { return "sparselu"; }
  Dag& dag() override { return dag_; }
  void reset() override;
  Verdict verify() const override;
  double checksum() const override;

  const SparseLuCounts& counts() const noexcept { return counts_; }
  /// Whether block (i, j) holds data in the input (before fill-in).
  bool present(std::size_t i, std::size_t j) const;

  /// Relative Frobenius norm of L*U - A for the factored blocks.
  double reconstruction_error() const;

 private:
  using Block = std::vector<double>;

  Block* at(std::size_t i, std::size_t j) const {
    return blocks_[i * spec_.blocks + j].get();
  }
  std::vector<double> assemble(bool original) const;

  SparseLuSpec spec_;
  std::vector<bool> present_;
  std::vector<std::unique_ptr<Block>> blocks_;
  std::vector<std::unique_ptr<Block>> initial_;
  SparseLuCounts counts_;
  Dag dag_;
};

}  // namespace moldsched::bench
