#pragma once

// Synthetic benchmark: `parallelism` independent chains of `depth` tasks.
// Every task of chain c carries the DAG-position key of breadth c, so a chain
// stays on one initial worker and one cost-model entry.

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "moldsched/bench/workload.hpp"

namespace moldsched::bench {

enum class ChainKind { kMatmul, kTriad, kCopy, kNbody, kMixed };

std::string_view to_string(ChainKind k);
std::optional<ChainKind> parse_chain_kind(std::string_view name);

struct ChainSpec {
  int parallelism = 1;
  int depth = 1;
  ChainKind kind = ChainKind::kMatmul;
  /// Matrix order for matmul and mixed; element count for the others.
  std::size_t n = 64;

  std::size_t task_count() const {
    return static_cast<std::size_t>(parallelism) * static_cast<std::size_t>(depth);
  }
};

class ChainWorkload final : public Workload {
 public:
  ChainWorkload(const ChainSpec& spec, const BuildContext& ctx);

  std::string name() const override { return "chain"; }
  Dag& dag() override { return dag_; }
  void reset() override;
  Verdict verify() const override;
  double checksum() const override;

  const ChainSpec& spec() const noexcept { return spec_; }
  /// Buffer holding chain c's final output.
  const std::vector<double>& output(int chain) const;

 private:
  struct ChainData {
    std::vector<double> buf[2];
    std::vector<double> initial;
  };

  ChainKind kind_at(int depth) const;
  void run_step(ChainData& data, int depth, int piece, int width) const;

  ChainSpec spec_;
  std::size_t len_;
  std::vector<double> coeffs_;  // stochastic matrix, or triad's c vector
  std::vector<std::unique_ptr<ChainData>> chains_;
  Dag dag_;
};

}  // namespace moldsched::bench
