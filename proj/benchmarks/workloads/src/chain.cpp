#include "moldsched/bench/chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "moldsched/bench/kernels.hpp"

namespace moldsched::bench {

namespace {

constexpr double kTriadScale = 0.5;
constexpr double kTriadS = 0.25;
constexpr double kNbodyDt = 1e-4;

}  // namespace

std::string_view to_string(ChainKind k) {
  switch (k) {
    case ChainKind::kMatmul: return "matmul";
    case ChainKind::kTriad: return "triad";
    case ChainKind::kCopy: return "copy";
    case ChainKind::kNbody: return "nbody";
    case ChainKind::kMixed: return "mixed";
  }
  return "?";
}

std::optional<ChainKind> parse_chain_kind(std::string_view name) {
  for (auto k : {ChainKind::kMatmul, ChainKind::kTriad, ChainKind::kCopy, ChainKind::kNbody,
                 ChainKind::kMixed}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

ChainKind ChainWorkload::kind_at(int depth) const {
  if (spec_.kind != ChainKind::kMixed) return spec_.kind;
  static constexpr ChainKind cycle[] = {ChainKind::kMatmul, ChainKind::kTriad, ChainKind::kCopy};
  return cycle[depth % 3];
}

ChainWorkload::ChainWorkload(const ChainSpec& spec, const BuildContext& ctx) : spec_(spec) {
  if (spec.parallelism < 1 || spec.depth < 1) {
    throw std::invalid_argument("chain parallelism and depth must be >= 1");
  }
  if (spec.n < 1) throw std::invalid_argument("chain problem size must be >= 1");
  const bool matrix = spec.kind == ChainKind::kMatmul || spec.kind == ChainKind::kMixed;
  len_ = matrix ? spec.n * spec.n : spec.n;

  std::mt19937_64 rng(0xc4a1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  coeffs_.resize(len_);
  if (matrix) {
    // Row-stochastic, so repeated products stay bounded.
    for (std::size_t i = 0; i < spec.n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < spec.n; ++j) sum += coeffs_[i * spec.n + j] = unit(rng);
      for (std::size_t j = 0; j < spec.n; ++j) coeffs_[i * spec.n + j] /= sum;
    }
  } else {
    for (auto& c : coeffs_) c = unit(rng);
  }

  for (int c = 0; c < spec.parallelism; ++c) {
    auto data = std::make_unique<ChainData>();
    data->initial.resize(len_);
    for (auto& x : data->initial) x = spec.kind == ChainKind::kNbody ? 2.0 * unit(rng) - 1.0 : unit(rng);
    chains_.push_back(std::move(data));
  }
  reset();

  std::vector<TypeId> type_of(3);
  for (int c = 0; c < spec.parallelism; ++c) {
    const Sta sta = Sta::from_location(
        DagLocation{0, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(spec.parallelism)},
        ctx.workers);
    ChainData* data = chains_[static_cast<std::size_t>(c)].get();
    Task* prev = nullptr;
    for (int d = 0; d < spec.depth; ++d) {
      const TypeId type = ctx.types.register_type(to_string(kind_at(d)));
      Task& t = dag_.add_task(type, sta, [this, data, d](const PieceContext& pc) {
        run_step(*data, d, pc.index, pc.width);
      });
      if (prev) dag_.add_edge(*prev, t);
      prev = &t;
    }
  }
}

void ChainWorkload::run_step(ChainData& data, int depth, int piece, int width) const {
  const auto& src = data.buf[depth % 2];
  auto& dst = data.buf[(depth + 1) % 2];
  switch (kind_at(depth)) {
    case ChainKind::kMatmul: {
      const auto r = piece_range(piece, width, spec_.n);
      matmul_rows(dst, coeffs_, src, spec_.n, r.begin, r.end);
      break;
    }
    case ChainKind::kTriad: {
      const auto r = piece_range(piece, width, len_);
      triad_rows(dst, src, coeffs_, kTriadScale, kTriadS, r.begin, r.end);
      break;
    }
    case ChainKind::kCopy: {
      const auto r = piece_range(piece, width, len_);
      copy_rows(dst, src, r.begin, r.end);
      break;
    }
    case ChainKind::kNbody:
      nbody_task(dst, src, kNbodyDt, piece, width);
      break;
    case ChainKind::kMixed:
      break;
  }
}

void ChainWorkload::reset() {
  for (auto& c : chains_) {
    c->buf[0] = c->initial;
    c->buf[1] = c->initial;
  }
}

const std::vector<double>& ChainWorkload::output(int chain) const {
  return chains_.at(static_cast<std::size_t>(chain))->buf[spec_.depth % 2];
}

Verdict ChainWorkload::verify() const {
  Verdict v;
  v.tolerance = 0.0;
  for (int c = 0; c < spec_.parallelism; ++c) {
    ChainData ref;
    ref.buf[0] = ref.buf[1] = chains_[static_cast<std::size_t>(c)]->initial;
    for (int d = 0; d < spec_.depth; ++d) run_step(ref, d, 0, 1);
    const auto& got = output(c);
    const auto& want = ref.buf[spec_.depth % 2];
    for (std::size_t i = 0; i < len_; ++i) {
      const double e = std::abs(got[i] - want[i]);
      v.error = std::isnan(e) ? INFINITY : std::max(v.error, e);
    }
  }
  v.ok = v.error <= v.tolerance;
  if (!v.ok) v.detail = "chain output differs from sequential replay";
  return v;
}

double ChainWorkload::checksum() const {
  double sum = 0.0;
  for (int c = 0; c < spec_.parallelism; ++c) {
    for (double x : output(c)) sum += x;
  }
  return sum;
}

}  // namespace moldsched::bench
