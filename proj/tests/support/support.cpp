#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace moldsched::testing {

Layout eight_worker_layout() { return Layout::parse(kEightWorkerLayout); }
Layout four_worker_layout() { return Layout::parse(kFourWorkerLayout); }

RandomDag::RandomDag(Runtime& rt, std::mt19937_64& rng, std::size_t max_tasks, double edge_prob) {
  std::uniform_int_distribution<std::size_t> count(1, max_tasks);
  const std::size_t n = count(rng);
  const TypeId type = rt.types().register_type("random");
  std::uniform_int_distribution<std::uint64_t> key(0, (std::uint64_t{1} << rt.key_bits()) - 1);
  std::bernoulli_distribution edge(edge_prob);
  std::bernoulli_distribution moldable(0.7);

  preds_.resize(n);
  order_violations_ = std::make_unique<std::atomic<int>[]>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto* preds = &preds_[i];
    auto* bad = &order_violations_[i];
    Task& t = dag_.add_task(
        type, rt.make_sta(key(rng)),
        [preds, bad](const PieceContext&) {
          for (const Task* p : *preds) {
            if (p->pending_pieces() != 0 || p->executions() == 0) bad->fetch_add(1);
          }
        },
        moldable(rng));
    for (std::size_t j = 0; j < i; ++j) {
      if (edge(rng)) {
        dag_.add_edge(dag_.task(j), t);
        preds_[i].push_back(&dag_.task(j));
      }
    }
  }
}

std::string RandomDag::check() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < dag_.size(); ++i) {
    const Task& t = dag_.task(i);
    if (t.executions() != 1) os << "task " << i << " executed " << t.executions() << " times; ";
    if (t.piece_executions() != t.assigned_partition().width) {
      os << "task " << i << " ran " << t.piece_executions() << " pieces at width "
         << t.assigned_partition().width << "; ";
    }
    if (order_violations_[i].load() != 0) os << "task " << i << " ran before a predecessor; ";
  }
  return os.str();
}

std::string decision_summary(const Runtime& rt) {
  std::ostringstream os;
  for (const auto& d : rt.decisions()) {
    os << d.worker << ':' << d.partition << ' ';
  }
  return os.str();
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    auto p = base / ("moldsched-test-" + std::to_string(::getpid()) + "-" +
                     std::to_string(counter.fetch_add(1)));
    if (std::filesystem::create_directory(p)) {
      path_ = p.string();
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace moldsched::testing
