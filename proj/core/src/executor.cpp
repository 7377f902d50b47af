#include "moldsched/executor.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cstdio>
#include <memory>
#include <random>
#include <stdexcept>
#include <thread>

#include "moldsched/pinning.hpp"

namespace moldsched {

ThreadedExecutor::ThreadedExecutor(Runtime& rt, ThreadedOptions options)
    : rt_(rt), sched_(rt), options_(options) {}

RunStats ThreadedExecutor::run(Dag& dag) {
  const int n = rt_.worker_count();
  rt_.set_time_source(nullptr);
  std::barrier sync(n + 1);
  std::atomic<bool> stop{false};
  std::atomic<bool> warned{false};

  auto body = [&](int w) {
    if (options_.pin) {
      const int cpu = rt_.layout().affinities()[static_cast<std::size_t>(w)];
      if (!pin_current_thread(cpu) && !warned.exchange(true)) {
        std::fprintf(stderr,
                     "moldsched: warning: cannot pin worker %d to hardware thread %d; "
                     "workers run unpinned\n",
                     w, cpu);
      }
    }
    std::mt19937_64 jitter(options_.stress_seed + static_cast<std::uint64_t>(w));
    auto& parker = rt_.worker(w).parker;
    for (;;) {
      sync.arrive_and_wait();
      if (stop.load(std::memory_order_acquire)) return;
      int idle = 0;
      while (!rt_.round_done()) {
        if (options_.stress_seed != 0) {
          const auto r = jitter() % 16;
          if (r < 4) {
            std::this_thread::yield();
          } else if (r == 4) {
            std::this_thread::sleep_for(std::chrono::microseconds(jitter() % 50));
          }
        }
        bool did = false;
        try {
          did = sched_.step(w);
        } catch (...) {
          rt_.abort_round(std::current_exception());
          break;
        }
        if (did) {
          idle = 0;
        } else if (++idle < 32) {
          std::this_thread::yield();
        } else {
          parker.park_for(std::chrono::microseconds(std::min(1000, 10 << std::min(idle - 32, 7))));
        }
      }
      sync.arrive_and_wait();
    }
  };

  std::vector<std::jthread> threads;
  threads.reserve(static_cast<std::size_t>(n));
  for (int w = 0; w < n; ++w) threads.emplace_back(body, w);

  RunStats stats;
  const auto t0 = std::chrono::steady_clock::now();
  std::exception_ptr setup_error;
  for (int it = 0; it < dag.iterations(); ++it) {
    try {
      rt_.prepare(dag);
      rt_.spawn_roots(dag);
    } catch (...) {
      setup_error = std::current_exception();
      break;
    }
    sync.arrive_and_wait();
    rt_.wait_round();
    for (int w = 0; w < n; ++w) rt_.wake(w);
    sync.arrive_and_wait();
    if (rt_.failure()) break;
    ++stats.iterations;
    stats.tasks_executed += dag.size();
  }
  stats.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  stop.store(true, std::memory_order_release);
  sync.arrive_and_wait();
  threads.clear();

  if (setup_error) std::rethrow_exception(setup_error);
  if (auto e = rt_.failure()) std::rethrow_exception(e);
  return stats;
}

DurationModel analytic_durations(AnalyticCosts c) {
  auto last = std::make_shared<std::map<int, ModelKey>>();
  return [c, last](const Task& task, const PieceContext& ctx) {
    const double w = static_cast<double>(ctx.width);
    double t = c.task_seconds / w;
    const auto prev = last->find(ctx.worker);
    const bool warm = prev != last->end() && prev->second == task.model_key();
    if (warm && c.cache_bytes > 0.0 && c.working_set / w <= c.cache_bytes) t /= c.cache_speedup;
    (*last)[ctx.worker] = task.model_key();
    return t + c.piece_overhead;
  };
}

DurationModel table_durations(std::map<ModelKey, std::map<ResourcePartition, double>> costs,
                              double fallback) {
  return [costs = std::move(costs), fallback](const Task& task, const PieceContext& ctx) {
    const auto k = costs.find(task.model_key());
    if (k == costs.end()) return fallback;
    const auto p = k->second.find(ctx.partition);
    if (p == k->second.end()) return fallback;
    return p->second / static_cast<double>(ctx.width);
  };
}

VirtualClock::VirtualClock(int workers, DurationModel durations, bool execute_work)
    : clocks_(static_cast<std::size_t>(workers), 0.0),
      durations_(std::move(durations)),
      execute_work_(execute_work) {
  if (!durations_) throw std::invalid_argument("virtual clock needs a duration model");
}

void VirtualClock::on_acquire(int worker, double ready_at) { advance_to(worker, ready_at); }

void VirtualClock::advance_to(int worker, double t) {
  auto& c = clocks_.at(static_cast<std::size_t>(worker));
  c = std::max(c, t);
}

void VirtualClock::reset() { std::fill(clocks_.begin(), clocks_.end(), 0.0); }

TimeSource::Interval VirtualClock::run_piece(int worker, const Task& task, const Piece& piece,
                                             const PieceContext& ctx, const WorkFunction& work) {
  advance_to(worker, piece.enqueued_at);
  Interval iv;
  iv.start = now(worker);
  if (execute_work_ && work) work(ctx);
  const double d = durations_(task, ctx);
  if (!(d >= 0.0)) throw std::domain_error("duration model returned a negative time");
  iv.end = iv.start + d;
  clocks_[static_cast<std::size_t>(worker)] = iv.end;
  return iv;
}

VirtualExecutor::VirtualExecutor(Runtime& rt, DurationModel durations, bool execute_work,
                                 VirtualOptions options)
    : rt_(rt),
      sched_(rt),
      clock_(rt.worker_count(), std::move(durations), execute_work),
      options_(options) {
  rt_.set_time_source(&clock_);
}

VirtualExecutor::~VirtualExecutor() { rt_.set_time_source(nullptr); }

double VirtualExecutor::next_event(int w) const {
  const auto clocks = clock_.clocks();
  const double own = clocks[static_cast<std::size_t>(w)];
  double next = kNoHorizon;
  for (double c : clocks) {
    if (c > own) next = std::min(next, c);
  }
  for (int v = 0; v < rt_.worker_count(); ++v) {
    next = std::min(next, rt_.worker(v).stealing.next_ready_after(own));
  }
  return next == kNoHorizon ? own + options_.idle_quantum : std::max(next, own);
}

int VirtualExecutor::next_worker() const {
  // Earliest clock first; at equal clocks a worker with work of its own goes
  // before idle ones, then the lower index.
  const auto clocks = clock_.clocks();
  int best = -1;
  bool best_busy = false;
  for (int w = 0; w < rt_.worker_count(); ++w) {
    const double c = clocks[static_cast<std::size_t>(w)];
    const auto& ws = rt_.worker(w);
    const bool busy = !ws.sharing.empty() || ws.stealing.peek(c) != nullptr;
    if (best < 0 || c < clocks[static_cast<std::size_t>(best)] ||
        (c == clocks[static_cast<std::size_t>(best)] && busy && !best_busy)) {
      best = w;
      best_busy = busy;
    }
  }
  return best;
}

RunStats VirtualExecutor::run(Dag& dag) {
  rt_.set_time_source(&clock_);
  clock_.reset();
  RunStats stats;
  const int n = rt_.worker_count();
  double barrier = 0.0;
  for (int it = 0; it < dag.iterations(); ++it) {
    rt_.prepare(dag);
    rt_.spawn_roots(dag, barrier);
    std::uint64_t idle = 0;
    while (!rt_.round_done()) {
      const int w = next_worker();
      if (sched_.step(w)) {
        idle = 0;
        continue;
      }
      clock_.advance_to(w, next_event(w));
      if (++idle > options_.stall_limit) {
        throw std::runtime_error("virtual run made no progress; " +
                                 std::to_string(rt_.remaining()) + " tasks stuck");
      }
    }
    const auto clocks = clock_.clocks();
    barrier = *std::max_element(clocks.begin(), clocks.end());
    for (int w = 0; w < n; ++w) clock_.advance_to(w, barrier);
    if (rt_.failure()) break;
    ++stats.iterations;
    stats.tasks_executed += dag.size();
  }
  stats.elapsed = barrier;
  if (auto e = rt_.failure()) std::rethrow_exception(e);
  return stats;
}

}  // namespace moldsched
