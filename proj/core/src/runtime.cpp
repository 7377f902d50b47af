#include "moldsched/runtime.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace moldsched {

double WallClock::now(int /*worker*/) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
}

TimeSource::Interval WallClock::run_piece(int worker, const Task& /*task*/,
                                          const Piece& /*piece*/, const PieceContext& ctx,
                                          const WorkFunction& work) {
  Interval iv;
  iv.start = now(worker);
  work(ctx);
  iv.end = now(worker);
  return iv;
}

Runtime::Runtime(Layout layout, SchedulerConfig config)
    : layout_(std::move(layout)),
      config_(config),
      key_bits_(max_bits(layout_.worker_count())),
      model_(layout_, key_bits_, config.alpha),
      time_(&wall_),
      spawn_rng_(config.rng_seed) {
  config_.validate();
  workers_.reserve(static_cast<std::size_t>(worker_count()));
  std::seed_seq seq{config_.rng_seed, static_cast<std::uint64_t>(0x6d6f6c64)};
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(worker_count()));
  seq.generate(seeds.begin(), seeds.end());
  for (int w = 0; w < worker_count(); ++w) {
    workers_.push_back(std::make_unique<WorkerState>(w, seeds[static_cast<std::size_t>(w)]));
  }
}

void Runtime::set_time_source(TimeSource* source) { time_ = source ? source : &wall_; }

void Runtime::prepare(Dag& dag) {
  if (remaining() != 0) throw std::logic_error("prepare: previous round still running");
  model_.ensure_types(types_.size());
  for (auto& t : dag) {
    if (t.type_ >= types_.size()) {
      throw std::invalid_argument("task " + std::to_string(t.id()) + " uses unregistered type " +
                                  std::to_string(t.type_));
    }
    if (t.sta_.bits != key_bits_) {
      throw std::invalid_argument("task " + std::to_string(t.id()) +
                                  " has an STA built for a different worker count");
    }
    const int state = t.state_.load(std::memory_order_relaxed);
    if (state != Task::kIdle && state != Task::kDone) {
      throw std::logic_error("prepare: task " + std::to_string(t.id()) + " is still in flight");
    }
    t.state_.store(Task::kWaiting, std::memory_order_relaxed);
    t.deps_.store(t.predecessors_, std::memory_order_relaxed);
    t.pending_.store(0, std::memory_order_relaxed);
    t.ready_at_ = 0.0;
  }
  round_done_.store(dag.size() == 0 ? 1 : 0, std::memory_order_release);
  remaining_.store(dag.size(), std::memory_order_release);
}

void Runtime::spawn(Task& task, double ready_at) {
  int expected = Task::kWaiting;
  if (task.deps_.load(std::memory_order_acquire) > 0) {
    // Parked: successors of its predecessors will release it. Spawning it a
    // second time is still a duplicate.
    if (!task.state_.compare_exchange_strong(expected, Task::kParked)) {
      throw std::logic_error("duplicate spawn of task " + std::to_string(task.id()));
    }
    return;
  }
  if (!task.state_.compare_exchange_strong(expected, Task::kQueued)) {
    throw std::logic_error("duplicate spawn of task " + std::to_string(task.id()));
  }
  task.ready_at_ = ready_at;
  const int target = route(task, spawn_rng_);
  worker(target).stealing.push(&task, ready_at);
  wake(target);
}

void Runtime::spawn_roots(Dag& dag, double ready_at) {
  for (Task* t : dag.roots()) spawn(*t, ready_at);
}

void Runtime::wait_round() {
  while (round_done_.load(std::memory_order_acquire) == 0) round_done_.wait(0);
}

int Runtime::route(const Task& task, std::mt19937_64& rng) const {
  if (config_.sta) return task.sta_.initial_worker;
  std::uniform_int_distribution<int> pick(0, worker_count() - 1);
  return pick(rng);
}

void Runtime::acquire(int w, Task& task) { time_->on_acquire(w, task.ready_at_); }

void Runtime::dispatch_moldable(Task& task, const ResourcePartition& part, int by_worker) {
  if (!layout_.is_legal(part)) {
    throw std::invalid_argument("dispatch to illegal partition " + to_string(part));
  }
  if (part.width > 1 && !task.moldable_) {
    throw std::invalid_argument("task " + std::to_string(task.id()) +
                                " is not moldable; width must be 1");
  }
  int expected = Task::kQueued;
  if (!task.state_.compare_exchange_strong(expected, Task::kDispatched,
                                           std::memory_order_acq_rel)) {
    throw std::logic_error("dispatch of task " + std::to_string(task.id()) +
                           " that is not ready");
  }

  const double at = now(by_worker);
  auto& me = worker(by_worker);
  me.decisions.push_back(Decision{seq_.fetch_add(1, std::memory_order_relaxed), at, by_worker,
                                  task.type_, task.sta_.key, part});

  task.assigned_ = part;
  task.dispatched_at_ = at;
  if (task.piece_capacity_ < part.width) {
    task.piece_done_ = std::make_unique<std::atomic<bool>[]>(static_cast<std::size_t>(part.width));
    task.piece_capacity_ = part.width;
  }
  for (int i = 0; i < part.width; ++i) {
    task.piece_done_[static_cast<std::size_t>(i)].store(false, std::memory_order_relaxed);
  }
  task.leader_start_.store(0.0, std::memory_order_relaxed);
  task.leader_end_.store(0.0, std::memory_order_relaxed);
  task.last_end_.store(-kNoHorizon, std::memory_order_relaxed);
  task.pending_.store(part.width, std::memory_order_release);

  for (int i = 0; i < part.width; ++i) {
    const int target = part.leader + i;
    worker(target).sharing.push(Piece{&task, i, at});
    if (target != by_worker) wake(target);
  }
}

bool Runtime::run_sharing(int w) {
  auto& me = worker(w);
  auto piece = me.sharing.pop();
  if (!piece) return false;
  {
    Task& task = *piece->task;
    const ResourcePartition part = task.assigned_;
    const PieceContext ctx{piece->index, part.width, part, w};
    TimeSource::Interval when;
    try {
      when = time_->run_piece(w, task, *piece, ctx, task.work_);
    } catch (...) {
      record_failure(std::current_exception());
      when.start = when.end = now(w);
    }
    task.piece_runs_.fetch_add(1, std::memory_order_relaxed);
    ++me.stats.pieces;
    complete_piece(task, piece->index, when, w);
  }
  return true;
}

void Runtime::complete_piece(Task& task, int piece, TimeSource::Interval when, int by_worker) {
  const ResourcePartition part = task.assigned_;
  if (task.state_.load(std::memory_order_acquire) != Task::kDispatched || piece < 0 ||
      piece >= part.width) {
    throw std::logic_error("completion of piece " + std::to_string(piece) + " of task " +
                           std::to_string(task.id()) + " that was not dispatched");
  }
  if (task.piece_done_[static_cast<std::size_t>(piece)].exchange(true, std::memory_order_acq_rel)) {
    throw std::logic_error("piece " + std::to_string(piece) + " of task " +
                           std::to_string(task.id()) + " completed twice");
  }
  if (piece == 0) {
    task.leader_start_.store(when.start, std::memory_order_relaxed);
    task.leader_end_.store(when.end, std::memory_order_relaxed);
  }
  double seen = task.last_end_.load(std::memory_order_relaxed);
  while (seen < when.end &&
         !task.last_end_.compare_exchange_weak(seen, when.end, std::memory_order_relaxed)) {
  }
  if (task.pending_.fetch_sub(1, std::memory_order_acq_rel) == 1) finish(task, by_worker);
}

void Runtime::finish(Task& task, int by_worker) {
  const ResourcePartition part = task.assigned_;
  const double last = task.last_end_.load(std::memory_order_relaxed);
  if (config_.perf_model) {
    const double elapsed =
        config_.timing == TimingMode::kLeaderSpan
            ? last - task.dispatched_at_
            : task.leader_end_.load(std::memory_order_relaxed) -
                  task.leader_start_.load(std::memory_order_relaxed);
    model_.record(task.model_key(), part, elapsed);
  }
  task.executions_.fetch_add(1, std::memory_order_acq_rel);
  task.state_.store(Task::kDone, std::memory_order_release);

  for (Task* s : task.successors_) {
    if (s->deps_.fetch_sub(1, std::memory_order_acq_rel) == 1) release(*s, by_worker, last);
  }
  if (remaining_.fetch_sub(1, std::memory_order_acq_rel) == 1) signal_round_done();
}

void Runtime::release(Task& task, int by_worker, double ready_at) {
  int state = task.state_.load(std::memory_order_acquire);
  if ((state != Task::kWaiting && state != Task::kParked) ||
      !task.state_.compare_exchange_strong(state, Task::kQueued, std::memory_order_acq_rel)) {
    throw std::logic_error("task " + std::to_string(task.id()) + " released twice");
  }
  task.ready_at_ = ready_at;
  const int target = route(task, worker(by_worker).rng);
  worker(target).stealing.push(&task, ready_at);
  if (target != by_worker) wake(target);
}

void Runtime::abort_round(std::exception_ptr e) {
  record_failure(e);
  signal_round_done();
}

void Runtime::signal_round_done() {
  round_done_.store(1, std::memory_order_release);
  round_done_.notify_all();
}

std::vector<Decision> Runtime::decisions() const {
  std::vector<Decision> out;
  for (const auto& w : workers_) out.insert(out.end(), w->decisions.begin(), w->decisions.end());
  std::sort(out.begin(), out.end(),
            [](const Decision& a, const Decision& b) { return a.seq < b.seq; });
  return out;
}

void Runtime::clear_decisions() {
  for (auto& w : workers_) w->decisions.clear();
  seq_.store(0, std::memory_order_relaxed);
}

WorkerStats Runtime::total_stats() const {
  WorkerStats s;
  for (const auto& w : workers_) {
    s.pieces += w->stats.pieces;
    s.local_pops += w->stats.local_pops;
    s.local_steals += w->stats.local_steals;
    s.global_steals += w->stats.global_steals;
    s.forced_steals += w->stats.forced_steals;
    s.rejected_steals += w->stats.rejected_steals;
  }
  return s;
}

std::exception_ptr Runtime::failure() const {
  std::lock_guard lock(failure_mu_);
  return failure_;
}

void Runtime::record_failure(std::exception_ptr e) {
  std::lock_guard lock(failure_mu_);
  if (!failure_) failure_ = e;
}

}  // namespace moldsched
