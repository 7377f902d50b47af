#include "moldsched/scheduler.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace moldsched {

Scheduler::Scheduler(Runtime& rt) : rt_(rt) {
  const auto& layout = rt_.layout();
  const int n = layout.worker_count();
  probe_.resize(static_cast<std::size_t>(n));
  remote_.resize(static_cast<std::size_t>(n));
  single_.resize(static_cast<std::size_t>(n));
  for (int w = 0; w < n; ++w) {
    std::set<int> members;
    for (const auto& p : layout.inclusive_partitions(w)) {
      for (int m = p.leader; m <= p.last(); ++m) {
        if (m != w) members.insert(m);
      }
    }
    std::vector<int> sorted(members.begin(), members.end());
    auto& order = probe_[static_cast<std::size_t>(w)];
    if (!sorted.empty()) {
      const std::size_t start = static_cast<std::size_t>(w + 1) % sorted.size();
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        order.push_back(sorted[(start + i) % sorted.size()]);
      }
    }
    auto& remote = remote_[static_cast<std::size_t>(w)];
    for (int v = 0; v < n; ++v) {
      if (v == w) continue;
      if (rt_.config().local_steal && members.contains(v)) continue;
      remote.push_back(v);
    }
    single_[static_cast<std::size_t>(w)] = {ResourcePartition{w, 1}};
    all_single_.push_back(ResourcePartition{w, 1});
  }
}

std::span<const int> Scheduler::local_probe_order(int w) const {
  return probe_.at(static_cast<std::size_t>(w));
}

std::span<const int> Scheduler::remote_victims(int w) const {
  return remote_.at(static_cast<std::size_t>(w));
}

bool Scheduler::width_pinned(const Task& task) const {
  return !rt_.config().allows_width_above_one() || !task.moldable();
}

ResourcePartition Scheduler::place_local(int w, const Task& task) const {
  if (width_pinned(task)) return ResourcePartition{w, 1};
  return rt_.model().min_cost_partition(task.model_key(), rt_.layout().inclusive_partitions(w));
}

ResourcePartition Scheduler::place_global(const Task& task) const {
  if (width_pinned(task)) return rt_.model().min_cost_partition(task.model_key(), all_single_);
  return rt_.model().global_min_partition(task.model_key());
}

void Scheduler::run_task(int w, Task& task, const ResourcePartition& part) {
  rt_.worker(w).stealing_attempts = 0;
  rt_.acquire(w, task);
  rt_.dispatch_moldable(task, part, w);
}

Task* Scheduler::select_local_steal_victim(int w) {
  const double h = rt_.time().horizon(w);
  for (int v : local_probe_order(w)) {
    if (Task* t = rt_.worker(v).stealing.steal(h)) return t;
  }
  return nullptr;
}

bool Scheduler::step(int w) {
  return rt_.config().policy == Policy::kRandomStealing ? random_step(w) : adaptive_step(w);
}

bool Scheduler::adaptive_step(int w) {
  if (rt_.run_sharing(w)) return true;

  auto& me = rt_.worker(w);
  const double h = rt_.time().horizon(w);

  if (Task* t = me.stealing.pop(h)) {
    ++me.stats.local_pops;
    run_task(w, *t, place_local(w, *t));
    return true;
  }

  if (rt_.config().local_steal) {
    if (Task* t = select_local_steal_victim(w)) {
      ++me.stats.local_steals;
      run_task(w, *t, place_local(w, *t));
      return true;
    }
  }

  if (!rt_.config().global_steal) return false;
  const auto& remote = remote_[static_cast<std::size_t>(w)];
  if (remote.empty()) return false;

  std::uniform_int_distribution<std::size_t> pick(0, remote.size() - 1);
  const std::size_t start = pick(me.rng);
  StealingQueue* victim = nullptr;
  for (std::size_t i = 0; i < remote.size(); ++i) {
    auto& q = rt_.worker(remote[(start + i) % remote.size()]).stealing;
    if (q.peek(h)) {
      victim = &q;
      break;
    }
  }
  if (!victim) return false;

  if (me.stealing_attempts >= rt_.config().idle_tries) {
    if (Task* t = victim->steal(h)) {
      ++me.stats.forced_steals;
      run_task(w, *t, place_local(w, *t));
      return true;
    }
    return false;
  }

  ResourcePartition target{};
  Task* t = victim->steal_if(
      [&](Task* cand) {
        target = place_global(*cand);
        return target.contains(w);
      },
      h);
  if (t) {
    ++me.stats.global_steals;
    run_task(w, *t, target);
    return true;
  }
  ++me.stats.rejected_steals;
  ++me.stealing_attempts;
  return false;
}

bool Scheduler::random_step(int w) {
  if (rt_.run_sharing(w)) return true;

  auto& me = rt_.worker(w);
  const double h = rt_.time().horizon(w);
  if (Task* t = me.stealing.pop(h)) {
    ++me.stats.local_pops;
    run_task(w, *t, ResourcePartition{w, 1});
    return true;
  }
  const int n = rt_.worker_count();
  if (n == 1) return false;
  std::uniform_int_distribution<int> pick(0, n - 2);
  int v = pick(me.rng);
  if (v >= w) ++v;
  if (Task* t = rt_.worker(v).stealing.steal(h)) {
    ++me.stats.global_steals;
    run_task(w, *t, ResourcePartition{w, 1});
    return true;
  }
  return false;
}

}  // namespace moldsched
