#include "moldsched/queues.hpp"

#include <iterator>

namespace moldsched {

void StealingQueue::push(Task* task, double ready_at) {
  std::lock_guard lock(mu_);
  items_.push_back({task, ready_at});
  size_.fetch_add(1, std::memory_order_relaxed);
}

Task* StealingQueue::pop(double horizon) {
  std::lock_guard lock(mu_);
  for (auto it = items_.rbegin(); it != items_.rend(); ++it) {
    if (it->ready_at <= horizon) {
      Task* t = it->task;
      items_.erase(std::next(it).base());
      size_.fetch_sub(1, std::memory_order_relaxed);
      return t;
    }
  }
  return nullptr;
}

Task* StealingQueue::steal(double horizon) {
  return steal_if([](Task*) { return true; }, horizon);
}

Task* StealingQueue::peek(double horizon) const {
  std::lock_guard lock(mu_);
  const auto it = front_visible(horizon);
  return it == items_.end() ? nullptr : it->task;
}

double StealingQueue::next_ready_after(double t) const {
  std::lock_guard lock(mu_);
  double best = kNoHorizon;
  for (const auto& e : items_) {
    if (e.ready_at > t && e.ready_at < best) best = e.ready_at;
  }
  return best;
}

StealingQueue::Items::iterator StealingQueue::front_visible(double horizon) {
  for (auto it = items_.begin(); it != items_.end(); ++it) {
    if (it->ready_at <= horizon) return it;
  }
  return items_.end();
}

StealingQueue::Items::const_iterator StealingQueue::front_visible(double horizon) const {
  for (auto it = items_.begin(); it != items_.end(); ++it) {
    if (it->ready_at <= horizon) return it;
  }
  return items_.end();
}

void SharingQueue::push(const Piece& piece) {
  std::lock_guard lock(mu_);
  items_.push_back(piece);
  size_.fetch_add(1, std::memory_order_relaxed);
}

std::optional<Piece> SharingQueue::pop() {
  std::lock_guard lock(mu_);
  if (items_.empty()) return std::nullopt;
  Piece p = items_.front();
  items_.pop_front();
  size_.fetch_sub(1, std::memory_order_relaxed);
  return p;
}

}  // namespace moldsched
