#include "moldsched/task.hpp"

#include <stdexcept>

namespace moldsched {

TypeId TaskTypeRegistry::register_type(std::string_view name) {
  if (name.empty()) throw std::invalid_argument("task type name must be non-empty");
  std::lock_guard lock(mu_);
  auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<TypeId>(names_.size()));
  if (inserted) names_.emplace_back(name);
  return it->second;
}

TypeId TaskTypeRegistry::register_type_at_depth(std::string_view name, std::uint32_t depth) {
  return register_type(std::string(name) + "@" + std::to_string(depth));
}

std::size_t TaskTypeRegistry::size() const {
  std::lock_guard lock(mu_);
  return names_.size();
}

std::string TaskTypeRegistry::name(TypeId id) const {
  std::lock_guard lock(mu_);
  return names_.at(id);
}

IndexRange piece_range(int index, int width, std::size_t n) {
  if (width < 1 || index < 0 || index >= width) {
    throw std::invalid_argument("piece index outside [0, width)");
  }
  const auto w = static_cast<std::size_t>(width);
  const auto i = static_cast<std::size_t>(index);
  return {n * i / w, n * (i + 1) / w};
}

Task::Task(TaskId id, TypeId type, Sta sta, WorkFunction work, bool moldable)
    : id_(id), type_(type), sta_(sta), work_(std::move(work)), moldable_(moldable) {
  if (!work_) throw std::invalid_argument("task needs a work function");
}

Task& Dag::add_task(TypeId type, Sta sta, WorkFunction work, bool moldable) {
  return tasks_.emplace_back(static_cast<TaskId>(tasks_.size()), type, sta, std::move(work),
                             moldable);
}

void Dag::add_edge(Task& from, Task& to, EdgeKind kind) {
  if (from.id() >= to.id()) {
    throw std::invalid_argument("edges must point from an earlier task to a later one");
  }
  if (&tasks_.at(from.id()) != &from || &tasks_.at(to.id()) != &to) {
    throw std::invalid_argument("edge endpoints belong to another DAG");
  }
  from.successors_.push_back(&to);
  ++to.predecessors_;
  ++(kind == EdgeKind::kData ? data_edges_ : execution_edges_);
}

std::vector<Task*> Dag::roots() {
  std::vector<Task*> out;
  for (auto& t : tasks_) {
    if (t.predecessors_ == 0) out.push_back(&t);
  }
  return out;
}

void Dag::set_iterations(int n) {
  if (n < 1) throw std::invalid_argument("iterations must be >= 1");
  iterations_ = n;
}

}  // namespace moldsched
