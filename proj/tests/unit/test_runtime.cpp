#include <doctest.h>

#include <mutex>
#include <stdexcept>
#include <numeric>
#include <vector>

#include <moldsched/runtime.hpp>

#include "support.hpp"

using namespace moldsched;

namespace {

Layout width_three_layout() {
  std::vector<int> aff(8);
  std::iota(aff.begin(), aff.end(), 0);
  std::vector<std::vector<int>> widths(8, std::vector<int>{1});
  widths[3] = {1, 3};
  return Layout::from_tables(aff, widths);
}

// STA key whose initial worker is `w` on an 8-worker runtime.
std::uint64_t key_for(const Runtime& rt, int w) {
  return static_cast<std::uint64_t>(w) << (rt.key_bits() - 3);
}

const WorkFunction kNoop = [](const PieceContext&) {};

}  // namespace

TEST_CASE("task type ids are dense and stable") {
  TaskTypeRegistry r;
  CHECK(r.register_type("matmul") == 0);
  CHECK(r.register_type("copy") == 1);
  CHECK(r.register_type("matmul") == 0);
  CHECK(r.register_type_at_depth("copy", 3) == 2);
  CHECK(r.name(2) == "copy@3");
  CHECK(r.size() == 3);
  CHECK_THROWS_AS(r.register_type(""), std::invalid_argument);
}

TEST_CASE("piece ranges tile the index space") {
  for (int width : {1, 2, 3, 7}) {
    std::size_t next = 0;
    for (int i = 0; i < width; ++i) {
      const auto r = piece_range(i, width, 100);
      CHECK(r.begin == next);
      next = r.end;
    }
    CHECK(next == 100);
  }
  CHECK_THROWS_AS(piece_range(2, 2, 10), std::invalid_argument);
}

TEST_CASE("DAG edges must point forward") {
  Dag dag;
  Task& a = dag.add_task(0, Sta{}, kNoop);
  Task& b = dag.add_task(0, Sta{}, kNoop);
  dag.add_edge(a, b);
  dag.add_edge(a, b, EdgeKind::kExecution);
  CHECK_THROWS_AS(dag.add_edge(b, a), std::invalid_argument);
  CHECK(dag.edge_count(EdgeKind::kData) == 1);
  CHECK(dag.edge_count(EdgeKind::kExecution) == 1);
  CHECK(b.predecessor_count() == 2);
  CHECK(dag.roots() == std::vector<Task*>{&a});
}

TEST_CASE("spawn routes ready tasks to their initial worker") {
  Runtime rt(testing::eight_worker_layout());
  const TypeId t = rt.types().register_type("t");
  Dag dag;
  Task& root = dag.add_task(t, rt.make_sta(key_for(rt, 5)), kNoop);
  Task& other = dag.add_task(t, rt.make_sta(key_for(rt, 2)), kNoop);
  Task& child = dag.add_task(t, rt.make_sta(key_for(rt, 2)), kNoop);
  dag.add_edge(root, child);
  dag.add_edge(other, child);
  CHECK(root.sta().initial_worker == 5);

  rt.prepare(dag);
  rt.spawn_roots(dag);
  CHECK(rt.worker(5).stealing.size() == 1);
  CHECK(rt.worker(5).stealing.peek() == &root);
  CHECK(rt.worker(2).stealing.peek() == &other);

  SUBCASE("a task with unmet dependencies is in no queue") {
    rt.spawn(child);
    std::size_t queued = 0;
    for (int w = 0; w < 8; ++w) queued += rt.worker(w).stealing.size();
    CHECK(queued == 2);
    CHECK_THROWS_AS(rt.spawn(child), std::logic_error);
  }
  SUBCASE("duplicate spawn of a ready task") {
    CHECK_THROWS_AS(rt.spawn(root), std::logic_error);
  }
  SUBCASE("finishing both predecessors enqueues the successor once, at its own worker") {
    Task* r = rt.worker(5).stealing.pop();
    rt.dispatch_moldable(*r, {5, 1}, 5);
    CHECK(rt.run_sharing(5));
    CHECK(child.deps_remaining() == 1);
    CHECK(rt.worker(2).stealing.size() == 1);

    Task* o = rt.worker(2).stealing.pop();
    rt.dispatch_moldable(*o, {2, 1}, 2);
    CHECK(rt.run_sharing(2));
    CHECK(rt.worker(2).stealing.size() == 1);
    CHECK(rt.worker(2).stealing.peek() == &child);
    CHECK(rt.worker(5).stealing.empty());
  }
}

TEST_CASE("moldable dispatch sends piece i to worker leader + i") {
  Runtime rt(width_three_layout());
  const TypeId t = rt.types().register_type("t");
  std::mutex mu;
  std::vector<PieceContext> seen;
  Dag dag;
  Task& task = dag.add_task(t, rt.make_sta(key_for(rt, 3)), [&](const PieceContext& c) {
    std::lock_guard lock(mu);
    seen.push_back(c);
  });
  rt.prepare(dag);
  rt.spawn_roots(dag);
  Task* got = rt.worker(3).stealing.pop();
  REQUIRE(got == &task);
  rt.dispatch_moldable(task, {3, 3}, 3);
  CHECK(task.pending_pieces() == 3);
  for (int w : {3, 4, 5}) CHECK(rt.worker(w).sharing.size() == 1);
  CHECK(rt.worker(2).sharing.empty());
  CHECK(rt.worker(6).sharing.empty());

  for (int w : {5, 3, 4}) CHECK(rt.run_sharing(w));
  REQUIRE(seen.size() == 3);
  for (const auto& c : seen) {
    CHECK(c.worker == 3 + c.index);
    CHECK(c.width == 3);
    CHECK(c.partition == ResourcePartition{3, 3});
  }
  CHECK(task.executions() == 1);
  CHECK(rt.model().cell(task.model_key(), {3, 3}).measured);
  CHECK(rt.round_done());
  const auto d = rt.decisions();
  REQUIRE(d.size() == 1);
  CHECK(d[0].worker == 3);
  CHECK(d[0].partition == ResourcePartition{3, 3});
}

TEST_CASE("completion bookkeeping") {
  Runtime rt(width_three_layout());
  const TypeId t = rt.types().register_type("t");
  Dag dag;
  Task& a = dag.add_task(t, rt.make_sta(key_for(rt, 3)), kNoop);
  Task& b = dag.add_task(t, rt.make_sta(key_for(rt, 6)), kNoop);
  dag.add_edge(a, b);
  rt.prepare(dag);
  rt.spawn_roots(dag);
  rt.worker(3).stealing.pop();
  rt.dispatch_moldable(a, {3, 3}, 3);

  rt.complete_piece(a, 0, {0.0, 1.0}, 3);
  rt.complete_piece(a, 1, {0.0, 1.0}, 4);
  CHECK(b.deps_remaining() == 1);
  CHECK_FALSE(rt.model().cell(a.model_key(), {3, 3}).measured);
  CHECK_THROWS_AS(rt.complete_piece(a, 1, {0.0, 1.0}, 4), std::logic_error);

  rt.complete_piece(a, 2, {0.0, 1.0}, 5);
  CHECK(b.deps_remaining() == 0);
  CHECK(rt.model().cell(a.model_key(), {3, 3}).measured);
  CHECK(rt.worker(6).stealing.peek() == &b);
  CHECK_THROWS_AS(rt.complete_piece(a, 2, {0.0, 1.0}, 5), std::logic_error);
}

TEST_CASE("dispatch validation happens before any piece is queued") {
  Runtime rt(width_three_layout());
  const TypeId t = rt.types().register_type("t");
  Dag dag;
  Task& a = dag.add_task(t, rt.make_sta(key_for(rt, 3)), kNoop);
  Task& rigid = dag.add_task(t, rt.make_sta(key_for(rt, 3)), kNoop, false);
  rt.prepare(dag);
  rt.spawn_roots(dag);
  CHECK_THROWS_AS(rt.dispatch_moldable(a, {2, 3}, 3), std::invalid_argument);
  CHECK_THROWS_AS(rt.dispatch_moldable(rigid, {3, 3}, 3), std::invalid_argument);
  for (int w = 0; w < 8; ++w) CHECK(rt.worker(w).sharing.empty());
  rt.dispatch_moldable(a, {3, 1}, 3);
  CHECK_THROWS_AS(rt.dispatch_moldable(a, {3, 1}, 3), std::logic_error);
}

TEST_CASE("width one runs a single piece on the leader") {
  Runtime rt(testing::eight_worker_layout());
  const TypeId t = rt.types().register_type("t");
  int runs = 0;
  Dag dag;
  Task& a = dag.add_task(t, rt.make_sta(key_for(rt, 1)), [&](const PieceContext& c) {
    ++runs;
    CHECK(c.worker == 1);
    CHECK(c.width == 1);
  });
  rt.prepare(dag);
  rt.spawn_roots(dag);
  rt.worker(1).stealing.pop();
  rt.dispatch_moldable(a, {1, 1}, 1);
  CHECK_FALSE(rt.run_sharing(0));
  CHECK(rt.run_sharing(1));
  CHECK(runs == 1);
  CHECK(a.piece_executions() == 1);
}

TEST_CASE("a throwing work function is recorded as the round failure") {
  Runtime rt(testing::eight_worker_layout());
  const TypeId t = rt.types().register_type("t");
  Dag dag;
  Task& a = dag.add_task(t, rt.make_sta(key_for(rt, 0)),
                         [](const PieceContext&) { throw std::runtime_error("boom"); });
  rt.prepare(dag);
  rt.spawn_roots(dag);
  rt.worker(0).stealing.pop();
  rt.dispatch_moldable(a, {0, 1}, 0);
  CHECK(rt.run_sharing(0));
  REQUIRE(rt.failure());
  CHECK_THROWS_WITH_AS(std::rethrow_exception(rt.failure()), "boom", std::runtime_error);
}

TEST_CASE("queues") {
  Dag dag;
  Task& a = dag.add_task(0, Sta{}, kNoop);
  Task& b = dag.add_task(0, Sta{}, kNoop);
  Task& c = dag.add_task(0, Sta{}, kNoop);
  StealingQueue q;
  q.push(&a, 0.0);
  q.push(&b, 1.0);
  q.push(&c, 2.0);
  CHECK(q.peek(0.5) == &a);
  CHECK(q.pop(1.5) == &b);
  CHECK(q.next_ready_after(0.0) == 2.0);
  CHECK(q.steal_if([](Task*) { return false; }) == nullptr);
  CHECK(q.steal() == &a);
  CHECK(q.pop(1.0) == nullptr);
  CHECK(q.pop() == &c);
  CHECK(q.empty());

  SharingQueue s;
  s.push({&a, 0, 0.0});
  s.push({&b, 1, 0.0});
  CHECK(s.pop()->task == &a);
  CHECK(s.pop()->task == &b);
  CHECK_FALSE(s.pop());
}

TEST_CASE("configuration validation") {
  CHECK_NOTHROW(SchedulerConfig::for_policy(Policy::kRandomStealing).validate());
  CHECK_NOTHROW(SchedulerConfig::for_policy(Policy::kAdaptiveSingle).validate());
  auto c = SchedulerConfig::for_policy(Policy::kRandomStealing);
  c.moldability = true;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(Runtime(testing::eight_worker_layout(), c), ConfigError);
  CHECK(parse_policy("arms-m") == Policy::kAdaptiveMoldable);
  CHECK_FALSE(parse_policy("bogus"));
}
