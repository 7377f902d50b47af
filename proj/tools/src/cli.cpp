#include "moldsched/cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <moldsched/bench/chain.hpp>
#include <moldsched/bench/matmul.hpp>
#include <moldsched/bench/sparselu.hpp>
#include <moldsched/bench/stencil.hpp>
#include <moldsched/executor.hpp>
#include <moldsched/trace.hpp>

namespace moldsched::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Options {
  std::string layout_path;
  int workers = 0;
  std::string policy = "arms-m";
  std::string sta, perf_model, moldability, local_steal, global_steal;
  std::optional<int> idle_tries;
  std::optional<double> alpha;
  std::uint64_t seed = 1;
  std::string timing = "leader-span";

  std::string bench = "chain";
  std::string kind = "matmul";
  std::optional<int> parallelism;
  std::optional<int> depth;
  std::optional<std::size_t> n;
  std::size_t rows = 64, cols = 64, block = 16;
  int timesteps = 10;
  std::size_t blocks = 8, block_size = 32;
  bool dense = false;
  std::size_t leaf = 128;

  bool verify = false;
  int repeat = 1;
  std::string out_dir;
  std::string inject_costs;
  bool deterministic = false;
  std::string virtual_costs;
  AnalyticCosts sim;
  std::vector<int> sweep;
  std::size_t sweep_tasks = 5120;
  bool no_pin = false;
  std::uint64_t stress = 0;
  bool dump_model = false;
};

std::optional<bool> parse_switch(const std::string& name, const std::string& v) {
  if (v.empty()) return std::nullopt;
  if (v == "on" || v == "1" || v == "true" || v == "yes") return true;
  if (v == "off" || v == "0" || v == "false" || v == "no") return false;
  throw UsageError("--" + name + " expects on or off, got '" + v + "'");
}

Layout resolve_layout(const Options& o) {
  std::string path = o.layout_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kLayoutEnv); env && *env) path = env;
  }
  if (!path.empty()) {
    if (o.workers > 0) throw UsageError("--workers conflicts with a layout file");
    return Layout::load(path);
  }
  int n = o.workers > 0 ? o.workers : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  return Layout::power_of_two(n, n);
}

SchedulerConfig resolve_config(const Options& o) {
  const auto policy = parse_policy(o.policy);
  if (!policy) throw UsageError("unknown policy '" + o.policy + "' (arms-m, arms-1, rws)");
  auto cfg = SchedulerConfig::for_policy(*policy);
  if (auto v = parse_switch("sta", o.sta)) cfg.sta = *v;
  if (auto v = parse_switch("perf-model", o.perf_model)) cfg.perf_model = *v;
  if (auto v = parse_switch("moldability", o.moldability)) cfg.moldability = *v;
  if (auto v = parse_switch("local-steal", o.local_steal)) cfg.local_steal = *v;
  if (auto v = parse_switch("global-steal", o.global_steal)) cfg.global_steal = *v;
  if (o.idle_tries) cfg.idle_tries = *o.idle_tries;
  if (o.alpha) cfg.alpha = *o.alpha;
  cfg.rng_seed = o.seed;
  const auto timing = parse_timing_mode(o.timing);
  if (!timing) throw UsageError("unknown timing mode '" + o.timing + "'");
  cfg.timing = *timing;
  cfg.validate();
  return cfg;
}

std::unique_ptr<bench::Workload> make_workload(const Options& o, int parallelism, int depth,
                                               const bench::BuildContext& ctx) {
  if (o.bench == "chain" || o.bench == "nbody") {
    bench::ChainSpec spec;
    if (o.bench == "nbody") {
      spec.kind = bench::ChainKind::kNbody;
    } else {
      const auto kind = bench::parse_chain_kind(o.kind);
      if (!kind) throw UsageError("unknown chain kind '" + o.kind + "'");
      spec.kind = *kind;
    }
    spec.parallelism = parallelism;
    spec.depth = depth;
    spec.n = o.n.value_or(spec.kind == bench::ChainKind::kMatmul ||
                                  spec.kind == bench::ChainKind::kMixed
                              ? 64
                              : 4096);
    if (spec.kind == bench::ChainKind::kNbody && !o.n) spec.n = 256;
    return std::make_unique<bench::ChainWorkload>(spec, ctx);
  }
  if (o.bench == "stencil") {
    return std::make_unique<bench::StencilWorkload>(
        bench::GridSpec{o.rows, o.cols, o.block, o.timesteps}, ctx);
  }
  if (o.bench == "sparselu") {
    bench::SparseLuSpec spec;
    spec.blocks = o.blocks;
    spec.block_size = o.block_size;
    spec.dense = o.dense;
    return std::make_unique<bench::SparseLuWorkload>(spec, ctx);
  }
  if (o.bench == "matmul") {
    return std::make_unique<bench::MatmulWorkload>(bench::MatmulSpec{o.n.value_or(512), o.leaf},
                                                   ctx);
  }
  throw UsageError("unknown benchmark '" + o.bench + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

struct RunResult {
  ScheduleTrace trace;
  std::vector<Decision> decisions;
  std::string model_csv;
  bench::Verdict verdict;
  bool verified = false;
  double checksum = 0.0;
};

using CostMap = std::map<ModelKey, std::map<ResourcePartition, double>>;

CostMap to_cost_map(const std::vector<CostEntry>& entries) {
  CostMap m;
  for (const auto& e : entries) m[e.key][e.partition] = e.cost;
  return m;
}

class Harness {
 public:
  Harness(Options o, std::ostream& out, std::ostream& err)
      : o_(std::move(o)), out_(out), err_(err), layout_(resolve_layout(o_)),
        config_(resolve_config(o_)) {
    if (o_.repeat < 1) throw UsageError("--repeat must be >= 1");
    if (!o_.inject_costs.empty()) injected_ = parse_cost_csv(read_file(o_.inject_costs));
    if (!o_.virtual_costs.empty()) {
      virtual_table_ = to_cost_map(parse_cost_csv(read_file(o_.virtual_costs)));
    } else if (!injected_.empty()) {
      virtual_table_ = to_cost_map(injected_);
    }
    if (!o_.sweep.empty()) {
      if (o_.bench != "chain" && o_.bench != "nbody") {
        throw UsageError("--sweep applies to the chain benchmarks only");
      }
      for (int p : o_.sweep) {
        if (p < 1 || o_.sweep_tasks % static_cast<std::size_t>(p) != 0) {
          throw UsageError("--tasks " + std::to_string(o_.sweep_tasks) +
                           " is not divisible by parallelism " + std::to_string(p));
        }
      }
    }
    // Surface builder argument errors before anything runs.
    Runtime probe(layout_, config_);
    make_workload(o_, default_parallelism(), default_depth(), bench::BuildContext::from(probe));
    if (!o_.out_dir.empty()) fs::create_directories(o_.out_dir);
  }

  int run() {
    out_ << "bench,policy,workers,parallelism,tasks,run,elapsed,checksum,verified\n";
    bool all_ok = true;
    if (o_.sweep.empty()) {
      for (int r = 0; r < o_.repeat; ++r) {
        const auto res = run_once(default_parallelism(), default_depth(), r);
        all_ok = all_ok && (!o_.verify || res.verified);
        write_outputs(res, o_.repeat > 1 ? "_r" + std::to_string(r) : "");
      }
    } else {
      std::vector<ScheduleTrace> traces;
      for (int p : o_.sweep) {
        const int depth = static_cast<int>(o_.sweep_tasks / static_cast<std::size_t>(p));
        for (int r = 0; r < o_.repeat; ++r) {
          auto res = run_once(p, depth, r);
          all_ok = all_ok && (!o_.verify || res.verified);
          std::string suffix = "_p" + std::to_string(p);
          if (o_.repeat > 1) suffix += "_r" + std::to_string(r);
          write_outputs(res, suffix);
          if (r + 1 == o_.repeat) traces.push_back(std::move(res.trace));
        }
      }
      if (!o_.out_dir.empty()) {
        write_file(fs::path(o_.out_dir) / "width_table.csv", emit_width_table(traces));
      }
    }
    if (!o_.out_dir.empty()) write_run_json();
    return all_ok ? kExitOk : kExitVerifyFailed;
  }

 private:
  int default_parallelism() const {
    return o_.parallelism.value_or(o_.bench == "nbody" ? 2 : 4);
  }
  int default_depth() const { return o_.depth.value_or(o_.bench == "nbody" ? 1000 : 256); }

  RunResult run_once(int parallelism, int depth, int run_index) {
    Runtime rt(layout_, config_);
    auto work = make_workload(o_, parallelism, depth, bench::BuildContext::from(rt));
    rt.model().ensure_types(rt.types().size());
    if (!injected_.empty()) rt.model().inject(injected_);

    RunStats stats;
    if (o_.deterministic || !injected_.empty() || !o_.virtual_costs.empty()) {
      DurationModel durations = analytic_durations(o_.sim);
      if (!virtual_table_.empty()) {
        durations = [table = table_durations(virtual_table_, -1.0),
                     fallback = durations](const Task& t, const PieceContext& pc) {
          const double d = table(t, pc);
          return d < 0.0 ? fallback(t, pc) : d;
        };
      }
      VirtualExecutor ex(rt, durations);
      stats = ex.run(work->dag());
    } else {
      ThreadedExecutor ex(rt, {.pin = !o_.no_pin, .stress_seed = o_.stress});
      stats = ex.run(work->dag());
    }

    RunResult res;
    res.decisions = rt.decisions();
    res.trace = ScheduleTrace::from_decisions(res.decisions);
    res.trace.elapsed = stats.elapsed;
    res.trace.task_count = stats.tasks_executed;
    res.trace.parallelism = parallelism;
    if (o_.dump_model) {
      std::ostringstream m;
      rt.model().write_csv(m);
      res.model_csv = m.str();
    }
    res.checksum = work->checksum();
    std::string verified = "skipped";
    if (o_.verify) {
      res.verdict = work->verify();
      res.verified = res.verdict.ok;
      verified = res.verified ? "pass" : "fail";
      if (!res.verified) {
        err_ << "verification failed: " << res.verdict.detail << " (error " << res.verdict.error
             << ", tolerance " << res.verdict.tolerance << ")\n";
      }
    }
    char elapsed[32], checksum[40];
    std::snprintf(elapsed, sizeof elapsed, "%.6f", stats.elapsed);
    std::snprintf(checksum, sizeof checksum, "%.10g", res.checksum);
    const bool chain = o_.bench == "chain" || o_.bench == "nbody";
    out_ << o_.bench << ',' << to_string(config_.policy) << ',' << layout_.worker_count() << ','
         << (chain ? parallelism : 0) << ',' << stats.tasks_executed << ',' << run_index << ','
         << elapsed << ',' << checksum << ',' << verified << '\n';
    return res;
  }

  void write_outputs(const RunResult& res, const std::string& suffix) {
    if (o_.out_dir.empty()) return;
    const fs::path dir(o_.out_dir);
    write_file(dir / ("schedule_map" + suffix + ".csv"), emit_schedule_map(res.trace));
    write_file(dir / ("decisions" + suffix + ".csv"), emit_decision_log(res.decisions));
    if (o_.dump_model) write_file(dir / ("model" + suffix + ".csv"), res.model_csv);
  }

  void write_run_json() {
    nlohmann::json j;
    j["bench"] = o_.bench;
    j["workers"] = layout_.worker_count();
    j["layout"] = layout_.serialize();
    j["policy"] = std::string(to_string(config_.policy));
    j["idle_tries"] = config_.idle_tries;
    j["sta"] = config_.sta;
    j["perf_model"] = config_.perf_model;
    j["moldability"] = config_.moldability;
    j["local_steal"] = config_.local_steal;
    j["global_steal"] = config_.global_steal;
    j["alpha"] = config_.alpha;
    j["seed"] = config_.rng_seed;
    j["timing"] = std::string(to_string(config_.timing));
    j["virtual_time"] = o_.deterministic || !injected_.empty() || !o_.virtual_costs.empty();
    j["repeat"] = o_.repeat;
    if (!o_.sweep.empty()) j["sweep"] = o_.sweep;
    write_file(fs::path(o_.out_dir) / "run.json", j.dump(2) + "\n");
  }

  Options o_;
  std::ostream& out_;
  std::ostream& err_;
  Layout layout_;
  SchedulerConfig config_;
  std::vector<CostEntry> injected_;
  CostMap virtual_table_;
};

void add_options(CLI::App& app, Options& o) {
  app.add_option("--layout", o.layout_path,
                 std::string("Layout description file (default: $") + kLayoutEnv + ")");
  app.add_option("--workers", o.workers,
                 "Worker count for a generated power-of-two layout when no file is given")
      ->check(CLI::PositiveNumber);
  app.add_option("--policy", o.policy, "arms-m, arms-1 or rws")->capture_default_str();
  app.add_option("--sta", o.sta, "Route tasks by topology address (on|off)");
  app.add_option("--perf-model", o.perf_model, "Use the online cost model (on|off)");
  app.add_option("--moldability", o.moldability, "Allow widths above one (on|off)");
  app.add_option("--local-steal", o.local_steal, "Steal within inclusive partitions (on|off)");
  app.add_option("--global-steal", o.global_steal, "Gated non-local stealing (on|off)");
  app.add_option("--idle-tries", o.idle_tries, "Rejected steals before stealing unconditionally");
  app.add_option("--alpha", o.alpha, "Cost-model smoothing factor in (0, 1]");
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("--timing", o.timing, "leader-span or leader-piece")->capture_default_str();

  app.add_option("--bench", o.bench, "chain, nbody, stencil, sparselu or matmul")
      ->capture_default_str();
  app.add_option("--kind", o.kind, "Chain task kind: matmul, triad, copy, nbody, mixed")
      ->capture_default_str();
  app.add_option("--parallelism", o.parallelism, "Independent chains")->check(CLI::PositiveNumber);
  app.add_option("--depth", o.depth, "Tasks per chain")->check(CLI::PositiveNumber);
  app.add_option("--n", o.n, "Per-task size (chain) or matrix order (matmul)")
      ->check(CLI::PositiveNumber);
  app.add_option("--rows", o.rows, "Stencil mesh rows")->capture_default_str();
  app.add_option("--cols", o.cols, "Stencil mesh columns")->capture_default_str();
  app.add_option("--block", o.block, "Stencil block edge")->capture_default_str();
  app.add_option("--timesteps", o.timesteps, "Stencil timesteps")->capture_default_str();
  app.add_option("--blocks", o.blocks, "SparseLU blocks per side")->capture_default_str();
  app.add_option("--block-size", o.block_size, "SparseLU block edge")->capture_default_str();
  app.add_flag("--dense", o.dense, "SparseLU with every block present");
  app.add_option("--leaf", o.leaf, "MatMul leaf block edge")->capture_default_str();

  app.add_flag("--verify", o.verify, "Check the result against the sequential oracle");
  app.add_option("--repeat", o.repeat, "Runs per configuration")->capture_default_str();
  app.add_option("--out", o.out_dir, "Directory for trace CSVs");
  app.add_option("--inject-costs", o.inject_costs,
                 "Pre-load the cost model from CSV (type_id,sta_key,leader,width,cost); "
                 "runs in virtual time");
  app.add_flag("--deterministic", o.deterministic, "Run in virtual time on one thread");
  app.add_option("--virtual-costs", o.virtual_costs,
                 "Virtual piece times from a cost CSV (piece = cost / width)");
  app.add_option("--sim-task-seconds", o.sim.task_seconds, "Virtual sequential task time")
      ->capture_default_str();
  app.add_option("--sim-working-set", o.sim.working_set, "Virtual task working set, bytes");
  app.add_option("--sim-cache", o.sim.cache_bytes, "Virtual per-worker cache, bytes");
  app.add_option("--sim-speedup", o.sim.cache_speedup, "Virtual speedup when a piece fits cache and its data is warm")
      ->capture_default_str();
  app.add_option("--sim-overhead", o.sim.piece_overhead, "Virtual per-piece overhead, seconds");
  app.add_option("--sweep", o.sweep, "Chain parallelisms to run at a fixed task total")
      ->delimiter(',');
  app.add_option("--tasks", o.sweep_tasks, "Total tasks per sweep point")->capture_default_str();
  app.add_flag("--no-pin", o.no_pin, "Do not pin workers to hardware threads");
  app.add_option("--stress", o.stress, "Seed for randomized step jitter (0 = off)");
  app.add_flag("--dump-model", o.dump_model, "Write the cost model as model.csv");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moldable, locality-adaptive work-stealing scheduler harness", "moldsched"};
  Options o;
  add_options(app, o);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nrun with --help for usage\n";
    return kExitUsage;
  }

  std::unique_ptr<Harness> harness;
  try {
    harness = std::make_unique<Harness>(std::move(o), out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    return harness->run();
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitVerifyFailed;
  }
}

}  // namespace moldsched::cli
