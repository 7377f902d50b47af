#pragma once

// A benchmark instance: the DAG it runs, the buffers its tasks touch and an
// oracle for the result.

#include <string>

#include <moldsched/runtime.hpp>
#include <moldsched/task.hpp>

namespace moldsched::bench {

struct BuildContext {
  TaskTypeRegistry& types;
  int workers = 1;

  static BuildContext from(Runtime& rt) { return {rt.types(), rt.worker_count()}; }
};

struct Verdict {
  bool ok = false;
  double error = 0.0;      // measured deviation from the oracle
  double tolerance = 0.0;  // what `ok` was judged against
  std::string detail;
};

class Workload {
 public:
  virtual ~Workload() = default;

  virtual std::string name() const = 0;
  virtual Dag& dag() = 0;

  /// Restores the inputs so the DAG can be run again from scratch.
  virtual void reset() = 0;

  /// Compares the current output against a sequential oracle.
  virtual Verdict verify() const = 0;

  /// Order-independent summary of the output.
  virtual double checksum() const = 0;
};

}  // namespace moldsched::bench
