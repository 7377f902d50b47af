#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace moldsched {

enum class Policy {
  kAdaptiveMoldable,  // "arms-m": cost-model driven width selection
  kAdaptiveSingle,    // "arms-1": same locality/steal rules, width pinned to 1
  kRandomStealing,    // "rws": greedy random victim stealing
};

std::string_view to_string(Policy p);
std::optional<Policy> parse_policy(std::string_view name);

/// What "leader time" means when a finished task is fed to the cost model.
enum class TimingMode {
  /// From the leader's dispatch decision until the task's last piece ends.
  kLeaderSpan,
  /// Execution time of the leader's piece alone.
  kLeaderPiece,
};

std::string_view to_string(TimingMode m);
std::optional<TimingMode> parse_timing_mode(std::string_view name);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SchedulerConfig {
  Policy policy = Policy::kAdaptiveMoldable;
  int idle_tries = 10;
  bool local_steal = true;
  bool global_steal = true;
  bool moldability = true;
  bool sta = true;
  bool perf_model = true;
  double alpha = 0.5;
  std::uint64_t rng_seed = 1;
  TimingMode timing = TimingMode::kLeaderSpan;

  /// Defaults for `policy`: ARMS-1 disables moldability; RWS disables every
  /// locality component.
  static SchedulerConfig for_policy(Policy policy);

  /// Throws ConfigError when the flags contradict the policy.
  void validate() const;

  bool allows_width_above_one() const noexcept {
    return policy == Policy::kAdaptiveMoldable && moldability;
  }
};

}  // namespace moldsched
