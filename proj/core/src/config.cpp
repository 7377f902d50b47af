#include "moldsched/config.hpp"

namespace moldsched {

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::kAdaptiveMoldable: return "arms-m";
    case Policy::kAdaptiveSingle: return "arms-1";
    case Policy::kRandomStealing: return "rws";
  }
  return "unknown";
}

std::optional<Policy> parse_policy(std::string_view name) {
  if (name == "arms-m") return Policy::kAdaptiveMoldable;
  if (name == "arms-1") return Policy::kAdaptiveSingle;
  if (name == "rws") return Policy::kRandomStealing;
  return std::nullopt;
}

std::string_view to_string(TimingMode m) {
  switch (m) {
    case TimingMode::kLeaderSpan: return "leader-span";
    case TimingMode::kLeaderPiece: return "leader-piece";
  }
  return "unknown";
}

std::optional<TimingMode> parse_timing_mode(std::string_view name) {
  if (name == "leader-span") return TimingMode::kLeaderSpan;
  if (name == "leader-piece") return TimingMode::kLeaderPiece;
  return std::nullopt;
}

SchedulerConfig SchedulerConfig::for_policy(Policy policy) {
  SchedulerConfig cfg;
  cfg.policy = policy;
  switch (policy) {
    case Policy::kAdaptiveMoldable:
      break;
    case Policy::kAdaptiveSingle:
      cfg.moldability = false;
      break;
    case Policy::kRandomStealing:
      cfg.moldability = false;
      cfg.sta = false;
      cfg.perf_model = false;
      cfg.local_steal = false;
      cfg.global_steal = false;
      break;
  }
  return cfg;
}

void SchedulerConfig::validate() const {
  if (idle_tries < 0) throw ConfigError("idle-tries must be >= 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  switch (policy) {
    case Policy::kAdaptiveMoldable:
      if (!sta || !perf_model || !moldability) {
        throw ConfigError("arms-m requires sta, perf-model and moldability enabled");
      }
      break;
    case Policy::kAdaptiveSingle:
      if (moldability) throw ConfigError("arms-1 pins width 1; moldability must be off");
      if (!sta || !perf_model) throw ConfigError("arms-1 requires sta and perf-model enabled");
      break;
    case Policy::kRandomStealing:
      if (moldability) throw ConfigError("rws does not support moldability");
      if (sta || perf_model) throw ConfigError("rws ignores sta and perf-model; disable them");
      if (local_steal || global_steal) {
        throw ConfigError("rws uses random stealing; local/global steal schemes do not apply");
      }
      break;
  }
}

}  // namespace moldsched
