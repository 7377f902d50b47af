#include "moldsched/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace moldsched {

ScheduleTrace ScheduleTrace::from_decisions(std::span<const Decision> decisions) {
  ScheduleTrace t;
  for (const auto& d : decisions) ++t.frequencies[{d.type, d.sta_key}][d.partition];
  return t;
}

std::uint64_t ScheduleTrace::total() const {
  std::uint64_t n = 0;
  for (const auto& [key, hist] : frequencies) {
    for (const auto& [part, count] : hist) n += count;
  }
  return n;
}

std::map<int, double> ScheduleTrace::width_percentages() const {
  std::map<int, std::uint64_t> counts;
  for (const auto& [key, hist] : frequencies) {
    for (const auto& [part, count] : hist) counts[part.width] += count;
  }
  const auto n = total();
  std::map<int, double> out;
  for (const auto& [w, c] : counts) out[w] = n ? 100.0 * static_cast<double>(c) / static_cast<double>(n) : 0.0;
  return out;
}

std::map<int, double> width_percentages(std::span<const Decision> decisions,
                                        std::size_t skip_per_key) {
  std::vector<const Decision*> ordered;
  ordered.reserve(decisions.size());
  for (const auto& d : decisions) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(),
            [](const Decision* a, const Decision* b) { return a->seq < b->seq; });

  std::map<ModelKey, std::size_t> seen;
  std::map<int, std::uint64_t> counts;
  std::uint64_t n = 0;
  for (const auto* d : ordered) {
    if (seen[{d->type, d->sta_key}]++ < skip_per_key) continue;
    ++counts[d->partition.width];
    ++n;
  }
  std::map<int, double> out;
  for (const auto& [w, c] : counts) out[w] = 100.0 * static_cast<double>(c) / static_cast<double>(n);
  return out;
}

std::string emit_schedule_map(const ScheduleTrace& trace) {
  std::string out = "type_id,sta_key,leader,width,count\n";
  for (const auto& [key, hist] : trace.frequencies) {
    for (const auto& [part, count] : hist) {
      out += std::to_string(key.type) + ',' + std::to_string(key.sta_key) + ',' +
             std::to_string(part.leader) + ',' + std::to_string(part.width) + ',' +
             std::to_string(count) + '\n';
    }
  }
  return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(
        start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) return fields;
    start = comma + 1;
  }
}

template <typename T>
T field_as(std::string_view f) {
  T v{};
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size()) {
    throw std::invalid_argument("malformed schedule map field '" + std::string(f) + "'");
  }
  return v;
}

}  // namespace

ScheduleTrace parse_schedule_map(std::string_view csv) {
  ScheduleTrace t;
  std::size_t pos = 0;
  bool header = true;
  while (pos < csv.size()) {
    auto nl = csv.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv.size();
    const auto line = csv.substr(pos, nl - pos);
    pos = nl + 1;
    if (header) {
      header = false;
      if (line.rfind("type_id", 0) == 0) continue;
    }
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 5) throw std::invalid_argument("schedule map rows need 5 fields");
    const ModelKey key{field_as<TypeId>(f[0]), field_as<std::uint64_t>(f[1])};
    const ResourcePartition part{field_as<int>(f[2]), field_as<int>(f[3])};
    t.frequencies[key][part] += field_as<std::uint64_t>(f[4]);
  }
  return t;
}

std::string emit_decision_log(std::span<const Decision> decisions) {
  std::vector<Decision> ordered(decisions.begin(), decisions.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const Decision& a, const Decision& b) { return a.seq < b.seq; });
  std::string out = "seq,time,worker,type_id,sta_key,leader,width\n";
  char time_buf[40];
  for (const auto& d : ordered) {
    std::snprintf(time_buf, sizeof time_buf, "%.9f", d.time);
    out += std::to_string(d.seq) + ',' + time_buf + ',' + std::to_string(d.worker) + ',' +
           std::to_string(d.type) + ',' + std::to_string(d.sta_key) + ',' +
           std::to_string(d.partition.leader) + ',' + std::to_string(d.partition.width) + '\n';
  }
  return out;
}

std::string emit_width_table(std::span<const ScheduleTrace> runs) {
  if (runs.empty()) throw std::invalid_argument("width table needs at least one run");
  for (const auto& r : runs) {
    if (r.task_count != runs.front().task_count) {
      throw std::invalid_argument(
          "width table runs differ in task count (" + std::to_string(runs.front().task_count) +
          " vs " + std::to_string(r.task_count) + "); parallelism sweeps must fix the total");
    }
  }
  std::vector<std::map<int, double>> columns;
  std::set<int> widths;
  for (const auto& r : runs) {
    columns.push_back(r.width_percentages());
    for (const auto& [w, pct] : columns.back()) widths.insert(w);
  }
  std::string out = "width";
  for (const auto& r : runs) out += ',' + std::to_string(r.parallelism);
  out += '\n';
  char buf[32];
  for (int w : widths) {
    out += std::to_string(w);
    for (const auto& col : columns) {
      const auto it = col.find(w);
      std::snprintf(buf, sizeof buf, "%.1f", it == col.end() ? 0.0 : it->second);
      out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace moldsched
