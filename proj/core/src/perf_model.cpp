#include "moldsched/perf_model.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace moldsched {

PerfModel::PerfModel(const Layout& layout, int key_bits, double alpha)
    : layout_(layout),
      key_bits_(key_bits),
      keys_per_type_(1ULL << key_bits),
      parts_(layout.partition_count()),
      alpha_(alpha) {
  if (key_bits < 1 || key_bits > 24) throw std::invalid_argument("unsupported key bits");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
}

void PerfModel::ensure_types(std::size_t count) {
  while (tables_.size() < count) {
    const std::size_t cells = keys_per_type_ * parts_;
    auto table = std::make_unique<std::atomic<double>[]>(cells);
    for (std::size_t i = 0; i < cells; ++i) table[i].store(0.0, std::memory_order_relaxed);
    tables_.push_back(std::move(table));
  }
}

std::atomic<double>* PerfModel::row(const ModelKey& key) const {
  if (key.type >= tables_.size()) {
    throw std::out_of_range("task type " + std::to_string(key.type) + " has no model");
  }
  if (key.sta_key >= keys_per_type_) {
    throw std::out_of_range("STA key " + std::to_string(key.sta_key) +
                            " outside the model's key space");
  }
  return tables_[key.type].get() + key.sta_key * parts_;
}

std::size_t PerfModel::slot(const ResourcePartition& part) const {
  const int idx = layout_.partition_index(part);
  if (idx < 0) throw std::invalid_argument("illegal partition " + to_string(part));
  return static_cast<std::size_t>(idx);
}

double PerfModel::record(const ModelKey& key, const ResourcePartition& part,
                         double leader_time) {
  auto& cell = row(key)[slot(part)];
  const double old = cell.load(std::memory_order_relaxed);
  if (!(leader_time > 0.0) || !std::isfinite(leader_time)) {
    rejected_.fetch_add(1, std::memory_order_relaxed);
    return old;
  }
  const double sample = leader_time * part.width;
  const double updated = old > 0.0 ? alpha_ * sample + (1.0 - alpha_) * old : sample;
  // Last writer wins; only the partition's leader updates a given cell.
  cell.store(updated, std::memory_order_relaxed);
  return updated;
}

ResourcePartition PerfModel::min_cost_partition(
    const ModelKey& key, std::span<const ResourcePartition> candidates) const {
  if (candidates.empty()) throw std::invalid_argument("min_cost_partition: no candidates");
  const auto* cells = row(key);

  auto narrower = [](const ResourcePartition& a, const ResourcePartition& b) {
    return a.width != b.width ? a.width < b.width : a.leader < b.leader;
  };

  const ResourcePartition* unexplored = nullptr;
  const ResourcePartition* best = nullptr;
  double best_cost = 0.0;
  for (const auto& p : candidates) {
    const double c = cells[slot(p)].load(std::memory_order_relaxed);
    if (c <= 0.0) {
      if (!unexplored || narrower(p, *unexplored)) unexplored = &p;
    } else if (!best || c < best_cost || (c == best_cost && narrower(p, *best))) {
      best = &p;
      best_cost = c;
    }
  }
  return unexplored ? *unexplored : *best;
}

ResourcePartition PerfModel::global_min_partition(const ModelKey& key) const {
  return min_cost_partition(key, layout_.all_partitions());
}

void PerfModel::inject_costs(const ModelKey& key,
                             const std::map<ResourcePartition, double>& costs) {
  ensure_types(static_cast<std::size_t>(key.type) + 1);
  auto* cells = row(key);
  for (const auto& [part, cost] : costs) {
    slot(part);
    if (!(cost > 0.0) || !std::isfinite(cost)) {
      throw std::invalid_argument("injected cost for " + to_string(part) + " must be positive");
    }
  }
  for (const auto& [part, cost] : costs) cells[slot(part)].store(cost, std::memory_order_relaxed);
}

void PerfModel::inject(std::span<const CostEntry> entries) {
  std::map<ModelKey, std::map<ResourcePartition, double>> grouped;
  for (const auto& e : entries) grouped[e.key][e.partition] = e.cost;
  for (const auto& [key, costs] : grouped) inject_costs(key, costs);
}

CostCell PerfModel::cell(const ModelKey& key, const ResourcePartition& part) const {
  const double c = row(key)[slot(part)].load(std::memory_order_relaxed);
  return c > 0.0 ? CostCell{true, c} : CostCell{};
}

void PerfModel::write_csv(std::ostream& os) const {
  os << "type_id,sta_key,leader,width,state,cost\n";
  const auto parts = layout_.all_partitions();
  char buf[64];
  for (std::size_t type = 0; type < tables_.size(); ++type) {
    for (std::uint64_t key = 0; key < keys_per_type_; ++key) {
      const auto* cells = tables_[type].get() + key * parts_;
      bool any = false;
      for (std::size_t i = 0; i < parts_ && !any; ++i) {
        any = cells[i].load(std::memory_order_relaxed) > 0.0;
      }
      if (!any) continue;
      for (std::size_t i = 0; i < parts_; ++i) {
        const double c = cells[i].load(std::memory_order_relaxed);
        std::snprintf(buf, sizeof buf, "%.17g", c > 0.0 ? c : 0.0);
        os << type << ',' << key << ',' << parts[i].leader << ',' << parts[i].width << ','
           << (c > 0.0 ? "measured" : "unexplored") << ',' << buf << '\n';
      }
    }
  }
}

namespace {

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("cost table line " + std::to_string(line_no) +
                                ": malformed field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<CostEntry> parse_cost_csv(std::string_view text) {
  std::vector<CostEntry> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (line_no == 1 && !std::isdigit(static_cast<unsigned char>(line.front()))) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos
                                              ? std::string_view::npos
                                              : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 5 && fields.size() != 6) {
      throw std::invalid_argument("cost table line " + std::to_string(line_no) +
                                  ": expected 5 or 6 fields");
    }
    if (fields.size() == 6 && fields[4] == "unexplored") continue;
    CostEntry e;
    e.key.type = parse_number<TypeId>(fields[0], line_no);
    e.key.sta_key = parse_number<std::uint64_t>(fields[1], line_no);
    e.partition.leader = parse_number<int>(fields[2], line_no);
    e.partition.width = parse_number<int>(fields[3], line_no);
    e.cost = parse_number<double>(fields.back(), line_no);
    out.push_back(e);
  }
  return out;
}

}  // namespace moldsched
