#include "moldsched/topology.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace moldsched {

std::ostream& operator<<(std::ostream& os, const ResourcePartition& p) {
  return os << '(' << p.leader << ',' << p.width << ')';
}

std::string to_string(const ResourcePartition& p) {
  return "(" + std::to_string(p.leader) + "," + std::to_string(p.width) + ")";
}

LayoutError::LayoutError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what
                                   : "line " + std::to_string(line) + ": " + what),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<int> parse_int_list(std::string_view line, std::size_t line_no) {
  std::vector<int> out;
  if (trim(line).empty()) throw LayoutError(line_no, "blank line");
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto comma = line.find(',', pos);
    const auto token =
        trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                              : comma - pos));
    int value = 0;
    const auto* begin = token.data();
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (token.empty() || ec != std::errc{} || ptr != end) {
      throw LayoutError(line_no, "malformed integer '" + std::string(token) + "'");
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

Layout Layout::parse(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  if (lines.size() < 2) {
    throw LayoutError(0, "layout needs an affinity line and at least one width line");
  }

  auto affinities = parse_int_list(lines[0], 1);
  std::vector<std::vector<int>> widths;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    widths.push_back(parse_int_list(lines[i], i + 1));
  }
  if (widths.size() != affinities.size()) {
    throw LayoutError(0, "expected " + std::to_string(affinities.size()) +
                             " width lines (one per worker), found " +
                             std::to_string(widths.size()));
  }
  for (auto& w : widths) {
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
  }
  validate(affinities, widths, true);
  return Layout(std::move(affinities), std::move(widths));
}

Layout Layout::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LayoutError(0, "cannot open layout file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Layout Layout::from_tables(std::vector<int> affinities,
                           std::vector<std::vector<int>> widths_per_leader) {
  if (affinities.empty()) throw LayoutError(0, "layout has no workers");
  if (widths_per_leader.size() != affinities.size()) {
    throw LayoutError(0, "width table size does not match worker count");
  }
  for (auto& w : widths_per_leader) {
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
  }
  validate(affinities, widths_per_leader, false);
  return Layout(std::move(affinities), std::move(widths_per_leader));
}

Layout Layout::power_of_two(int workers, int max_width) {
  if (workers < 1) throw std::invalid_argument("worker count must be positive");
  std::vector<int> affinities(static_cast<std::size_t>(workers));
  std::vector<std::vector<int>> widths(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    affinities[static_cast<std::size_t>(w)] = w;
    for (int width = 1; width <= max_width; width *= 2) {
      if (w % width == 0 && w + width <= workers) {
        widths[static_cast<std::size_t>(w)].push_back(width);
      }
    }
  }
  return from_tables(std::move(affinities), std::move(widths));
}

void Layout::validate(const std::vector<int>& affinities,
                      const std::vector<std::vector<int>>& widths, bool with_lines) {
  std::set<int> seen;
  for (int a : affinities) {
    if (a < 0) throw LayoutError(with_lines ? 1 : 0, "negative hardware thread id");
    if (!seen.insert(a).second) {
      throw LayoutError(with_lines ? 1 : 0,
                        "hardware thread " + std::to_string(a) + " listed twice");
    }
  }
  const int n = static_cast<int>(affinities.size());
  for (int leader = 0; leader < n; ++leader) {
    const std::size_t line = with_lines ? static_cast<std::size_t>(leader) + 2 : 0;
    const auto& list = widths[static_cast<std::size_t>(leader)];
    bool has_one = false;
    for (int w : list) {
      const std::string part = to_string(ResourcePartition{leader, w});
      if (w < 1) throw LayoutError(line, "non-positive width in " + part);
      if (leader + w > n) {
        throw LayoutError(line, "partition " + part + " exceeds worker count " +
                                    std::to_string(n));
      }
      if (leader % w != 0) {
        throw LayoutError(line, "partition " + part + " is not aligned to its width");
      }
      has_one = has_one || w == 1;
    }
    if (!has_one) {
      throw LayoutError(line, "worker " + std::to_string(leader) + " lacks width 1");
    }
  }
}

Layout::Layout(std::vector<int> affinities, std::vector<std::vector<int>> widths)
    : affinities_(std::move(affinities)), widths_(std::move(widths)) {
  const int n = worker_count();
  first_index_.resize(static_cast<std::size_t>(n));
  for (int leader = 0; leader < n; ++leader) {
    first_index_[static_cast<std::size_t>(leader)] = static_cast<int>(all_.size());
    for (int w : widths_[static_cast<std::size_t>(leader)]) all_.push_back({leader, w});
  }
  inclusive_.resize(static_cast<std::size_t>(n));
  for (const auto& p : all_) {
    for (int t = p.leader; t <= p.last(); ++t) inclusive_[static_cast<std::size_t>(t)].push_back(p);
  }
  for (auto& list : inclusive_) {
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.width != b.width ? a.width < b.width : a.leader < b.leader;
    });
  }
}

std::span<const int> Layout::widths(int leader) const {
  if (leader < 0 || leader >= worker_count()) {
    throw std::out_of_range("leader " + std::to_string(leader) + " out of range");
  }
  return widths_[static_cast<std::size_t>(leader)];
}

bool Layout::is_legal(const ResourcePartition& p) const noexcept {
  return partition_index(p) >= 0;
}

std::span<const ResourcePartition> Layout::inclusive_partitions(int worker) const {
  if (worker < 0 || worker >= worker_count()) {
    throw std::out_of_range("worker " + std::to_string(worker) + " out of range");
  }
  return inclusive_[static_cast<std::size_t>(worker)];
}

int Layout::partition_index(const ResourcePartition& p) const noexcept {
  if (p.leader < 0 || p.leader >= worker_count()) return -1;
  const auto& list = widths_[static_cast<std::size_t>(p.leader)];
  const auto it = std::lower_bound(list.begin(), list.end(), p.width);
  if (it == list.end() || *it != p.width) return -1;
  return first_index_[static_cast<std::size_t>(p.leader)] +
         static_cast<int>(it - list.begin());
}

std::string Layout::serialize() const {
  std::string out;
  auto append_list = [&out](const std::vector<int>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(values[i]);
    }
    out += '\n';
  };
  append_list(affinities_);
  for (const auto& w : widths_) append_list(w);
  return out;
}

}  // namespace moldsched
