#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chn2/geometry.hpp"
#include "chn2/pointprocess.hpp"
#include "chn2/spatial_index.hpp"

namespace chn2 {

using PairId = std::size_t;

// D: nearest-neighbour edge created at `level`. Delta: exit-point relink created at `level`.
enum class EdgeKind { D, Delta };

struct EdgeTag {
  EdgeKind kind = EdgeKind::D;
  std::size_t level = 0;

  friend bool operator==(const EdgeTag&, const EdgeTag&) = default;
};

inline std::string to_string(const EdgeTag& t) {
  return (t.kind == EdgeKind::D ? "D" : "Delta") + std::to_string(t.level);
}

inline EdgeTag edge_tag_from_string(const std::string& s) {
  auto parse_level = [&](std::size_t prefix) {
    if (s.size() <= prefix) throw std::invalid_argument("bad edge tag '" + s + "'");
    std::size_t used = 0;
    const unsigned long v = std::stoul(s.substr(prefix), &used);
    if (used != s.size() - prefix) throw std::invalid_argument("bad edge tag '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  if (s.rfind("Delta", 0) == 0) return EdgeTag{EdgeKind::Delta, parse_level(5)};
  if (s.rfind("D", 0) == 0) return EdgeTag{EdgeKind::D, parse_level(1)};
  throw std::invalid_argument("bad edge tag '" + s + "'");
}

// Raised when a level graph contains a cycle that is not a 2-cycle.
class CycleInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The point-shift f^k: one successor per point, with the structure derived from it.
struct LevelGraph {
  std::size_t level = 0;
  std::vector<PointId> successor;
  std::vector<EdgeTag> tags;
  // Component index per point; components are numbered like `cycles`.
  std::vector<std::size_t> component_of;
  // One 2-cycle per component as (smaller id, larger id), sorted by smaller id.
  std::vector<std::array<PointId, 2>> cycles;

  std::size_t size() const noexcept { return successor.size(); }
  std::size_t n_components() const noexcept { return cycles.size(); }

  std::vector<std::vector<PointId>> components() const {
    std::vector<std::vector<PointId>> out(cycles.size());
    for (PointId x = 0; x < component_of.size(); ++x) out[component_of[x]].push_back(x);
    return out;
  }

  bool is_head(PointId x) const {
    const auto& c = cycles[component_of[x]];
    return c[0] == x || c[1] == x;
  }

  friend bool operator==(const LevelGraph&, const LevelGraph&) = default;
};

// Fills `cycles` and `component_of` from `successor`. Throws CycleInvariantError if
// any cycle has length other than 2.
inline void compute_structure(LevelGraph& g) {
  const std::size_t n = g.successor.size();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  // 0 = unvisited, 1 = on current walk, 2 = done
  std::vector<unsigned char> state(n, 0);
  std::vector<std::array<PointId, 2>> cycles;
  std::vector<PointId> walk;
  for (PointId start = 0; start < n; ++start) {
    if (state[start] != 0) continue;
    walk.clear();
    PointId x = start;
    while (state[x] == 0) {
      state[x] = 1;
      walk.push_back(x);
      x = g.successor[x];
      if (x >= n) throw std::out_of_range("level graph: successor out of range");
    }
    if (state[x] == 1) {
      const auto pos = std::find(walk.begin(), walk.end(), x);
      const auto len = static_cast<std::size_t>(walk.end() - pos);
      if (len != 2) {
        throw CycleInvariantError("level " + std::to_string(g.level) + ": cycle of length " + std::to_string(len) +
                                  " through point " + std::to_string(x));
      }
      cycles.push_back({std::min(*pos, *(pos + 1)), std::max(*pos, *(pos + 1))});
    }
    for (PointId y : walk) state[y] = 2;
  }
  std::sort(cycles.begin(), cycles.end());

  g.component_of.assign(n, kNone);
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    g.component_of[cycles[c][0]] = c;
    g.component_of[cycles[c][1]] = c;
  }
  for (PointId start = 0; start < n; ++start) {
    if (g.component_of[start] != kNone) continue;
    walk.clear();
    PointId x = start;
    while (g.component_of[x] == kNone) {
      walk.push_back(x);
      x = g.successor[x];
    }
    for (PointId y : walk) g.component_of[y] = g.component_of[x];
  }
  g.cycles = std::move(cycles);
}

struct Pair {
  PairId id = 0;
  std::size_t level = 0;
  std::array<PointId, 2> heads{};
  // Filled once the next level has been computed.
  std::optional<PointId> exit;
  std::optional<PointId> exit_target;
  std::optional<double> merge_distance;

  friend bool operator==(const Pair&, const Pair&) = default;
};

// Level-0 graph: every point maps to its nearest neighbour.
inline LevelGraph level0(std::span<const Point> points, const Metric& metric) {
  if (points.size() < 2) throw std::invalid_argument("level0: need at least 2 points");
  std::vector<IndexEntry> entries;
  entries.reserve(points.size());
  for (const Point& p : points) entries.push_back(IndexEntry{&p, p.id});
  const NnIndex index(entries, metric);

  LevelGraph g;
  g.level = 0;
  g.successor.resize(points.size());
  g.tags.assign(points.size(), EdgeTag{EdgeKind::D, 0});
  for (const Point& p : points) g.successor[p.id] = index.nearest_foreign(p, p.id).id;
  compute_structure(g);
  return g;
}

inline LevelGraph level0(const Sample& s, const Metric& metric) { return level0(std::span<const Point>(s.points), metric); }

// One pair per component, ordered by smaller head id; ids start at `first_id`.
inline std::vector<Pair> extract_pairs(const LevelGraph& g, PairId first_id = 0) {
  std::vector<Pair> pairs;
  pairs.reserve(g.cycles.size());
  for (std::size_t c = 0; c < g.cycles.size(); ++c) {
    Pair p;
    p.id = first_id + c;
    p.level = g.level;
    p.heads = g.cycles[c];
    pairs.push_back(p);
  }
  return pairs;
}

struct PairLink {
  PairId pair = 0;
  PairId nearest = 0;
  PointId exit = 0;
  PointId target = 0;
  double distance = 0.0;
  EdgeKey key;
};

struct NnStep {
  std::vector<PairLink> links;  // aligned with the input pairs
  std::vector<std::pair<PairId, PairId>> mutual;
};

// Nearest foreign pair of every pair under single linkage between head sets.
inline NnStep nn_k_step(std::span<const Pair> pairs, std::span<const Point> points, const Metric& metric) {
  if (pairs.size() < 2) throw std::invalid_argument("nn_k_step: need at least 2 pairs");
  std::vector<IndexEntry> entries;
  entries.reserve(2 * pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (PointId h : pairs[i].heads) entries.push_back(IndexEntry{&points[h], i});
  }
  const NnIndex index(entries, metric);

  NnStep step;
  step.links.resize(pairs.size());
  std::vector<std::size_t> nn_pos(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::optional<EdgeKey> best;
    for (PointId h : pairs[i].heads) {
      const NnResult r = index.nearest_foreign(points[h], i);
      const EdgeKey k = EdgeKey::make(r.squared, h, r.id);
      if (!best || k < *best) {
        best = k;
        nn_pos[i] = r.group;
        step.links[i] = PairLink{pairs[i].id, pairs[r.group].id, h, r.id, r.distance, k};
      }
    }
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::size_t j = nn_pos[i];
    if (i < j && nn_pos[j] == i) step.mutual.emplace_back(pairs[i].id, pairs[j].id);
  }
  return step;
}

// f^{k+1}: f^k with each exit point redirected to its target.
inline LevelGraph advance_level(const LevelGraph& g, const NnStep& step) {
  LevelGraph next;
  next.level = g.level + 1;
  next.successor = g.successor;
  next.tags = g.tags;
  for (const PairLink& l : step.links) {
    next.successor[l.exit] = l.target;
    next.tags[l.exit] = EdgeTag{EdgeKind::Delta, next.level};
  }
  compute_structure(next);
  return next;
}

enum class Termination { SinglePair, MaxLevels, Degenerate };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::SinglePair: return "single_pair";
    case Termination::MaxLevels: return "max_levels";
    case Termination::Degenerate: return "degenerate";
  }
  return "degenerate";
}

inline Termination termination_from_string(const std::string& s) {
  if (s == "single_pair") return Termination::SinglePair;
  if (s == "max_levels") return Termination::MaxLevels;
  if (s == "degenerate") return Termination::Degenerate;
  throw std::invalid_argument("unknown termination '" + s + "'");
}

inline constexpr std::size_t kDefaultMaxLevels = 64;

struct Hierarchy {
  Sample sample;
  Metric metric;
  std::vector<LevelGraph> levels;
  std::vector<std::vector<Pair>> pairs_by_level;
  // Pair at level k -> pair at level k+1 whose cluster absorbed it.
  std::map<PairId, PairId> genealogy;
  Termination termination = Termination::Degenerate;

  bool empty() const noexcept { return levels.empty(); }
  // Index of the last level; only meaningful when !empty().
  std::size_t final_level() const noexcept { return levels.empty() ? 0 : levels.size() - 1; }

  const Pair& pair(PairId id) const {
    for (const auto& lvl : pairs_by_level) {
      if (!lvl.empty() && id >= lvl.front().id && id <= lvl.back().id) return lvl[id - lvl.front().id];
    }
    throw std::out_of_range("hierarchy: unknown pair id " + std::to_string(id));
  }

  friend bool operator==(const Hierarchy&, const Hierarchy&) = default;
};

inline Hierarchy build_hierarchy(const Sample& sample, const Metric& metric, std::size_t max_levels = kDefaultMaxLevels) {
  Hierarchy h;
  h.sample = sample;
  h.metric = metric;
  if (sample.points.size() < 2 || max_levels == 0) {
    h.termination = Termination::Degenerate;
    return h;
  }
  const std::span<const Point> points(sample.points);
  h.levels.push_back(level0(points, metric));
  PairId next_id = 0;
  for (;;) {
    LevelGraph& g = h.levels.back();
    std::vector<Pair> pairs = extract_pairs(g, next_id);
    next_id += pairs.size();
    if (pairs.size() == 1) {
      h.pairs_by_level.push_back(std::move(pairs));
      h.termination = Termination::SinglePair;
      break;
    }
    if (h.levels.size() >= max_levels) {
      h.pairs_by_level.push_back(std::move(pairs));
      h.termination = Termination::MaxLevels;
      break;
    }
    const NnStep step = nn_k_step(pairs, points, metric);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      pairs[i].exit = step.links[i].exit;
      pairs[i].exit_target = step.links[i].target;
      pairs[i].merge_distance = step.links[i].distance;
    }
    LevelGraph next = advance_level(g, step);
    for (const Pair& p : pairs) h.genealogy[p.id] = next_id + next.component_of[p.heads[0]];
    h.pairs_by_level.push_back(std::move(pairs));
    h.levels.push_back(std::move(next));
  }
  return h;
}

// Cluster subtrees: drop each component's two cycle edges; every point belongs to the
// tree of the head its successor path reaches first.
inline std::map<PointId, std::vector<PointId>> cluster_subtrees(const LevelGraph& g) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<PointId> head_of(g.size(), kNone);
  for (const auto& c : g.cycles) {
    head_of[c[0]] = c[0];
    head_of[c[1]] = c[1];
  }
  std::vector<PointId> walk;
  for (PointId start = 0; start < g.size(); ++start) {
    walk.clear();
    PointId x = start;
    while (head_of[x] == kNone) {
      walk.push_back(x);
      x = g.successor[x];
    }
    for (PointId y : walk) head_of[y] = head_of[x];
  }
  std::map<PointId, std::vector<PointId>> forest;
  for (const auto& c : g.cycles) {
    forest[c[0]];
    forest[c[1]];
  }
  for (PointId x = 0; x < g.size(); ++x) forest[head_of[x]].push_back(x);
  return forest;
}

inline std::map<PointId, std::size_t> descendant_counts(const Hierarchy& h, std::size_t k) {
  if (h.empty() || k > h.final_level()) throw std::out_of_range("descendant_counts: level out of range");
  std::map<PointId, std::size_t> out;
  for (const auto& [head, members] : cluster_subtrees(h.levels[k])) out[head] = members.size();
  return out;
}

// Length of the edge x -> f^k(x).
inline double edge_length(const LevelGraph& g, std::span<const Point> points, const Metric& metric, PointId x) {
  return metric.distance(points[x].coords, points[g.successor[x]].coords);
}

}  // namespace chn2
