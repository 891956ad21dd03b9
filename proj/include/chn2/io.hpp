#pragma once

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chn2/hierarchy.hpp"
#include "chn2/pointprocess.hpp"
#include "chn2/stats.hpp"

namespace chn2::io {

using nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw FormatError(std::string(what) + ": unknown field '" + key + "'");
  }
}

}  // namespace detail

// ---- Sample ---------------------------------------------------------------------------

inline json window_to_json(const Window& w) { return json{{"lo", w.lo()}, {"hi", w.hi()}}; }

inline Window window_from_json(const json& j) {
  detail::reject_unknown(j, {"lo", "hi"}, "window");
  try {
    return Window(detail::get_field<std::vector<double>>(j, "lo"), detail::get_field<std::vector<double>>(j, "hi"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline json generator_to_json(const GeneratorInfo& g) {
  json j{{"kind", to_string(g.kind)}};
  if (g.lambda) j["lambda"] = *g.lambda;
  if (g.count) j["count"] = *g.count;
  if (g.kind == GeneratorKind::Cox) {
    j["centers"] = g.centers;
    j["radii"] = g.radii;
    if (g.center_intensity) j["center_intensity"] = *g.center_intensity;
    if (g.radius_range) j["radius_range"] = {g.radius_range->first, g.radius_range->second};
    j["empty_region"] = g.empty_region;
  }
  return j;
}

inline GeneratorInfo generator_from_json(const json& j) {
  detail::reject_unknown(j, {"kind", "lambda", "count", "centers", "radii", "center_intensity", "radius_range", "empty_region"},
                         "generator");
  GeneratorInfo g;
  try {
    g.kind = generator_kind_from_string(detail::get_field<std::string>(j, "kind"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  if (j.contains("lambda")) g.lambda = detail::get_field<double>(j, "lambda");
  if (j.contains("count")) g.count = detail::get_field<std::uint64_t>(j, "count");
  if (j.contains("centers")) g.centers = detail::get_field<std::vector<std::vector<double>>>(j, "centers");
  if (j.contains("radii")) g.radii = detail::get_field<std::vector<double>>(j, "radii");
  if (j.contains("center_intensity")) g.center_intensity = detail::get_field<double>(j, "center_intensity");
  if (j.contains("radius_range")) {
    const auto rr = detail::get_field<std::vector<double>>(j, "radius_range");
    if (rr.size() != 2) throw FormatError("generator: radius_range must have two entries");
    g.radius_range = std::make_pair(rr[0], rr[1]);
  }
  if (j.contains("empty_region")) g.empty_region = detail::get_field<bool>(j, "empty_region");
  return g;
}

inline json sample_to_json(const Sample& s) {
  json pts = json::array();
  for (const Point& p : s.points) pts.push_back(p.coords);
  return json{{"dim", s.dim},
              {"window", window_to_json(s.window)},
              {"seed", s.seed},
              {"generator", generator_to_json(s.generator)},
              {"points", std::move(pts)}};
}

inline Sample sample_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("sample: expected a JSON object");
  detail::reject_unknown(j, {"dim", "window", "seed", "generator", "points"}, "sample");
  Sample s;
  s.dim = detail::get_field<std::size_t>(j, "dim");
  s.window = window_from_json(detail::get_field<json>(j, "window"));
  s.seed = detail::get_field<std::uint64_t>(j, "seed");
  s.generator = generator_from_json(detail::get_field<json>(j, "generator"));
  const auto coords = detail::get_field<std::vector<std::vector<double>>>(j, "points");
  s.points.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) s.points.push_back(Point{i, coords[i]});
  try {
    validate_sample(s);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return s;
}

// ---- Hierarchy ------------------------------------------------------------------------

inline json metric_to_json(const Metric& m) {
  json j{{"kind", m.name()}};
  if (m.is_torus()) j["window"] = window_to_json(m.window());
  return j;
}

inline Metric metric_from_json(const json& j) {
  detail::reject_unknown(j, {"kind", "window"}, "metric");
  const auto kind = detail::get_field<std::string>(j, "kind");
  if (kind == "euclidean") return Metric::euclidean();
  if (kind == "torus") return Metric::torus(window_from_json(detail::get_field<json>(j, "window")));
  throw FormatError("metric: unknown kind '" + kind + "'");
}

inline json pair_to_json(const Pair& p) {
  json j{{"id", p.id}, {"level", p.level}, {"heads", p.heads}};
  j["exit"] = p.exit ? json(*p.exit) : json(nullptr);
  j["exit_target"] = p.exit_target ? json(*p.exit_target) : json(nullptr);
  j["merge_distance"] = p.merge_distance ? json(*p.merge_distance) : json(nullptr);
  return j;
}

inline Pair pair_from_json(const json& j) {
  detail::reject_unknown(j, {"id", "level", "heads", "exit", "exit_target", "merge_distance"}, "pair");
  Pair p;
  p.id = detail::get_field<PairId>(j, "id");
  p.level = detail::get_field<std::size_t>(j, "level");
  p.heads = detail::get_field<std::array<PointId, 2>>(j, "heads");
  if (j.contains("exit") && !j["exit"].is_null()) p.exit = detail::get_field<PointId>(j, "exit");
  if (j.contains("exit_target") && !j["exit_target"].is_null()) p.exit_target = detail::get_field<PointId>(j, "exit_target");
  if (j.contains("merge_distance") && !j["merge_distance"].is_null()) {
    p.merge_distance = detail::get_field<double>(j, "merge_distance");
  }
  return p;
}

inline json hierarchy_to_json(const Hierarchy& h) {
  json levels = json::array();
  for (const LevelGraph& g : h.levels) {
    json tags = json::array();
    for (const EdgeTag& t : g.tags) tags.push_back(to_string(t));
    levels.push_back(json{{"k", g.level}, {"successors", g.successor}, {"tags", std::move(tags)}, {"cycles", g.cycles}});
  }
  json pairs = json::array();
  for (const auto& lvl : h.pairs_by_level) {
    for (const Pair& p : lvl) pairs.push_back(pair_to_json(p));
  }
  json genealogy = json::array();
  for (const auto& [child, parent] : h.genealogy) genealogy.push_back({child, parent});
  return json{{"sample", sample_to_json(h.sample)},
              {"metric", metric_to_json(h.metric)},
              {"levels", std::move(levels)},
              {"pairs", std::move(pairs)},
              {"genealogy", std::move(genealogy)},
              {"termination", to_string(h.termination)}};
}

// Re-derives components from the stored successors and checks them against the stored cycles.
inline Hierarchy hierarchy_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("hierarchy: expected a JSON object");
  detail::reject_unknown(j, {"sample", "metric", "levels", "pairs", "genealogy", "termination"}, "hierarchy");
  Hierarchy h;
  h.sample = sample_from_json(detail::get_field<json>(j, "sample"));
  h.metric = metric_from_json(detail::get_field<json>(j, "metric"));
  try {
    h.termination = termination_from_string(detail::get_field<std::string>(j, "termination"));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  const std::size_t n = h.sample.size();
  for (const json& lj : detail::get_field<json>(j, "levels")) {
    detail::reject_unknown(lj, {"k", "successors", "tags", "cycles"}, "level");
    LevelGraph g;
    g.level = detail::get_field<std::size_t>(lj, "k");
    if (g.level != h.levels.size()) throw FormatError("hierarchy: levels out of order");
    g.successor = detail::get_field<std::vector<PointId>>(lj, "successors");
    const auto tags = detail::get_field<std::vector<std::string>>(lj, "tags");
    if (g.successor.size() != n || tags.size() != n) throw FormatError("hierarchy: level size differs from sample size");
    for (PointId s : g.successor) {
      if (s >= n) throw FormatError("hierarchy: successor out of range");
    }
    try {
      for (const auto& t : tags) g.tags.push_back(edge_tag_from_string(t));
      compute_structure(g);
    } catch (const std::exception& e) {
      throw FormatError(std::string("hierarchy: ") + e.what());
    }
    if (g.cycles != detail::get_field<std::vector<std::array<PointId, 2>>>(lj, "cycles")) {
      throw FormatError("hierarchy: stored cycles disagree with successors at level " + std::to_string(g.level));
    }
    h.levels.push_back(std::move(g));
  }
  h.pairs_by_level.resize(h.levels.size());
  for (const json& pj : detail::get_field<json>(j, "pairs")) {
    Pair p = pair_from_json(pj);
    if (p.level >= h.levels.size()) throw FormatError("hierarchy: pair level out of range");
    h.pairs_by_level[p.level].push_back(p);
  }
  for (const json& gj : detail::get_field<json>(j, "genealogy")) {
    const auto e = gj.get<std::array<PairId, 2>>();
    h.genealogy[e[0]] = e[1];
  }
  return h;
}

// Genealogy dendrogram: level-0 pairs are leaves, each pair hangs below the pair that
// absorbed it with branch length equal to the level difference.
inline std::string to_newick(const Hierarchy& h) {
  if (h.empty()) return ";";
  std::map<PairId, std::vector<PairId>> children;
  for (const auto& [child, parent] : h.genealogy) children[parent].push_back(child);
  std::ostringstream out;
  auto emit = [&](auto&& self, PairId id) -> void {
    auto it = children.find(id);
    if (it != children.end()) {
      out << '(';
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        if (i) out << ',';
        self(self, it->second[i]);
        const std::size_t gap = h.pair(id).level - h.pair(it->second[i]).level;
        out << ':' << gap;
      }
      out << ')';
    }
    out << 'P' << id;
  };
  const auto& top = h.pairs_by_level.back();
  if (top.size() == 1) {
    emit(emit, top.front().id);
  } else {
    out << '(';
    for (std::size_t i = 0; i < top.size(); ++i) {
      if (i) out << ',';
      emit(emit, top[i].id);
    }
    out << ')';
  }
  out << ';';
  return out.str();
}

// ---- CSV ------------------------------------------------------------------------------

inline std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return s.str();
}

inline const char* kLevelsHeader = "level,n_components,n_heads,n_exit,head_intensity,exit_intensity,mean_merge_distance";
inline const char* kDetectorHeader = "level,target_d,baseline_d,R,rel_increase,detected_flag";

inline std::string levels_csv(const std::vector<LevelStats>& rows) {
  std::ostringstream out;
  out << kLevelsHeader << '\n';
  for (const auto& r : rows) {
    out << r.level << ',' << r.n_components << ',' << r.n_heads << ',' << r.n_exit << ',' << format_double(r.head_intensity)
        << ',' << format_double(r.exit_intensity) << ',';
    if (r.mean_merge_distance) out << format_double(*r.mean_merge_distance);
    out << '\n';
  }
  return out.str();
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("bad number '" + s + "'");
  }
}

inline std::size_t parse_size(const std::string& s) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw FormatError("bad integer '" + s + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw FormatError("bad integer '" + s + "'");
  }
}

}  // namespace detail

inline std::vector<LevelStats> levels_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kLevelsHeader) throw FormatError("levels csv: unexpected header");
  std::vector<LevelStats> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 7) throw FormatError("levels csv: expected 7 fields, got " + std::to_string(f.size()));
    LevelStats r;
    r.level = detail::parse_size(f[0]);
    r.n_components = detail::parse_size(f[1]);
    r.n_heads = detail::parse_size(f[2]);
    r.n_exit = detail::parse_size(f[3]);
    r.head_intensity = detail::parse_double(f[4]);
    r.exit_intensity = detail::parse_double(f[5]);
    if (!f[6].empty()) r.mean_merge_distance = detail::parse_double(f[6]);
    if (r.level != rows.size()) throw FormatError("levels csv: levels must be 0,1,2,... in order");
    rows.push_back(r);
  }
  return rows;
}

// The d_k series carried by a levels file.
inline std::vector<double> distance_series(const std::vector<LevelStats>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (!r.mean_merge_distance) break;
    out.push_back(*r.mean_merge_distance);
  }
  return out;
}

inline std::string detector_csv(const Detection& d) {
  std::ostringstream out;
  out << kDetectorHeader << '\n';
  for (const auto& r : d.rows) {
    out << r.level << ',' << format_double(r.target_d) << ',' << format_double(r.baseline_d) << ',' << format_double(r.ratio)
        << ',';
    if (r.rel_increase) out << format_double(*r.rel_increase);
    out << ',' << (r.flagged ? 1 : 0) << '\n';
  }
  return out.str();
}

// ---- files ----------------------------------------------------------------------------

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

inline Sample read_sample(const std::string& path) { return sample_from_json(parse_json_text(read_text(path), path)); }
inline void write_sample(const std::string& path, const Sample& s) { write_text(path, sample_to_json(s).dump() + "\n"); }

inline Hierarchy read_hierarchy(const std::string& path) { return hierarchy_from_json(parse_json_text(read_text(path), path)); }
inline void write_hierarchy(const std::string& path, const Hierarchy& h) { write_text(path, hierarchy_to_json(h).dump() + "\n"); }

}  // namespace chn2::io
