#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chn2/hierarchy.hpp"
#include "chn2/parallel.hpp"
#include "chn2/pointprocess.hpp"
#include "chn2/random.hpp"

namespace chn2 {

struct LevelStats {
  std::size_t level = 0;
  std::size_t n_components = 0;
  std::size_t n_heads = 0;
  std::size_t n_exit = 0;
  double head_intensity = 0.0;
  double exit_intensity = 0.0;
  // Mean single-linkage merge distance of the level's pairs; absent on the last level.
  std::optional<double> mean_merge_distance;

  friend bool operator==(const LevelStats&, const LevelStats&) = default;
};

inline std::vector<LevelStats> level_stats(const Hierarchy& h, const Window& window) {
  std::vector<LevelStats> rows;
  const double vol = window.volume();
  for (std::size_t k = 0; k < h.levels.size(); ++k) {
    const auto& pairs = h.pairs_by_level[k];
    LevelStats s;
    s.level = k;
    s.n_components = h.levels[k].n_components();
    s.n_heads = 2 * s.n_components;
    double sum = 0.0;
    std::size_t merged = 0;
    for (const Pair& p : pairs) {
      if (p.merge_distance) {
        sum += *p.merge_distance;
        ++merged;
      }
    }
    s.n_exit = merged;
    if (merged > 0) s.mean_merge_distance = sum / static_cast<double>(merged);
    s.head_intensity = static_cast<double>(s.n_heads) / vol;
    s.exit_intensity = static_cast<double>(s.n_exit) / vol;
    rows.push_back(s);
  }
  return rows;
}

inline std::vector<LevelStats> level_stats(const Hierarchy& h) { return level_stats(h, h.sample.window); }

// exit_intensity(k+1) / exit_intensity(k), skipping zero denominators.
inline std::vector<double> decay_ratios(const std::vector<LevelStats>& stats) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 2 < stats.size(); ++k) {
    if (stats[k].exit_intensity > 0.0) out.push_back(stats[k + 1].exit_intensity / stats[k].exit_intensity);
  }
  return out;
}

// d_k for every level with at least two pairs.
inline std::vector<double> mean_distance_series(const Hierarchy& h) {
  std::vector<double> out;
  for (const auto& row : level_stats(h)) {
    if (row.mean_merge_distance) out.push_back(*row.mean_merge_distance);
  }
  return out;
}

struct BaselineSeries {
  std::vector<double> mean;             // averaged d_k
  std::vector<std::size_t> contributors;  // runs that reached level k
};

// Mean d_k over n_seeds fixed-count uniform samples; level k averages the runs that reach it.
inline BaselineSeries poisson_baseline(const Window& window, std::uint64_t expected_count, std::size_t n_seeds,
                                       const Metric& metric, std::uint64_t master_seed) {
  if (n_seeds == 0) throw std::invalid_argument("poisson_baseline: n_seeds must be >= 1");
  std::vector<std::vector<double>> runs(n_seeds);
  parallel_for(n_seeds, [&](std::size_t i) {
    const Sample s = gen_binomial(expected_count, window, window.dim(), derive_seed(master_seed, i));
    runs[i] = mean_distance_series(build_hierarchy(s, metric));
  });
  BaselineSeries b;
  for (const auto& r : runs) {
    if (r.size() > b.mean.size()) {
      b.mean.resize(r.size(), 0.0);
      b.contributors.resize(r.size(), 0);
    }
    for (std::size_t k = 0; k < r.size(); ++k) {
      b.mean[k] += r[k];
      ++b.contributors[k];
    }
  }
  for (std::size_t k = 0; k < b.mean.size(); ++k) b.mean[k] /= static_cast<double>(b.contributors[k]);
  return b;
}

struct DetectorConfig {
  double tau = 0.3;
  std::size_t baseline_seeds = 20;

  void validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("detector: tau must be positive");
    if (baseline_seeds == 0) throw std::invalid_argument("detector: baseline_seeds must be >= 1");
  }
};

enum class DetectionStatus { Detected, None, InsufficientDepth };

inline std::string to_string(DetectionStatus s) {
  switch (s) {
    case DetectionStatus::Detected: return "detected";
    case DetectionStatus::None: return "none";
    case DetectionStatus::InsufficientDepth: return "insufficient_depth";
  }
  return "none";
}

struct DetectorRow {
  std::size_t level = 0;
  double target_d = 0.0;
  double baseline_d = 0.0;
  double ratio = 0.0;
  std::optional<double> rel_increase;  // absent at level 0
  bool flagged = false;
};

struct Detection {
  DetectionStatus status = DetectionStatus::None;
  std::optional<std::size_t> level;  // first flagged level
  std::vector<std::size_t> flagged;  // every level above threshold
  std::vector<DetectorRow> rows;
};

// R_k = target_k / baseline_k over the common levels; detects the first k >= 1 with
// (R_k - R_{k-1}) / R_{k-1} > tau.
inline Detection detect_aggregation(const std::vector<double>& target, const std::vector<double>& baseline,
                                    const DetectorConfig& cfg) {
  cfg.validate();
  Detection d;
  const std::size_t common = std::min(target.size(), baseline.size());
  for (std::size_t k = 0; k < common; ++k) {
    if (!(baseline[k] > 0.0) || !std::isfinite(baseline[k])) {
      throw std::invalid_argument("detect_aggregation: baseline entry at level " + std::to_string(k) + " must be positive");
    }
    if (!std::isfinite(target[k]) || target[k] < 0.0) {
      throw std::invalid_argument("detect_aggregation: target entry at level " + std::to_string(k) + " is invalid");
    }
    DetectorRow row;
    row.level = k;
    row.target_d = target[k];
    row.baseline_d = baseline[k];
    row.ratio = target[k] / baseline[k];
    if (k >= 1) {
      const double prev = d.rows[k - 1].ratio;
      if (prev > 0.0) {
        row.rel_increase = (row.ratio - prev) / prev;
        row.flagged = *row.rel_increase > cfg.tau;
      }
    }
    if (row.flagged) {
      d.flagged.push_back(k);
      if (!d.level) d.level = k;
    }
    d.rows.push_back(row);
  }
  if (common < 2) d.status = DetectionStatus::InsufficientDepth;
  else d.status = d.level ? DetectionStatus::Detected : DetectionStatus::None;
  return d;
}

}  // namespace chn2
