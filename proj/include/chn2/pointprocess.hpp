#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chn2/geometry.hpp"
#include "chn2/random.hpp"

namespace chn2 {

enum class GeneratorKind { Manual, Poisson, Binomial, Cox };

inline std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Manual: return "manual";
    case GeneratorKind::Poisson: return "poisson";
    case GeneratorKind::Binomial: return "binomial";
    case GeneratorKind::Cox: return "cox";
  }
  return "manual";
}

inline GeneratorKind generator_kind_from_string(const std::string& s) {
  if (s == "manual") return GeneratorKind::Manual;
  if (s == "poisson") return GeneratorKind::Poisson;
  if (s == "binomial") return GeneratorKind::Binomial;
  if (s == "cox") return GeneratorKind::Cox;
  throw std::invalid_argument("unknown generator kind '" + s + "'");
}

struct GeneratorInfo {
  GeneratorKind kind = GeneratorKind::Manual;
  std::optional<double> lambda;
  std::optional<std::uint64_t> count;
  // Cox: the realized driving region (centers and radii actually used).
  std::vector<std::vector<double>> centers;
  std::vector<double> radii;
  std::optional<double> center_intensity;
  std::optional<std::pair<double, double>> radius_range;
  // Set when the Cox region misses the window entirely.
  bool empty_region = false;

  friend bool operator==(const GeneratorInfo&, const GeneratorInfo&) = default;
};

struct Sample {
  std::size_t dim = 0;
  Window window;
  std::vector<Point> points;
  GeneratorInfo generator;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return points.size(); }
  friend bool operator==(const Sample&, const Sample&) = default;
};

// Throws std::invalid_argument on the first broken invariant.
inline void validate_sample(const Sample& s) {
  if (s.dim == 0) throw std::invalid_argument("sample: dim must be >= 1");
  if (s.window.dim() != s.dim) throw std::invalid_argument("sample: window dimension differs from dim");
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const Point& p = s.points[i];
    if (p.id != i) throw std::invalid_argument("sample: point ids must be 0..n-1 in order");
    if (p.coords.size() != s.dim) throw std::invalid_argument("sample: point " + std::to_string(i) + " has wrong dimension");
    for (double x : p.coords) {
      if (!std::isfinite(x)) throw std::invalid_argument("sample: point " + std::to_string(i) + " has a non-finite coordinate");
    }
    if (!s.window.contains(p.coords)) throw std::invalid_argument("sample: point " + std::to_string(i) + " lies outside the window");
  }
  std::map<std::vector<double>, PointId> seen;
  for (const Point& p : s.points) {
    auto [it, fresh] = seen.emplace(p.coords, p.id);
    if (!fresh) {
      throw std::invalid_argument("sample: duplicate points " + std::to_string(it->second) + " and " + std::to_string(p.id));
    }
  }
}

// Builds a sample from raw coordinates (ids assigned in order) and validates it.
inline Sample make_sample(const Window& window, const std::vector<std::vector<double>>& coords) {
  Sample s;
  s.dim = window.dim();
  s.window = window;
  s.points.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) s.points.push_back(Point{i, coords[i]});
  validate_sample(s);
  return s;
}

namespace detail {

// Draws `n` uniform points in `w`; any coordinate collision is redrawn.
inline std::vector<Point> uniform_points(Rng& rng, const Window& w, std::uint64_t n) {
  std::vector<Point> pts;
  pts.reserve(n);
  std::map<std::vector<double>, bool> seen;
  while (pts.size() < n) {
    auto x = uniform_in_window(rng, w);
    if (!seen.emplace(x, true).second) continue;
    pts.push_back(Point{pts.size(), std::move(x)});
  }
  return pts;
}

inline void check_dim(const Window& w, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("dimension must be >= 1");
  if (w.dim() != dim) throw std::invalid_argument("window dimension does not match dim");
}

}  // namespace detail

inline Sample gen_binomial(std::uint64_t n, const Window& window, std::size_t dim, std::uint64_t seed) {
  detail::check_dim(window, dim);
  Rng rng(seed);
  Sample s;
  s.dim = dim;
  s.window = window;
  s.seed = seed;
  s.generator.kind = GeneratorKind::Binomial;
  s.generator.count = n;
  s.points = detail::uniform_points(rng, window, n);
  return s;
}

// lambda == 0 is accepted and yields an empty sample.
inline Sample gen_poisson(double lambda, const Window& window, std::size_t dim, std::uint64_t seed) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("gen_poisson: lambda must be positive");
  detail::check_dim(window, dim);
  Rng rng(seed);
  const std::uint64_t n = poisson_count(rng, lambda * window.volume());
  Sample s;
  s.dim = dim;
  s.window = window;
  s.seed = seed;
  s.generator.kind = GeneratorKind::Poisson;
  s.generator.lambda = lambda;
  s.points = detail::uniform_points(rng, window, n);
  return s;
}

struct CoxBallSpec {
  // Fixed mode: centers/radii given. Random mode: center_intensity + radius_range.
  std::vector<std::vector<double>> centers;
  std::vector<double> radii;
  std::optional<double> center_intensity;
  std::optional<std::pair<double, double>> radius_range;
  double lambda = 1.0;

  bool fixed_mode() const noexcept { return !center_intensity.has_value(); }

  void validate(std::size_t dim) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("cox: lambda must be positive");
    if (fixed_mode()) {
      if (centers.size() != radii.size()) throw std::invalid_argument("cox: centers and radii differ in length");
      for (const auto& c : centers) {
        if (c.size() != dim) throw std::invalid_argument("cox: center dimension does not match dim");
      }
      for (double r : radii) {
        if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("cox: radii must be positive");
      }
    } else {
      if (!(*center_intensity > 0.0)) throw std::invalid_argument("cox: center_intensity must be positive");
      if (!radius_range) throw std::invalid_argument("cox: random mode needs a radius range");
      const auto [rmin, rmax] = *radius_range;
      if (!(rmin > 0.0) || !(rmin <= rmax)) throw std::invalid_argument("cox: radius range must satisfy 0 < r_min <= r_max");
    }
  }
};

// Union of balls: true when x lies strictly inside at least one ball.
inline bool in_ball_union(std::span<const double> x, const std::vector<std::vector<double>>& centers,
                          const std::vector<double>& radii) {
  const Metric eu = Metric::euclidean();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (eu.squared_distance(x, centers[i]) < radii[i] * radii[i]) return true;
  }
  return false;
}

namespace detail {

inline bool ball_meets_window(std::span<const double> c, double r, const Window& w) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double nearest = std::clamp(c[j], w.lo()[j], w.hi()[j]);
    s += (c[j] - nearest) * (c[j] - nearest);
  }
  return s < r * r;
}

}  // namespace detail

// Poisson process of intensity lambda restricted to a union of balls.
inline Sample gen_cox_balls(const CoxBallSpec& spec, const Window& window, std::size_t dim, std::uint64_t seed) {
  detail::check_dim(window, dim);
  spec.validate(dim);
  Rng rng(seed);

  Sample s;
  s.dim = dim;
  s.window = window;
  s.seed = seed;
  s.generator.kind = GeneratorKind::Cox;
  s.generator.lambda = spec.lambda;
  s.generator.center_intensity = spec.center_intensity;
  s.generator.radius_range = spec.radius_range;

  if (spec.fixed_mode()) {
    s.generator.centers = spec.centers;
    s.generator.radii = spec.radii;
  } else {
    const std::uint64_t m = poisson_count(rng, *spec.center_intensity * window.volume());
    const auto [rmin, rmax] = *spec.radius_range;
    for (std::uint64_t i = 0; i < m; ++i) {
      s.generator.centers.push_back(uniform_in_window(rng, window));
      s.generator.radii.push_back(rmin == rmax ? rmin : uniform_in(rng, rmin, rmax));
    }
  }

  bool meets = false;
  for (std::size_t i = 0; i < s.generator.centers.size(); ++i) {
    meets = meets || detail::ball_meets_window(s.generator.centers[i], s.generator.radii[i], window);
  }
  if (!meets) {
    s.generator.empty_region = true;
    return s;
  }

  // Thinning a window-wide Poisson process keeps exactly the in-region points.
  const std::uint64_t n = poisson_count(rng, spec.lambda * window.volume());
  std::map<std::vector<double>, bool> seen;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto x = uniform_in_window(rng, window);
    if (!in_ball_union(x, s.generator.centers, s.generator.radii)) continue;
    if (!seen.emplace(x, true).second) continue;
    s.points.push_back(Point{s.points.size(), std::move(x)});
  }
  return s;
}

}  // namespace chn2
