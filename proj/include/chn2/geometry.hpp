#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace chn2 {

using PointId = std::size_t;

struct Point {
  PointId id = 0;
  std::vector<double> coords;

  std::size_t dim() const noexcept { return coords.size(); }
  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box [lo, hi) in d dimensions.
class Window {
 public:
  Window() = default;
  Window(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size() || lo_.empty()) {
      throw std::invalid_argument("window: lo/hi must be nonempty and of equal length");
    }
    for (std::size_t j = 0; j < lo_.size(); ++j) {
      if (!std::isfinite(lo_[j]) || !std::isfinite(hi_[j]) || !(lo_[j] < hi_[j])) {
        throw std::invalid_argument("window: lo[j] < hi[j] required on axis " + std::to_string(j));
      }
    }
  }

  static Window cube(std::size_t dim, double lo, double hi) {
    return Window(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
  }

  const std::vector<double>& lo() const noexcept { return lo_; }
  const std::vector<double>& hi() const noexcept { return hi_; }
  std::size_t dim() const noexcept { return lo_.size(); }
  double side(std::size_t j) const { return hi_[j] - lo_[j]; }

  double volume() const {
    double v = 1.0;
    for (std::size_t j = 0; j < lo_.size(); ++j) v *= side(j);
    return v;
  }

  bool contains(std::span<const double> x) const {
    if (x.size() != lo_.size()) return false;
    for (std::size_t j = 0; j < lo_.size(); ++j) {
      if (!(x[j] >= lo_[j] && x[j] < hi_[j])) return false;
    }
    return true;
  }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

enum class MetricKind { Euclidean, Torus };

class Metric {
 public:
  static Metric euclidean() { return Metric{}; }
  static Metric torus(Window w) {
    Metric m;
    m.kind_ = MetricKind::Torus;
    m.window_ = std::move(w);
    return m;
  }

  MetricKind kind() const noexcept { return kind_; }
  bool is_torus() const noexcept { return kind_ == MetricKind::Torus; }
  const Window& window() const {
    if (!window_) throw std::logic_error("metric: euclidean metric has no window");
    return *window_;
  }
  std::string name() const { return is_torus() ? "torus" : "euclidean"; }

  // Comparisons use squared distances; only reported values take the root.
  double squared_distance(std::span<const double> a, std::span<const double> b) const {
    if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
    double s = 0.0;
    if (kind_ == MetricKind::Euclidean) {
      for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        s += t * t;
      }
      return s;
    }
    const Window& w = *window_;
    if (w.dim() != a.size()) throw std::invalid_argument("distance: torus window dimension mismatch");
    for (std::size_t j = 0; j < a.size(); ++j) {
      double t = std::fabs(a[j] - b[j]);
      t = std::min(t, w.side(j) - t);
      s += t * t;
    }
    return s;
  }

  double distance(std::span<const double> a, std::span<const double> b) const {
    return std::sqrt(squared_distance(a, b));
  }

  friend bool operator==(const Metric&, const Metric&) = default;

 private:
  MetricKind kind_ = MetricKind::Euclidean;
  std::optional<Window> window_;
};

inline double distance(const Point& a, const Point& b, const Metric& m) {
  return m.distance(a.coords, b.coords);
}

inline double squared_distance(const Point& a, const Point& b, const Metric& m) {
  return m.squared_distance(a.coords, b.coords);
}

// Global tie-break order for every argmin in the library: squared length, then the
// unordered endpoint ids. Symmetric in the endpoints, so an edge has one key
// regardless of the direction it is looked at from.
struct EdgeKey {
  double sq = 0.0;
  PointId lo = 0;
  PointId hi = 0;

  static EdgeKey make(double sq, PointId a, PointId b) noexcept {
    return a < b ? EdgeKey{sq, a, b} : EdgeKey{sq, b, a};
  }
  friend auto operator<=>(const EdgeKey& x, const EdgeKey& y) {
    return std::tie(x.sq, x.lo, x.hi) <=> std::tie(y.sq, y.lo, y.hi);
  }
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

struct SingleLinkage {
  double value = 0.0;  // true distance
  PointId source = 0;  // witness in S
  PointId target = 0;  // witness in T
  EdgeKey key;
};

// Minimum cross distance between two nonempty point sets, with a deterministic witness.
inline SingleLinkage single_linkage(std::span<const Point> s, std::span<const Point> t, const Metric& m) {
  if (s.empty() || t.empty()) throw std::invalid_argument("single_linkage: empty point set");
  SingleLinkage best;
  bool have = false;
  for (const Point& a : s) {
    for (const Point& b : t) {
      const EdgeKey k = EdgeKey::make(m.squared_distance(a.coords, b.coords), a.id, b.id);
      if (!have || k < best.key) {
        best.key = k;
        best.source = a.id;
        best.target = b.id;
        have = true;
      }
    }
  }
  best.value = std::sqrt(best.key.sq);
  return best;
}

inline std::vector<Point> scale_sample(std::span<const Point> points, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("scale_sample: factor must be positive");
  std::vector<Point> out(points.begin(), points.end());
  for (Point& p : out) {
    for (double& x : p.coords) x *= c;
  }
  return out;
}

inline std::vector<Point> translate_sample(std::span<const Point> points, std::span<const double> shift) {
  std::vector<Point> out(points.begin(), points.end());
  for (Point& p : out) {
    if (p.coords.size() != shift.size()) throw std::invalid_argument("translate_sample: dimension mismatch");
    for (std::size_t j = 0; j < shift.size(); ++j) p.coords[j] += shift[j];
  }
  return out;
}

inline Window scale_window(const Window& w, double c) {
  std::vector<double> lo = w.lo(), hi = w.hi();
  for (auto& x : lo) x *= c;
  for (auto& x : hi) x *= c;
  return Window(std::move(lo), std::move(hi));
}

inline Window translate_window(const Window& w, std::span<const double> shift) {
  std::vector<double> lo = w.lo(), hi = w.hi();
  for (std::size_t j = 0; j < lo.size(); ++j) {
    lo[j] += shift[j];
    hi[j] += shift[j];
  }
  return Window(std::move(lo), std::move(hi));
}

// Volume of the unit ball in d dimensions.
inline double unit_ball_volume(std::size_t d) {
  const double pi = 3.14159265358979323846;
  const double half = static_cast<double>(d) / 2.0;
  return std::pow(pi, half) / std::tgamma(half + 1.0);
}

}  // namespace chn2
