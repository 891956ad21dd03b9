#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "chn2/geometry.hpp"

namespace chn2 {

using GroupId = std::size_t;

struct IndexEntry {
  const Point* point = nullptr;
  GroupId group = 0;
};

struct NnResult {
  PointId id = 0;
  GroupId group = 0;
  double distance = 0.0;  // true distance
  double squared = 0.0;
};

class NoForeignEntry : public std::runtime_error {
 public:
  NoForeignEntry() : std::runtime_error("nearest_foreign: no entry outside the query group") {}
};

// Immutable k-d tree over tagged points. Every query returns exactly what a linear
// scan would under the (squared distance, target id) order; torus queries run the
// Euclidean search once per periodic image of the query.
class NnIndex {
 public:
  NnIndex(std::span<const IndexEntry> entries, Metric metric) : metric_(std::move(metric)) {
    if (entries.empty()) throw std::invalid_argument("NnIndex: empty input");
    dim_ = entries.front().point->dim();
    const std::size_t n = entries.size();
    coords_.resize(n * dim_);
    ids_.resize(n);
    groups_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = *entries[i].point;
      if (p.dim() != dim_) throw std::invalid_argument("NnIndex: mixed dimensions");
      std::copy(p.coords.begin(), p.coords.end(), coords_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
      ids_[i] = p.id;
      groups_[i] = entries[i].group;
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * n / kLeafSize + 2);
    root_ = build(0, n);
    if (metric_.is_torus()) make_shifts();
  }

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const Metric& metric() const noexcept { return metric_; }

  NnResult nearest(std::span<const double> q) const { return search(q, std::nullopt); }

  NnResult nearest_foreign(std::span<const double> q, GroupId own_group) const { return search(q, own_group); }
  NnResult nearest_foreign(const Point& q, GroupId own_group) const { return search(q.coords, own_group); }

 private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    std::size_t axis = 0;
    double split = 0.0;
    int left = -1, right = -1;
    std::vector<double> box_lo, box_hi;
  };

  struct Best {
    double sq = std::numeric_limits<double>::infinity();
    std::size_t slot = 0;
    bool found = false;
  };

  double coord(std::size_t slot, std::size_t j) const { return coords_[slot * dim_ + j]; }

  int build(std::size_t begin, std::size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.box_lo.assign(dim_, std::numeric_limits<double>::infinity());
    node.box_hi.assign(dim_, -std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < dim_; ++j) {
        node.box_lo[j] = std::min(node.box_lo[j], coord(order_[i], j));
        node.box_hi[j] = std::max(node.box_hi[j], coord(order_[i], j));
      }
    }
    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return idx;

    std::size_t axis = 0;
    double widest = -1.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double w = node.box_hi[j] - node.box_lo[j];
      if (w > widest) {
        widest = w;
        axis = j;
      }
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return coord(a, axis) < coord(b, axis); });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[static_cast<std::size_t>(idx)].axis = axis;
    nodes_[static_cast<std::size_t>(idx)].left = l;
    nodes_[static_cast<std::size_t>(idx)].right = r;
    return idx;
  }

  void make_shifts() {
    const Window& w = metric_.window();
    if (w.dim() != dim_) throw std::invalid_argument("NnIndex: torus window dimension mismatch");
    std::size_t total = 1;
    for (std::size_t j = 0; j < dim_; ++j) total *= 3;
    shifts_.assign(total, std::vector<double>(dim_, 0.0));
    for (std::size_t s = 0; s < total; ++s) {
      std::size_t code = s;
      for (std::size_t j = 0; j < dim_; ++j) {
        const int k = static_cast<int>(code % 3) - 1;
        code /= 3;
        shifts_[s][j] = k * w.side(j);
      }
    }
  }

  // Lower bound on the squared Euclidean distance from q to the node's bounding box.
  double box_bound(const Node& node, std::span<const double> q) const {
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      double t = 0.0;
      if (q[j] < node.box_lo[j]) t = node.box_lo[j] - q[j];
      else if (q[j] > node.box_hi[j]) t = q[j] - node.box_hi[j];
      s += t * t;
    }
    return s;
  }

  bool better(double sq, std::size_t slot, const Best& best) const {
    if (!best.found) return true;
    if (sq != best.sq) return sq < best.sq;
    return ids_[slot] < ids_[best.slot];
  }

  void visit(int idx, std::span<const double> shifted, std::span<const double> q, std::optional<GroupId> exclude,
             Best& best) const {
    const Node& node = nodes_[static_cast<std::size_t>(idx)];
    // Relative slack keeps rounding in the bound from pruning a tied candidate.
    if (best.found && box_bound(node, shifted) > best.sq * (1.0 + 1e-12)) return;
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t slot = order_[i];
        if (exclude && groups_[slot] == *exclude) continue;
        const double sq = metric_.squared_distance(q, std::span<const double>(&coords_[slot * dim_], dim_));
        if (better(sq, slot, best)) {
          best.sq = sq;
          best.slot = slot;
          best.found = true;
        }
      }
      return;
    }
    const Node& l = nodes_[static_cast<std::size_t>(node.left)];
    const Node& r = nodes_[static_cast<std::size_t>(node.right)];
    const bool left_first = box_bound(l, shifted) <= box_bound(r, shifted);
    visit(left_first ? node.left : node.right, shifted, q, exclude, best);
    visit(left_first ? node.right : node.left, shifted, q, exclude, best);
  }

  NnResult search(std::span<const double> q, std::optional<GroupId> exclude) const {
    if (q.size() != dim_) throw std::invalid_argument("NnIndex: query dimension mismatch");
    Best best;
    if (!metric_.is_torus()) {
      visit(root_, q, q, exclude, best);
    } else {
      std::vector<double> shifted(dim_);
      for (const auto& s : shifts_) {
        for (std::size_t j = 0; j < dim_; ++j) shifted[j] = q[j] + s[j];
        visit(root_, shifted, q, exclude, best);
      }
    }
    if (!best.found) throw NoForeignEntry();
    return NnResult{ids_[best.slot], groups_[best.slot], std::sqrt(best.sq), best.sq};
  }

  Metric metric_;
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<PointId> ids_;
  std::vector<GroupId> groups_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> shifts_;
  int root_ = 0;
};

}  // namespace chn2
