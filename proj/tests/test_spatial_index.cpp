#include <gtest/gtest.h>

#include "chn2/pointprocess.hpp"
#include "chn2/spatial_index.hpp"
#include "support/oracles.hpp"

using namespace chn2;

namespace {

std::vector<IndexEntry> entries_of(const std::vector<Point>& pts, const std::vector<std::size_t>& groups) {
  std::vector<IndexEntry> e;
  for (std::size_t i = 0; i < pts.size(); ++i) e.push_back(IndexEntry{&pts[i], groups[i]});
  return e;
}

}  // namespace

TEST(NnIndexTest, EmptyInputThrows) {
  EXPECT_THROW(NnIndex({}, Metric::euclidean()), std::invalid_argument);
}

TEST(NnIndexTest, SinglePoint) {
  const std::vector<Point> pts{Point{0, {1.0, 2.0}}};
  const NnIndex idx(entries_of(pts, {0}), Metric::euclidean());
  EXPECT_EQ(idx.size(), 1u);
  EXPECT_EQ(idx.nearest(pts[0].coords).id, 0u);
  EXPECT_THROW(idx.nearest_foreign(pts[0], 0), NoForeignEntry);
}

TEST(NnIndexTest, EveryPointFindsItself) {
  const Sample s = gen_poisson(200.0, Window::cube(2, 0, 1), 2, 4);
  std::vector<std::size_t> groups(s.size(), 0);
  const NnIndex idx(entries_of(s.points, groups), Metric::euclidean());
  for (const Point& p : s.points) {
    const auto r = idx.nearest(p.coords);
    EXPECT_EQ(r.id, p.id);
    EXPECT_EQ(r.distance, 0.0);
  }
}

TEST(NnIndexTest, ForeignQueryOneDimension) {
  const std::vector<Point> pts{Point{0, {0.0}}, Point{5, {5.0}}};
  const NnIndex idx(entries_of(pts, {10, 11}), Metric::euclidean());
  const auto r = idx.nearest_foreign(pts[0], 10);
  EXPECT_EQ(r.id, 5u);
  EXPECT_EQ(r.group, 11u);
  EXPECT_DOUBLE_EQ(r.distance, 5.0);
}

TEST(NnIndexTest, NearestMatchesLinearScan) {
  const Sample s = gen_binomial(1000, Window::cube(2, 0, 1), 2, 8);
  std::vector<std::size_t> groups(s.size(), 0);
  const NnIndex idx(entries_of(s.points, groups), Metric::euclidean());
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const auto q = uniform_in_window(rng, Window::cube(2, -0.1, 1.1));
    const auto want = oracle::scan_nearest(s.points, groups, q, std::nullopt, Metric::euclidean());
    const auto got = idx.nearest(q);
    EXPECT_EQ(got.id, want->id);
    EXPECT_EQ(got.squared, want->sq);
  }
}

TEST(NnIndexTest, ForeignMatchesFilteredScan) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (std::size_t d = 1; d <= 3; ++d) {
      const Sample s = gen_binomial(200, Window::cube(d, 0, 1), d, seed);
      std::vector<std::size_t> groups(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) groups[i] = (i * 7 + seed) % 50;
      for (const Metric& m : {Metric::euclidean(), Metric::torus(s.window)}) {
        const NnIndex idx(entries_of(s.points, groups), m);
        for (std::size_t i = 0; i < s.size(); ++i) {
          const auto want = oracle::scan_nearest(s.points, groups, s.points[i].coords, groups[i], m);
          const auto got = idx.nearest_foreign(s.points[i], groups[i]);
          ASSERT_EQ(got.id, want->id) << "seed " << seed << " d " << d << " torus " << m.is_torus();
          ASSERT_EQ(got.group, want->group);
          ASSERT_EQ(got.squared, want->sq);
        }
      }
    }
  }
}

TEST(NnIndexTest, TiesResolveToSmallestId) {
  // Lattice points: many exact ties.
  std::vector<Point> pts;
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y) pts.push_back(Point{pts.size(), {double(x), double(y)}});
  std::vector<std::size_t> groups(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) groups[i] = i;
  const NnIndex idx(entries_of(pts, groups), Metric::euclidean());
  for (const Point& p : pts) {
    const auto want = oracle::scan_nearest(pts, groups, p.coords, p.id, Metric::euclidean());
    EXPECT_EQ(idx.nearest_foreign(p, p.id).id, want->id);
  }
}

TEST(NnIndexTest, QueryingExcludedEverythingThrows) {
  const std::vector<Point> pts{Point{0, {0.0}}, Point{1, {1.0}}};
  const NnIndex idx(entries_of(pts, {3, 3}), Metric::euclidean());
  EXPECT_THROW(idx.nearest_foreign(pts[0], 3), NoForeignEntry);
}
