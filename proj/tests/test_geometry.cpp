#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "chn2/geometry.hpp"
#include "chn2/random.hpp"

using namespace chn2;

namespace {

Point pt(PointId id, std::vector<double> c) { return Point{id, std::move(c)}; }

}  // namespace

TEST(Distance, PythagoreanTriple) {
  EXPECT_DOUBLE_EQ(distance(pt(0, {0, 0}), pt(1, {3, 4}), Metric::euclidean()), 5.0);
}

TEST(Distance, IdentityIsZero) {
  const Point a = pt(0, {1.25, -7.5, 3.0});
  EXPECT_EQ(distance(a, a, Metric::euclidean()), 0.0);
}

TEST(Distance, TorusWrapsAcrossTheBoundary) {
  const Metric torus = Metric::torus(Window({0.0}, {10.0}));
  EXPECT_DOUBLE_EQ(distance(pt(0, {0.5}), pt(1, {9.5}), torus), 1.0);
  EXPECT_DOUBLE_EQ(distance(pt(0, {0.5}), pt(1, {9.5}), Metric::euclidean()), 9.0);
}

TEST(Distance, DimensionMismatchThrows) {
  EXPECT_THROW(distance(pt(0, {0, 0}), pt(1, {1}), Metric::euclidean()), std::invalid_argument);
}

TEST(Distance, SymmetryAndTorusBound) {
  Rng rng(11);
  const Window w({0.0, 0.0, 0.0}, {4.0, 5.0, 6.0});
  const Metric torus = Metric::torus(w);
  for (int i = 0; i < 500; ++i) {
    const Point a = pt(0, uniform_in_window(rng, w));
    const Point b = pt(1, uniform_in_window(rng, w));
    EXPECT_EQ(distance(a, b, Metric::euclidean()), distance(b, a, Metric::euclidean()));
    EXPECT_EQ(distance(a, b, torus), distance(b, a, torus));
    EXPECT_LE(distance(a, b, torus), distance(a, b, Metric::euclidean()));
    double half_diag = 0.0;
    for (std::size_t j = 0; j < 3; ++j) half_diag += (w.side(j) / 2) * (w.side(j) / 2);
    EXPECT_LE(distance(a, b, torus), std::sqrt(half_diag) + 1e-12);
  }
}

TEST(WindowTest, RejectsEmptyExtent) {
  EXPECT_THROW(Window({0.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(Window({0.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_DOUBLE_EQ(Window({0.0, -1.0}, {2.0, 2.0}).volume(), 6.0);
}

TEST(SingleLinkage, Singletons) {
  const std::vector<Point> s{pt(0, {0, 0})}, t{pt(1, {3, 4})};
  const auto r = single_linkage(s, t, Metric::euclidean());
  EXPECT_DOUBLE_EQ(r.value, 5.0);
  EXPECT_EQ(r.source, 0u);
  EXPECT_EQ(r.target, 1u);
}

TEST(SingleLinkage, MinimumOverCrossPairs) {
  // Cross distances: 5, sqrt(49+16), 100, 90 -> 5 via (0,0)-(3,4).
  const std::vector<Point> s{pt(0, {0, 0}), pt(1, {10, 0})}, t{pt(2, {3, 4}), pt(3, {100, 0})};
  const auto r = single_linkage(s, t, Metric::euclidean());
  EXPECT_DOUBLE_EQ(r.value, 5.0);
  EXPECT_EQ(r.source, 0u);
  EXPECT_EQ(r.target, 2u);
}

TEST(SingleLinkage, SharedPointGivesZero) {
  const std::vector<Point> s{pt(0, {0, 0}), pt(1, {1, 1})}, t{pt(1, {1, 1}), pt(2, {5, 5})};
  EXPECT_EQ(single_linkage(s, t, Metric::euclidean()).value, 0.0);
}

TEST(SingleLinkage, EmptySetThrows) {
  const std::vector<Point> s{pt(0, {0, 0})}, none;
  EXPECT_THROW(single_linkage(s, none, Metric::euclidean()), std::invalid_argument);
  EXPECT_THROW(single_linkage(none, s, Metric::euclidean()), std::invalid_argument);
}

TEST(SingleLinkage, TieBreakPicksSmallestEdgeIds) {
  // Both cross edges have length 1.
  const std::vector<Point> s{pt(4, {0}), pt(1, {3})}, t{pt(7, {1}), pt(2, {2})};
  const auto r = single_linkage(s, t, Metric::euclidean());
  EXPECT_EQ(r.source, 1u);
  EXPECT_EQ(r.target, 2u);
  const auto back = single_linkage(t, s, Metric::euclidean());
  EXPECT_EQ(back.source, 2u);
  EXPECT_EQ(back.target, 1u);
}

TEST(SingleLinkage, SymmetricAndBelowEveryCrossDistance) {
  Rng rng(5);
  const Window w = Window::cube(2, 0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point> s, t;
    const int ns = 1 + trial % 5, nt = 1 + (trial / 5) % 6;
    PointId id = 0;
    for (int i = 0; i < ns; ++i) s.push_back(pt(id++, uniform_in_window(rng, w)));
    for (int i = 0; i < nt; ++i) t.push_back(pt(id++, uniform_in_window(rng, w)));
    const auto st = single_linkage(s, t, Metric::euclidean());
    const auto ts = single_linkage(t, s, Metric::euclidean());
    EXPECT_EQ(st.value, ts.value);
    EXPECT_EQ(st.source, ts.target);
    EXPECT_EQ(st.target, ts.source);
    for (const auto& a : s)
      for (const auto& b : t) EXPECT_LE(st.value, distance(a, b, Metric::euclidean()));
  }
}

TEST(ScaleSample, MultipliesCoordinatesAndKeepsIds) {
  const std::vector<Point> p{pt(3, {1, 2})};
  const auto q = scale_sample(p, 2.0);
  EXPECT_EQ(q[0].id, 3u);
  EXPECT_EQ(q[0].coords, (std::vector<double>{2, 4}));
  EXPECT_EQ(scale_sample(p, 1.0), p);
  EXPECT_THROW(scale_sample(p, 0.0), std::invalid_argument);
  EXPECT_THROW(scale_sample(p, -1.0), std::invalid_argument);
}

TEST(UnitBall, KnownVolumes) {
  EXPECT_DOUBLE_EQ(unit_ball_volume(1), 2.0);
  EXPECT_NEAR(unit_ball_volume(2), M_PI, 1e-15);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 * M_PI / 3.0, 1e-14);
}
