#include <gtest/gtest.h>

#include "chn2/hierarchy.hpp"
#include "support/invariants.hpp"
#include "support/oracles.hpp"

using namespace chn2;

namespace {

Sample line(std::vector<double> xs) {
  std::vector<std::vector<double>> c;
  for (double x : xs) c.push_back({x});
  return make_sample(Window({-1000.0}, {1000.0}), c);
}

using Cycle = std::array<PointId, 2>;

}  // namespace

// Ids below are indices into the coordinate lists, so {0,1,3,7} has ids 0..3.

TEST(Level0, FourPointsOneComponent) {
  const LevelGraph g = level0(line({0, 1, 3, 7}), Metric::euclidean());
  EXPECT_EQ(g.successor, (std::vector<PointId>{1, 0, 1, 2}));
  EXPECT_EQ(g.cycles, (std::vector<Cycle>{{0, 1}}));
  EXPECT_EQ(g.n_components(), 1u);
  for (const auto& t : g.tags) EXPECT_EQ(t, (EdgeTag{EdgeKind::D, 0}));
}

TEST(Level0, FivePointsTwoComponents) {
  const LevelGraph g = level0(line({0, 1, 5, 6, 20}), Metric::euclidean());
  EXPECT_EQ(g.successor, (std::vector<PointId>{1, 0, 3, 2, 3}));
  EXPECT_EQ(g.cycles, (std::vector<Cycle>{{0, 1}, {2, 3}}));
  EXPECT_EQ(g.component_of, (std::vector<std::size_t>{0, 0, 1, 1, 1}));
}

TEST(Level0, TwoPointsAreMutual) {
  const LevelGraph g = level0(line({3, 8}), Metric::euclidean());
  EXPECT_EQ(g.cycles, (std::vector<Cycle>{{0, 1}}));
  EXPECT_THROW(level0(line({3}), Metric::euclidean()), std::invalid_argument);
}

TEST(ExtractPairs, OnePairPerComponent) {
  const LevelGraph g = level0(line({0, 1, 5, 6, 20}), Metric::euclidean());
  const auto pairs = extract_pairs(g);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].heads, (Cycle{0, 1}));
  EXPECT_EQ(pairs[1].heads, (Cycle{2, 3}));
  EXPECT_EQ(pairs[0].id, 0u);
  EXPECT_EQ(pairs[1].id, 1u);
  EXPECT_EQ(extract_pairs(level0(line({0, 1, 3, 7}), Metric::euclidean())).size(), 1u);
}

TEST(NnStepTest, TwoPairsMergeThroughClosestHeads) {
  const Sample s = line({0, 1, 5, 6, 20});
  const auto pairs = extract_pairs(level0(s, Metric::euclidean()));
  const NnStep st = nn_k_step(pairs, s.points, Metric::euclidean());
  ASSERT_EQ(st.links.size(), 2u);
  EXPECT_DOUBLE_EQ(st.links[0].distance, 4.0);
  EXPECT_EQ(st.links[0].exit, 1u);
  EXPECT_EQ(st.links[0].target, 2u);
  EXPECT_EQ(st.links[1].exit, 2u);
  EXPECT_EQ(st.links[1].target, 1u);
  EXPECT_EQ(st.mutual, (std::vector<std::pair<PairId, PairId>>{{0, 1}}));
}

TEST(NnStepTest, FourPairsOnALine) {
  // A={0,1}, B={10,11}, C={14,15}, D={30,31} -> ids 0..7.
  const Sample s = line({0, 1, 10, 11, 14, 15, 30, 31});
  const auto pairs = extract_pairs(level0(s, Metric::euclidean()));
  ASSERT_EQ(pairs.size(), 4u);
  const NnStep st = nn_k_step(pairs, s.points, Metric::euclidean());
  const std::vector<PairId> nearest{1, 2, 1, 2};
  const std::vector<std::pair<PointId, PointId>> exits{{1, 2}, {3, 4}, {4, 3}, {6, 5}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(st.links[i].nearest, nearest[i]) << i;
    EXPECT_EQ(st.links[i].exit, exits[i].first) << i;
    EXPECT_EQ(st.links[i].target, exits[i].second) << i;
  }
  EXPECT_EQ(st.mutual, (std::vector<std::pair<PairId, PairId>>{{1, 2}}));
}

TEST(NnStepTest, FewerThanTwoPairsThrows) {
  const Sample s = line({0, 1});
  const auto pairs = extract_pairs(level0(s, Metric::euclidean()));
  EXPECT_THROW(nn_k_step(pairs, s.points, Metric::euclidean()), std::invalid_argument);
}

TEST(AdvanceLevel, RedirectsOnlyExitPoints) {
  const Sample s = line({0, 1, 5, 6, 20});
  const LevelGraph g0 = level0(s, Metric::euclidean());
  const auto pairs = extract_pairs(g0);
  const LevelGraph g1 = advance_level(g0, nn_k_step(pairs, s.points, Metric::euclidean()));
  EXPECT_EQ(g1.level, 1u);
  EXPECT_EQ(g1.successor, (std::vector<PointId>{1, 2, 1, 2, 3}));
  EXPECT_EQ(g1.cycles, (std::vector<Cycle>{{1, 2}}));
  EXPECT_EQ(g1.tags[1], (EdgeTag{EdgeKind::Delta, 1}));
  EXPECT_EQ(g1.tags[2], (EdgeTag{EdgeKind::Delta, 1}));
  EXPECT_EQ(g1.tags[0], (EdgeTag{EdgeKind::D, 0}));
}

TEST(AdvanceLevel, FourPairsCollapseToOneCluster) {
  const Sample s = line({0, 1, 10, 11, 14, 15, 30, 31});
  const LevelGraph g0 = level0(s, Metric::euclidean());
  const LevelGraph g1 = advance_level(g0, nn_k_step(extract_pairs(g0), s.points, Metric::euclidean()));
  EXPECT_EQ(g1.n_components(), 1u);
  EXPECT_EQ(g1.cycles, (std::vector<Cycle>{{3, 4}}));
}

TEST(ComputeStructure, RejectsLongerCycles) {
  LevelGraph g;
  g.successor = {1, 2, 0};
  g.tags.assign(3, EdgeTag{});
  EXPECT_THROW(compute_structure(g), CycleInvariantError);
}

TEST(BuildHierarchy, TerminatesAtLevelZero) {
  const Hierarchy h = build_hierarchy(line({0, 1, 3, 7}), Metric::euclidean());
  EXPECT_EQ(h.termination, Termination::SinglePair);
  EXPECT_EQ(h.final_level(), 0u);
  ASSERT_EQ(h.pairs_by_level.size(), 1u);
  EXPECT_EQ(h.pairs_by_level[0][0].heads, (Cycle{0, 1}));
  EXPECT_FALSE(h.pairs_by_level[0][0].exit.has_value());
}

TEST(BuildHierarchy, TerminatesAtLevelOne) {
  const Hierarchy h = build_hierarchy(line({0, 1, 5, 6, 20}), Metric::euclidean());
  EXPECT_EQ(h.termination, Termination::SinglePair);
  EXPECT_EQ(h.final_level(), 1u);
  EXPECT_EQ(h.levels[1].cycles, (std::vector<Cycle>{{1, 2}}));
  EXPECT_EQ(h.pairs_by_level[1][0].id, 2u);
  EXPECT_EQ(h.genealogy, (std::map<PairId, PairId>{{0, 2}, {1, 2}}));
  EXPECT_EQ(h.pair(1).exit, std::optional<PointId>(2));
  EXPECT_EQ(h.pair(1).merge_distance, std::optional<double>(4.0));
}

TEST(BuildHierarchy, DegenerateInputs) {
  EXPECT_EQ(build_hierarchy(line({}), Metric::euclidean()).termination, Termination::Degenerate);
  EXPECT_EQ(build_hierarchy(line({2}), Metric::euclidean()).termination, Termination::Degenerate);
  EXPECT_TRUE(build_hierarchy(line({2}), Metric::euclidean()).empty());
}

TEST(BuildHierarchy, MaxLevelsGuard) {
  const Sample s = gen_binomial(500, Window::cube(2, 0, 1), 2, 3);
  const Hierarchy h = build_hierarchy(s, Metric::euclidean(), 2);
  EXPECT_EQ(h.termination, Termination::MaxLevels);
  EXPECT_EQ(h.levels.size(), 2u);
  EXPECT_GT(h.pairs_by_level.back().size(), 1u);
  for (const Pair& p : h.pairs_by_level.back()) EXPECT_FALSE(p.exit.has_value());
}

TEST(Subtrees, FourPointExample) {
  const auto forest = cluster_subtrees(level0(line({0, 1, 3, 7}), Metric::euclidean()));
  EXPECT_EQ(forest, (std::map<PointId, std::vector<PointId>>{{0, {0}}, {1, {1, 2, 3}}}));
}

TEST(Subtrees, IsolatedPairsGiveSingletons) {
  const auto forest = cluster_subtrees(level0(line({0, 1, 100, 101}), Metric::euclidean()));
  EXPECT_EQ(forest.size(), 4u);
  for (const auto& [head, members] : forest) EXPECT_EQ(members, std::vector<PointId>{head});
}

TEST(DescendantCounts, FourPointExample) {
  const Hierarchy h = build_hierarchy(line({0, 1, 3, 7}), Metric::euclidean());
  EXPECT_EQ(descendant_counts(h, 0), (std::map<PointId, std::size_t>{{0, 1}, {1, 3}}));
  EXPECT_THROW(descendant_counts(h, 1), std::out_of_range);
}

TEST(DescendantCounts, SumAndMeanIdentities) {
  const Sample s = gen_binomial(800, Window::cube(2, 0, 1), 2, 21);
  const Hierarchy h = build_hierarchy(s, Metric::euclidean());
  for (std::size_t k = 0; k <= h.final_level(); ++k) {
    const auto counts = descendant_counts(h, k);
    std::size_t sum = 0;
    for (const auto& [_, c] : counts) sum += c;
    EXPECT_EQ(sum, s.size());
    EXPECT_EQ(counts.size(), 2 * h.levels[k].n_components());
  }
}

// The descent property only covers paths that run along cluster heads; a tree point
// feeding into a long exit edge breaks it on finite samples.
TEST(SecondOrderDescent, TreeEdgeIntoExitEdgeViolates) {
  const Hierarchy h = build_hierarchy(line({10, 11, 13, 16, 40, 41}), Metric::euclidean());
  const auto v = check::second_order_descent(h);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].level, 1u);
  EXPECT_EQ(v[0].path, (std::vector<PointId>{3, 2, 1, 4}));
  EXPECT_EQ(v[0].lengths, (std::vector<double>{3, 2, 29}));
  EXPECT_FALSE(v[0].heads_only);
}

TEST(SecondOrderDescent, LevelZeroPathsDescend) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Sample s = gen_binomial(400, Window::cube(2, 0, 1), 2, seed);
    Hierarchy h = build_hierarchy(s, Metric::euclidean(), 1);
    EXPECT_TRUE(check::second_order_descent(h).empty());
  }
}

class HierarchyProperties : public ::testing::TestWithParam<std::tuple<std::size_t, bool>> {};

TEST_P(HierarchyProperties, MatchesReferenceAndInvariants) {
  const auto [d, torus] = GetParam();
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const std::size_t n = 2 + (seed * 37) % 250;
    const Sample s = gen_binomial(n, Window::cube(d, 0, 1), d, seed + 1000 * d);
    const Metric m = torus ? Metric::torus(s.window) : Metric::euclidean();
    const Hierarchy h = build_hierarchy(s, m);
    const auto ref = oracle::reference_hierarchy(s.points, m);
    ASSERT_EQ(h.levels.size(), ref.size()) << "seed " << seed;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      ASSERT_EQ(h.levels[k].successor, ref[k].succ) << "seed " << seed << " level " << k;
      ASSERT_EQ(h.levels[k].cycles, ref[k].pairs);
    }
    check::Report r;
    check::structural(h, r);
    EXPECT_TRUE(r.ok()) << r.violations.front();
    EXPECT_EQ(h.termination, Termination::SinglePair);
    EXPECT_EQ(h.pairs_by_level.back().size(), 1u);
    EXPECT_EQ(build_hierarchy(s, m), h);
  }
}

INSTANTIATE_TEST_SUITE_P(DimsAndMetrics, HierarchyProperties,
                         ::testing::Combine(::testing::Values(1, 2, 3), ::testing::Bool()));

TEST(Invariance, ScaleAndTranslation) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Sample s = gen_binomial(300, Window::cube(2, 0, 1), 2, seed);
    const Hierarchy h = build_hierarchy(s, Metric::euclidean());
    for (double c : {0.5, 3.0, 10.0}) {
      Sample t = s;
      t.points = scale_sample(s.points, c);
      t.window = scale_window(s.window, c);
      EXPECT_TRUE(check::same_combinatorics(h, build_hierarchy(t, Metric::euclidean()))) << "scale " << c;
    }
    const std::vector<double> shift{17.25, -3.5};
    Sample t = s;
    t.points = translate_sample(s.points, shift);
    t.window = translate_window(s.window, shift);
    EXPECT_TRUE(check::same_combinatorics(h, build_hierarchy(t, Metric::euclidean())));
  }
}

TEST(Genealogy, EveryNonTerminalPairHasAParentOneLevelUp) {
  const Sample s = gen_binomial(1000, Window::cube(2, 0, 1), 2, 5);
  const Hierarchy h = build_hierarchy(s, Metric::euclidean());
  for (std::size_t k = 0; k + 1 < h.levels.size(); ++k) {
    for (const Pair& p : h.pairs_by_level[k]) {
      ASSERT_TRUE(h.genealogy.count(p.id));
      const Pair& parent = h.pair(h.genealogy.at(p.id));
      EXPECT_EQ(parent.level, k + 1);
      EXPECT_EQ(h.levels[k + 1].component_of[p.heads[0]], h.levels[k + 1].component_of[parent.heads[0]]);
      ASSERT_TRUE(p.exit.has_value());
      EXPECT_TRUE(*p.exit == p.heads[0] || *p.exit == p.heads[1]);
    }
  }
  EXPECT_EQ(h.genealogy.size(), [&] {
    std::size_t c = 0;
    for (std::size_t k = 0; k + 1 < h.levels.size(); ++k) c += h.pairs_by_level[k].size();
    return c;
  }());
}
