#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "vizsim/error.hpp"
#include "vizsim/evalsuite.hpp"

using namespace vizsim;
using namespace vizsim::eval;

namespace {

DistanceMatrix euclidean(const std::vector<std::vector<double>>& pts) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < pts.size(); ++i) ids.push_back("p" + std::to_string(i));
  DistanceMatrix m(ids);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      double s = 0;
      for (std::size_t d = 0; d < pts[i].size(); ++d) s += (pts[i][d] - pts[j][d]) * (pts[i][d] - pts[j][d]);
      m(i, j) = std::sqrt(s);
    }
  }
  return m;
}

std::vector<std::set<std::size_t>> leaf_sets(const Dendrogram& tree) {
  const std::size_t n = tree.ids.size();
  std::vector<std::set<std::size_t>> sets(n);
  for (std::size_t i = 0; i < n; ++i) sets[i] = {i};
  for (const auto& m : tree.merges) {
    std::set<std::size_t> u = sets[m.a];
    u.insert(sets[m.b].begin(), sets[m.b].end());
    sets.push_back(u);
  }
  return sets;
}

}  // namespace

TEST(Ward, TwoPoints) {
  const auto tree = hac_ward(euclidean({{0.0}, {3.0}}));
  ASSERT_EQ(tree.merges.size(), 1u);
  EXPECT_EQ(tree.merges[0].a, 0u);
  EXPECT_EQ(tree.merges[0].b, 1u);
  EXPECT_DOUBLE_EQ(tree.merges[0].height, 3.0);
  EXPECT_EQ(tree.merges[0].size, 2u);
}

TEST(Ward, CollinearMergesClosestFirst) {
  const auto tree = hac_ward(euclidean({{0.0}, {1.0}, {10.0}}));
  ASSERT_EQ(tree.merges.size(), 2u);
  EXPECT_EQ(tree.merges[0].a, 0u);
  EXPECT_EQ(tree.merges[0].b, 1u);
  EXPECT_DOUBLE_EQ(tree.merges[0].height, 1.0);
  EXPECT_EQ(tree.merges[1].a, 2u);
  EXPECT_EQ(tree.merges[1].b, 3u);
  // sqrt(2 * 1 * 2 / 3) * 9.5
  EXPECT_NEAR(tree.merges[1].height, std::sqrt(4.0 / 3.0) * 9.5, 1e-12);
  EXPECT_EQ(tree.merges[1].size, 3u);
}

TEST(Ward, MatchesBruteForceOnRandomPoints) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 4 + trial % 6;
    std::vector<std::vector<double>> pts(n, std::vector<double>(3));
    for (auto& p : pts)
      for (auto& v : p) v = g(rng);
    const auto tree = hac_ward(euclidean(pts));
    const auto expected = oracle::brute_ward(pts);
    const auto sets = leaf_sets(tree);
    ASSERT_EQ(tree.merges.size(), expected.size());
    for (std::size_t s = 0; s < expected.size(); ++s) {
      const auto& m = tree.merges[s];
      const std::set<std::pair<std::set<std::size_t>, std::set<std::size_t>>> got{{sets[m.a], sets[m.b]},
                                                                                  {sets[m.b], sets[m.a]}};
      EXPECT_TRUE(got.count({expected[s].left, expected[s].right})) << "trial " << trial << " step " << s;
      EXPECT_NEAR(m.height, expected[s].height, 1e-9);
      EXPECT_EQ(m.size, expected[s].left.size() + expected[s].right.size());
    }
  }
}

TEST(Ward, HeightsNonDecreasing) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> pts(30, std::vector<double>(2));
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  const auto tree = hac_ward(euclidean(pts));
  for (std::size_t s = 1; s < tree.merges.size(); ++s) EXPECT_GE(tree.merges[s].height, tree.merges[s - 1].height);
  for (const auto& m : tree.merges) EXPECT_LT(m.a, m.b);
}

TEST(Ward, D1VariantOnSquaredInputMatchesD2Squared) {
  const std::vector<std::vector<double>> pts{{0, 0}, {1, 0}, {0, 3}, {5, 5}, {6, 4}};
  auto d = euclidean(pts);
  const auto t2 = hac_ward(d, WardVariant::d2);
  for (double& v : d.values) v *= v;
  const auto t1 = hac_ward(d, WardVariant::d1);
  for (std::size_t s = 0; s < t2.merges.size(); ++s) {
    EXPECT_EQ(t1.merges[s].a, t2.merges[s].a);
    EXPECT_EQ(t1.merges[s].b, t2.merges[s].b);
    EXPECT_NEAR(t1.merges[s].height, t2.merges[s].height * t2.merges[s].height, 1e-9);
  }
}

TEST(Ward, TiesResolveToSmallestPair) {
  DistanceMatrix m({"a", "b", "c", "d"});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) m(i, j) = i == j ? 0.0 : 1.0;
  const auto tree = hac_ward(m);
  EXPECT_EQ(tree.merges[0].a, 0u);
  EXPECT_EQ(tree.merges[0].b, 1u);
  // {a,b} keeps slot 0, so the tied pair (slot 0, c) precedes (c, d).
  EXPECT_EQ(tree.merges[1].a, 2u);
  EXPECT_EQ(tree.merges[1].b, 4u);
  EXPECT_DOUBLE_EQ(tree.merges[1].height, 1.0);
}

TEST(Ward, RejectsInvalidInput) {
  EXPECT_THROW(hac_ward(DistanceMatrix({"a"})), ValidationError);
  DistanceMatrix m({"a", "b"});
  m(0, 1) = 1.0;
  m(1, 0) = 2.0;
  EXPECT_THROW(hac_ward(m), ValidationError);
}

TEST(CutK, RecoversTwoBlobs) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 0.1);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({(i % 2 ? 5.0 : 0.0) + g(rng), g(rng)});
  const auto labels = cut_k(hac_ward(euclidean(pts)), 2);
  EXPECT_EQ(labels.cluster_count(), 2u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(labels.labels[i], i % 2);
}

TEST(CutK, Extremes) {
  const auto tree = hac_ward(euclidean({{0.0}, {1.0}, {4.0}, {9.0}}));
  const auto all = cut_k(tree, 4);
  EXPECT_EQ(all.labels, (std::vector<std::size_t>{0, 1, 2, 3}));
  const auto one = cut_k(tree, 1);
  EXPECT_EQ(one.labels, (std::vector<std::size_t>{0, 0, 0, 0}));
  EXPECT_EQ(cut_k(tree, 3).cluster_count(), 3u);
  EXPECT_THROW(cut_k(tree, 0), ValidationError);
  EXPECT_THROW(cut_k(tree, 5), ValidationError);
}

TEST(CutK, EveryKGivesKClusters) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> pts(20, std::vector<double>(2));
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  const auto tree = hac_ward(euclidean(pts));
  for (std::size_t k = 1; k <= 20; ++k) {
    const auto l = cut_k(tree, k);
    EXPECT_EQ(l.cluster_count(), k);
    EXPECT_EQ(std::set<std::size_t>(l.labels.begin(), l.labels.end()).size(), k);
    EXPECT_EQ(l.labels[0], 0u);
  }
}

TEST(LabelsCsv, RoundTrip) {
  const ClusterLabels l{{"x", "y, z", "w"}, {0, 1, 0}};
  const auto back = parse_labels_csv(labels_to_csv(l));
  EXPECT_EQ(back.ids, l.ids);
  EXPECT_EQ(back.labels, l.labels);
  EXPECT_EQ(labels_to_csv(l).substr(0, 9), "id,label\n");
  EXPECT_THROW(parse_labels_csv("id,label\na,x\n"), ValidationError);
  EXPECT_THROW(parse_labels_csv(""), ValidationError);
}
