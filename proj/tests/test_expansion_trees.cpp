#include <gtest/gtest.h>

#include <cmath>

#include "lsbd/expansion_trees.hpp"

using namespace lsbd;

namespace {

Rectangle R(std::vector<int> k, std::vector<int> q) { return Rectangle{std::move(k), std::move(q)}; }

RunOutput history_run(const LatticeSpec& lat, int n_s, double t) {
  ModelSpec spec;
  spec.n_s = n_s;
  RunOptions opt;
  opt.keep_history = true;
  return run(lat, build_initial_data(spec, lat.d), t, opt);
}

// Branch sum against the stored potential for every key at every level.
void expect_complete(const RunCache& cache, int max_rectangles) {
  const int levels = static_cast<int>(cache.steps.size());
  int compared = 0;
  for (int level = 0; level <= levels; ++level) {
    for (const Rectangle& key : cache.run.history[level].interaction_keys()) {
      const Enumeration en = enumerate_branches(key, level, cache, max_rectangles);
      if (en.truncated) continue;
      const LocalOperator* direct = cache.potential(level, key);
      ASSERT_NE(direct, nullptr);
      Matrix sum = Matrix::Zero(direct->matrix.rows(), direct->matrix.cols());
      for (const LocalOperator& op : en.operators) sum += op.matrix;
      EXPECT_LT(spectral_norm(sum - direct->matrix), 1e-8 * (1.0 + spectral_norm(direct->matrix)))
          << "level " << level << " key " << key.to_string();
      ++compared;
    }
  }
  EXPECT_GT(compared, 0);
}

}  // namespace

TEST(ExpansionTrees, BranchSumReproducesEveryPotentialOnAChain) {
  const RunOutput out = history_run({1, 3}, 3, 0.02);
  ASSERT_TRUE(out.completed) << out.error;
  expect_complete(RunCache(out, SeriesOptions{}), 8);
}

TEST(ExpansionTrees, BranchSumReproducesEveryPotentialOnTheSquare) {
  const RunOutput out = history_run({2, 2}, 2, 0.02);
  ASSERT_TRUE(out.completed) << out.error;
  expect_complete(RunCache(out, SeriesOptions{}), 6);
}

TEST(ExpansionTrees, BranchProperties) {
  const RunOutput out = history_run({2, 2}, 2, 0.02);
  ASSERT_TRUE(out.completed);
  const RunCache cache(out, SeriesOptions{});
  const Rectangle top = Rectangle::full(out.lattice);
  const int root = static_cast<int>(cache.steps.size()) - 1;
  const Enumeration en = enumerate_branches(top, root, cache, 6);
  ASSERT_FALSE(en.branches.empty());
  std::set<std::vector<Rectangle>, std::function<bool(const std::vector<Rectangle>&,
                                                      const std::vector<Rectangle>&)>>
      seen([](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), RectangleLess{});
      });
  for (std::size_t i = 0; i < en.branches.size(); ++i) {
    const Branch& b = en.branches[i];
    const auto rects = b.rectangles();
    EXPECT_EQ(rects.size(), b.edges.size() + 1);
    EXPECT_EQ(rects.back(), b.leaf);
    EXPECT_TRUE(seen.insert(rects).second);
    EXPECT_EQ(bounding_rectangle(rects), top);
    for (std::size_t from = 0; from < rects.size(); ++from) {
      EXPECT_TRUE(union_connected({rects.begin() + from, rects.end()}));
    }
    const BranchBound bb = branch_norm_bound(b, cache, &en.operators[i]);
    EXPECT_LE(bb.lhs, bb.rhs * (1.0 + 1e-12));
    if (b.edges.empty()) {
      const LocalOperator* leaf = cache.potential(b.leaf_level, b.leaf);
      ASSERT_NE(leaf, nullptr);
      EXPECT_LT((en.operators[i].matrix - embed(*leaf, top, 2).matrix).norm(), 1e-14);
    }
  }
}

TEST(ExpansionTrees, ZeroCouplingKeepsOnlyChains) {
  const RunOutput out = history_run({2, 2}, 2, 0.0);
  ASSERT_TRUE(out.completed);
  const RunCache cache(out, SeriesOptions{});
  const int levels = static_cast<int>(cache.steps.size());
  for (const Rectangle& key : out.final_table.interaction_keys()) {
    const Enumeration en = enumerate_branches(key, levels, cache, 6);
    for (const Branch& b : en.branches) EXPECT_TRUE(b.edges.empty()) << key.to_string();
  }
}

TEST(ExpansionTrees, ZeroLeafBound) {
  const RunOutput out = history_run({2, 2}, 2, 0.02);
  const RunCache cache(out, SeriesOptions{});
  const Rectangle top = Rectangle::full(out.lattice);
  ASSERT_EQ(cache.potential(0, top), nullptr);
  const Branch b{top, 0, {}, 0, top};
  const LocalOperator zero{top, Matrix::Zero(16, 16), true};
  const BranchBound bb = branch_norm_bound(b, cache, &zero);
  EXPECT_EQ(bb.lhs, 0.0);
  EXPECT_EQ(bb.rhs, 0.0);
}

TEST(ExpansionTrees, PathWeight) {
  EXPECT_EQ(path_weight(PathOfRectangles{}, 0.02, 40.0, 3.0), 1.0);
  const Rectangle a = R({1}, {1}), b = R({1}, {2});
  const PathOfRectangles one{{a, b}};
  const double t = 0.008;
  const double c = 1.0 / std::cbrt(t) - 1.0;  // (c+1) t^{1/3} = 1
  EXPECT_NEAR(path_weight(one, t, 20.0, c), 1.0, 1e-12);
  double prev = 0.0;
  for (double tt : {0.001, 0.005, 0.01, 0.05}) {
    const double w = path_weight(one, tt, 20.0, 1.0);
    EXPECT_GT(w, prev);
    prev = w;
  }
  EXPECT_THROW(path_weight(PathOfRectangles{{R({0}, {1}), R({0}, {1})}}, t, 20.0, c), GeometryError);
}

TEST(ExpansionTrees, OverlapTraversal) {
  const std::vector<Rectangle> rects = {R({1, 1}, {1, 1}), R({1, 0}, {1, 1}), R({0, 1}, {2, 1}),
                                        R({0, 0}, {2, 2})};
  const auto path = overlap_traversal(rects);
  ASSERT_TRUE(path);
  EXPECT_TRUE(path->valid());
  EXPECT_LE(path->length(), 2 * rects.size() - 2);
  for (const Rectangle& r : rects) {
    EXPECT_NE(std::find(path->sequence.begin(), path->sequence.end(), r), path->sequence.end());
  }
  EXPECT_FALSE(overlap_traversal({R({0, 0}, {1, 1}), R({0, 0}, {2, 2})}));
  EXPECT_FALSE(PathOfRectangles({{R({0}, {1}), R({0}, {2})}}).valid());
}
