#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lsbd/geometry.hpp"

using namespace lsbd;

namespace {

Rectangle R(std::vector<int> k, std::vector<int> q) { return Rectangle{std::move(k), std::move(q)}; }

// Every rectangle of the lattice, built from nested loops rather than the library enumerator.
std::vector<Rectangle> brute_rectangles(const LatticeSpec& lat) {
  std::vector<Rectangle> out;
  const int d = lat.d, n = lat.N;
  std::vector<int> idx(2 * d, 0);
  const long total = static_cast<long>(std::pow(n, 2 * d));
  for (long code = 0; code < total; ++code) {
    long c = code;
    Rectangle r{std::vector<int>(d), std::vector<int>(d)};
    bool ok = true;
    for (int j = 0; j < d; ++j) {
      r.k[j] = static_cast<int>(c % n);
      c /= n;
      r.q[j] = static_cast<int>(c % n) + 1;
      c /= n;
      ok = ok && r.q[j] + r.k[j] <= n;
    }
    if (ok) out.push_back(r);
  }
  return out;
}

bool contains_brute(const Rectangle& outer, const Rectangle& inner) {
  for (const Coord& x : inner.sites()) {
    if (!outer.contains_site(x)) return false;
  }
  return true;
}

bool overlap_brute(const Rectangle& a, const Rectangle& b) {
  for (const Coord& x : a.sites()) {
    if (b.contains_site(x)) return true;
  }
  return false;
}

// Smallest rectangle of the lattice containing both, by site count.
Rectangle smallest_enclosing(const Rectangle& a, const Rectangle& b, const std::vector<Rectangle>& all) {
  const Rectangle* best = nullptr;
  for (const Rectangle& r : all) {
    if (!contains_brute(r, a) || !contains_brute(r, b)) continue;
    if (!best || r.num_sites() < best->num_sites()) best = &r;
  }
  return *best;
}

std::vector<LatticeSpec> small_lattices() {
  std::vector<LatticeSpec> out;
  for (int n = 2; n <= 5; ++n) out.push_back({1, n});
  for (int n = 2; n <= 3; ++n) out.push_back({2, n});
  return out;
}

}  // namespace

TEST(Geometry, NineRectanglesOnTheSmallSquare) {
  const auto all = enumerate_rectangles({2, 2});
  EXPECT_EQ(all.size(), 9u);
  EXPECT_EQ(std::count_if(all.begin(), all.end(), [](auto& r) { return r.is_site(); }), 4);
  EXPECT_EQ(std::count_if(all.begin(), all.end(), [](auto& r) { return r.circumference() == 1; }), 4);
}

TEST(Geometry, StepChainOnTheSmallSquare) {
  const LatticeSpec lat{2, 2};
  const std::vector<Rectangle> expected = {R({1, 0}, {1, 1}), R({1, 0}, {1, 2}), R({0, 1}, {1, 1}),
                                           R({0, 1}, {2, 1}), R({1, 1}, {1, 1})};
  std::vector<Rectangle> walked;
  std::optional<StepIndex> s = step_successor(StepIndex::sentinel(), lat);
  while (s) {
    walked.push_back(*s->rect);
    s = step_successor(*s, lat);
  }
  EXPECT_EQ(walked, expected);
  EXPECT_EQ(step_sequence(lat), expected);
}

TEST(Geometry, SentinelAndEndMarker) {
  const LatticeSpec lat{2, 3};
  const auto first = step_successor(StepIndex::sentinel(), lat);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->rect->circumference(), 1);
  EXPECT_EQ(*first->rect, step_sequence(lat).front());
  EXPECT_FALSE(step_successor(StepIndex::of(Rectangle::full(lat)), lat));
  EXPECT_EQ(StepIndex::sentinel().to_string(), "(0,N)");
  EXPECT_TRUE(order_cmp(StepIndex::sentinel(), *first) < 0);
}

TEST(Geometry, OrderExamples) {
  EXPECT_TRUE(order_cmp(R({2, 0}, {1, 1}), R({1, 0}, {1, 1})) > 0);
  EXPECT_TRUE(order_cmp(R({0, 1}, {1, 1}), R({1, 0}, {1, 1})) > 0);
  EXPECT_TRUE(order_cmp(R({1, 1}, {1, 2}), R({1, 1}, {1, 2})) == 0);
  EXPECT_THROW((void)order_cmp(R({1}, {1}), R({1, 0}, {1, 1})), GeometryError);
}

TEST(Geometry, EnumerationMatchesBruteForce) {
  for (const LatticeSpec& lat : small_lattices()) {
    auto lib = enumerate_rectangles(lat);
    auto brute = brute_rectangles(lat);
    ASSERT_EQ(lib.size(), brute.size()) << lat.d << " " << lat.N;
    for (std::size_t i = 1; i < lib.size(); ++i) EXPECT_TRUE(order_cmp(lib[i - 1], lib[i]) < 0);
    std::set<Rectangle, RectangleLess> a(lib.begin(), lib.end()), b(brute.begin(), brute.end());
    EXPECT_EQ(a.size(), lib.size());
    for (const auto& r : brute) EXPECT_TRUE(a.count(r));
  }
  EXPECT_TRUE(enumerate_rectangles({2, 3}, [](const Rectangle&) { return false; }).empty());
}

TEST(Geometry, OrderIsAStrictTotalOrder) {
  for (const LatticeSpec& lat : small_lattices()) {
    const auto all = brute_rectangles(lat);
    for (const auto& a : all) {
      for (const auto& b : all) {
        const auto ab = order_cmp(a, b), ba = order_cmp(b, a);
        EXPECT_EQ(ab == 0, a == b);
        EXPECT_EQ(ab < 0, ba > 0);
        if (ab >= 0) continue;
        for (const auto& c : all) {
          if (order_cmp(b, c) < 0) EXPECT_TRUE(order_cmp(a, c) < 0);
        }
      }
    }
  }
}

TEST(Geometry, SuccessorVisitsEveryStepOnce) {
  for (const LatticeSpec& lat : small_lattices()) {
    std::size_t expected = 0;
    for (const auto& r : brute_rectangles(lat)) expected += r.circumference() >= 1;
    std::set<Rectangle, RectangleLess> seen;
    std::optional<StepIndex> s = step_successor(StepIndex::sentinel(), lat);
    std::optional<Rectangle> prev;
    while (s) {
      if (prev) EXPECT_TRUE(order_cmp(*prev, *s->rect) < 0);
      EXPECT_TRUE(seen.insert(*s->rect).second);
      prev = s->rect;
      s = step_successor(*s, lat);
    }
    EXPECT_EQ(seen.size(), expected);
  }
}

TEST(Geometry, MinimalRectangleAgreesWithSmallestEnclosing) {
  EXPECT_EQ(minimal_rectangle(R({1, 0}, {1, 1}), R({0, 1}, {2, 1})), R({1, 1}, {1, 1}));
  EXPECT_THROW((void)minimal_rectangle(R({0, 0}, {1, 1}), R({0, 0}, {2, 2})), GeometryError);
  for (const LatticeSpec& lat : small_lattices()) {
    const auto all = brute_rectangles(lat);
    for (const auto& a : all) {
      EXPECT_EQ(minimal_rectangle(a, a), a);
      for (const auto& b : all) {
        EXPECT_EQ(a.overlaps(b), overlap_brute(a, b));
        if (!overlap_brute(a, b)) continue;
        const Rectangle m = minimal_rectangle(a, b);
        EXPECT_EQ(m, smallest_enclosing(a, b, all));
        EXPECT_EQ(m, minimal_rectangle(b, a));
        EXPECT_TRUE(m.contains(a) && m.contains(b));
        if (contains_brute(b, a)) EXPECT_EQ(m, b);
      }
    }
  }
}

TEST(Geometry, GSetCharacterization) {
  const auto row = g_set(R({0, 0}, {1, 1}), R({1, 0}, {1, 1}));
  ASSERT_EQ(row.size(), 2u);
  std::set<Rectangle, RectangleLess> got(row.begin(), row.end());
  EXPECT_TRUE(got.count(R({0, 0}, {2, 1})));
  EXPECT_TRUE(got.count(R({1, 0}, {1, 1})));
  EXPECT_THROW((void)g_set(R({1, 0}, {1, 1}), R({1, 0}, {1, 1})), GeometryError);

  for (const LatticeSpec& lat : small_lattices()) {
    const auto all = brute_rectangles(lat);
    for (const auto& target : all) {
      for (const auto& inner : all) {
        if (!(contains_brute(target, inner) && inner != target)) continue;
        const auto g = g_set(inner, target);
        std::set<Rectangle, RectangleLess> lib(g.begin(), g.end());
        std::size_t expected = 0;
        for (const auto& cand : all) {
          if (!contains_brute(target, cand)) continue;
          const bool member = smallest_enclosing(inner, cand, all) == target;
          expected += member;
          EXPECT_EQ(lib.count(cand) == 1, member);
        }
        EXPECT_EQ(g.size(), expected);
        EXPECT_TRUE(lib.count(target));
      }
    }
  }
}

TEST(Geometry, ShapeCounts) {
  EXPECT_EQ(enumerate_shapes(2, 3).size(), 4u);
  for (int d = 1; d <= 3; ++d) {
    for (int l = 0; l <= 6; ++l) {
      const auto shapes = enumerate_shapes(d, l);
      EXPECT_LE(static_cast<double>(shapes.size()), std::pow(l + 1.0, d - 1));
      for (const auto& k : shapes) {
        int sum = 0;
        for (int x : k) sum += x;
        EXPECT_EQ(sum, l);
      }
    }
  }
}

TEST(Geometry, CountingCaps) {
  for (int d = 1; d <= 2; ++d) {
    for (int n = 2; n <= 4; ++n) {
      const auto all = brute_rectangles({d, n});
      for (const auto& outer : all) {
        const int r = outer.circumference();
        if (r == 0) continue;
        std::vector<Rectangle> inside;
        for (const auto& x : all) {
          if (contains_brute(outer, x)) inside.push_back(x);
        }
        double sum = 0.0;
        for (int k = 1; k <= r; ++k) sum += std::pow(k + 1.0, d - 1);
        for (int k = 0; k <= r; ++k) {
          const auto cnt = std::count_if(inside.begin(), inside.end(),
                                         [&](auto& x) { return x.circumference() == k; });
          EXPECT_LE(cnt, std::pow(r + 1.0, d) * std::pow(k + 1.0, d - 1));
        }
        const auto nontrivial = std::count_if(inside.begin(), inside.end(),
                                              [](auto& x) { return x.circumference() >= 1; });
        EXPECT_LE(nontrivial, std::pow(r + 1.0, d) * sum);
        for (const auto& inner : inside) {
          if (inner == outer) continue;
          EXPECT_LE(g_set(inner, outer).size(), 2.0 * d * std::pow(r + 1.0, d - 1) * sum);
        }
      }
    }
  }
}

TEST(Geometry, UnionConnectivity) {
  EXPECT_TRUE(union_connected({R({1, 0}, {1, 1}), R({0, 1}, {2, 1})}));
  EXPECT_TRUE(union_connected({R({0, 0}, {1, 1}), R({0, 0}, {2, 1})}));
  EXPECT_FALSE(union_connected({R({0, 0}, {1, 1}), R({0, 0}, {2, 2})}));
  EXPECT_FALSE(union_connected({R({0}, {1}), R({0}, {3})}));
}

TEST(Geometry, LatticeValidation) {
  EXPECT_THROW(LatticeSpec({1, 1}).validate(), GeometryError);
  EXPECT_THROW(LatticeSpec({0, 3}).validate(), GeometryError);
  EXPECT_NO_THROW(LatticeSpec({2, 4}).validate());
  EXPECT_EQ(R({1, 1}, {1, 1}).to_string(), "[[1,1],[1,1]]");
}
