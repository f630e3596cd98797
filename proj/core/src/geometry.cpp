#include "lsbd/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace lsbd {

namespace {

void require_same_dim(const Rectangle& a, const Rectangle& b) {
  if (a.dim() != b.dim()) {
    throw GeometryError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()));
  }
}

std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  os << ']';
  return os.str();
}

// Odometer over the box lo..hi (inclusive), first index most significant.
bool advance(std::vector<int>& x, const std::vector<int>& lo, const std::vector<int>& hi) {
  for (int j = static_cast<int>(x.size()) - 1; j >= 0; --j) {
    if (x[j] < hi[j]) {
      ++x[j];
      return true;
    }
    x[j] = lo[j];
  }
  return false;
}

}  // namespace

std::size_t LatticeSpec::num_sites() const {
  std::size_t n = 1;
  for (int j = 0; j < d; ++j) n *= static_cast<std::size_t>(N);
  return n;
}

void LatticeSpec::validate(std::size_t max_sites) const {
  if (d < 1) throw GeometryError("lattice.d must be >= 1, got " + std::to_string(d));
  if (N < 2) throw GeometryError("lattice.N must be >= 2, got " + std::to_string(N));
  double sites = 1.0;
  for (int j = 0; j < d; ++j) sites *= N;
  if (sites > static_cast<double>(max_sites)) {
    throw GeometryError("lattice has " + std::to_string(static_cast<long long>(sites)) +
                        " sites, budget is " + std::to_string(max_sites));
  }
}

int Rectangle::circumference() const { return std::accumulate(k.begin(), k.end(), 0); }

std::size_t Rectangle::num_sites() const {
  std::size_t n = 1;
  for (int kj : k) n *= static_cast<std::size_t>(kj + 1);
  return n;
}

bool Rectangle::valid_in(const LatticeSpec& lattice) const {
  if (dim() != lattice.d || q.size() != k.size()) return false;
  for (int j = 0; j < dim(); ++j) {
    if (k[j] < 0 || q[j] < 1 || q[j] + k[j] > lattice.N) return false;
  }
  return true;
}

bool Rectangle::contains(const Rectangle& other) const {
  require_same_dim(*this, other);
  for (int j = 0; j < dim(); ++j) {
    if (other.q[j] < q[j] || other.q[j] + other.k[j] > q[j] + k[j]) return false;
  }
  return true;
}

bool Rectangle::strictly_contains(const Rectangle& other) const {
  return contains(other) && !(*this == other);
}

bool Rectangle::contains_site(const Coord& x) const {
  if (static_cast<int>(x.size()) != dim()) throw GeometryError("dimension mismatch");
  for (int j = 0; j < dim(); ++j) {
    if (x[j] < q[j] || x[j] > q[j] + k[j]) return false;
  }
  return true;
}

bool Rectangle::overlaps(const Rectangle& other) const {
  require_same_dim(*this, other);
  for (int j = 0; j < dim(); ++j) {
    if (std::max(q[j], other.q[j]) > std::min(q[j] + k[j], other.q[j] + other.k[j])) {
      return false;
    }
  }
  return true;
}

std::vector<Coord> Rectangle::sites() const {
  std::vector<Coord> out;
  out.reserve(num_sites());
  std::vector<int> hi(dim());
  for (int j = 0; j < dim(); ++j) hi[j] = q[j] + k[j];
  Coord x = q;
  do {
    out.push_back(x);
  } while (advance(x, q, hi));
  return out;
}

std::vector<int> Rectangle::site_positions(const Rectangle& inner) const {
  if (!contains(inner)) {
    throw GeometryError(inner.to_string() + " is not contained in " + to_string());
  }
  std::vector<int> pos;
  pos.reserve(inner.num_sites());
  for (const Coord& x : inner.sites()) {
    int idx = 0;
    for (int j = 0; j < dim(); ++j) idx = idx * (k[j] + 1) + (x[j] - q[j]);
    pos.push_back(idx);
  }
  return pos;
}

std::string Rectangle::to_string() const { return "[" + join(k) + "," + join(q) + "]"; }

Rectangle Rectangle::site(const Coord& x) { return Rectangle{std::vector<int>(x.size(), 0), x}; }

Rectangle Rectangle::full(const LatticeSpec& lattice) {
  return Rectangle{std::vector<int>(lattice.d, lattice.N - 1), std::vector<int>(lattice.d, 1)};
}

std::strong_ordering order_cmp(const Rectangle& a, const Rectangle& b) {
  require_same_dim(a, b);
  const int sa = a.circumference();
  const int sb = b.circumference();
  if (sa != sb) return sa <=> sb;
  for (int j = 0; j < a.dim(); ++j) {
    if (a.k[j] != b.k[j]) return b.k[j] <=> a.k[j];
  }
  for (int j = a.dim() - 1; j >= 0; --j) {
    if (a.q[j] != b.q[j]) return a.q[j] <=> b.q[j];
  }
  return std::strong_ordering::equal;
}

std::string StepIndex::to_string() const { return rect ? rect->to_string() : "(0,N)"; }

std::strong_ordering order_cmp(const StepIndex& a, const StepIndex& b) {
  if (a.is_sentinel() || b.is_sentinel()) {
    return (a.is_sentinel() ? 0 : 1) <=> (b.is_sentinel() ? 0 : 1);
  }
  return order_cmp(*a.rect, *b.rect);
}

std::optional<StepIndex> step_successor(const StepIndex& s, const LatticeSpec& lattice) {
  std::optional<Rectangle> best;
  for (const Rectangle& r : enumerate_rectangles(lattice)) {
    if (r.circumference() < 1) continue;
    if (!s.is_sentinel() && order_cmp(r, *s.rect) <= 0) continue;
    if (!best || order_cmp(r, *best) < 0) best = r;
  }
  if (!best) return std::nullopt;
  return StepIndex::of(*best);
}

std::vector<Rectangle> step_sequence(const LatticeSpec& lattice) {
  return enumerate_rectangles(lattice, [](const Rectangle& r) { return r.circumference() >= 1; });
}

Rectangle bounding_rectangle(const Rectangle& a, const Rectangle& b) {
  require_same_dim(a, b);
  Rectangle out{std::vector<int>(a.dim()), std::vector<int>(a.dim())};
  for (int j = 0; j < a.dim(); ++j) {
    out.q[j] = std::min(a.q[j], b.q[j]);
    out.k[j] = std::max(a.q[j] + a.k[j], b.q[j] + b.k[j]) - out.q[j];
  }
  return out;
}

Rectangle minimal_rectangle(const Rectangle& a, const Rectangle& b) {
  if (!a.overlaps(b)) {
    throw GeometryError("minimal_rectangle needs overlapping inputs: " + a.to_string() + " and " +
                        b.to_string());
  }
  return bounding_rectangle(a, b);
}

std::vector<Rectangle> g_set(const Rectangle& inner, const Rectangle& target) {
  if (!target.strictly_contains(inner)) {
    throw GeometryError("g_set needs " + inner.to_string() + " strictly inside " +
                        target.to_string());
  }
  std::vector<Rectangle> out;
  for (const Rectangle& r : subrectangles(target)) {
    if (bounding_rectangle(inner, r) == target) out.push_back(r);
  }
  return out;
}

std::vector<Rectangle> subrectangles(const Rectangle& r) {
  const int d = r.dim();
  std::vector<Rectangle> out;
  std::vector<int> lo(d, 0);
  std::vector<int> k = lo;
  do {
    std::vector<int> qlo(d), qhi(d);
    for (int j = 0; j < d; ++j) {
      qlo[j] = r.q[j];
      qhi[j] = r.q[j] + r.k[j] - k[j];
    }
    std::vector<int> q = qlo;
    do {
      out.push_back(Rectangle{k, q});
    } while (advance(q, qlo, qhi));
  } while (advance(k, lo, r.k));
  std::sort(out.begin(), out.end(), RectangleLess{});
  return out;
}

std::vector<Rectangle> enumerate_rectangles(const LatticeSpec& lattice,
                                            const RectanglePredicate& filter) {
  std::vector<Rectangle> out;
  for (Rectangle& r : subrectangles(Rectangle::full(lattice))) {
    if (!filter || filter(r)) out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<int>> enumerate_shapes(int d, int l) {
  std::vector<std::vector<int>> out;
  std::vector<int> lo(d, 0), hi(d, l);
  std::vector<int> k = lo;
  do {
    if (std::accumulate(k.begin(), k.end(), 0) == l) out.push_back(k);
  } while (advance(k, lo, hi));
  std::sort(out.begin(), out.end(), [](const std::vector<int>& a, const std::vector<int>& b) {
    Rectangle ra{a, std::vector<int>(a.size(), 1)};
    Rectangle rb{b, std::vector<int>(b.size(), 1)};
    return order_cmp(ra, rb) < 0;
  });
  return out;
}

Rectangle bounding_rectangle(const std::vector<Rectangle>& rects) {
  if (rects.empty()) throw GeometryError("bounding rectangle of an empty set");
  Rectangle out = rects.front();
  for (const Rectangle& r : rects) out = bounding_rectangle(out, r);
  return out;
}

bool union_connected(const std::vector<Rectangle>& rects) {
  std::set<Coord> sites;
  for (const Rectangle& r : rects) {
    for (Coord& x : r.sites()) sites.insert(std::move(x));
  }
  if (sites.empty()) return true;
  std::set<Coord> seen{*sites.begin()};
  std::queue<Coord> todo;
  todo.push(*sites.begin());
  while (!todo.empty()) {
    Coord x = todo.front();
    todo.pop();
    for (std::size_t j = 0; j < x.size(); ++j) {
      for (int step : {-1, 1}) {
        Coord y = x;
        y[j] += step;
        if (sites.count(y) && seen.insert(y).second) todo.push(y);
      }
    }
  }
  return seen.size() == sites.size();
}

}  // namespace lsbd
