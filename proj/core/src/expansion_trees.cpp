#include "lsbd/expansion_trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace lsbd {

namespace {

constexpr double kZeroBranch = 1e-14;

struct Partial {
  std::vector<TreeEdge> edges;
  int leaf_level = 0;
  Rectangle leaf;
};

void expand(int level, const Rectangle& j, const RunCache& cache, int max_rectangles,
            std::vector<Partial>& out, bool& truncated) {
  if (level == 0) {
    if (cache.potential(0, j)) out.push_back(Partial{{}, 0, j});
    return;
  }
  const Rectangle& step = cache.step(level);
  if (step == j) {
    if (cache.potential(level, j)) out.push_back(Partial{{}, level, j});
    return;
  }
  expand(level - 1, j, cache, max_rectangles, out, truncated);
  if (!j.strictly_contains(step)) return;
  for (const Rectangle& member : g_set(step, j)) {
    if (member.is_site() || !member.overlaps(step)) continue;
    std::vector<Partial> below;
    expand(level - 1, member, cache, max_rectangles, below, truncated);
    for (Partial& p : below) {
      if (static_cast<int>(p.edges.size()) + 2 > max_rectangles) {
        truncated = true;
        continue;
      }
      p.edges.insert(p.edges.begin(), TreeEdge{level, step, j, member});
      out.push_back(std::move(p));
    }
  }
}

double weighted_on(const Matrix& m, const Rectangle& region, const SiteBasis& basis) {
  return weighted_norm(m, h0_diagonal(region, basis));
}

}  // namespace

std::vector<Rectangle> Branch::rectangles() const {
  std::vector<Rectangle> out;
  for (const TreeEdge& e : edges) out.push_back(e.generator);
  out.push_back(leaf);
  return out;
}

RunCache::RunCache(const RunOutput& r, const SeriesOptions& options)
    : run(r), steps(step_sequence(r.lattice)), series(options) {
  if (r.history.size() != r.records.size() + 1 || r.generators.size() != r.records.size()) {
    throw OperatorError("run history was not retained");
  }
}

const LocalOperator* RunCache::potential(int level, const Rectangle& key) const {
  return run.history.at(level).find(key);
}

const LocalOperator& RunCache::generator(int level) const { return run.generators.at(level - 1); }

std::pair<double, double> RunCache::generator_norms(int level) const {
  auto it = generator_norms_.find(level);
  if (it != generator_norms_.end()) return it->second;
  const LocalOperator& s = generator(level);
  const RealVector w = (h0_diagonal(s.support, run.basis).array() + 1.0).sqrt();
  const std::pair<double, double> norms{spectral_norm(s.matrix),
                                        spectral_norm(s.matrix * w.cast<Complex>().asDiagonal())};
  generator_norms_.emplace(level, norms);
  return norms;
}

Enumeration enumerate_branches(const Rectangle& target, int root_level, const RunCache& cache,
                               int max_rectangles) {
  Enumeration e;
  std::vector<Partial> partials;
  expand(root_level, target, cache, max_rectangles, partials, e.truncated);
  for (Partial& p : partials) {
    Branch b{target, root_level, std::move(p.edges), p.leaf_level, std::move(p.leaf)};
    LocalOperator op = branch_operator(b, cache);
    if (op.matrix.norm() <= kZeroBranch) continue;
    e.branches.push_back(std::move(b));
    e.operators.push_back(std::move(op));
  }
  return e;
}

LocalOperator branch_operator(const Branch& b, const RunCache& cache) {
  const int n = cache.run.basis.site_dim;
  const LocalOperator* leaf = cache.potential(b.leaf_level, b.leaf);
  if (!leaf) {
    // absent keys hold zero potentials
    const auto dim = static_cast<Eigen::Index>(hilbert_dim(b.target, n));
    return LocalOperator{b.target, Matrix::Zero(dim, dim), true};
  }
  Matrix op = leaf->matrix;
  Rectangle support = b.leaf;
  for (auto it = b.edges.rbegin(); it != b.edges.rend(); ++it) {
    const LocalOperator& s = cache.generator(it->level);
    if (!(s.support == it->generator)) throw OperatorError("generator cache mismatch");
    Embedding gen(it->generator, it->vertex, n);
    const Matrix in = Embedding(support, it->vertex, n).embed(op);
    SeriesResult r = adjoint_series(
        [&](const Matrix& x) {
          return Matrix(gen.apply_left(s.matrix, x) - gen.apply_right(x, s.matrix));
        },
        s.matrix.norm(), in, cache.series.adjoint_n_max, cache.series.tail_tol);
    op = std::move(r.value);
    support = it->vertex;
  }
  return LocalOperator{b.target, Embedding(support, b.target, n).embed(op), true};
}

BranchBound branch_norm_bound(const Branch& b, const RunCache& cache, const LocalOperator* op) {
  const SiteBasis& basis = cache.run.basis;
  BranchBound out;
  out.lhs = weighted_on(op ? op->matrix : branch_operator(b, cache).matrix, b.target, basis);
  const LocalOperator* leaf = cache.potential(b.leaf_level, b.leaf);
  if (!leaf) return out;
  out.rhs = weighted_on(leaf->matrix, b.leaf, basis);
  for (const TreeEdge& e : b.edges) {
    const auto [s_norm, sigma] = cache.generator_norms(e.level);
    const double x = s_norm > 0.0 ? sigma / s_norm * std::expm1(s_norm) : sigma;
    out.rhs *= x * (2.0 + x);
  }
  return out;
}

bool PathOfRectangles::valid() const {
  for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
    if (sequence[i] == sequence[i + 1] || !sequence[i].overlaps(sequence[i + 1])) return false;
  }
  return true;
}

double path_weight(const PathOfRectangles& path, double t, double x_d, double c) {
  double w = 1.0;
  for (std::size_t i = 0; i + 1 < path.sequence.size(); ++i) {
    const int s = std::max(path.sequence[i].circumference(), path.sequence[i + 1].circumference());
    if (s == 0) throw GeometryError("path step between single sites has no size");
    w *= std::sqrt((c + 1.0) * std::cbrt(t) / std::pow(s, x_d));
  }
  return w;
}

std::optional<PathOfRectangles> overlap_traversal(const std::vector<Rectangle>& rects) {
  if (rects.empty()) return std::nullopt;
  const std::size_t n = rects.size();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> walk;
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    seen[i] = true;
    walk.push_back(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (!seen[j] && !(rects[i] == rects[j]) && rects[i].overlaps(rects[j])) {
        visit(j);
        walk.push_back(i);
      }
    }
  };
  visit(0);
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) return std::nullopt;
  // Drop the trailing return after the last new rectangle.
  std::vector<bool> first(n, false);
  std::size_t last_new = 0;
  for (std::size_t k = 0; k < walk.size(); ++k) {
    if (!first[walk[k]]) {
      first[walk[k]] = true;
      last_new = k;
    }
  }
  walk.resize(last_new + 1);
  PathOfRectangles p;
  for (std::size_t i : walk) p.sequence.push_back(rects[i]);
  return p;
}

TreeAudit audit_trees(const RunCache& cache, double x_d, int max_rectangles,
                      std::optional<double> c) {
  const RunOutput& run = cache.run;
  const SiteBasis& basis = run.basis;
  const int top_level = static_cast<int>(cache.steps.size());
  TreeAudit audit;
  audit.target = Rectangle::full(run.lattice);
  audit.root_level = std::max(0, top_level - 1);
  audit.x_d = x_d;
  const double t = run.t;

  Enumeration en = enumerate_branches(audit.target, audit.root_level, cache, max_rectangles);
  audit.truncated = en.truncated;
  const int n = basis.site_dim;
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(audit.target, n));
  Matrix sum = Matrix::Zero(dim, dim);
  const LocalOperator* direct = cache.potential(audit.root_level, audit.target);
  const Matrix reference = direct ? direct->matrix : Matrix::Zero(dim, dim);

  std::set<std::vector<Rectangle>, std::function<bool(const std::vector<Rectangle>&,
                                                      const std::vector<Rectangle>&)>>
      sets([](const std::vector<Rectangle>& a, const std::vector<Rectangle>& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                            RectangleLess{});
      });

  const int r = audit.target.circumference();
  double c_required = 0.0;
  for (std::size_t i = 0; i < en.branches.size(); ++i) {
    const Branch& b = en.branches[i];
    BranchAudit ba;
    ba.rectangles = b.rectangles();
    ba.leaf_level = b.leaf_level;
    sum += en.operators[i].matrix;
    const BranchBound bb = branch_norm_bound(b, cache, &en.operators[i]);
    ba.norm = bb.lhs;
    ba.bound = bb.rhs;
    ba.connected = true;
    for (std::size_t from = 0; from < ba.rectangles.size(); ++from) {
      const std::vector<Rectangle> tail(ba.rectangles.begin() + from, ba.rectangles.end());
      ba.connected = ba.connected && union_connected(tail);
    }
    ba.minimal = bounding_rectangle(ba.rectangles) == b.target;
    if (!sets.insert(ba.rectangles).second) audit.distinct_sets = false;
    if (t > 0.0) {
      double base = std::pow(t, (r - 1) / 3.0);
      for (const Rectangle& rect : ba.rectangles) {
        base *= std::cbrt(t) / std::pow(rect.circumference(), x_d);
      }
      const double ratio = ba.norm / base;
      const double cb = std::pow(ratio, 1.0 / static_cast<double>(ba.rectangles.size())) - 1.0;
      c_required = std::max(c_required, cb);
    }
    audit.branches.push_back(std::move(ba));
  }
  audit.c_measured = !c.has_value();
  audit.c = c.value_or(c_required);
  audit.deviation = spectral_norm(sum - reference);
  audit.reference_norm = spectral_norm(reference);

  for (BranchAudit& ba : audit.branches) {
    std::optional<PathOfRectangles> path = overlap_traversal(ba.rectangles);
    if (!path) {
      ba.path_note = "overlap graph disconnected";
      continue;
    }
    ba.path_length = static_cast<int>(path->length());
    if (t <= 0.0) {
      ba.path_note = "t <= 0";
      continue;
    }
    if (!path->valid() || path->length() > 2 * ba.rectangles.size() - 2) {
      ba.path_note = "traversal violates the length bound";
      continue;
    }
    bool all_small = true;
    for (std::size_t i = 0; i + 1 < path->sequence.size(); ++i) {
      PathOfRectangles step{{path->sequence[i], path->sequence[i + 1]}};
      if (path_weight(step, t, x_d, audit.c) >= 1.0) all_small = false;
    }
    ba.path_rhs = std::pow(t, (r - 1) / 3.0) * path_weight(*path, t, x_d, audit.c);
    if (!all_small) {
      ba.path_note = "step weight >= 1";
      continue;
    }
    ba.path_checked = true;
  }

  for (int level = 1; level <= top_level; ++level) {
    for (const Rectangle& key : run.history[level].interaction_keys()) {
      EquivalenceAudit eq;
      eq.level = level;
      eq.key = key;
      Enumeration sub = enumerate_branches(key, level, cache, max_rectangles);
      eq.truncated = sub.truncated;
      eq.branches = static_cast<int>(sub.branches.size());
      const auto kd = static_cast<Eigen::Index>(hilbert_dim(key, n));
      Matrix s = Matrix::Zero(kd, kd);
      for (const LocalOperator& op : sub.operators) s += op.matrix;
      eq.deviation = spectral_norm(s - run.history[level].find(key)->matrix);
      audit.completeness.push_back(eq);
    }
  }
  return audit;
}

}  // namespace lsbd
