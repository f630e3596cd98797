#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsbd/block_diagonalizer.hpp"

namespace lsbd {

// Adjoint-map edge: the generator of step `level` acting from `child` into `vertex`.
struct TreeEdge {
  int level = 0;
  Rectangle generator;
  Rectangle vertex;
  Rectangle child;
};

struct Branch {
  Rectangle target;
  int root_level = 0;
  std::vector<TreeEdge> edges;  // top-down
  int leaf_level = 0;           // 0 is the initial table
  Rectangle leaf;

  // Edge labels top-down, then the leaf support.
  std::vector<Rectangle> rectangles() const;
};

// Read-only view of a run with history retained.
struct RunCache {
  const RunOutput& run;
  std::vector<Rectangle> steps;
  SeriesOptions series;

  RunCache(const RunOutput& r, const SeriesOptions& options);
  const Rectangle& step(int level) const { return steps.at(level - 1); }
  const LocalOperator* potential(int level, const Rectangle& key) const;
  const LocalOperator& generator(int level) const;

  // ||S|| and ||S (H0+1)^(1/2)|| of the generator at `level`, memoized.
  std::pair<double, double> generator_norms(int level) const;

 private:
  mutable std::map<int, std::pair<double, double>> generator_norms_;
};

struct Enumeration {
  std::vector<Branch> branches;
  std::vector<LocalOperator> operators;  // branch_operator of each branch
  bool truncated = false;
};

Enumeration enumerate_branches(const Rectangle& target, int root_level, const RunCache& cache,
                               int max_rectangles = 6);
LocalOperator branch_operator(const Branch& b, const RunCache& cache);

struct BranchBound {
  double lhs = 0.0;
  double rhs = 0.0;
};
BranchBound branch_norm_bound(const Branch& b, const RunCache& cache,
                              const LocalOperator* op = nullptr);

struct PathOfRectangles {
  std::vector<Rectangle> sequence;

  bool valid() const;
  std::size_t length() const { return sequence.empty() ? 0 : sequence.size() - 1; }
};

double path_weight(const PathOfRectangles& path, double t, double x_d, double c);

// Depth-first walk over the overlap graph, returning to each parent.
std::optional<PathOfRectangles> overlap_traversal(const std::vector<Rectangle>& rects);

struct BranchAudit {
  std::vector<Rectangle> rectangles;
  int leaf_level = 0;
  double norm = 0.0;
  double bound = 0.0;
  int path_length = -1;
  bool connected = false;
  bool minimal = false;
  double path_rhs = 0.0;
  bool path_checked = false;
  std::string path_note;
};

struct EquivalenceAudit {
  int level = 0;
  Rectangle key;
  int branches = 0;
  bool truncated = false;
  double deviation = 0.0;
};

struct TreeAudit {
  Rectangle target;
  int root_level = 0;
  bool truncated = false;
  double deviation = 0.0;   // top-rectangle reconstruction
  double reference_norm = 0.0;
  bool distinct_sets = true;
  double c = 0.0;
  bool c_measured = true;
  double x_d = 0.0;
  std::vector<BranchAudit> branches;
  std::vector<EquivalenceAudit> completeness;
};

TreeAudit audit_trees(const RunCache& cache, double x_d, int max_rectangles,
                      std::optional<double> c);

}  // namespace lsbd
