#pragma once

#include <map>

#include "lsbd/operators.hpp"

namespace lsbd {

// Effective potentials keyed by support. Single-site keys carry H_i, the
// remaining keys carry V_J (the coupling t is kept separately).
struct PotentialTable {
  StepIndex step;
  double t = 0.0;
  int site_dim = 2;
  std::map<Rectangle, LocalOperator, RectangleLess> entries;

  const LocalOperator* find(const Rectangle& key) const;
  void set(LocalOperator op);
  std::vector<Rectangle> interaction_keys() const;
  bool bitwise_equal(const Rectangle& key, const PotentialTable& other) const;
};

}  // namespace lsbd
