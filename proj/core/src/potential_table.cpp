#include "lsbd/potential_table.hpp"

namespace lsbd {

const LocalOperator* PotentialTable::find(const Rectangle& key) const {
  auto it = entries.find(key);
  return it == entries.end() ? nullptr : &it->second;
}

void PotentialTable::set(LocalOperator op) {
  Rectangle key = op.support;
  entries.insert_or_assign(std::move(key), std::move(op));
}

std::vector<Rectangle> PotentialTable::interaction_keys() const {
  std::vector<Rectangle> out;
  for (const auto& [key, op] : entries) {
    if (!key.is_site()) out.push_back(key);
  }
  return out;
}

bool PotentialTable::bitwise_equal(const Rectangle& key, const PotentialTable& other) const {
  const LocalOperator* a = find(key);
  const LocalOperator* b = other.find(key);
  if (!a || !b) return a == b;
  if (a->matrix.rows() != b->matrix.rows() || a->matrix.cols() != b->matrix.cols()) return false;
  return std::equal(a->matrix.data(), a->matrix.data() + a->matrix.size(), b->matrix.data());
}

}  // namespace lsbd
