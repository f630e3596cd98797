#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsbd {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Coord = std::vector<int>;

struct LatticeSpec {
  int d = 1;
  int N = 2;

  std::size_t num_sites() const;
  // Throws GeometryError on d < 1, N < 2 or a site count above max_sites.
  void validate(std::size_t max_sites = 4096) const;
  bool operator==(const LatticeSpec&) const = default;
};

// Box of sites x with q_j <= x_j <= q_j + k_j, coordinates 1-based.
struct Rectangle {
  std::vector<int> k;
  std::vector<int> q;

  int dim() const { return static_cast<int>(k.size()); }
  int circumference() const;
  std::size_t num_sites() const;
  bool is_site() const { return circumference() == 0; }
  bool valid_in(const LatticeSpec& lattice) const;

  bool contains(const Rectangle& other) const;
  bool strictly_contains(const Rectangle& other) const;
  bool contains_site(const Coord& x) const;
  bool overlaps(const Rectangle& other) const;

  // Sites in lexicographic order, first coordinate most significant.
  std::vector<Coord> sites() const;
  // Position of each site of `inner` inside this rectangle's site list.
  std::vector<int> site_positions(const Rectangle& inner) const;

  std::string to_string() const;

  static Rectangle site(const Coord& x);
  static Rectangle full(const LatticeSpec& lattice);

  bool operator==(const Rectangle&) const = default;
};

std::strong_ordering order_cmp(const Rectangle& a, const Rectangle& b);

struct RectangleLess {
  bool operator()(const Rectangle& a, const Rectangle& b) const {
    return order_cmp(a, b) < 0;
  }
};

// Algorithm step. The sentinel precedes every genuine step.
struct StepIndex {
  std::optional<Rectangle> rect;

  bool is_sentinel() const { return !rect.has_value(); }
  static StepIndex sentinel() { return {}; }
  static StepIndex of(Rectangle r) { return StepIndex{std::move(r)}; }
  std::string to_string() const;
  bool operator==(const StepIndex&) const = default;
};

std::strong_ordering order_cmp(const StepIndex& a, const StepIndex& b);

// Returns std::nullopt as the end marker.
std::optional<StepIndex> step_successor(const StepIndex& s, const LatticeSpec& lattice);

// All genuine steps in ascending order.
std::vector<Rectangle> step_sequence(const LatticeSpec& lattice);

// Corner-wise min / max, defined for any pair.
Rectangle bounding_rectangle(const Rectangle& a, const Rectangle& b);
Rectangle minimal_rectangle(const Rectangle& a, const Rectangle& b);

std::vector<Rectangle> g_set(const Rectangle& inner, const Rectangle& target);

using RectanglePredicate = std::function<bool(const Rectangle&)>;
std::vector<Rectangle> enumerate_rectangles(const LatticeSpec& lattice,
                                            const RectanglePredicate& filter = {});
std::vector<Rectangle> subrectangles(const Rectangle& r);

// All k >= 0 with sum l, in order_cmp order.
std::vector<std::vector<int>> enumerate_shapes(int d, int l);

// Connectivity of the union of rectangles under nearest-neighbour adjacency.
bool union_connected(const std::vector<Rectangle>& rects);
Rectangle bounding_rectangle(const std::vector<Rectangle>& rects);

}  // namespace lsbd
