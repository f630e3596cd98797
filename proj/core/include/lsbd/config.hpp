#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsbd/block_diagonalizer.hpp"

namespace lsbd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  LatticeSpec lattice{2, 2};
  ModelSpec model;
  double t = 0.02;
  std::vector<double> t_grid;
  SeriesOptions series;
  std::set<std::string> suites;  // empty means every suite
  double theorem_t_max = 0.05;
  std::optional<double> x_d;  // default 20 d
  int trees_max_rectangles = 6;
  std::optional<double> trees_c;  // default: measured
  std::string output_directory = "lsbd-out";
  bool debug_dump = false;
  bool keep_tables = false;
  std::uint64_t seed = 20240601;
  std::size_t max_dimension = 65536;
  Eigen::Index dense_threshold = 4096;
  int scan_workers = 1;

  double effective_x_d() const { return x_d.value_or(20.0 * lattice.d); }
  std::set<std::string> effective_suites() const;
  std::size_t hilbert_dimension() const;
  void validate() const;
};

// Flat-key JSON object, e.g. {"lattice.d": 2, "model.kind": "harmonic_phi4"}.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical form: every key present, keys sorted.
std::string serialize_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);
std::string config_schema();

}  // namespace lsbd
