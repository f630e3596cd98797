#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lsbd/eigensolver.hpp"
#include "lsbd/expansion_trees.hpp"

namespace lsbd {

inline constexpr double kCheckTolerance = 1e-10;

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = false;
  std::string anchor;
};

BoundCheck make_check(std::string name, double lhs, double rhs, std::string anchor);

struct Diagnostic {
  std::string name;
  double value = 0.0;
};

struct OracleReport {
  std::vector<double> spectrum_original;
  std::vector<double> spectrum_final;
  double max_abs_dev = 0.0;
  double gap_original = 0.0;
  double gap_final = 0.0;
  double ground_vector_residual = 0.0;
  double vacuum_energy = 0.0;
  double norm_k = 0.0;
  bool iterative = false;
};

OracleReport make_oracle(const GlobalOperator& original, const GlobalOperator& final_k,
                         int lowest = 8);

struct Evidence {
  LatticeSpec lattice;
  double t = 0.0;
  double theorem_t_max = 0.05;
  double x_d = 40.0;
  std::uint64_t seed = 0;
  bool completed = false;
  std::string error;
  std::vector<KeyNorms> initial_norms;
  std::vector<StepRecord> records;
  std::optional<OracleReport> oracle;
  std::optional<TreeAudit> trees;
};

struct VerificationReport {
  std::vector<BoundCheck> checks;
  std::vector<Diagnostic> diagnostics;
  std::vector<std::string> skipped;

  bool all_passed() const;
  std::size_t passed_count() const;
  void append(const std::vector<BoundCheck>& more);
};

inline const std::vector<std::string> kAllSuites = {"main",     "block", "lemmas",    "appendix",
                                                    "gap_lemma", "norm_decay", "trees"};

std::vector<BoundCheck> check_theorem_main(const Evidence& ev);
std::vector<BoundCheck> check_block_structure(const Evidence& ev);
std::vector<BoundCheck> check_lemma_suite(const Evidence& ev, std::vector<Diagnostic>& diag);
std::vector<BoundCheck> check_appendix(const LatticeSpec& lattice, const InitialData& data,
                                       double coupling_normalization, std::uint64_t seed);
std::vector<BoundCheck> check_gap_lemma(const Evidence& ev, std::vector<Diagnostic>& diag);
std::vector<BoundCheck> check_norm_decay(const Evidence& ev);
std::vector<BoundCheck> check_trees(const Evidence& ev, std::vector<std::string>& skipped);

// Minimum eigenvalue of P+(G-E)P+ - c H0 P+ on the P+ range.
double gap_lemma_margin(const LocalOperator& g, const SiteBasis& basis, double coefficient);

VerificationReport evaluate(const Evidence& ev, const InitialData& data,
                            double coupling_normalization, const std::set<std::string>& suites);

struct ScanPoint {
  double t = 0.0;
  bool passed = false;
  bool completed = false;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::vector<std::string> failed_families;
};

struct ScanReport {
  std::vector<ScanPoint> points;  // grid order, ascending t
  std::optional<double> largest_passing;
  std::map<std::string, double> failure_frontier;  // family -> smallest failing t
  bool monotone = true;
};

std::string check_family(const std::string& name);

using ScanEvaluator = std::function<ScanPoint(double t)>;
ScanReport t_scan(std::vector<double> grid, const ScanEvaluator& evaluate_point, int workers);

}  // namespace lsbd
