#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lsbd/potential_table.hpp"
#include "lsbd/site_models.hpp"

namespace lsbd {

class AlgorithmError : public std::runtime_error {
 public:
  enum class Kind { gap_collapse, divergence, invariant_breach, non_convergence };
  AlgorithmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string to_string(AlgorithmError::Kind kind);

// Gap lower bound that the explicit-constant resolvent and generator bounds use.
inline constexpr double kGapLowerBound = 0.5;

struct SeriesOptions {
  int j_max = 24;
  double tail_tol = 1e-13;
  double gap_floor = 0.25;
  int adjoint_n_max = 60;
};

struct SeriesState {
  Rectangle support;
  std::vector<Matrix> V;  // V[j-1] = (V)_j
  std::vector<Matrix> S;  // S[j-1] = (S)_j
  Matrix S_total;
  Matrix V_new;  // sum_j t^{j-1} diag (V)_j
  std::vector<double> scaled_term_norms;  // |t|^j ||(S)_j||
  bool converged = false;
  double tail_estimate = 0.0;
  int terms_used = 0;
};

// Spectral data of G on the P+ range, E subtracted.
struct PlusSector {
  double E = 0.0;
  RealVector excitations;  // eigenvalues of P+ (G - E) P+, ascending
  Matrix vectors;          // eigenvectors in the P+ block coordinates
  double gap() const { return excitations.size() ? excitations(0) : 0.0; }
  // f(G - E) restricted to the P+ block
  Matrix function(const std::function<double(double)>& f) const;
};

LocalOperator build_G(const Rectangle& step, const PotentialTable& table, const SiteBasis& basis);
double ground_energy(const LocalOperator& g);
PlusSector plus_sector(const LocalOperator& g, double e);

// [u e0^+ - e0 u^+, x] in O(dim^2).
Matrix vacuum_generator_commutator(const Vector& u, const Matrix& x);

SeriesState lie_schwinger_series(const LocalOperator& g, double e, const LocalOperator& v, double t,
                                 const SeriesOptions& options);
SeriesState lie_schwinger_series(const LocalOperator& g, const PlusSector& sector,
                                 const LocalOperator& v, double t, const SeriesOptions& options);

PotentialTable update_potentials(const Rectangle& step, const PotentialTable& table,
                                 const SeriesState& series, const LatticeSpec& lattice,
                                 const SeriesOptions& options);

GlobalOperator reconstruct(const PotentialTable& table, const LatticeSpec& lattice,
                           Eigen::Index dense_threshold = 4096);

// Coefficient 1 - 3t sum_{l>=1} t^{(l-1)/4} (l+1)^{2d-1}.
double gap_lemma_coefficient(double t, int d);

struct TermDiagnostics {
  int j = 0;
  double s_norm = 0.0;           // ||(S)_j||
  double s_weighted_norm = 0.0;  // ||(S)_j (H0+1)^{1/2}||
  double v_weighted_norm = 0.0;  // ||(V)_j||_H0
  double scaled_s_norm = 0.0;    // |t|^j ||(S)_j||
};

struct KeyNorms {
  Rectangle key;
  double weighted = 0.0;
  std::array<double, 4> aux{};  // sectors ++, +-, -+, --
  double off_diagonal = 0.0;
};

struct StepRecord {
  int index = 0;  // 1-based position in the step sequence
  Rectangle step;
  double E = 0.0;
  double gap = 0.0;
  bool theorem_regime = false;
  bool series_converged = false;
  int terms_used = 0;
  double tail_estimate = 0.0;
  std::vector<TermDiagnostics> terms;
  double v_old_weighted = 0.0;
  double v_new_weighted = 0.0;
  double bound_g_min = 0.0;  // min eig of P+(G-E)P+ - (Delta/2) P+(H0+1)P+, Delta = 1/2
  double resolvent_sqrt_norm = 0.0;
  double resolvent_norm = 0.0;
  double gap_lemma_coefficient = 0.0;
  double gap_lemma_min = 0.0;
  double vsquare_ratio = 0.0;
  double inductive_aux_ratio = 0.0;
  double unitary_chain_residual = 0.0;
  double max_processed_off_diagonal = 0.0;
  double max_inherited_off_diagonal = 0.0;
  int immutability_violations = 0;
  std::vector<KeyNorms> norms;
  double wall_seconds = 0.0;
};

std::vector<KeyNorms> norm_table(const PotentialTable& table, const SiteBasis& basis);

struct RunOptions {
  SeriesOptions series;
  double theorem_t_max = 0.05;
  bool keep_history = false;
  bool unitary_chain_check = true;
  Eigen::Index dense_threshold = 4096;
  std::function<void(const StepRecord&)> on_step;
};

struct RunOutput {
  LatticeSpec lattice;
  SiteBasis basis;
  double t = 0.0;
  PotentialTable initial;
  PotentialTable final_table;
  std::vector<KeyNorms> initial_norms;
  std::vector<StepRecord> records;
  std::vector<PotentialTable> history;     // history[i] after step i, history[0] initial
  std::vector<LocalOperator> generators;   // generators[i-1] = S_total of step i
  bool completed = false;
  std::optional<AlgorithmError::Kind> error_kind;
  std::string error;
};

RunOutput run(const LatticeSpec& lattice, const InitialData& data, double t,
              const RunOptions& options);

}  // namespace lsbd
