#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lsbd/geometry.hpp"

namespace lsbd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

class OperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Truncated on-site Hamiltonian in its own eigenbasis; Omega is basis vector 0.
struct SiteBasis {
  int site_dim = 2;
  RealVector levels;

  void validate() const;
  Matrix hamiltonian() const;
};

struct LocalOperator {
  Rectangle support;
  Matrix matrix;
  bool hermitian = false;

  void validate(int site_dim) const;
};

struct GlobalOperator {
  Eigen::Index dim = 0;
  bool sparse = false;
  Matrix dense;
  SparseMatrix sparse_matrix;

  Matrix to_dense() const;
  Vector apply(const Vector& v) const;
};

std::size_t hilbert_dim(const Rectangle& r, int site_dim);

// Index bookkeeping for the tensor factor of `inner` inside `outer`.
class Embedding {
 public:
  Embedding(const Rectangle& inner, const Rectangle& outer, int site_dim);

  Eigen::Index inner_dim() const { return inner_dim_; }
  Eigen::Index outer_dim() const { return outer_dim_; }
  Eigen::Index rest_dim() const { return rest_dim_; }

  Matrix embed(const Matrix& m) const;
  SparseMatrix embed_sparse(const Matrix& m, double drop_tol = 0.0) const;
  // (m (x) 1) x  and  x (m (x) 1)
  Matrix apply_left(const Matrix& m, const Matrix& x) const;
  Matrix apply_right(const Matrix& x, const Matrix& m) const;
  // Diagonal of d (x) 1 for a diagonal d on the inner factor.
  RealVector embed_diagonal(const RealVector& d) const;

 private:
  Matrix gather(const Matrix& x) const;
  Matrix scatter(const Matrix& y) const;

  Eigen::Index inner_dim_, outer_dim_, rest_dim_;
  std::vector<Eigen::Index> index_;  // index_[rest * inner_dim + a] = outer basis index
};

LocalOperator embed(const LocalOperator& op, const Rectangle& into, int site_dim);
GlobalOperator embed_global(const LocalOperator& op, const LatticeSpec& lattice, int site_dim,
                            Eigen::Index dense_threshold = 4096);

RealVector h0_diagonal(const Rectangle& region, const SiteBasis& basis);
LocalOperator h0(const Rectangle& region, const SiteBasis& basis);
// Number of non-vacuum sites, the diagonal of sum_j P_perp_j.
RealVector excitation_count(const Rectangle& region, const SiteBasis& basis);
LocalOperator projector_minus(const Rectangle& region, const SiteBasis& basis);
LocalOperator projector_plus(const Rectangle& region, const SiteBasis& basis);

double spectral_norm(const Matrix& m);
double hermitian_spectral_norm(const Matrix& m);
Matrix commutator(const Matrix& a, const Matrix& b);

// (D_l)^{-1/2} m (D_r)^{-1/2} for positive diagonals.
Matrix scale_by_diagonals(const Matrix& m, const RealVector& left, const RealVector& right);

double weighted_norm(const LocalOperator& v, const Rectangle& region, const SiteBasis& basis);
double weighted_norm(const Matrix& v, const RealVector& h0_diag);

enum class Sector { plus, minus };
double aux_weighted_norm(const LocalOperator& v, const Rectangle& region, Sector left,
                         Sector right, const SiteBasis& basis);

// Block of m between sectors; the vacuum is basis index 0 on any support.
Matrix sector_block(const Matrix& m, Sector left, Sector right);
double off_diagonal_norm(const Matrix& m);
Matrix diagonal_part(const Matrix& m);

// e^S K e^{-S} for anti-Hermitian S, through the eigendecomposition of -iS.
Matrix conjugate(const Matrix& k, const Matrix& s);
Matrix unitary_exp(const Matrix& s);

struct SeriesResult {
  Matrix value;
  int terms = 0;
  double last_term_norm = 0.0;
  double tail_bound = 0.0;
  bool converged = true;
};

using AdjointAction = std::function<Matrix(const Matrix&)>;

// sum_{n>=1} ad^n(B)/n!, stopping once a term drops below tail_tol.
SeriesResult adjoint_series(const AdjointAction& ad, double s_norm, const Matrix& b, int n_max,
                            double tail_tol);
SeriesResult adjoint_series(const Matrix& s, const Matrix& b, int n_max, double tail_tol);

}  // namespace lsbd
