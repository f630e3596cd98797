#include "lsbd/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace lsbd {

void SiteBasis::validate() const {
  if (site_dim < 2) throw OperatorError("site dimension must be >= 2");
  if (levels.size() != site_dim) throw OperatorError("level count does not match site dimension");
  if (levels(0) != 0.0) throw OperatorError("ground level must be 0");
  for (int i = 1; i < site_dim; ++i) {
    if (levels(i) < 1.0 - 1e-12) throw OperatorError("excited levels must be >= 1");
  }
}

Matrix SiteBasis::hamiltonian() const { return levels.cast<Complex>().asDiagonal(); }

void LocalOperator::validate(int site_dim) const {
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(support, site_dim));
  if (matrix.rows() != dim || matrix.cols() != dim) {
    throw OperatorError("operator on " + support.to_string() + " has dimension " +
                        std::to_string(matrix.rows()) + ", expected " + std::to_string(dim));
  }
  if (hermitian) {
    const double scale = std::max(1.0, matrix.norm());
    if ((matrix - matrix.adjoint()).norm() > 1e-12 * scale) {
      throw OperatorError("operator flagged Hermitian is not Hermitian on " + support.to_string());
    }
  }
}

Matrix GlobalOperator::to_dense() const { return sparse ? Matrix(sparse_matrix) : dense; }

Vector GlobalOperator::apply(const Vector& v) const {
  return sparse ? Vector(sparse_matrix * v) : Vector(dense * v);
}

std::size_t hilbert_dim(const Rectangle& r, int site_dim) {
  std::size_t dim = 1;
  for (std::size_t i = 0; i < r.num_sites(); ++i) dim *= static_cast<std::size_t>(site_dim);
  return dim;
}

Embedding::Embedding(const Rectangle& inner, const Rectangle& outer, int site_dim) {
  if (!outer.contains(inner)) {
    throw OperatorError("support " + inner.to_string() + " is not contained in " +
                        outer.to_string());
  }
  const int n_outer = static_cast<int>(outer.num_sites());
  std::vector<int> pos = outer.site_positions(inner);
  std::vector<bool> is_inner(n_outer, false);
  for (int p : pos) is_inner[p] = true;

  inner_dim_ = static_cast<Eigen::Index>(hilbert_dim(inner, site_dim));
  outer_dim_ = static_cast<Eigen::Index>(hilbert_dim(outer, site_dim));
  rest_dim_ = outer_dim_ / inner_dim_;
  index_.assign(outer_dim_, 0);

  std::vector<int> digits(n_outer, 0);
  for (Eigen::Index b = 0; b < outer_dim_; ++b) {
    Eigen::Index rem = b;
    for (int s = n_outer - 1; s >= 0; --s) {
      digits[s] = static_cast<int>(rem % site_dim);
      rem /= site_dim;
    }
    Eigen::Index a = 0, rest = 0;
    for (int s = 0; s < n_outer; ++s) {
      if (is_inner[s]) {
        a = a * site_dim + digits[s];
      } else {
        rest = rest * site_dim + digits[s];
      }
    }
    index_[rest * inner_dim_ + a] = b;
  }
}

Matrix Embedding::embed(const Matrix& m) const {
  Matrix out = Matrix::Zero(outer_dim_, outer_dim_);
  for (Eigen::Index r = 0; r < rest_dim_; ++r) {
    const Eigen::Index* row = index_.data() + r * inner_dim_;
    for (Eigen::Index a2 = 0; a2 < inner_dim_; ++a2) {
      for (Eigen::Index a1 = 0; a1 < inner_dim_; ++a1) out(row[a1], row[a2]) = m(a1, a2);
    }
  }
  return out;
}

SparseMatrix Embedding::embed_sparse(const Matrix& m, double drop_tol) const {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (Eigen::Index r = 0; r < rest_dim_; ++r) {
    const Eigen::Index* row = index_.data() + r * inner_dim_;
    for (Eigen::Index a2 = 0; a2 < inner_dim_; ++a2) {
      for (Eigen::Index a1 = 0; a1 < inner_dim_; ++a1) {
        if (std::abs(m(a1, a2)) > drop_tol) trip.emplace_back(row[a1], row[a2], m(a1, a2));
      }
    }
  }
  SparseMatrix out(outer_dim_, outer_dim_);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

RealVector Embedding::embed_diagonal(const RealVector& d) const {
  RealVector out(outer_dim_);
  for (Eigen::Index r = 0; r < rest_dim_; ++r) {
    for (Eigen::Index a = 0; a < inner_dim_; ++a) out(index_[r * inner_dim_ + a]) = d(a);
  }
  return out;
}

Matrix Embedding::gather(const Matrix& x) const {
  Matrix g(outer_dim_, x.cols());
  for (Eigen::Index i = 0; i < outer_dim_; ++i) g.row(i) = x.row(index_[i]);
  return g;
}

Matrix Embedding::scatter(const Matrix& y) const {
  Matrix s(outer_dim_, y.cols());
  for (Eigen::Index i = 0; i < outer_dim_; ++i) s.row(index_[i]) = y.row(i);
  return s;
}

Matrix Embedding::apply_left(const Matrix& m, const Matrix& x) const {
  Matrix g = gather(x);
  Eigen::Map<Matrix> folded(g.data(), inner_dim_, rest_dim_ * x.cols());
  Matrix y(outer_dim_, x.cols());
  Eigen::Map<Matrix>(y.data(), inner_dim_, rest_dim_ * x.cols()).noalias() = m * folded;
  return scatter(y);
}

Matrix Embedding::apply_right(const Matrix& x, const Matrix& m) const {
  return apply_left(m.transpose(), x.transpose()).transpose();
}

LocalOperator embed(const LocalOperator& op, const Rectangle& into, int site_dim) {
  if (op.support == into) return op;
  Embedding e(op.support, into, site_dim);
  return LocalOperator{into, e.embed(op.matrix), op.hermitian};
}

GlobalOperator embed_global(const LocalOperator& op, const LatticeSpec& lattice, int site_dim,
                            Eigen::Index dense_threshold) {
  Embedding e(op.support, Rectangle::full(lattice), site_dim);
  GlobalOperator g;
  g.dim = e.outer_dim();
  g.sparse = g.dim > dense_threshold;
  if (g.sparse) {
    g.sparse_matrix = e.embed_sparse(op.matrix);
  } else {
    g.dense = e.embed(op.matrix);
  }
  return g;
}

RealVector h0_diagonal(const Rectangle& region, const SiteBasis& basis) {
  const auto n = static_cast<Eigen::Index>(hilbert_dim(region, basis.site_dim));
  const auto sites = static_cast<int>(region.num_sites());
  RealVector out = RealVector::Zero(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    Eigen::Index rem = b;
    for (int s = 0; s < sites; ++s) {
      out(b) += basis.levels(rem % basis.site_dim);
      rem /= basis.site_dim;
    }
  }
  return out;
}

LocalOperator h0(const Rectangle& region, const SiteBasis& basis) {
  return LocalOperator{region, h0_diagonal(region, basis).cast<Complex>().asDiagonal(), true};
}

RealVector excitation_count(const Rectangle& region, const SiteBasis& basis) {
  const auto n = static_cast<Eigen::Index>(hilbert_dim(region, basis.site_dim));
  const auto sites = static_cast<int>(region.num_sites());
  RealVector out = RealVector::Zero(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    Eigen::Index rem = b;
    for (int s = 0; s < sites; ++s) {
      if (rem % basis.site_dim != 0) out(b) += 1.0;
      rem /= basis.site_dim;
    }
  }
  return out;
}

LocalOperator projector_minus(const Rectangle& region, const SiteBasis& basis) {
  const auto n = static_cast<Eigen::Index>(hilbert_dim(region, basis.site_dim));
  Matrix p = Matrix::Zero(n, n);
  p(0, 0) = 1.0;
  return LocalOperator{region, p, true};
}

LocalOperator projector_plus(const Rectangle& region, const SiteBasis& basis) {
  LocalOperator p = projector_minus(region, basis);
  p.matrix = Matrix::Identity(p.matrix.rows(), p.matrix.cols()) - p.matrix;
  return p;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double hermitian_spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  Matrix out = a * b;
  out.noalias() -= b * a;
  return out;
}

Matrix scale_by_diagonals(const Matrix& m, const RealVector& left, const RealVector& right) {
  const RealVector l = left.cwiseSqrt().cwiseInverse();
  const RealVector r = right.cwiseSqrt().cwiseInverse();
  return l.cast<Complex>().asDiagonal() * m * r.cast<Complex>().asDiagonal();
}

namespace {

double norm_auto(const Matrix& a) {
  const double fro = a.norm();
  if (fro == 0.0) return 0.0;
  if ((a - a.adjoint()).norm() <= 1e-14 * fro) return hermitian_spectral_norm(a);
  return spectral_norm(a);
}

}  // namespace

double weighted_norm(const Matrix& v, const RealVector& h0_diag) {
  const RealVector w = h0_diag.array() + 1.0;
  return norm_auto(scale_by_diagonals(v, w, w));
}

double weighted_norm(const LocalOperator& v, const Rectangle& region, const SiteBasis& basis) {
  const LocalOperator e = embed(v, region, basis.site_dim);
  return weighted_norm(e.matrix, h0_diagonal(region, basis));
}

Matrix sector_block(const Matrix& m, Sector left, Sector right) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  const Eigen::Index n = m.rows();
  if (left == Sector::minus && right == Sector::minus) {
    out(0, 0) = m(0, 0);
  } else if (left == Sector::plus && right == Sector::minus) {
    out.col(0).tail(n - 1) = m.col(0).tail(n - 1);
  } else if (left == Sector::minus && right == Sector::plus) {
    out.row(0).tail(n - 1) = m.row(0).tail(n - 1);
  } else {
    out.bottomRightCorner(n - 1, n - 1) = m.bottomRightCorner(n - 1, n - 1);
  }
  return out;
}

double off_diagonal_norm(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (n <= 1) return 0.0;
  return std::max(m.col(0).tail(n - 1).norm(), m.row(0).tail(n - 1).norm());
}

Matrix diagonal_part(const Matrix& m) {
  Matrix out = m;
  const Eigen::Index n = m.rows();
  if (n > 1) {
    out.col(0).tail(n - 1).setZero();
    out.row(0).tail(n - 1).setZero();
  }
  return out;
}

double aux_weighted_norm(const LocalOperator& v, const Rectangle& region, Sector left,
                         Sector right, const SiteBasis& basis) {
  const LocalOperator e = embed(v, region, basis.site_dim);
  const RealVector w = (h0_diagonal(region, basis).array() + 1.0) *
                       (excitation_count(region, basis).array() + 1.0);
  return norm_auto(scale_by_diagonals(sector_block(e.matrix, left, right), w, w));
}

Matrix unitary_exp(const Matrix& s) {
  const double scale = std::max(1.0, s.norm());
  if ((s + s.adjoint()).norm() > 1e-10 * scale) {
    throw OperatorError("generator is not anti-Hermitian");
  }
  const Matrix h = Complex(0.0, -1.0) * s;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  const Vector phases = (Complex(0.0, 1.0) * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix conjugate(const Matrix& k, const Matrix& s) {
  if (k.rows() != s.rows()) throw OperatorError("conjugate: dimension mismatch");
  const Matrix u = unitary_exp(s);
  return u * k * u.adjoint();
}

SeriesResult adjoint_series(const AdjointAction& ad, double s_norm, const Matrix& b, int n_max,
                            double tail_tol) {
  if (n_max < 1) throw OperatorError("adjoint_series: n_max must be >= 1");
  SeriesResult out;
  out.value = Matrix::Zero(b.rows(), b.cols());
  Matrix term = b;
  out.converged = false;
  for (int n = 1; n <= n_max; ++n) {
    term = ad(term) / static_cast<double>(n);
    out.value += term;
    out.terms = n;
    out.last_term_norm = term.norm();
    if (out.last_term_norm < tail_tol) {
      out.converged = true;
      break;
    }
  }
  out.tail_bound = out.last_term_norm * std::exp(2.0 * s_norm);
  return out;
}

SeriesResult adjoint_series(const Matrix& s, const Matrix& b, int n_max, double tail_tol) {
  return adjoint_series([&s](const Matrix& x) { return commutator(s, x); }, s.norm(), b, n_max,
                        tail_tol);
}

}  // namespace lsbd
