#include "lsbd/site_models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

namespace lsbd {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::harmonic_phi4 ? "harmonic_phi4" : "custom_diagonal_H_with_coupling";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "harmonic_phi4") return ModelKind::harmonic_phi4;
  if (s == "custom_diagonal_H_with_coupling" || s == "custom_diagonal") {
    return ModelKind::custom_diagonal;
  }
  throw OperatorError("unknown model kind '" + s + "'");
}

void ModelSpec::validate() const {
  if (n_s < 2) throw OperatorError("model.n_s must be >= 2");
  if (!(coupling_normalization > 0.0 && coupling_normalization <= 1.0)) {
    throw OperatorError("model.coupling_normalization must lie in (0, 1]");
  }
  if (kind == ModelKind::harmonic_phi4 && oscillator_basis_size < n_s) {
    throw OperatorError("model.oscillator_basis_size (" + std::to_string(oscillator_basis_size) +
                        ") is smaller than model.n_s (" + std::to_string(n_s) + ")");
  }
  if (kind == ModelKind::custom_diagonal) {
    if (static_cast<int>(levels.size()) != n_s) {
      throw OperatorError("model.levels needs exactly n_s entries");
    }
    if (static_cast<int>(site_operator.size()) != n_s * n_s) {
      throw OperatorError("model.site_operator needs n_s*n_s entries");
    }
  }
}

Eigen::MatrixXd oscillator_position(int size) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(size, size);
  for (int n = 0; n + 1 < size; ++n) x(n, n + 1) = x(n + 1, n) = std::sqrt((n + 1) / 2.0);
  return x;
}

Eigen::MatrixXd oscillator_momentum_squared(int size) {
  Eigen::MatrixXd p2 = Eigen::MatrixXd::Zero(size, size);
  for (int n = 0; n < size; ++n) {
    p2(n, n) = (2.0 * n + 1.0) / 2.0;
    if (n + 2 < size) p2(n, n + 2) = p2(n + 2, n) = -std::sqrt((n + 1.0) * (n + 2.0)) / 2.0;
  }
  return p2;
}

namespace {

Eigen::MatrixXd position_squared(int size) {
  Eigen::MatrixXd x2 = Eigen::MatrixXd::Zero(size, size);
  for (int n = 0; n < size; ++n) {
    x2(n, n) = (2.0 * n + 1.0) / 2.0;
    if (n + 2 < size) x2(n, n + 2) = x2(n + 2, n) = std::sqrt((n + 1.0) * (n + 2.0)) / 2.0;
  }
  return x2;
}

SiteModel normalize_site(const RealVector& raw, const Matrix& coupling) {
  SiteModel site;
  site.raw_levels = raw;
  site.raw_ground_energy = raw(0);
  site.raw_gap = raw(1) - raw(0);
  if (site.raw_gap <= 0.0) throw OperatorError("site ground state is degenerate");
  site.basis.site_dim = static_cast<int>(raw.size());
  site.basis.levels = (raw.array() - raw(0)) / site.raw_gap;
  site.basis.levels(0) = 0.0;
  site.basis.levels(1) = 1.0;
  site.position = coupling;
  site.basis.validate();
  return site;
}

}  // namespace

SiteModel build_phi4_site(const ModelSpec& spec) {
  spec.validate();
  const int m = spec.oscillator_basis_size;
  const Eigen::MatrixXd x2_big = position_squared(m + 2);
  const Eigen::MatrixXd x4 = (x2_big * x2_big).topLeftCorner(m, m);
  const Eigen::MatrixXd h = oscillator_momentum_squared(m) + position_squared(m) + x4;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  Eigen::MatrixXd u = es.eigenvectors().leftCols(spec.n_s);
  for (int c = 0; c < spec.n_s; ++c) {
    Eigen::Index at = 0;
    u.col(c).cwiseAbs().maxCoeff(&at);
    if (u(at, c) < 0.0) u.col(c) *= -1.0;
  }
  const Eigen::MatrixXd x = u.transpose() * oscillator_position(m) * u;
  return normalize_site(es.eigenvalues().head(spec.n_s), x.cast<Complex>());
}

SiteModel build_custom_site(const ModelSpec& spec) {
  spec.validate();
  RealVector raw = Eigen::Map<const RealVector>(spec.levels.data(), spec.n_s);
  Eigen::MatrixXd x(spec.n_s, spec.n_s);
  for (int i = 0; i < spec.n_s; ++i) {
    for (int j = 0; j < spec.n_s; ++j) x(i, j) = spec.site_operator[i * spec.n_s + j];
  }
  if ((x - x.transpose()).norm() > 1e-12 * std::max(1.0, x.norm())) {
    throw OperatorError("model.site_operator must be symmetric");
  }
  for (int i = 1; i < spec.n_s; ++i) {
    if (raw(i) < raw(i - 1)) throw OperatorError("model.levels must be ascending");
  }
  return normalize_site(raw, x.cast<Complex>());
}

SiteModel build_site(const ModelSpec& spec) {
  return spec.kind == ModelKind::harmonic_phi4 ? build_phi4_site(spec) : build_custom_site(spec);
}

LocalOperator build_pair_potential(const SiteModel& site, int orientation, int d,
                                   double coupling_normalization, NormalizationReport* report) {
  if (orientation < 0 || orientation >= d) throw OperatorError("bond orientation out of range");
  Rectangle bond{std::vector<int>(d, 0), std::vector<int>(d, 1)};
  bond.k[orientation] = 1;
  Matrix w = Eigen::kroneckerProduct(site.position, site.position);
  const double raw = weighted_norm(w, h0_diagonal(bond, site.basis));
  if (raw == 0.0) throw OperatorError("pair potential vanishes");
  const double scale = coupling_normalization / raw;
  w *= scale;
  LocalOperator op{bond, w, true};
  if (report) {
    report->raw_weighted_norm = raw;
    report->scale = scale;
    report->achieved = weighted_norm(op.matrix, h0_diagonal(bond, site.basis));
  }
  return op;
}

InitialData build_initial_data(const ModelSpec& spec, int d) {
  InitialData data;
  data.site = build_site(spec);
  for (int j = 0; j < d; ++j) {
    data.pair_potentials.push_back(
        build_pair_potential(data.site, j, d, spec.coupling_normalization, &data.normalization));
  }
  return data;
}

LocalOperator InitialData::pair_potential_on(const Rectangle& bond) const {
  if (bond.circumference() != 1) throw OperatorError("not a bond: " + bond.to_string());
  for (const LocalOperator& p : pair_potentials) {
    if (p.support.k == bond.k) return LocalOperator{bond, p.matrix, true};
  }
  throw OperatorError("no pair potential for bond " + bond.to_string());
}

std::vector<Rectangle> bonds(const LatticeSpec& lattice) {
  return enumerate_rectangles(lattice, [](const Rectangle& r) { return r.circumference() == 1; });
}

GlobalOperator assemble_hamiltonian(const LatticeSpec& lattice, const InitialData& data, double t,
                                    Eigen::Index dense_threshold) {
  const Rectangle full = Rectangle::full(lattice);
  const int n = data.basis().site_dim;
  GlobalOperator k;
  k.dim = static_cast<Eigen::Index>(hilbert_dim(full, n));
  k.sparse = k.dim > dense_threshold;
  const RealVector h0 = h0_diagonal(full, data.basis());
  if (k.sparse) {
    std::vector<Eigen::Triplet<Complex>> diag;
    for (Eigen::Index i = 0; i < k.dim; ++i) diag.emplace_back(i, i, h0(i));
    k.sparse_matrix = SparseMatrix(k.dim, k.dim);
    k.sparse_matrix.setFromTriplets(diag.begin(), diag.end());
    for (const Rectangle& b : bonds(lattice)) {
      k.sparse_matrix += t * Embedding(b, full, n).embed_sparse(data.pair_potential_on(b).matrix);
    }
    k.sparse_matrix.makeCompressed();
  } else {
    k.dense = h0.cast<Complex>().asDiagonal();
    for (const Rectangle& b : bonds(lattice)) {
      k.dense += t * Embedding(b, full, n).embed(data.pair_potential_on(b).matrix);
    }
  }
  return k;
}

PotentialTable initial_table(const LatticeSpec& lattice, const InitialData& data, double t) {
  PotentialTable table;
  table.step = StepIndex::sentinel();
  table.t = t;
  table.site_dim = data.basis().site_dim;
  for (const Rectangle& r : enumerate_rectangles(lattice)) {
    if (r.is_site()) {
      table.set(LocalOperator{r, data.basis().hamiltonian(), true});
    } else if (r.circumference() == 1) {
      table.set(data.pair_potential_on(r));
    }
  }
  return table;
}

}  // namespace lsbd
