#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lsbd/site_models.hpp"

using namespace lsbd;

namespace {

constexpr double kAnharmonicGround = 1.3923516415;  // p^2 + x^2 + x^4

// Lowest eigenvalue of p^2 + x^2 + x^4 from ladder operators built here, truncated after squaring.
double ladder_ground_energy(int m) {
  const int big = m + 6;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(big, big);
  for (int i = 0; i + 1 < big; ++i) a(i, i + 1) = std::sqrt(i + 1.0);
  const Eigen::MatrixXcd x = (a + a.adjoint()) / std::sqrt(2.0);
  const Eigen::MatrixXcd p = Complex(0.0, 1.0) * (a.adjoint() - a) / std::sqrt(2.0);
  const Eigen::MatrixXcd h = p * p + x * x + x * x * x * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.topLeftCorner(m, m));
  return es.eigenvalues()(0);
}

ModelSpec phi4(int n_s, int basis = 60) {
  ModelSpec s;
  s.n_s = n_s;
  s.oscillator_basis_size = basis;
  return s;
}

}  // namespace

TEST(SiteModels, AnharmonicGroundEnergy) {
  const double e40 = ladder_ground_energy(40), e80 = ladder_ground_energy(80);
  EXPECT_NEAR(e40, kAnharmonicGround, 1e-6);
  EXPECT_NEAR(e80, kAnharmonicGround, 1e-8);
  for (int basis : {40, 60, 90}) {
    const SiteModel s = build_phi4_site(phi4(4, basis));
    EXPECT_NEAR(s.raw_ground_energy, kAnharmonicGround, 1e-6) << basis;
  }
  EXPECT_NEAR(build_phi4_site(phi4(4, 40)).raw_ground_energy,
              build_phi4_site(phi4(4, 80)).raw_ground_energy, 1e-6);
}

TEST(SiteModels, NormalizedLevels) {
  for (int n_s : {2, 3, 4, 6}) {
    const SiteModel s = build_phi4_site(phi4(n_s));
    ASSERT_EQ(s.basis.levels.size(), n_s);
    EXPECT_EQ(s.basis.levels(0), 0.0);
    EXPECT_NEAR(s.basis.levels(1), 1.0, 1e-15);
    for (int i = 1; i < n_s; ++i) EXPECT_GT(s.basis.levels(i), s.basis.levels(i - 1));
    EXPECT_NO_THROW(s.basis.validate());
    EXPECT_LT((s.position - s.position.adjoint()).norm(), 1e-12);
  }
}

TEST(SiteModels, PairPotential) {
  for (int d : {1, 2}) {
    const InitialData data = build_initial_data(phi4(4), d);
    ASSERT_EQ(data.pair_potentials.size(), static_cast<std::size_t>(d));
    for (const LocalOperator& w : data.pair_potentials) {
      EXPECT_LT((w.matrix - w.matrix.adjoint()).norm(), 1e-12);
      EXPECT_NEAR(weighted_norm(w, w.support, data.basis()), 0.5, 1e-10);
      EXPECT_NEAR(std::abs(w.matrix(0, 0)), 0.0, 1e-10);  // parity kills <Omega Omega|W|Omega Omega>
    }
    EXPECT_NEAR(data.normalization.achieved, 0.5, 1e-10);
  }
}

TEST(SiteModels, NormalizationIsIdempotent) {
  const SiteModel site = build_phi4_site(phi4(3));
  NormalizationReport first, second;
  const LocalOperator w = build_pair_potential(site, 0, 1, 0.5, &first);
  SiteModel rescaled = site;
  rescaled.position *= std::sqrt(first.scale);
  const LocalOperator w2 = build_pair_potential(rescaled, 0, 1, 0.5, &second);
  EXPECT_NEAR(second.scale, 1.0, 1e-12);
  EXPECT_LT((w.matrix - w2.matrix).norm(), 1e-12);
}

TEST(SiteModels, FormBound) {
  const InitialData data = build_initial_data(phi4(4), 2);
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> g;
  for (const LocalOperator& w : data.pair_potentials) {
    const RealVector h = h0_diagonal(w.support, data.basis());
    for (int trial = 0; trial < 200; ++trial) {
      Vector phi(w.matrix.rows());
      for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = Complex(g(rng), g(rng));
      phi.normalize();
      const double lhs = std::abs(phi.dot(w.matrix * phi));
      const double rhs = 0.5 * (phi.cwiseAbs2().dot(h) + 1.0);
      EXPECT_LE(lhs, rhs + 1e-12);
    }
  }
}

TEST(SiteModels, BondsAndHamiltonian) {
  EXPECT_EQ(bonds({2, 2}).size(), 4u);
  EXPECT_EQ(bonds({1, 5}).size(), 4u);
  EXPECT_EQ(bonds({2, 3}).size(), 12u);

  const LatticeSpec lat{2, 2};
  const InitialData data = build_initial_data(phi4(2), 2);
  const Matrix k0 = assemble_hamiltonian(lat, data, 0.0).to_dense();
  Eigen::SelfAdjointEigenSolver<Matrix> es0(k0);
  EXPECT_NEAR(es0.eigenvalues()(0), 0.0, 1e-12);
  EXPECT_NEAR(es0.eigenvalues()(1), 1.0, 1e-12);

  const double t = 0.03;
  const Matrix k = assemble_hamiltonian(lat, data, t).to_dense();
  EXPECT_LT((k - k.adjoint()).norm(), 1e-12);

  // H0 plus t times each embedded bond term, assembled directly
  const Rectangle full = Rectangle::full(lat);
  Matrix oracle = h0(full, data.basis()).matrix;
  for (const Rectangle& b : bonds(lat)) {
    oracle += t * embed(data.pair_potential_on(b), full, 2).matrix;
  }
  EXPECT_LT((k - oracle).norm(), 1e-12);

  // reconstruction identity for the initial table
  const PotentialTable table = initial_table(lat, data, t);
  Matrix rec = Matrix::Zero(k.rows(), k.cols());
  for (const auto& [key, op] : table.entries) {
    rec += (key.is_site() ? 1.0 : t) * embed(op, full, 2).matrix;
  }
  EXPECT_LT((rec - k).norm(), 1e-12);
  EXPECT_EQ(table.entries.size(), 8u);
}

TEST(SiteModels, CustomDiagonalModel) {
  ModelSpec spec;
  spec.kind = ModelKind::custom_diagonal;
  spec.n_s = 3;
  spec.levels = {2.0, 4.0, 7.0};
  spec.site_operator = {0, 1, 0, 1, 0, 1, 0, 1, 0};
  const SiteModel s = build_site(spec);
  EXPECT_EQ(s.basis.levels(0), 0.0);
  EXPECT_NEAR(s.basis.levels(1), 1.0, 1e-15);
  EXPECT_NEAR(s.basis.levels(2), 2.5, 1e-15);
  spec.site_operator[1] = 3.0;
  EXPECT_THROW(build_site(spec), OperatorError);
  EXPECT_THROW(model_kind_from_string("ising"), OperatorError);
  EXPECT_EQ(model_kind_from_string(to_string(ModelKind::harmonic_phi4)), ModelKind::harmonic_phi4);
}
