#include <gtest/gtest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "lsbd/block_diagonalizer.hpp"

using namespace lsbd;

namespace {

ModelSpec phi4(int n_s) {
  ModelSpec s;
  s.n_s = n_s;
  return s;
}

RunOutput run_with_history(const LatticeSpec& lat, const InitialData& data, double t,
                           SeriesOptions series = {}) {
  RunOptions opt;
  opt.series = series;
  opt.keep_history = true;
  return run(lat, data, t, opt);
}

// 1 - 3t sum_l t^{(l-1)/4} (l+1)^{2d-1}, summed until the terms are negligible.
double coefficient_oracle(double t, int d) {
  double sum = 0.0;
  for (int l = 1; l < 20000; ++l) {
    const double term = std::pow(t, (l - 1) / 4.0) * std::pow(l + 1.0, 2 * d - 1);
    sum += term;
    if (l > 50 && term < 1e-18) break;
  }
  return 1.0 - 3.0 * t * sum;
}

}  // namespace

TEST(BlockDiagonalizer, GapLemmaCoefficient) {
  struct Frozen {
    double t;
    int d;
    double value;
  };
  const Frozen frozen[] = {{0.005, 1, 0.95173095022994}, {0.01, 1, 0.89196072142782},
                           {0.02, 1, 0.74971436725973},  {0.005, 2, 0.64180594007443},
                           {0.01, 2, 0.06853077068047},  {0.02, 2, -1.62565990106607}};
  for (const Frozen& f : frozen) {
    EXPECT_NEAR(coefficient_oracle(f.t, f.d), f.value, 1e-10);
    EXPECT_NEAR(gap_lemma_coefficient(f.t, f.d), f.value, 1e-10);
  }
  EXPECT_EQ(gap_lemma_coefficient(0.0, 2), 1.0);
}

TEST(BlockDiagonalizer, FirstStepGIsH0) {
  const LatticeSpec lat{2, 2};
  const InitialData data = build_initial_data(phi4(3), 2);
  const PotentialTable table = initial_table(lat, data, 0.02);
  const Rectangle first = step_sequence(lat).front();
  const LocalOperator g = build_G(first, table, data.basis());
  EXPECT_LT((g.matrix - h0(first, data.basis()).matrix).norm(), 1e-15);
  EXPECT_EQ(ground_energy(g), 0.0);
}

TEST(BlockDiagonalizer, ZeroCouplingRun) {
  const LatticeSpec lat{2, 2};
  const InitialData data = build_initial_data(phi4(2), 2);
  const RunOutput out = run_with_history(lat, data, 0.0);
  ASSERT_TRUE(out.completed) << out.error;
  ASSERT_EQ(out.records.size(), 5u);
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    const StepRecord& r = out.records[i];
    EXPECT_EQ(r.E, 0.0);
    EXPECT_NEAR(r.gap, 1.0, 1e-12);
    EXPECT_EQ(out.generators[i].matrix.norm(), 0.0);
    const LocalOperator g = build_G(r.step, out.history[i], data.basis());
    EXPECT_LT((g.matrix - h0(r.step, data.basis()).matrix).norm(), 1e-15);
  }
  const Matrix before = reconstruct(out.initial, lat).to_dense();
  const Matrix after = reconstruct(out.final_table, lat).to_dense();
  EXPECT_LT((before - after).norm(), 1e-15);
}

TEST(BlockDiagonalizer, SeriesOnTrivialInputs) {
  const InitialData data = build_initial_data(phi4(3), 1);
  const Rectangle bond{{1}, {1}};
  const LocalOperator g = h0(bond, data.basis());
  const LocalOperator zero{bond, Matrix::Zero(9, 9), true};
  const SeriesState s0 = lie_schwinger_series(g, 0.0, zero, 0.05, {});
  EXPECT_TRUE(s0.converged);
  EXPECT_EQ(s0.S_total.norm(), 0.0);
  EXPECT_EQ(s0.V_new.norm(), 0.0);

  const LocalOperator diag{bond, diagonal_part(data.pair_potentials[0].matrix), true};
  const SeriesState s1 = lie_schwinger_series(g, 0.0, diag, 0.05, {});
  EXPECT_TRUE(s1.converged);
  EXPECT_LT(s1.S_total.norm(), 1e-15);
  for (const Matrix& sj : s1.S) EXPECT_LT(sj.norm(), 1e-15);
}

TEST(BlockDiagonalizer, SeriesBlockDiagonalizesTheBond) {
  const InitialData data = build_initial_data(phi4(4), 1);
  const LocalOperator& w = data.pair_potentials[0];
  const LocalOperator g = h0(w.support, data.basis());
  const double t = 0.05;
  const SeriesState s = lie_schwinger_series(g, 0.0, w, t, {});
  ASSERT_TRUE(s.converged);
  EXPECT_LT((s.S_total + s.S_total.adjoint()).norm(), 1e-13);
  // e^S (G + tV) e^{-S} = G + t V_new
  const Matrix k = g.matrix + t * w.matrix;
  const Matrix conj = s.S_total.exp() * k * (-s.S_total).exp();
  EXPECT_LT((conj - (g.matrix + t * s.V_new)).norm(), 1e-10);
  EXPECT_LT(off_diagonal_norm(s.V_new), 1e-12);
  const RealVector h = h0_diagonal(w.support, data.basis());
  for (std::size_t j = 0; j < s.S.size(); ++j) {
    const double bound = 2.0 * std::sqrt(2.0) / kGapLowerBound * weighted_norm(s.V[j], h);
    EXPECT_LE(spectral_norm(s.S[j]), bound + 1e-12) << "j=" << j + 1;
  }
}

TEST(BlockDiagonalizer, ReferenceStepsAndInvariants) {
  const LatticeSpec lat{2, 2};
  const InitialData data = build_initial_data(phi4(2), 2);
  const double t = 0.02;
  const RunOutput out = run_with_history(lat, data, t);
  ASSERT_TRUE(out.completed) << out.error;
  const auto steps = step_sequence(lat);
  ASSERT_EQ(out.records.size(), steps.size());

  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Rectangle& step = steps[i];
    const PotentialTable& before = out.history[i];
    const PotentialTable& after = out.history[i + 1];
    const StepRecord& rec = out.records[i];
    EXPECT_EQ(rec.step, step);
    EXPECT_GE(rec.gap, 0.5);

    // E from the vacuum expectations of the potentials strictly inside the step
    double e = 0.0;
    for (const auto& [key, op] : before.entries) {
      if (step.contains(key) && key != step && !key.is_site()) e += t * op.matrix(0, 0).real();
    }
    EXPECT_NEAR(rec.E, e, 1e-14);

    const LocalOperator* processed = after.find(step);
    if (processed) EXPECT_LT(off_diagonal_norm(processed->matrix), 1e-10);

    // keys the step does not sit inside keep their bits
    for (const auto& [key, op] : before.entries) {
      if (!key.contains(step)) EXPECT_TRUE(after.bitwise_equal(key, before)) << key.to_string();
    }

    // global conjugation by the step generator
    const Rectangle full = Rectangle::full(lat);
    const Matrix s = embed(out.generators[i], full, 2).matrix;
    const Matrix k_before = reconstruct(before, lat).to_dense();
    const Matrix k_after = reconstruct(after, lat).to_dense();
    const Matrix direct = s.exp() * k_before * (-s).exp();
    EXPECT_LT((k_after - direct).norm(), 1e-8 * (1.0 + k_before.norm()));
  }

  // every processed key stays block-diagonal with respect to larger supports
  for (const Rectangle& key : steps) {
    const LocalOperator* op = out.final_table.find(key);
    if (!op) continue;
    for (const Rectangle& outer : steps) {
      if (!outer.contains(key)) continue;
      EXPECT_LT(off_diagonal_norm(embed(*op, outer, 2).matrix), 1e-10);
    }
  }
}

TEST(BlockDiagonalizer, ErrorKinds) {
  const LatticeSpec lat{1, 3};
  const InitialData data = build_initial_data(phi4(3), 1);

  SeriesOptions high_floor;
  high_floor.gap_floor = 1.5;
  RunOutput a = run_with_history(lat, data, 0.02, high_floor);
  EXPECT_FALSE(a.completed);
  ASSERT_TRUE(a.error_kind);
  EXPECT_EQ(*a.error_kind, AlgorithmError::Kind::gap_collapse);
  EXPECT_EQ(to_string(*a.error_kind), "gap_collapse");

  SeriesOptions short_series;
  short_series.j_max = 1;
  short_series.tail_tol = 1e-300;
  RunOutput b = run_with_history(lat, data, 0.02, short_series);
  EXPECT_FALSE(b.completed);
  ASSERT_TRUE(b.error_kind);
  EXPECT_EQ(*b.error_kind, AlgorithmError::Kind::non_convergence);
}
