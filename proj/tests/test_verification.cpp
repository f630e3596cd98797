#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "lsbd/verification.hpp"

using namespace lsbd;

namespace {

GlobalOperator dense_of(const Matrix& m) {
  GlobalOperator g;
  g.dim = m.rows();
  g.dense = m;
  return g;
}

ScanPoint pass_below(double t, double limit) {
  ScanPoint p;
  p.t = t;
  p.completed = true;
  p.checks = 3;
  p.passed = t <= limit;
  p.failures = p.passed ? 0 : 1;
  if (!p.passed) p.failed_families = {"norm_decay.large_steps"};
  return p;
}

}  // namespace

TEST(Verification, MakeCheckTolerance) {
  EXPECT_TRUE(make_check("a", 1.0, 1.0, "").passed);
  EXPECT_TRUE(make_check("a", 1.0 + 0.5e-10, 1.0, "").passed);
  EXPECT_FALSE(make_check("a", 1.0 + 1e-9, 1.0, "").passed);
  EXPECT_FALSE(make_check("a", std::nan(""), 1.0, "").passed);
  EXPECT_FALSE(make_check("a", INFINITY, INFINITY, "").passed);
  EXPECT_EQ(check_family("main.step_gap[step=3]"), "main.step_gap");
  EXPECT_EQ(check_family("trees.completeness[level=2,key=[[1],[1]]]"), "trees.completeness");
  EXPECT_EQ(check_family("main.final_gap"), "main.final_gap");
}

TEST(Verification, OracleOnDiagonalInput) {
  RealVector d(6);
  d << 0.0, 1.0, 1.5, 2.0, 2.0, 3.0;
  const Matrix k = d.cast<Complex>().asDiagonal();
  const OracleReport r = make_oracle(dense_of(k), dense_of(k));
  EXPECT_EQ(r.max_abs_dev, 0.0);
  EXPECT_DOUBLE_EQ(r.gap_original, 1.0);
  EXPECT_DOUBLE_EQ(r.gap_final, 1.0);
  EXPECT_EQ(r.vacuum_energy, 0.0);
  EXPECT_EQ(r.ground_vector_residual, 0.0);
  EXPECT_DOUBLE_EQ(r.norm_k, 3.0);
  ASSERT_EQ(r.spectrum_final.size(), 6u);

  // a final operator whose vacuum is not an eigenvector
  Matrix bad = k;
  bad(0, 1) = bad(1, 0) = 0.1;
  EXPECT_GT(make_oracle(dense_of(k), dense_of(bad)).ground_vector_residual, 0.09);
}

TEST(Verification, GapLemmaMarginDetectsAmplifiedPotentials) {
  ModelSpec spec;
  spec.n_s = 2;
  const InitialData data = build_initial_data(spec, 2);
  RunOptions opt;
  opt.keep_history = true;
  const double t = 0.005;
  const RunOutput out = run({2, 2}, data, t, opt);
  ASSERT_TRUE(out.completed);
  const double c = gap_lemma_coefficient(t, 2);
  ASSERT_GT(c, 0.0);
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    const Rectangle& step = out.records[i].step;
    const LocalOperator g = build_G(step, out.history[i], data.basis());
    EXPECT_GE(gap_lemma_margin(g, data.basis(), c), -1e-10) << step.to_string();
  }
  // the last step sees every bond; blow the couplings up until the form bound breaks
  const Rectangle& last = out.records.back().step;
  PotentialTable amplified = out.history[out.records.size() - 1];
  amplified.t *= 200.0;
  const LocalOperator g = build_G(last, amplified, data.basis());
  EXPECT_LT(gap_lemma_margin(g, data.basis(), c), -1e-3);
}

TEST(Verification, TScanSortsDedupsAndFindsTheFrontier) {
  std::atomic<int> calls{0};
  const ScanReport s = t_scan(
      {0.03, 0.0, 0.01, 0.02, 0.01},
      [&](double t) {
        ++calls;
        return pass_below(t, 0.02);
      },
      3);
  EXPECT_EQ(calls.load(), 4);
  ASSERT_EQ(s.points.size(), 4u);
  for (std::size_t i = 1; i < s.points.size(); ++i) EXPECT_LT(s.points[i - 1].t, s.points[i].t);
  ASSERT_TRUE(s.largest_passing);
  EXPECT_EQ(*s.largest_passing, 0.02);
  EXPECT_TRUE(s.monotone);
  EXPECT_EQ(s.failure_frontier.at("norm_decay.large_steps"), 0.03);

  const ScanReport zero = t_scan({0.0}, [](double t) { return pass_below(t, 1.0); }, 1);
  ASSERT_EQ(zero.points.size(), 1u);
  EXPECT_TRUE(zero.points[0].passed);

  // pass, fail, pass
  const ScanReport holes = t_scan(
      {0.01, 0.02, 0.03},
      [](double t) { return std::abs(t - 0.02) < 1e-12 ? pass_below(t, 0.0) : pass_below(t, 1.0); }, 2);
  EXPECT_FALSE(holes.monotone);
}

TEST(Verification, SuiteSelection) {
  ModelSpec spec;
  spec.n_s = 2;
  const InitialData data = build_initial_data(spec, 1);
  RunOptions opt;
  const RunOutput out = run({1, 2}, data, 0.0, opt);
  Evidence ev;
  ev.lattice = {1, 2};
  ev.completed = out.completed;
  ev.records = out.records;
  ev.initial_norms = out.initial_norms;
  ev.oracle = make_oracle(assemble_hamiltonian(ev.lattice, data, 0.0),
                          reconstruct(out.final_table, ev.lattice));
  const VerificationReport main_only = evaluate(ev, data, 0.5, {"main"});
  ASSERT_FALSE(main_only.checks.empty());
  for (const BoundCheck& c : main_only.checks) {
    EXPECT_EQ(c.name.rfind("main.", 0), 0u) << c.name;
    EXPECT_TRUE(c.passed) << c.name;
  }
  const VerificationReport block = evaluate(ev, data, 0.5, {"block"});
  for (const BoundCheck& c : block.checks) EXPECT_EQ(c.name.rfind("block.", 0), 0u) << c.name;

  // a missing oracle is a failure, not a skip
  ev.oracle.reset();
  bool flagged = false;
  for (const BoundCheck& c : check_theorem_main(ev)) flagged = flagged || !c.passed;
  EXPECT_TRUE(flagged);
}
