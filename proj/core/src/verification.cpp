#include "lsbd/verification.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace lsbd {

namespace {

std::string tag(const std::string& family, const std::string& detail) {
  return family + "[" + detail + "]";
}

std::string step_tag(const StepRecord& r) { return "step=" + std::to_string(r.index); }

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double ipow(double base, int e) { return std::pow(base, e); }

}  // namespace

BoundCheck make_check(std::string name, double lhs, double rhs, std::string anchor) {
  BoundCheck c{std::move(name), lhs, rhs, false, std::move(anchor)};
  c.passed = std::isfinite(lhs) && !std::isnan(rhs) && lhs <= rhs + kCheckTolerance;
  return c;
}

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.passed; });
}

std::size_t VerificationReport::passed_count() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.passed; }));
}

void VerificationReport::append(const std::vector<BoundCheck>& more) {
  checks.insert(checks.end(), more.begin(), more.end());
}

OracleReport make_oracle(const GlobalOperator& original, const GlobalOperator& final_k,
                         int lowest) {
  OracleReport rep;
  const bool sparse = original.sparse || final_k.sparse;
  std::optional<int> count;
  if (sparse) count = lowest;
  const Spectrum a = exact_diagonalize(original, count);
  const Spectrum b = exact_diagonalize(final_k, count);
  rep.iterative = a.iterative || b.iterative;
  rep.spectrum_original.assign(a.values.data(), a.values.data() + a.values.size());
  rep.spectrum_final.assign(b.values.data(), b.values.data() + b.values.size());
  const std::size_t m = std::min(rep.spectrum_original.size(), rep.spectrum_final.size());
  for (std::size_t i = 0; i < m; ++i) {
    rep.max_abs_dev =
        std::max(rep.max_abs_dev, std::abs(rep.spectrum_original[i] - rep.spectrum_final[i]));
  }
  if (m >= 2) {
    rep.gap_original = rep.spectrum_original[1] - rep.spectrum_original[0];
    rep.gap_final = rep.spectrum_final[1] - rep.spectrum_final[0];
  }
  Vector e0 = Vector::Zero(final_k.dim);
  e0(0) = 1.0;
  const Vector ke0 = final_k.apply(e0);
  rep.vacuum_energy = ke0(0).real();
  rep.ground_vector_residual = (ke0 - rep.vacuum_energy * e0).norm();
  if (!sparse) {
    rep.norm_k = std::max(std::abs(a.values(0)), std::abs(a.values(a.values.size() - 1)));
  } else {
    double row_max = 0.0;
    for (Eigen::Index k = 0; k < original.sparse_matrix.outerSize(); ++k) {
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(original.sparse_matrix, k); it; ++it) s += std::abs(it.value());
      row_max = std::max(row_max, s);
    }
    rep.norm_k = row_max;
  }
  return rep;
}

std::vector<BoundCheck> check_theorem_main(const Evidence& ev) {
  std::vector<BoundCheck> out;
  out.push_back(make_check("main.run_completed", ev.completed ? 0.0 : 1.0, 0.0,
                           "every step of the algorithm is well defined"));
  const bool regime = std::abs(ev.t) <= ev.theorem_t_max;
  for (const StepRecord& r : ev.records) {
    if (!regime) continue;
    out.push_back(make_check(tag("main.step_gap", step_tag(r)), 0.5, r.gap,
                             "gap of G above E is at least 1/2"));
  }
  if (!ev.oracle) {
    out.push_back(make_check("main.oracle_available", 1.0, 0.0, "exact diagonalization oracle"));
    return out;
  }
  const OracleReport& o = *ev.oracle;
  out.push_back(make_check("main.unitary_equivalence", o.max_abs_dev, 1e-8 * (1.0 + o.norm_k),
                           "final effective Hamiltonian is unitarily equivalent to K"));
  out.push_back(make_check("main.vacuum_residual", o.ground_vector_residual, 1e-8,
                           "product vacuum is an eigenvector of the final Hamiltonian"));
  if (!o.spectrum_final.empty()) {
    out.push_back(make_check("main.vacuum_is_ground",
                             std::abs(o.vacuum_energy - o.spectrum_final.front()), 1e-8,
                             "product vacuum carries the ground energy"));
  }
  if (regime) {
    out.push_back(make_check("main.final_gap", 0.5, o.gap_final,
                             "spectral gap above the unique ground state is at least 1/2"));
  }
  return out;
}

std::vector<BoundCheck> check_block_structure(const Evidence& ev) {
  std::vector<BoundCheck> out;
  for (const StepRecord& r : ev.records) {
    const std::string s = step_tag(r);
    out.push_back(make_check(tag("block.processed_off_diagonal", s), r.max_processed_off_diagonal,
                             1e-10, "processed potentials commute with their vacuum projectors"));
    out.push_back(make_check(tag("block.inherited_off_diagonal", s), r.max_inherited_off_diagonal,
                             1e-10, "block-diagonality is inherited by containing rectangles"));
    out.push_back(make_check(tag("block.immutability", s), r.immutability_violations, 0.0,
                             "potentials not containing the step are left unchanged"));
    out.push_back(make_check(tag("block.unitary_chain", s), r.unitary_chain_residual, 1e-8,
                             "each step is a unitary conjugation by exp(S)"));
    out.push_back(make_check(tag("block.series_converged", s), r.series_converged ? 0.0 : 1.0, 0.0,
                             "Lie-Schwinger series converges"));
  }
  return out;
}

std::vector<BoundCheck> check_lemma_suite(const Evidence& ev, std::vector<Diagnostic>& diag) {
  std::vector<BoundCheck> out;
  const double r2 = std::sqrt(2.0);
  for (const StepRecord& r : ev.records) {
    const std::string s = step_tag(r);
    const double gap = kGapLowerBound;  // the measured gap is checked in main.step_gap
    for (const TermDiagnostics& td : r.terms) {
      const std::string sj = s + ",j=" + std::to_string(td.j);
      out.push_back(make_check(tag("lemma.generator_norm", sj), td.s_norm,
                               2.0 * r2 / gap * td.v_weighted_norm,
                               "||S_j|| <= 2 sqrt(2)/Delta ||V_j||_H0, Delta = 1/2"));
      out.push_back(make_check(tag("lemma.generator_weighted_norm", sj), td.s_weighted_norm,
                               (2.0 + r2) / gap * td.v_weighted_norm,
                               "||S_j (H0+1)^(1/2)|| <= (2+sqrt(2))/Delta ||V_j||_H0, Delta = 1/2"));
    }
    out.push_back(make_check(tag("lemma.potential_growth", s), r.v_new_weighted,
                             2.0 * r.v_old_weighted, "||V_new||_H0 <= 2 ||V_old||_H0"));
    out.push_back(make_check(tag("lemma.form_bound_G", s), -r.bound_g_min, 0.0,
                             "P+(G-E)P+ >= (Delta/2) P+(H0+1)P+, Delta = 1/2"));
    out.push_back(make_check(tag("lemma.resolvent_sqrt", s), r.resolvent_sqrt_norm,
                             r2 / std::sqrt(gap),
                             "||(G-E)^(-1/2) P+ (H0+1)^(1/2)|| <= sqrt(2)/sqrt(Delta), Delta = 1/2"));
    out.push_back(make_check(tag("lemma.resolvent", s), r.resolvent_norm, r2 / gap,
                             "||(G-E)^(-1) P+ (H0+1)^(1/2)|| <= sqrt(2)/Delta, Delta = 1/2"));
    out.push_back(make_check(tag("lemma.inductive_aux_ratio", s), r.inductive_aux_ratio, 1e3,
                             "resolvent bound in the auxiliary norm, d-dependent constant"));
    diag.push_back({tag("lemma.vsquare_ratio", s), r.vsquare_ratio});
    diag.push_back({tag("lemma.inductive_aux_ratio", s), r.inductive_aux_ratio});
  }
  return out;
}

std::vector<BoundCheck> check_appendix(const LatticeSpec& lattice, const InitialData& data,
                                       double coupling_normalization, std::uint64_t seed) {
  std::vector<BoundCheck> out;
  const SiteBasis& basis = data.basis();
  const int d = lattice.d;
  const Rectangle full = Rectangle::full(lattice);

  for (const Rectangle& j : enumerate_rectangles(lattice)) {
    const RealVector count = excitation_count(j, basis);
    RealVector plus = RealVector::Ones(count.size());
    plus(0) = 0.0;
    out.push_back(make_check(tag("appendix.excitations_dominate_plus", j.to_string()),
                             -(count - plus).minCoeff(), 0.0,
                             "sum_j P_perp_j - P+_J >= 0"));
    if (j.is_site()) continue;

    const RealVector h0j = h0_diagonal(j, basis);
    for (const Rectangle& sub : subrectangles(j)) {
      if (sub == j || sub.is_site()) continue;
      if (sub.q != j.q) continue;  // one representative per shape
      const int l = sub.circumference();
      RealVector sum = RealVector::Zero(count.size());
      for (const Rectangle& cand : subrectangles(j)) {
        if (cand.k != sub.k || cand == j) continue;
        Embedding e(cand, j, basis.site_dim);
        RealVector p = RealVector::Ones(e.inner_dim());
        p(0) = 0.0;
        sum += e.embed_diagonal(p);
      }
      const double margin = (ipow(l + 1.0, d) * count - sum).minCoeff();
      out.push_back(make_check(tag("appendix.shape_plus_sum", j.to_string() + ",l=" + sub.to_string()),
                               -margin, 0.0,
                               "(l+1)^d sum_j P_perp_j - sum_i P+_(l,i) >= 0"));
    }
    for (int l = 1; l < j.circumference(); ++l) {
      RealVector sum = RealVector::Zero(h0j.size());
      for (const Rectangle& cand : subrectangles(j)) {
        if (cand.circumference() != l) continue;
        sum += Embedding(cand, j, basis.site_dim).embed_diagonal(h0_diagonal(cand, basis));
      }
      const double margin = (ipow(l + 1.0, 2 * d - 1) * h0j - sum).minCoeff();
      out.push_back(make_check(tag("appendix.h0_circumference_sum", j.to_string() + ",l=" +
                                                                        std::to_string(l)),
                               -margin, 0.0, "(l+1)^(2d-1) H0_J - sum_(|l| fixed) H0 >= 0"));
    }
  }

  const RealVector h0_full = h0_diagonal(full, basis);
  for (int l = 1; l <= full.circumference(); ++l) {
    for (const std::vector<int>& shape : enumerate_shapes(d, l)) {
      RealVector sum = RealVector::Zero(h0_full.size());
      std::size_t cap = 1;
      bool any = false;
      for (const Rectangle& cand : enumerate_rectangles(lattice)) {
        if (cand.k != shape) continue;
        any = true;
        sum += Embedding(cand, full, basis.site_dim).embed_diagonal(h0_diagonal(cand, basis));
      }
      if (!any) continue;
      for (int kj : shape) cap *= static_cast<std::size_t>(kj + 1);
      std::ostringstream name;
      name << "appendix.h0_shape_sum[k=" << Rectangle{shape, std::vector<int>(d, 1)}.to_string()
           << "]";
      out.push_back(make_check(name.str(), -(static_cast<double>(cap) * h0_full - sum).minCoeff(),
                               0.0, "sum_i H0_(k,i) <= prod(k_j+1) sum_i H_i"));
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (const LocalOperator& w : data.pair_potentials) {
    const RealVector weight = h0_diagonal(w.support, basis).array() + 1.0;
    out.push_back(make_check(tag("model.pair_normalization", w.support.to_string()),
                             weighted_norm(w.matrix, weight.array() - 1.0),
                             coupling_normalization, "||W||_H0 equals the chosen form bound"));
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      Vector phi(w.matrix.rows());
      for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = Complex(gauss(rng), gauss(rng));
      phi.normalize();
      const double num = std::abs(phi.dot(w.matrix * phi));
      const double den = phi.dot(weight.cast<Complex>().asDiagonal() * phi).real();
      worst = std::max(worst, num / den);
    }
    out.push_back(make_check(tag("model.form_bound", w.support.to_string()), worst,
                             coupling_normalization,
                             "|<phi,W phi>| <= a <phi,(H0+1) phi>"));
  }
  return out;
}

double gap_lemma_margin(const LocalOperator& g, const SiteBasis& basis, double coefficient) {
  const Eigen::Index n = g.matrix.rows() - 1;
  const double e = g.matrix(0, 0).real();
  const RealVector h0 = h0_diagonal(g.support, basis).tail(n);
  const Matrix m = g.matrix.bottomRightCorner(n, n) - e * Matrix::Identity(n, n) -
                   coefficient * Matrix(h0.cast<Complex>().asDiagonal());
  return min_eigenvalue(m);
}

std::vector<BoundCheck> check_gap_lemma(const Evidence& ev, std::vector<Diagnostic>& diag) {
  std::vector<BoundCheck> out;
  const double c = gap_lemma_coefficient(ev.t, ev.lattice.d);
  diag.push_back({"gap_lemma.coefficient", c});
  diag.push_back({"gap_lemma.coefficient_positive", c > 0.0 ? 1.0 : 0.0});
  for (const StepRecord& r : ev.records) {
    out.push_back(make_check(tag("gap_lemma.form_bound", step_tag(r)), -r.gap_lemma_min, 0.0,
                             "P+(G-E)P+ >= (1 - 3t sum t^((l-1)/4)(l+1)^(2d-1)) H0 P+"));
  }
  return out;
}

std::vector<BoundCheck> check_norm_decay(const Evidence& ev) {
  std::vector<BoundCheck> out;
  const double t = std::abs(ev.t);
  const int d = ev.lattice.d;
  const double xd = ev.x_d;
  const char* sectors[4] = {"++", "+-", "-+", "--"};

  auto emit = [&](const std::optional<Rectangle>& step, const std::string& s, const KeyNorms& kn) {
    const int r = kn.key.circumference();
    const int root = static_cast<int>(std::floor(std::pow(static_cast<double>(r), 0.25) + 1e-12));
    const double decay = std::pow(t, (r - 1) / 3.0);
    const double fine = decay / std::pow(r, xd + 2.0 * d);
    const double coarse = decay / std::pow(r, xd);
    const int k = step ? step->circumference() : 0;
    const std::string where = s + ",key=" + kn.key.to_string();
    if (step && order_cmp(*step, kn.key) >= 0) {
      out.push_back(make_check(tag("norm_decay.processed", where), kn.weighted, 96.0 * coarse,
                               "processed: ||V||_H0 <= 96 t^((r-1)/3) / r^x_d"));
    } else if (k < root) {
      out.push_back(make_check(tag("norm_decay.small_steps", where), kn.weighted, fine,
                               "small regime: ||V||_H0 <= t^((r-1)/3) / r^(x_d+2d)"));
    } else if (k < r - root) {
      out.push_back(make_check(tag("norm_decay.intermediate_steps", where), kn.weighted,
                               2.0 * fine,
                               "intermediate regime: ||V||_H0 <= 2 t^((r-1)/3) / r^(x_d+2d)"));
    } else {
      for (int sct = 0; sct < 4; ++sct) {
        out.push_back(make_check(tag("norm_decay.large_steps_aux", where + ",sector=" + sectors[sct]),
                                 kn.aux[sct], 3.0 * fine,
                                 "large regime: aux norm <= 3 t^((r-1)/3) / r^(x_d+2d)"));
      }
      out.push_back(make_check(tag("norm_decay.large_steps", where), kn.weighted, 48.0 * coarse,
                               "large regime: ||V||_H0 <= 48 t^((r-1)/3) / r^x_d"));
    }
    out.push_back(make_check(tag("norm_decay.working_hypothesis", where), kn.weighted,
                             std::pow(t, (r - 1) / 4.0), "||V||_H0 <= t^((l-1)/4)"));
    if (!step && r == 1) {
      out.push_back(make_check(tag("norm_decay.base_case", where), kn.weighted, 1.0,
                               "initial bond potential: ||V||_H0 <= 1"));
    }
  };

  for (const KeyNorms& kn : ev.initial_norms) emit(std::nullopt, "step=0", kn);
  for (const StepRecord& r : ev.records) {
    for (const KeyNorms& kn : r.norms) emit(r.step, step_tag(r), kn);
  }
  return out;
}

std::vector<BoundCheck> check_trees(const Evidence& ev, std::vector<std::string>& skipped) {
  std::vector<BoundCheck> out;
  if (!ev.trees) {
    skipped.push_back("trees: branch history not retained for this lattice");
    return out;
  }
  const TreeAudit& a = *ev.trees;
  if (a.truncated) {
    skipped.push_back("trees.branch_sum: enumeration cap reached");
  } else {
    out.push_back(make_check(tag("trees.branch_sum", a.target.to_string()), a.deviation, 1e-8,
                             "sum of branch operators reproduces the potential"));
  }
  out.push_back(make_check("trees.distinct_rectangle_sets", a.distinct_sets ? 0.0 : 1.0, 0.0,
                           "distinct branches carry distinct ordered rectangle sets"));
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    const BranchAudit& b = a.branches[i];
    const std::string id = "branch=" + std::to_string(i);
    out.push_back(make_check(tag("trees.connected", id), b.connected ? 0.0 : 1.0, 0.0,
                             "union of the branch rectangles and of every tail is connected"));
    out.push_back(make_check(tag("trees.minimal", id), b.minimal ? 0.0 : 1.0, 0.0,
                             "minimal rectangle of the branch rectangles is the target"));
    out.push_back(make_check(tag("trees.norm_chain", id), b.norm, b.bound,
                             "branch norm bounded by the product of measured edge factors"));
    if (b.path_checked) {
      out.push_back(make_check(tag("trees.path_weight", id), b.norm, b.path_rhs,
                               "branch norm <= t^((r-1)/3) prod w_sigma"));
    } else {
      skipped.push_back(tag("trees.path_weight", id) + ": " + b.path_note);
    }
  }
  for (const EquivalenceAudit& eq : a.completeness) {
    const std::string id = "level=" + std::to_string(eq.level) + ",key=" + eq.key.to_string();
    if (eq.truncated) {
      skipped.push_back(tag("trees.completeness", id) + ": enumeration cap reached");
      continue;
    }
    out.push_back(make_check(tag("trees.completeness", id), eq.deviation, 1e-8,
                             "branch expansion is the unrolled recursion"));
  }
  return out;
}

VerificationReport evaluate(const Evidence& ev, const InitialData& data,
                            double coupling_normalization, const std::set<std::string>& suites) {
  VerificationReport rep;
  auto on = [&](const char* s) { return suites.count(s) > 0; };
  if (on("main")) rep.append(check_theorem_main(ev));
  if (on("block")) rep.append(check_block_structure(ev));
  if (on("lemmas")) rep.append(check_lemma_suite(ev, rep.diagnostics));
  if (on("appendix")) rep.append(check_appendix(ev.lattice, data, coupling_normalization, ev.seed));
  if (on("gap_lemma")) rep.append(check_gap_lemma(ev, rep.diagnostics));
  if (on("norm_decay")) rep.append(check_norm_decay(ev));
  if (on("trees")) rep.append(check_trees(ev, rep.skipped));
  if (ev.trees) rep.diagnostics.push_back({"trees.c", ev.trees->c});
  if (ev.oracle) {
    rep.diagnostics.push_back({"oracle.gap_original", ev.oracle->gap_original});
    rep.diagnostics.push_back({"oracle.gap_final", ev.oracle->gap_final});
  }
  return rep;
}

std::string check_family(const std::string& name) { return name.substr(0, name.find('[')); }

ScanReport t_scan(std::vector<double> grid, const ScanEvaluator& evaluate_point, int workers) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  ScanReport rep;
  rep.points.resize(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < grid.size(); i = next++) rep.points[i] = evaluate_point(grid[i]);
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  bool failed_before = false;
  for (const ScanPoint& p : rep.points) {
    if (p.passed) {
      if (failed_before) rep.monotone = false;
      if (!failed_before) rep.largest_passing = p.t;
    } else {
      failed_before = true;
    }
    for (const std::string& fam : p.failed_families) {
      if (!rep.failure_frontier.count(fam)) rep.failure_frontier[fam] = p.t;
    }
  }
  return rep;
}

}  // namespace lsbd
