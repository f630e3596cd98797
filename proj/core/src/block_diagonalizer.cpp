#include "lsbd/block_diagonalizer.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>

namespace lsbd {

namespace {

constexpr double kBlockTol = 1e-10;
constexpr double kDropTol = 1e-14;

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

Matrix generator_matrix(const Vector& u) {
  Matrix s = Matrix::Zero(u.size(), u.size());
  s.col(0) = u;
  s.row(0) = -u.adjoint();
  s(0, 0) = 0.0;
  return s;
}

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

std::string to_string(AlgorithmError::Kind kind) {
  switch (kind) {
    case AlgorithmError::Kind::gap_collapse:
      return "gap_collapse";
    case AlgorithmError::Kind::divergence:
      return "divergence";
    case AlgorithmError::Kind::invariant_breach:
      return "invariant_breach";
    case AlgorithmError::Kind::non_convergence:
      return "non_convergence";
  }
  return "unknown";
}

Matrix PlusSector::function(const std::function<double(double)>& f) const {
  RealVector fv(excitations.size());
  for (Eigen::Index i = 0; i < excitations.size(); ++i) fv(i) = f(excitations(i));
  return vectors * fv.cast<Complex>().asDiagonal() * vectors.adjoint();
}

LocalOperator build_G(const Rectangle& step, const PotentialTable& table, const SiteBasis& basis) {
  const int n = basis.site_dim;
  const auto dim = static_cast<Eigen::Index>(hilbert_dim(step, n));
  Matrix g = Matrix::Zero(dim, dim);
  for (const auto& [key, op] : table.entries) {
    if (!step.contains(key) || key == step) continue;
    if (!key.is_site() && off_diagonal_norm(op.matrix) > kBlockTol) {
      throw AlgorithmError(AlgorithmError::Kind::invariant_breach,
                           "potential on " + key.to_string() + " inside step " + step.to_string() +
                               " is not block-diagonal");
    }
    const double weight = key.is_site() ? 1.0 : table.t;
    g += weight * Embedding(key, step, n).embed(op.matrix);
  }
  if (off_diagonal_norm(g) > kBlockTol) {
    throw AlgorithmError(AlgorithmError::Kind::invariant_breach,
                         "G on " + step.to_string() + " does not commute with P-");
  }
  return LocalOperator{step, g, true};
}

double ground_energy(const LocalOperator& g) {
  const double e = g.matrix(0, 0).real();
  Vector r = g.matrix.col(0);
  r(0) -= e;
  if (r.norm() > kBlockTol) {
    throw AlgorithmError(AlgorithmError::Kind::invariant_breach,
                         "vacuum is not an eigenvector of G on " + g.support.to_string());
  }
  return e;
}

PlusSector plus_sector(const LocalOperator& g, double e) {
  const Eigen::Index n = g.matrix.rows() - 1;
  const Matrix block = g.matrix.bottomRightCorner(n, n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (block + block.adjoint()));
  PlusSector s;
  s.E = e;
  s.excitations = es.eigenvalues().array() - e;
  s.vectors = es.eigenvectors();
  return s;
}

Matrix vacuum_generator_commutator(const Vector& u, const Matrix& x) {
  Matrix out = u * x.row(0);
  out.noalias() += x.col(0) * u.adjoint();
  out.row(0).noalias() -= u.adjoint() * x;
  out.col(0).noalias() -= x * u;
  return out;
}

SeriesState lie_schwinger_series(const LocalOperator& g, double e, const LocalOperator& v, double t,
                                 const SeriesOptions& options) {
  return lie_schwinger_series(g, plus_sector(g, e), v, t, options);
}

SeriesState lie_schwinger_series(const LocalOperator& g, const PlusSector& sector,
                                 const LocalOperator& v, double t, const SeriesOptions& options) {
  if (sector.gap() < options.gap_floor) {
    throw AlgorithmError(AlgorithmError::Kind::gap_collapse,
                         "gap " + std::to_string(sector.gap()) + " on " + g.support.to_string() +
                             " is below the floor " + std::to_string(options.gap_floor));
  }
  const Eigen::Index dim = g.matrix.rows();
  const int jmax = options.j_max;
  const Matrix resolvent = sector.function([](double x) { return 1.0 / x; });
  const Matrix& gm = g.matrix;

  // a[p][m]: sum over r_1+..+r_p = m of ad S_{r_1} .. ad S_{r_p} (G); b likewise on V.
  std::vector<std::vector<Matrix>> a(jmax + 1, std::vector<Matrix>(jmax + 1));
  std::vector<std::vector<Matrix>> b(jmax + 1, std::vector<Matrix>(jmax + 1));
  a[0][0] = gm;
  b[0][0] = v.matrix;
  std::vector<Vector> u(jmax + 1);

  auto nested = [&](std::vector<std::vector<Matrix>>& tab, int p, int m) {
    Matrix sum = Matrix::Zero(dim, dim);
    for (int r = 1; r <= m - (p - 1); ++r) {
      const Matrix& inner = tab[p - 1][m - r];
      if (inner.size() == 0) continue;
      sum += vacuum_generator_commutator(u[r], inner);
    }
    tab[p][m] = std::move(sum);
  };

  SeriesState state;
  state.support = g.support;
  state.S_total = Matrix::Zero(dim, dim);
  state.V_new = Matrix::Zero(dim, dim);
  int growth = 0;
  for (int j = 1; j <= jmax; ++j) {
    Matrix vj;
    if (j == 1) {
      vj = v.matrix;
    } else {
      vj = Matrix::Zero(dim, dim);
      for (int p = 2; p <= j; ++p) {
        nested(a, p, j);
        vj += a[p][j] / factorial(p);
      }
      for (int p = 1; p <= j - 1; ++p) {
        nested(b, p, j - 1);
        vj += b[p][j - 1] / factorial(p);
      }
    }
    u[j] = Vector::Zero(dim);
    u[j].tail(dim - 1) = resolvent * vj.col(0).tail(dim - 1);
    a[1][j] = vacuum_generator_commutator(u[j], gm);

    const double tj = std::pow(t, j);
    const double tj1 = std::pow(t, j - 1);
    Matrix sj = generator_matrix(u[j]);
    const Matrix dj = diagonal_part(vj);
    state.S_total += tj * sj;
    state.V_new += tj1 * dj;
    const double scaled = std::abs(tj) * u[j].norm();
    const double vscaled = std::abs(tj1) * dj.norm();
    if (!state.scaled_term_norms.empty() && scaled > state.scaled_term_norms.back() &&
        scaled > options.tail_tol) {
      ++growth;
    } else {
      growth = 0;
    }
    state.scaled_term_norms.push_back(scaled);
    state.V.push_back(std::move(vj));
    state.S.push_back(std::move(sj));
    state.terms_used = j;
    state.tail_estimate = std::max(scaled, vscaled);
    if (growth >= 3) {
      throw AlgorithmError(AlgorithmError::Kind::divergence,
                           "Lie-Schwinger terms grow on " + g.support.to_string() + " at order " +
                               std::to_string(j));
    }
    if (scaled < options.tail_tol && vscaled < options.tail_tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

PotentialTable update_potentials(const Rectangle& step, const PotentialTable& table,
                                 const SeriesState& series, const LatticeSpec& lattice,
                                 const SeriesOptions& options) {
  if (!series.converged) {
    throw AlgorithmError(AlgorithmError::Kind::non_convergence,
                         "series on " + step.to_string() + " did not reach the tail tolerance");
  }
  const int n = table.site_dim;
  PotentialTable out = table;
  out.step = StepIndex::of(step);

  if (series.V_new.norm() < kDropTol) {
    out.entries.erase(step);
  } else {
    out.set(LocalOperator{step, series.V_new, true});
  }

  const double s_norm = series.S_total.norm();
  if (s_norm == 0.0) return out;
  for (const Rectangle& target : enumerate_rectangles(lattice)) {
    if (!target.strictly_contains(step)) continue;
    Embedding e(step, target, n);
    const auto dim = e.outer_dim();
    Matrix sum = Matrix::Zero(dim, dim);
    bool touched = false;
    for (const Rectangle& member : g_set(step, target)) {
      if (member.is_site() || !member.overlaps(step)) continue;
      const LocalOperator* old = table.find(member);
      if (!old) continue;
      const Matrix vin = Embedding(member, target, n).embed(old->matrix);
      SeriesResult r = adjoint_series(
          [&](const Matrix& x) {
            return Matrix(e.apply_left(series.S_total, x) - e.apply_right(x, series.S_total));
          },
          s_norm, vin, options.adjoint_n_max, options.tail_tol);
      if (!r.converged) {
        throw AlgorithmError(AlgorithmError::Kind::non_convergence,
                             "adjoint series on " + target.to_string() + " did not converge");
      }
      sum += r.value;
      touched = true;
    }
    if (!touched) continue;
    if (const LocalOperator* old = table.find(target)) sum += old->matrix;
    if (sum.norm() < kDropTol) {
      out.entries.erase(target);
    } else {
      out.set(LocalOperator{target, std::move(sum), true});
    }
  }
  return out;
}

GlobalOperator reconstruct(const PotentialTable& table, const LatticeSpec& lattice,
                           Eigen::Index dense_threshold) {
  const Rectangle full = Rectangle::full(lattice);
  const int n = table.site_dim;
  GlobalOperator k;
  k.dim = static_cast<Eigen::Index>(hilbert_dim(full, n));
  k.sparse = k.dim > dense_threshold;
  if (k.sparse) {
    k.sparse_matrix = SparseMatrix(k.dim, k.dim);
  } else {
    k.dense = Matrix::Zero(k.dim, k.dim);
  }
  for (const auto& [key, op] : table.entries) {
    const double weight = key.is_site() ? 1.0 : table.t;
    Embedding e(key, full, n);
    if (k.sparse) {
      k.sparse_matrix += weight * e.embed_sparse(op.matrix);
    } else {
      k.dense += weight * e.embed(op.matrix);
    }
  }
  return k;
}

double gap_lemma_coefficient(double t, int d) {
  const double at = std::abs(t);
  if (at == 0.0) return 1.0;
  if (at >= 1.0) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int l = 1; l < 100000; ++l) {
    const double term = std::pow(at, (l - 1) / 4.0) * std::pow(l + 1.0, 2 * d - 1);
    sum += term;
    if (l > 4 * d && term < 1e-17 * sum) break;
  }
  return 1.0 - 3.0 * at * sum;
}

std::vector<KeyNorms> norm_table(const PotentialTable& table, const SiteBasis& basis) {
  std::vector<KeyNorms> out;
  const std::array<std::pair<Sector, Sector>, 4> sectors{{{Sector::plus, Sector::plus},
                                                          {Sector::plus, Sector::minus},
                                                          {Sector::minus, Sector::plus},
                                                          {Sector::minus, Sector::minus}}};
  for (const auto& [key, op] : table.entries) {
    if (key.is_site()) continue;
    KeyNorms kn;
    kn.key = key;
    kn.weighted = weighted_norm(op.matrix, h0_diagonal(key, basis));
    for (std::size_t s = 0; s < sectors.size(); ++s) {
      kn.aux[s] = aux_weighted_norm(op, key, sectors[s].first, sectors[s].second, basis);
    }
    kn.off_diagonal = off_diagonal_norm(op.matrix);
    out.push_back(std::move(kn));
  }
  return out;
}

namespace {

void fill_lemma_diagnostics(StepRecord& rec, const LocalOperator& g, const PlusSector& sector,
                            const Matrix& v_old, const SeriesState& series, double t,
                            const SiteBasis& basis, int d) {
  const Eigen::Index n = g.matrix.rows() - 1;
  const RealVector h0 = h0_diagonal(g.support, basis);
  const RealVector w = h0.array() + 1.0;
  const RealVector w_plus = w.tail(n);
  for (std::size_t j = 0; j < series.S.size(); ++j) {
    TermDiagnostics td;
    td.j = static_cast<int>(j) + 1;
    td.s_norm = spectral_norm(series.S[j]);
    td.s_weighted_norm = spectral_norm(series.S[j] * w.cwiseSqrt().cast<Complex>().asDiagonal());
    td.v_weighted_norm = weighted_norm(series.V[j], h0);
    td.scaled_s_norm = series.scaled_term_norms[j];
    rec.terms.push_back(td);
  }

  rec.v_old_weighted = weighted_norm(v_old, h0);
  rec.v_new_weighted = weighted_norm(series.V_new, h0);

  const Matrix gpp = g.matrix.bottomRightCorner(n, n) - sector.E * Matrix::Identity(n, n);
  rec.bound_g_min = min_eigenvalue(gpp - 0.5 * kGapLowerBound * w_plus.cast<Complex>().asDiagonal().toDenseMatrix());
  const Matrix sqrt_w = w_plus.cwiseSqrt().cast<Complex>().asDiagonal();
  rec.resolvent_sqrt_norm =
      spectral_norm(sector.function([](double x) { return 1.0 / std::sqrt(x); }) * sqrt_w);
  rec.resolvent_norm = spectral_norm(sector.function([](double x) { return 1.0 / x; }) * sqrt_w);

  rec.gap_lemma_coefficient = gap_lemma_coefficient(t, d);
  const Matrix h0_plus = h0.tail(n).cast<Complex>().asDiagonal();
  rec.gap_lemma_min = min_eigenvalue(gpp - rec.gap_lemma_coefficient * h0_plus);

  Matrix higher = Matrix::Zero(g.matrix.rows(), g.matrix.cols());
  for (std::size_t j = 1; j < series.S.size(); ++j) higher += std::pow(t, j + 1) * series.S[j];
  const double denom = std::abs(t) * rec.v_old_weighted * rec.v_old_weighted;
  rec.vsquare_ratio = denom > 0.0 ? spectral_norm(higher) / denom : 0.0;

  const RealVector pi = excitation_count(g.support, basis);
  const Vector v_col = v_old.col(0).tail(n);
  const Vector resolved = sector.function([](double x) { return 1.0 / x; }) * v_col;
  const RealVector lift = (w.tail(n).array() / (pi.tail(n).array() + 1.0)).sqrt();
  const RealVector drop = (w.tail(n).array() * (pi.tail(n).array() + 1.0)).rsqrt();
  const double num = (lift.cast<Complex>().asDiagonal() * resolved).norm();
  const double den = (drop.cast<Complex>().asDiagonal() * v_col).norm();
  rec.inductive_aux_ratio = den > 0.0 ? num / den : 0.0;
}

}  // namespace

RunOutput run(const LatticeSpec& lattice, const InitialData& data, double t,
              const RunOptions& options) {
  RunOutput out;
  out.lattice = lattice;
  out.basis = data.basis();
  out.t = t;
  out.initial = initial_table(lattice, data, t);
  out.initial_norms = norm_table(out.initial, out.basis);
  if (options.keep_history) out.history.push_back(out.initial);

  PotentialTable table = out.initial;
  const std::vector<Rectangle> steps = step_sequence(lattice);
  const int n = out.basis.site_dim;
  const Rectangle full = Rectangle::full(lattice);
  const std::vector<Rectangle> all = enumerate_rectangles(lattice);

  try {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto start = std::chrono::steady_clock::now();
      const Rectangle& step = steps[i];
      StepRecord rec;
      rec.index = static_cast<int>(i) + 1;
      rec.step = step;

      const LocalOperator g = build_G(step, table, out.basis);
      const double e = ground_energy(g);
      const PlusSector sector = plus_sector(g, e);
      rec.E = e;
      rec.gap = sector.gap();
      rec.theorem_regime = std::abs(t) <= options.theorem_t_max;

      const LocalOperator* found = table.find(step);
      const LocalOperator v_old =
          found ? *found
                : LocalOperator{step, Matrix::Zero(g.matrix.rows(), g.matrix.cols()), true};
      const SeriesState series = lie_schwinger_series(g, sector, v_old, t, options.series);
      rec.series_converged = series.converged;
      rec.terms_used = series.terms_used;
      rec.tail_estimate = series.tail_estimate;

      PotentialTable next = update_potentials(step, table, series, lattice, options.series);
      fill_lemma_diagnostics(rec, g, sector, v_old.matrix, series, t, out.basis, lattice.d);

      rec.norms = norm_table(next, out.basis);
      for (const KeyNorms& kn : rec.norms) {
        if (order_cmp(kn.key, step) > 0) continue;
        rec.max_processed_off_diagonal = std::max(rec.max_processed_off_diagonal, kn.off_diagonal);
        const LocalOperator& op = next.entries.at(kn.key);
        for (const Rectangle& sup : all) {
          if (sup == kn.key || !sup.contains(kn.key)) continue;
          const Matrix emb = Embedding(kn.key, sup, n).embed(op.matrix);
          rec.max_inherited_off_diagonal =
              std::max(rec.max_inherited_off_diagonal, off_diagonal_norm(emb));
        }
      }
      for (const Rectangle& key : all) {
        if (key.contains(step)) continue;
        if (!table.bitwise_equal(key, next)) ++rec.immutability_violations;
      }

      if (options.unitary_chain_check &&
          static_cast<Eigen::Index>(hilbert_dim(full, n)) <= options.dense_threshold) {
        const Matrix before = reconstruct(table, lattice, options.dense_threshold).dense;
        const Matrix after = reconstruct(next, lattice, options.dense_threshold).dense;
        const Matrix s_global = Embedding(step, full, n).embed(series.S_total);
        const Matrix expected = conjugate(before, s_global);
        rec.unitary_chain_residual = spectral_norm(after - expected) / (1.0 + spectral_norm(before));
      }

      table = std::move(next);
      if (options.keep_history) {
        out.history.push_back(table);
        out.generators.push_back(LocalOperator{step, series.S_total, false});
      }
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.records.push_back(rec);
      if (options.on_step) options.on_step(out.records.back());
    }
    out.completed = true;
  } catch (const AlgorithmError& err) {
    out.error_kind = err.kind();
    out.error = err.what();
  }
  out.final_table = table;
  return out;
}

}  // namespace lsbd
