#include "lsbd/eigensolver.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace lsbd {

namespace {

double residual(const GlobalOperator& k, const Vector& v, double lambda) {
  return (k.apply(v) - lambda * v).norm();
}

void orthogonalize(Vector& v, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vector& b : basis) v -= b * b.dot(v);
  }
}

}  // namespace

Spectrum dense_spectrum(const Matrix& k) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (k + k.adjoint()));
  Spectrum out;
  out.values = es.eigenvalues();
  out.ground_vector = es.eigenvectors().col(0);
  const Matrix r = k * es.eigenvectors() - es.eigenvectors() * es.eigenvalues().asDiagonal();
  out.max_residual = r.colwise().norm().maxCoeff();
  return out;
}

Spectrum lanczos_lowest(const GlobalOperator& k, int how_many, double tol, int max_krylov) {
  const Eigen::Index n = k.dim;
  how_many = static_cast<int>(std::min<Eigen::Index>(how_many, n));
  std::vector<Vector> locked;
  std::vector<double> values;
  double scale = 1.0;

  for (int found = 0; found < how_many; ++found) {
    Vector q = Vector::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) q(i) += 0.25 * std::sin(1.0 + static_cast<double>(i));
    orthogonalize(q, locked);
    q.normalize();

    std::vector<Vector> basis{q};
    std::vector<double> alpha, beta;
    Vector best_vec;
    double best_val = 0.0;
    bool done = false;
    const int limit = static_cast<int>(std::min<Eigen::Index>(max_krylov, n - found));

    for (int m = 0; m < limit && !done; ++m) {
      Vector w = k.apply(basis[m]);
      const double a = basis[m].dot(w).real();
      alpha.push_back(a);
      w -= a * basis[m];
      if (m > 0) w -= beta[m - 1] * basis[m - 1];
      orthogonalize(w, locked);
      orthogonalize(w, basis);
      const double b = w.norm();
      scale = std::max(scale, std::abs(a) + b);

      const bool check = (m + 1) % 10 == 0 || m + 1 == limit || b < 1e-12 * scale;
      if (check) {
        const int dim = m + 1;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) {
          t(i, i) = alpha[i];
          if (i + 1 < dim) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const double ritz_res = std::abs(b * es.eigenvectors()(dim - 1, 0));
        if (ritz_res <= tol * scale || m + 1 == limit || b < 1e-12 * scale) {
          Vector v = Vector::Zero(n);
          for (int i = 0; i < dim; ++i) v += es.eigenvectors()(i, 0) * basis[i];
          orthogonalize(v, locked);
          v.normalize();
          best_val = es.eigenvalues()(0);
          best_vec = v;
          done = true;
        }
      }
      if (!done) {
        beta.push_back(b);
        basis.push_back(w / b);
      }
    }
    const double res = residual(k, best_vec, best_val);
    if (res > 1e-9 * scale) {
      throw OperatorError("Lanczos did not converge: residual " + std::to_string(res));
    }
    values.push_back(best_val);
    locked.push_back(best_vec);
  }

  std::vector<int> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
  Spectrum out;
  out.iterative = true;
  out.values.resize(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.values(static_cast<Eigen::Index>(i)) = values[order[i]];
    out.max_residual = std::max(out.max_residual, residual(k, locked[order[i]], values[order[i]]));
  }
  out.ground_vector = locked[order.front()];
  return out;
}

Spectrum exact_diagonalize(const GlobalOperator& k, std::optional<int> how_many) {
  if (!k.sparse) {
    Spectrum s = dense_spectrum(k.dense);
    if (how_many && *how_many < s.values.size()) {
      s.values = s.values.head(*how_many).eval();
    }
    return s;
  }
  if (!how_many) throw OperatorError("full spectrum requested for a sparse operator");
  return lanczos_lowest(k, *how_many);
}

}  // namespace lsbd
