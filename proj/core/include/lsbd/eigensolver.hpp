#pragma once

#include <optional>

#include "lsbd/operators.hpp"

namespace lsbd {

struct Spectrum {
  RealVector values;  // ascending
  Vector ground_vector;
  double max_residual = 0.0;
  bool iterative = false;
};

// how_many empty means the full spectrum (dense only).
Spectrum exact_diagonalize(const GlobalOperator& k, std::optional<int> how_many = std::nullopt);

Spectrum dense_spectrum(const Matrix& k);
Spectrum lanczos_lowest(const GlobalOperator& k, int how_many, double tol = 1e-10,
                        int max_krylov = 600);

}  // namespace lsbd
