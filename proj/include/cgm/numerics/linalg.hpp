/* Copyright 2026 The CGM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef CGM_NUMERICS_LINALG_HPP_
#define CGM_NUMERICS_LINALG_HPP_

#include <vector>

#include "cgm/numerics/matrix.hpp"

namespace cgm {

struct SymEig {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
};

inline constexpr int kJacobiSweepBudget = 100;

// Cyclic Jacobi eigendecomposition of a symmetric matrix. The input is
// symmetrized as (s + s^T) / 2 first. Throws DimensionError for non-square
// input and NumericalError if the off-diagonal mass does not vanish within
// kJacobiSweepBudget sweeps.
SymEig sym_eig(const Matrix& s);

// V diag((lambda + ridge)^(-1/2)) V^T. Throws NumericalError when any
// lambda + ridge <= 1e-12.
Matrix inv_sqrt_psd(const Matrix& s, double ridge);

// Rebuilds V diag(f(lambda)) V^T from a decomposition.
template <typename F>
Matrix spectral_apply(const SymEig& eig, F&& f) {
  const std::size_t n = eig.values.size();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = f(eig.values[k]);
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double vik = eig.vectors(i, k) * w;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * eig.vectors(j, k);
    }
  }
  return out;
}

}  // namespace cgm

#endif  // CGM_NUMERICS_LINALG_HPP_
