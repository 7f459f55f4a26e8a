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
#include "cgm/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cgm/errors.hpp"

namespace cgm {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEig sym_eig(const Matrix& s) {
  if (s.rows() != s.cols()) {
    throw DimensionError("sym_eig: expected square matrix, got " + s.shape_string());
  }
  const std::size_t n = s.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (s(i, j) + s(j, i));
  Matrix v = Matrix::identity(n);

  const double scale = std::max(frobenius_norm(a), 1e-300);
  bool converged = n <= 1;
  for (int sweep = 0; sweep < kJacobiSweepBudget && !converged; ++sweep) {
    if (off_diagonal_norm(a) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        // Rotation angle zeroing a(p, q), computed in the stable form.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_diagonal_norm(a) > 1e-15 * scale) {
    throw NumericalError("sym_eig: no convergence within " +
                         std::to_string(kJacobiSweepBudget) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymEig out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

Matrix inv_sqrt_psd(const Matrix& s, double ridge) {
  if (ridge < 0.0) throw NumericalError("inv_sqrt_psd: ridge must be >= 0");
  const SymEig eig = sym_eig(s);
  for (double lambda : eig.values) {
    if (lambda + ridge <= 1e-12) {
      throw NumericalError(
          "inv_sqrt_psd: singular covariance (eigenvalue + ridge <= 1e-12); use ridge > 0");
    }
  }
  return spectral_apply(eig, [ridge](double l) { return 1.0 / std::sqrt(l + ridge); });
}

}  // namespace cgm
