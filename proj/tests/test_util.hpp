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
#ifndef CGM_TESTS_TEST_UTIL_HPP_
#define CGM_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "cgm/numerics/matrix.hpp"

namespace cgm::testing {

// Central-difference gradient of a scalar function of one matrix. Lives in
// test code only so it never shares a path with the tape.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, Matrix x,
                               double eps = 1e-6) {
  Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double up = f(x);
    x[i] = orig - eps;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

inline double max_rel_error(const Matrix& analytic, const Matrix& numeric,
                            double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  return Matrix::uniform(r, c, lo, hi, rng);
}

// Orthonormal basis from Gram-Schmidt on a random square matrix.
inline Matrix random_orthogonal(std::size_t n, std::mt19937_64& rng) {
  Matrix a = Matrix::normal(n, n, 1.0, rng);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += a(i, j) * a(i, k);
      for (std::size_t i = 0; i < n; ++i) a(i, j) -= dot * a(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += a(i, j) * a(i, j);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) a(i, j) /= norm;
  }
  return a;
}

}  // namespace cgm::testing

#endif  // CGM_TESTS_TEST_UTIL_HPP_
