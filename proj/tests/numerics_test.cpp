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
#include <cmath>
#include <random>
#include <vector>

#include "cgm/errors.hpp"
#include "cgm/numerics/grad_check.hpp"
#include "cgm/numerics/linalg.hpp"
#include "cgm/numerics/matrix.hpp"
#include "cgm/numerics/parameters.hpp"
#include "cgm/numerics/tape.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace cgm {
namespace {

using ad::Tape;
using ad::Var;
using testing::max_rel_error;
using testing::numeric_gradient;
using testing::random_matrix;

// Scalarizes an op output with fixed random weights so every output entry
// contributes a distinct amount to the loss.
double weighted_sum(const Matrix& y, const Matrix& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

// Tape gradient of sum(op(x, other) .* w) with respect to x.
template <typename Op>
Matrix tape_gradient(Op op, const Matrix& x, const Matrix& other, const Matrix& w) {
  Tape tape;
  Var vx = tape.variable(x);
  Var vo = tape.constant(other);
  Var y = op(vx, vo);
  Var loss = ad::sum(ad::hadamard(y, tape.constant(w)));
  tape.backward(loss);
  return vx.grad();
}

template <typename Op>
double op_value(Op op, const Matrix& x, const Matrix& other, const Matrix& w) {
  Tape tape;
  Var y = op(tape.constant(x), tape.constant(other));
  return weighted_sum(y.value(), w);
}

template <typename Op>
double op_gradient_error(Op op, const Matrix& x, const Matrix& other, std::size_t out_rows,
                         std::size_t out_cols, std::mt19937_64& rng) {
  const Matrix w = random_matrix(out_rows, out_cols, rng);
  const Matrix analytic = tape_gradient(op, x, other, w);
  const Matrix numeric =
      numeric_gradient([&](const Matrix& xx) { return op_value(op, xx, other, w); }, x);
  return max_rel_error(analytic, numeric);
}

TEST_CASE("matmul examples") {
  const Matrix m{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  CHECK(matmul(Matrix::identity(3), m) == m);
  const Matrix r = matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{1}, {1}});
  CHECK(r == Matrix{{3}, {7}});
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
  try {
    matmul(Matrix(2, 3), Matrix(4, 5));
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    CHECK(what.find("2x3") != std::string::npos);
    CHECK(what.find("4x5") != std::string::npos);
  }
}

TEST_CASE("matmul gradient matches central differences") {
  std::mt19937_64 rng(1);
  const Matrix a = random_matrix(4, 5, rng);
  const Matrix b = random_matrix(5, 3, rng);
  const auto left = [](Var x, Var o) { return ad::matmul(x, o); };
  const auto right = [](Var x, Var o) { return ad::matmul(o, x); };
  CHECK(op_gradient_error(left, a, b, 4, 3, rng) < 1e-6);
  CHECK(op_gradient_error(right, b, a, 4, 3, rng) < 1e-6);
}

TEST_CASE("elementwise scalar examples") {
  Tape tape;
  CHECK(ad::sigmoid(tape.constant(Matrix(1, 1, 0.0))).value()[0] == doctest::Approx(0.5));
  CHECK(ad::tanh(tape.constant(Matrix(1, 1, 0.0))).value()[0] == 0.0);
  CHECK(ad::relu(tape.constant(Matrix(1, 1, -1.0))).value()[0] == 0.0);
  CHECK(ad::sigmoid(tape.constant(Matrix(1, 1, -800.0))).value()[0] >= 0.0);
  CHECK_THROWS_AS(ad::add(tape.constant(Matrix(2, 2)), tape.constant(Matrix(2, 3))),
                  DimensionError);
  CHECK_THROWS_AS(ad::hadamard(tape.constant(Matrix(2, 2)), tape.constant(Matrix(3, 2))),
                  DimensionError);
}

TEST_CASE("sigmoid gradient at 0.3") {
  Tape tape;
  Var x = tape.variable(Matrix(1, 1, 0.3));
  Var y = ad::sigmoid(x);
  tape.backward(ad::sum(y));
  const double s = 1.0 / (1.0 + std::exp(-0.3));
  const double fd = (1.0 / (1.0 + std::exp(-0.3 - 1e-6)) - 1.0 / (1.0 + std::exp(-0.3 + 1e-6))) /
                    2e-6;
  CHECK(std::abs(x.grad()[0] - fd) / std::abs(fd) < 1e-6);
  CHECK(x.grad()[0] == doctest::Approx(s * (1 - s)).epsilon(1e-12));
}

TEST_CASE("every differentiable op matches finite differences on [-1,1] inputs") {
  std::mt19937_64 rng(2);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix o = random_matrix(3, 4, rng);
  const double tol = 1e-5;
  CHECK(op_gradient_error([](Var a, Var b) { return ad::add(a, b); }, x, o, 3, 4, rng) < tol);
  CHECK(op_gradient_error([](Var a, Var b) { return ad::sub(b, a); }, x, o, 3, 4, rng) < tol);
  CHECK(op_gradient_error([](Var a, Var b) { return ad::hadamard(a, b); }, x, o, 3, 4, rng) <
        tol);
  CHECK(op_gradient_error([](Var a, Var) { return ad::sigmoid(a); }, x, o, 3, 4, rng) < tol);
  CHECK(op_gradient_error([](Var a, Var) { return ad::tanh(a); }, x, o, 3, 4, rng) < tol);
  CHECK(op_gradient_error([](Var a, Var) { return ad::relu(a); }, x, o, 3, 4, rng) < tol);
  CHECK(op_gradient_error([](Var a, Var) { return ad::scale(a, -2.5); }, x, o, 3, 4, rng) <
        tol);
  CHECK(op_gradient_error([](Var a, Var) { return ad::transpose(a); }, x, o, 4, 3, rng) < tol);
  CHECK(op_gradient_error([](Var a, Var) { return ad::softmax_rows(a); }, x, o, 3, 4, rng) <
        tol);
  CHECK(op_gradient_error([](Var a, Var) { return ad::mean_rows(a); }, x, o, 1, 4, rng) < tol);
  CHECK(op_gradient_error([](Var a, Var) { return ad::slice_cols(a, 1, 2); }, x, o, 3, 2,
                          rng) < tol);

  const Matrix bias = random_matrix(1, 4, rng);
  CHECK(op_gradient_error([](Var a, Var b) { return ad::add_row_bias(b, a); }, bias, x, 3, 4,
                          rng) < tol);
  CHECK(op_gradient_error([](Var a, Var b) { return ad::add_row_bias(a, b); }, x, bias, 3, 4,
                          rng) < tol);
  CHECK(op_gradient_error([](Var a, Var b) { return ad::concat_rows(std::vector<Var>{b, a}); },
                          x, o, 6, 4, rng) < tol);

  CHECK(op_gradient_error([](Var a, Var) { return ad::row_sums(a); }, x, o, 3, 1, rng) < tol);
  const std::vector<std::size_t> pick{2, 0, 2, 1};
  CHECK(op_gradient_error([&](Var a, Var) { return ad::select_rows(a, pick); }, x, o, 4, 4,
                          rng) < tol);
  const Matrix weights = random_matrix(3, 1, rng);
  CHECK(op_gradient_error([](Var a, Var b) { return ad::scale_rows(a, b); }, x, weights, 3, 4,
                          rng) < tol);
  CHECK(op_gradient_error([](Var a, Var b) { return ad::scale_rows(b, a); }, weights, x, 3, 4,
                          rng) < tol);

  const std::vector<int> labels{1, 0, 3};
  const std::vector<bool> mask{true, false, true};
  CHECK(op_gradient_error([&](Var a, Var) { return ad::cross_entropy(a, labels, mask); }, x, o,
                          1, 1, rng) < tol);
  const Matrix col = random_matrix(3, 1, rng);
  const std::vector<double> target{0.5, -0.25, 2.0};
  CHECK(op_gradient_error([&](Var a, Var) { return ad::mean_squared_error(a, target, mask); },
                          col, o, 1, 1, rng) < tol);
}

TEST_CASE("concat_cols ordering and gradient routing") {
  Tape tape;
  const Matrix p1{{1}, {2}};
  const Matrix p2{{3, 4}, {5, 6}};
  Var a = tape.variable(p1);
  Var b = tape.variable(p2);
  CHECK(ad::concat_cols({a}).value() == p1);
  Var c = ad::concat_cols({a, b});
  CHECK(c.value() == Matrix{{1, 3, 4}, {2, 5, 6}});

  // Weighting only output column 2 must leave part 1's gradient at zero.
  Matrix w(2, 3);
  w(0, 2) = 1.0;
  w(1, 2) = -1.0;
  tape.backward(ad::sum(ad::hadamard(c, tape.constant(w))));
  CHECK(max_abs(a.grad()) == 0.0);
  CHECK(b.grad() == Matrix{{0, 1}, {0, -1}});

  Tape t2;
  CHECK_THROWS_AS(ad::concat_cols({t2.constant(Matrix(2, 1)), t2.constant(Matrix(3, 1))}),
                  DimensionError);
}

TEST_CASE("repeated subexpressions accumulate gradients") {
  Tape tape;
  Var x = tape.variable(Matrix{{1.5, -2.0}});
  Var y = ad::hadamard(x, x);  // x reused twice
  Var z = ad::add(y, x);
  tape.backward(ad::sum(z));
  CHECK(x.grad() == Matrix{{2 * 1.5 + 1, 2 * -2.0 + 1}});
}

TEST_CASE("sym_eig examples") {
  const SymEig eye = sym_eig(Matrix::identity(3));
  for (double v : eye.values) CHECK(v == doctest::Approx(1.0));

  const SymEig d = sym_eig(Matrix{{1, 0}, {0, 4}});
  CHECK(d.values[0] == doctest::Approx(4.0));
  CHECK(d.values[1] == doctest::Approx(1.0));
  CHECK(std::abs(d.vectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(d.vectors(0, 1)) == doctest::Approx(1.0));

  CHECK_THROWS_AS(sym_eig(Matrix(2, 3)), DimensionError);
}

TEST_CASE("sym_eig recovers a planted spectrum") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6;
    const Matrix q = testing::random_orthogonal(n, rng);
    std::vector<double> spectrum{5.0, 3.5, 2.0, 1.0, -0.5, -4.0};
    const Matrix s = matmul(matmul(q, Matrix::diagonal(spectrum)), q.transpose());
    const SymEig eig = sym_eig(s);
    for (std::size_t k = 0; k < n; ++k) CHECK(eig.values[k] == doctest::Approx(spectrum[k]));
    CHECK(max_abs_diff(matmul_tn(eig.vectors, eig.vectors), Matrix::identity(n)) < 1e-8);
    const Matrix rebuilt = spectral_apply(eig, [](double l) { return l; });
    CHECK(max_abs_diff(rebuilt, s) < 1e-8);
    double sum = 0.0;
    for (double v : eig.values) sum += v;
    CHECK(std::abs(sum - trace(s)) <= 1e-9 * std::max(1.0, std::abs(trace(s))));
  }
}

TEST_CASE("sym_eig is bitwise deterministic") {
  std::mt19937_64 rng(4);
  Matrix a = random_matrix(8, 8, rng);
  a = a + a.transpose();
  const SymEig e1 = sym_eig(a);
  const SymEig e2 = sym_eig(a);
  CHECK(e1.values == e2.values);
  CHECK(e1.vectors == e2.vectors);
}

TEST_CASE("inv_sqrt_psd") {
  const Matrix r = inv_sqrt_psd(Matrix{{4, 0}, {0, 9}}, 0.0);
  CHECK(r(0, 0) == doctest::Approx(0.5));
  CHECK(r(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(r(0, 1)) < 1e-15);
  CHECK(max_abs_diff(inv_sqrt_psd(Matrix::identity(3), 0.0), Matrix::identity(3)) < 1e-15);
  CHECK_THROWS_AS(inv_sqrt_psd(Matrix{{1, 0}, {0, 0}}, 0.0), NumericalError);
  CHECK_NOTHROW(inv_sqrt_psd(Matrix{{1, 0}, {0, 0}}, 1e-3));

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_matrix(10, 5, rng);
    const Matrix s = matmul_tn(x, x);
    const double ridge = trial % 2 == 0 ? 0.0 : 1e-3;
    const Matrix m = inv_sqrt_psd(s, ridge);
    const Matrix reg = s + Matrix::identity(5) * ridge;
    CHECK(max_abs_diff(matmul(matmul(m, reg), m), Matrix::identity(5)) < 1e-7);
    CHECK(max_abs_diff(matmul(m, s), matmul(s, m)) < 1e-8);
    CHECK(max_abs_diff(m, m.transpose()) < 1e-12);
  }
}

TEST_CASE("grad_check on a quadratic is exact") {
  std::mt19937_64 rng(6);
  ParameterStore params;
  params.add("w", random_matrix(3, 4, rng));
  const auto loss = [](Tape&, const BoundParameters& p) {
    return ad::sum(ad::hadamard(p["w"], p["w"]));
  };
  const GradCheckResult r = grad_check(loss, params);
  CHECK(r.max_rel_error < 1e-8);
  CHECK(r.checked_entries == 12);

  CHECK_THROWS_AS(grad_check(loss, params, {.epsilon = 1e-2}), ConfigError);
}

TEST_CASE("grad_check subsamples large stores deterministically") {
  std::mt19937_64 rng(7);
  ParameterStore params;
  params.add("big", random_matrix(120, 100, rng));
  const auto loss = [](Tape&, const BoundParameters& p) { return ad::sum(ad::tanh(p["big"])); };
  const GradCheckResult r = grad_check(loss, params, {.max_entries = 500});
  CHECK(r.checked_entries == 500);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("grad_check names the parameter behind a wrong backward rule") {
  std::mt19937_64 rng(8);
  ParameterStore params;
  params.add("good", random_matrix(2, 2, rng));
  params.add("bad", random_matrix(2, 2, rng));
  const auto loss = [](Tape& tape, const BoundParameters& p) {
    Var bad = p["bad"];
    const std::size_t id = bad.id();
    // Square with a backward rule that forgets the factor 2.
    Matrix sq = hadamard(bad.value(), bad.value());
    Var broken = tape.record(std::move(sq), {bad}, [id](Tape& tp, const Matrix& g) {
      tp.accumulate(id, hadamard(g, tp.value(id)));
    });
    return ad::add(ad::sum(broken), ad::sum(ad::tanh(p["good"])));
  };
  const GradCheckResult r = grad_check(loss, params);
  CHECK(r.max_rel_error > 0.1);
  CHECK(r.worst_param == "bad");
}

TEST_CASE("grad_check rejects non-finite losses") {
  ParameterStore params;
  params.add("w", Matrix(1, 1, 1.0));
  const auto loss = [](Tape&, const BoundParameters& p) {
    return ad::scale(p["w"], std::numeric_limits<double>::infinity());
  };
  CHECK_THROWS_AS(grad_check(loss, params), NumericalError);
}

}  // namespace
}  // namespace cgm
