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
#include "cgm/dcca/dcca.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "cgm/errors.hpp"
#include "cgm/numerics/linalg.hpp"

namespace cgm::dcca {

namespace {

Matrix center_columns(const Matrix& x) {
  Matrix out = x;
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) m += x(r, c);
    m /= n;
    for (std::size_t r = 0; r < x.rows(); ++r) out(r, c) -= m;
  }
  return out;
}

Matrix covariance(const Matrix& a, const Matrix& b, double denom, double ridge) {
  Matrix c = matmul_tn(a, b) * (1.0 / denom);
  for (std::size_t i = 0; i < std::min(c.rows(), c.cols()); ++i) c(i, i) += ridge;
  return c;
}

Matrix whitener(const Matrix& r, const char* which) {
  try {
    return inv_sqrt_psd(r, 0.0);
  } catch (const NumericalError&) {
    throw NumericalError(std::string("corr_loss: singular ") + which +
                         " covariance; use a ridge > 0");
  }
}

std::atomic<std::uint64_t> g_tape_evaluations{0};

}  // namespace

void validate(const DccaConfig& c) {
  if (c.output_dim == 0) throw ConfigError("dcca: output dim must be >= 1");
  if (c.widths[0] == 0 || c.widths[1] == 0) throw ConfigError("dcca: widths must be >= 1");
  if (c.output_dim > c.widths[1]) {
    throw ConfigError("dcca: output dim " + std::to_string(c.output_dim) +
                      " exceeds body width " + std::to_string(c.widths[1]));
  }
  if (!(c.ridge >= 0.0)) throw ConfigError("dcca: ridge must be >= 0");
}

void add_parameters(ParameterStore& store, std::size_t input_dim, const DccaConfig& c,
                    std::mt19937_64& rng) {
  validate(c);
  const std::array<std::size_t, 4> dims = {input_dim, c.widths[0], c.widths[1], c.output_dim};
  for (const char* body : {"phi", "psi"}) {
    for (std::size_t l = 0; l < 3; ++l) {
      const std::string p = std::string("dcca.") + body + ".l" + std::to_string(l + 1);
      store.add(p + ".w", glorot_uniform(dims[l], dims[l + 1], rng));
      store.add(p + ".b", Matrix(1, dims[l + 1]));
    }
  }
}

ad::Var body_forward(const BoundParameters& params, const std::string& body, ad::Var x) {
  const std::string p = "dcca." + body + ".l";
  ad::Var h = ad::tanh(ad::add_row_bias(ad::matmul(x, params[p + "1.w"]), params[p + "1.b"]));
  h = ad::tanh(ad::add_row_bias(ad::matmul(h, params[p + "2.w"]), params[p + "2.b"]));
  return ad::add_row_bias(ad::matmul(h, params[p + "3.w"]), params[p + "3.b"]);
}

SiameseOutput siamese_forward(const BoundParameters& params, ad::Var price, ad::Var volume) {
  if (price.rows() != volume.rows()) {
    throw DimensionError("siamese_forward: " + price.value().shape_string() + " vs " +
                         volume.value().shape_string());
  }
  return {body_forward(params, "phi", price), body_forward(params, "psi", volume)};
}

CorrLoss corr_loss_with_grad(const Matrix& fx, const Matrix& fy, double ridge) {
  // The loss is symmetric in the views; evaluating in a canonical argument
  // order makes that hold bit for bit.
  if (fx.same_shape(fy) && std::lexicographical_compare(fy.data().begin(), fy.data().end(),
                                                        fx.data().begin(), fx.data().end())) {
    CorrLoss swapped = corr_loss_with_grad(fy, fx, ridge);
    std::swap(swapped.d_fx, swapped.d_fy);
    return swapped;
  }
  if (fx.rows() != fy.rows()) {
    throw DimensionError("corr_loss: " + fx.shape_string() + " vs " + fy.shape_string());
  }
  if (fx.rows() < 2) throw ValidationError("corr_loss: need at least 2 samples");
  if (ridge < 0.0) throw ConfigError("corr_loss: ridge must be >= 0");

  const double m = static_cast<double>(fx.rows() - 1);
  const Matrix xc = center_columns(fx);
  const Matrix yc = center_columns(fy);
  const Matrix a = whitener(covariance(xc, xc, m, ridge), "first-view");
  const Matrix b = whitener(covariance(yc, yc, m, ridge), "second-view");
  const Matrix r12 = covariance(xc, yc, m, 0.0);
  const Matrix t = matmul(matmul(a, r12), b);

  const SymEig eig = sym_eig(matmul_tn(t, t));
  const std::size_t k = eig.values.size();
  std::vector<double> sigma(k);
  double top = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sigma[i] = std::sqrt(std::max(eig.values[i], 0.0));
    top = std::max(top, sigma[i]);
  }
  const double tol = 1e-12 * std::max(1.0, top);

  // Polar factor U V' and U diag(sigma) U' from right singular vectors.
  Matrix polar(t.rows(), t.cols());
  Matrix udu(t.rows(), t.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    total += sigma[i];
    if (sigma[i] <= tol) continue;
    std::vector<double> v(t.cols()), u(t.rows(), 0.0);
    for (std::size_t j = 0; j < t.cols(); ++j) v[j] = eig.vectors(j, i);
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (std::size_t j = 0; j < t.cols(); ++j) u[r] += t(r, j) * v[j];
      u[r] /= sigma[i];
    }
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (std::size_t j = 0; j < t.cols(); ++j) polar(r, j) += u[r] * v[j];
      for (std::size_t j = 0; j < t.rows(); ++j) udu(r, j) += sigma[i] * u[r] * u[j];
    }
  }
  // Same construction on T' gives V diag(sigma) V'.
  Matrix vdv(t.cols(), t.cols());
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t r = 0; r < t.cols(); ++r)
      for (std::size_t j = 0; j < t.cols(); ++j)
        vdv(r, j) += sigma[i] * eig.vectors(r, i) * eig.vectors(j, i);

  // d corr = tr(G12' dR12) + tr(G11 dR11) + tr(G22 dR22)
  const Matrix g12 = matmul(matmul(a, polar), b);
  const Matrix g11 = matmul(matmul(a, udu), a) * -0.5;
  const Matrix g22 = matmul(matmul(b, vdv), b) * -0.5;

  CorrLoss out;
  out.loss = -total;
  out.d_fx = (matmul(xc, g11) * 2.0 + matmul_nt(yc, g12)) * (-1.0 / m);
  out.d_fy = (matmul(yc, g22) * 2.0 + matmul(xc, g12)) * (-1.0 / m);
  out.d_fx = center_columns(out.d_fx);
  out.d_fy = center_columns(out.d_fy);
  return out;
}

double corr_loss_value(const Matrix& fx, const Matrix& fy, double ridge) {
  return corr_loss_with_grad(fx, fy, ridge).loss;
}

std::uint64_t corr_loss_evaluations() { return g_tape_evaluations.load(); }

ad::Var corr_loss(ad::Var fx, ad::Var fy, double ridge) {
  ++g_tape_evaluations;
  ad::Tape& t = fx.tape();
  CorrLoss c = corr_loss_with_grad(fx.value(), fy.value(), ridge);
  const std::size_t ix = fx.id(), iy = fy.id();
  Matrix dx = std::move(c.d_fx), dy = std::move(c.d_fy);
  return t.record(Matrix(1, 1, c.loss), {fx, fy},
                  [ix, iy, dx = std::move(dx), dy = std::move(dy)](ad::Tape& tp, const Matrix& g) {
                    tp.accumulate(ix, dx * g(0, 0));
                    tp.accumulate(iy, dy * g(0, 0));
                  });
}

}  // namespace cgm::dcca
