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
#include "cgm/baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cgm/errors.hpp"
#include "cgm/numerics/linalg.hpp"

namespace cgm {

namespace {

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Largest eigenvalue of [X 1]'[X 1] / N by power iteration.
double top_curvature(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> v(d + 1, 1.0 / std::sqrt(static_cast<double>(d + 1)));
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    std::vector<double> xv(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      double s = v[d];
      for (std::size_t c = 0; c < d; ++c) s += x(r, c) * v[c];
      xv[r] = s;
    }
    std::vector<double> next(d + 1, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) next[c] += x(r, c) * xv[r];
      next[d] += xv[r];
    }
    double norm = 0.0;
    for (double& e : next) {
      e /= static_cast<double>(n);
      norm += e * e;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    const double prev = lambda;
    lambda = norm;
    for (std::size_t i = 0; i <= d; ++i) v[i] = next[i] / norm;
    if (std::abs(lambda - prev) <= 1e-10 * lambda) break;
  }
  return lambda;
}

struct LogisticGrad {
  std::vector<double> gw;
  double gb = 0.0;
  double norm = 0.0;
};

LogisticGrad logistic_gradient(const Matrix& x, std::span<const int> y,
                               const std::vector<double>& w, double b, double l2) {
  const std::size_t n = x.rows(), d = x.cols();
  LogisticGrad g;
  g.gw.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double z = b;
    for (std::size_t c = 0; c < d; ++c) z += x(r, c) * w[c];
    const double e = (sigmoid(z) - y[r]) / static_cast<double>(n);
    for (std::size_t c = 0; c < d; ++c) g.gw[c] += e * x(r, c);
    g.gb += e;
  }
  double sq = g.gb * g.gb;
  for (std::size_t c = 0; c < d; ++c) {
    g.gw[c] += l2 * w[c];
    sq += g.gw[c] * g.gw[c];
  }
  g.norm = std::sqrt(sq);
  return g;
}

}  // namespace

std::vector<int> random_predict(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> out(count);
  for (int& v : out) v = static_cast<int>(rng() >> 63);
  return out;
}

double moving_average(std::span<const double> history) {
  if (history.empty()) throw ValidationError("moving average of an empty history");
  double s = 0.0;
  for (double v : history) s += v;
  return s / static_cast<double>(history.size());
}

double moving_average_predict(const MovementExample& ex) {
  std::vector<double> logs;
  for (std::size_t k = 0; k < ex.volume_window.rows(); ++k) {
    const double v = ex.volume_window(k, 0);
    if (v > 0.0) logs.push_back(std::log(v));
  }
  return logs.empty() ? 0.0 : moving_average(logs);
}

Matrix flat_features(const ExampleSet& set, std::span<const std::size_t> examples,
                     const FeatureScaler& scaler) {
  const std::size_t n = set.window_days, h = set.hours;
  Matrix out(examples.size(), n * 6 * h);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const MovementExample& ex = set.examples.at(examples[i]);
    const Matrix p = scaler.scale_price(ex);
    const Matrix v = scaler.scale_volume(ex);
    auto row = out.row(i);
    std::copy(p.data().begin(), p.data().end(), row.begin());
    std::copy(v.data().begin(), v.data().end(), row.begin() + static_cast<std::ptrdiff_t>(p.size()));
  }
  return out;
}

ColumnScaler ColumnScaler::fit(const Matrix& x) {
  ColumnScaler s;
  s.mean.assign(x.cols(), 0.0);
  s.sd.assign(x.cols(), 1.0);
  if (x.rows() == 0) return s;
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) m += x(r, c);
    m /= n;
    double var = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) var += (x(r, c) - m) * (x(r, c) - m);
    const double sd = x.rows() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    s.mean[c] = m;
    s.sd[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix ColumnScaler::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw DimensionError("column scaler width mismatch");
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean[c]) / sd[c];
  return out;
}

LogisticFit logistic_fit(const Matrix& x, std::span<const int> labels,
                         const LogisticOptions& o) {
  const std::size_t n = x.rows(), d = x.cols();
  if (labels.size() != n) throw DimensionError("logistic_fit: labels vs rows");
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  const auto neg = std::count(labels.begin(), labels.end(), 0);
  if (pos == 0 || neg == 0 || static_cast<std::size_t>(pos + neg) != n) {
    throw ValidationError("logistic_fit needs labels 0/1 with both classes present");
  }
  const double lipschitz = 1.05 * 0.25 * top_curvature(x) + o.l2;
  const double step = 1.0 / std::max(lipschitz, 1e-12);

  std::vector<double> w(d, 0.0), w_prev(d, 0.0), yw(d, 0.0);
  double b = 0.0, b_prev = 0.0, yb = 0.0;
  LogisticFit best;
  best.gradient_norm = INFINITY;
  double t = 1.0;
  for (std::size_t it = 1; it <= o.max_iterations; ++it) {
    const LogisticGrad g = logistic_gradient(x, labels, yw, yb, o.l2);
    if (g.norm < best.gradient_norm) {
      best.gradient_norm = g.norm;
      best.iterations = it;
      best.model.w = Matrix(d, 1, yw);
      best.model.b = yb;
    }
    if (g.norm < o.tolerance) {
      best.converged = true;
      return best;
    }
    w_prev = w;
    b_prev = b;
    for (std::size_t c = 0; c < d; ++c) w[c] = yw[c] - step * g.gw[c];
    b = yb - step * g.gb;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double mom = (t - 1.0) / t_next;
    for (std::size_t c = 0; c < d; ++c) yw[c] = w[c] + mom * (w[c] - w_prev[c]);
    yb = b + mom * (b - b_prev);
    t = t_next;
  }
  return best;
}

std::vector<double> logistic_probabilities(const LogisticModel& m, const Matrix& x) {
  if (m.w.rows() != x.cols()) throw DimensionError("logistic model width mismatch");
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double z = m.b;
    for (std::size_t c = 0; c < x.cols(); ++c) z += x(r, c) * m.w(c, 0);
    // saturated logits would round to exactly 0 or 1
    out[r] = std::clamp(sigmoid(z), std::numeric_limits<double>::min(),
                        std::nextafter(1.0, 0.0));
  }
  return out;
}

std::vector<int> logistic_predict(const LogisticModel& m, const Matrix& x) {
  std::vector<int> out;
  for (double p : logistic_probabilities(m, x)) out.push_back(p > 0.5 ? 1 : 0);
  return out;
}

double logistic_objective(const LogisticModel& m, const Matrix& x, std::span<const int> labels,
                          double l2) {
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double z = m.b;
    for (std::size_t c = 0; c < x.cols(); ++c) z += x(r, c) * m.w(c, 0);
    loss += labels[r] == 1 ? softplus(-z) : softplus(z);
  }
  loss /= static_cast<double>(x.rows());
  double sq = 0.0;
  for (double v : m.w.data()) sq += v * v;
  return loss + 0.5 * l2 * sq;
}

LinearModel linear_fit(const Matrix& x, std::span<const double> y, double ridge) {
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0) throw ValidationError("linear_fit on zero rows");
  if (y.size() != n) throw DimensionError("linear_fit: targets vs rows");
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be >= 0");
  const double nn = static_cast<double>(n);
  std::vector<double> xm(d, 0.0);
  double ym = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) xm[c] += x(r, c) / nn;
    ym += y[r] / nn;
  }
  Matrix xc(n, d);
  std::vector<double> yc(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) xc(r, c) = x(r, c) - xm[c];
    yc[r] = y[r] - ym;
  }
  Matrix a = matmul_tn(xc, xc) * (1.0 / nn);
  for (std::size_t c = 0; c < d; ++c) a(c, c) += ridge;
  std::vector<double> rhs(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) rhs[c] += xc(r, c) * yc[r] / nn;

  const SymEig eig = sym_eig(a);
  const double top = std::max(eig.values.empty() ? 0.0 : eig.values.front(), 1e-300);
  if (eig.values.empty() || eig.values.back() <= 1e-12 * std::max(1.0, top)) {
    throw NumericalError("linear_fit: normal equations are singular; use a ridge > 0");
  }
  LinearModel m;
  m.w = Matrix(d, 1);
  for (std::size_t k = 0; k < d; ++k) {
    double proj = 0.0;
    for (std::size_t i = 0; i < d; ++i) proj += eig.vectors(i, k) * rhs[i];
    proj /= eig.values[k];
    for (std::size_t i = 0; i < d; ++i) m.w(i, 0) += eig.vectors(i, k) * proj;
  }
  m.b = ym;
  for (std::size_t c = 0; c < d; ++c) m.b -= xm[c] * m.w(c, 0);
  return m;
}

std::vector<double> linear_predict(const LinearModel& m, const Matrix& x) {
  if (m.w.rows() != x.cols()) throw DimensionError("linear model width mismatch");
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double z = m.b;
    for (std::size_t c = 0; c < x.cols(); ++c) z += x(r, c) * m.w(c, 0);
    out[r] = z;
  }
  return out;
}

ParameterStore init_lstm_parameters(const ModelConfig& c, std::uint64_t seed) {
  if (c.hidden == 0 || c.hours == 0 || c.layers == 0) {
    throw ConfigError("lstm baseline: hidden, hours and layers must be >= 1");
  }
  std::mt19937_64 rng(seed);
  ParameterStore store;
  const std::size_t h = c.hidden;
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::size_t in = l == 0 ? c.price_dim() + c.volume_dim() : h;
    const std::string p = "lstm.l" + std::to_string(l + 1);
    store.add(p + ".w", glorot_uniform(in + h, 4 * h, rng));
    store.add(p + ".b", Matrix(1, 4 * h));
  }
  if (c.task == Task::kClassification) {
    store.add("head.cls.w", glorot_uniform(h, 2, rng));
    store.add("head.cls.b", Matrix(1, 2));
  } else {
    store.add("head.reg.w", glorot_uniform(h, 1, rng));
    store.add("head.reg.b", Matrix(1, 1));
  }
  return store;
}

ForwardOutput lstm_forward(ad::Tape& tape, const BoundParameters& params, const DayBatch& batch,
                           std::size_t layers) {
  if (batch.price_steps.empty()) throw DimensionError("lstm_forward: no timesteps");
  const std::size_t S = batch.stocks();
  const std::size_t h = params["lstm.l1.b"].cols() / 4;
  std::vector<ad::Var> hs(layers), cs(layers);
  for (std::size_t l = 0; l < layers; ++l) hs[l] = cs[l] = tape.constant(Matrix(S, h));
  for (std::size_t k = 0; k < batch.price_steps.size(); ++k) {
    ad::Var x = ad::concat_cols(
        {tape.constant(batch.price_steps[k]), tape.constant(batch.volume_steps[k])});
    for (std::size_t l = 0; l < layers; ++l) {
      const std::string p = "lstm.l" + std::to_string(l + 1);
      const ad::Var z =
          ad::add_row_bias(ad::matmul(ad::concat_cols({x, hs[l]}), params[p + ".w"]),
                           params[p + ".b"]);
      const ad::Var in = ad::sigmoid(ad::slice_cols(z, 0, h));
      const ad::Var forget = ad::sigmoid(ad::slice_cols(z, h, h));
      const ad::Var out = ad::sigmoid(ad::slice_cols(z, 2 * h, h));
      const ad::Var cand = ad::tanh(ad::slice_cols(z, 3 * h, h));
      cs[l] = ad::add(ad::hadamard(forget, cs[l]), ad::hadamard(in, cand));
      hs[l] = ad::hadamard(out, ad::tanh(cs[l]));
      x = hs[l];
    }
  }
  ForwardOutput o;
  o.fused = hs.back();
  o.prediction = params.contains("head.cls.w") ? class_logits(params, o.fused)
                                               : regression_output(params, o.fused);
  return o;
}

}  // namespace cgm
