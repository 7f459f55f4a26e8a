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
#include "cgm/numerics/tape.hpp"

#include <algorithm>
#include <cmath>

#include "cgm/errors.hpp"

namespace cgm::ad {

const Matrix& Var::value() const { return tape_->value(id_); }
Matrix Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, true, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::span<const Var> parents, BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) needs = needs || nodes_[p.id()].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

Matrix Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    require_same_shape(n.value, g, "accumulate");
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var root) {
  if (root.rows() != 1 || root.cols() != 1) {
    throw DimensionError("backward: root must be 1x1, got " + root.value().shape_string());
  }
  for (auto& n : nodes_) n.grad = Matrix();
  if (!nodes_[root.id()].requires_grad) return;
  nodes_[root.id()].grad = Matrix(1, 1, 1.0);
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && !n.grad.empty()) n.backward(*this, n.grad);
  }
}

namespace {

Tape& tape_of(Var a) { return a.tape(); }

Matrix map(const Matrix& a, double (*f)(double)) {
  Matrix out = a;
  for (auto& v : out.data()) v = f(v);
  return out;
}

double sigmoid_scalar(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double tanh_scalar(double x) { return std::tanh(x); }
double relu_scalar(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(cgm::matmul(a.value(), b.value()), {a, b},
                  [ia, ib](Tape& tp, const Matrix& g) {
                    if (tp.requires_grad(ia)) tp.accumulate(ia, matmul_nt(g, tp.value(ib)));
                    if (tp.requires_grad(ib)) tp.accumulate(ib, matmul_tn(tp.value(ia), g));
                  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id(), ib = b.id();
  require_same_shape(a.value(), b.value(), "add");
  return t.record(a.value() + b.value(), {a, b}, [ia, ib](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, g);
    tp.accumulate(ib, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id(), ib = b.id();
  require_same_shape(a.value(), b.value(), "sub");
  return t.record(a.value() - b.value(), {a, b}, [ia, ib](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, g);
    if (tp.requires_grad(ib)) tp.accumulate(ib, g * -1.0);
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(cgm::hadamard(a.value(), b.value()), {a, b},
                  [ia, ib](Tape& tp, const Matrix& g) {
                    if (tp.requires_grad(ia)) tp.accumulate(ia, cgm::hadamard(g, tp.value(ib)));
                    if (tp.requires_grad(ib)) tp.accumulate(ib, cgm::hadamard(g, tp.value(ia)));
                  });
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id(), io = t.size();
  return t.record(map(a.value(), sigmoid_scalar), {a}, [ia, io](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(io);
    Matrix d = g;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= y[i] * (1.0 - y[i]);
    tp.accumulate(ia, d);
  });
}

Var tanh(Var a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id(), io = t.size();
  return t.record(map(a.value(), tanh_scalar), {a}, [ia, io](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(io);
    Matrix d = g;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - y[i] * y[i];
    tp.accumulate(ia, d);
  });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  return t.record(map(a.value(), relu_scalar), {a}, [ia](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(ia);
    Matrix d = g;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (!(x[i] > 0.0)) d[i] = 0.0;
    tp.accumulate(ia, d);
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  return t.record(a.value() * s, {a},
                  [ia, s](Tape& tp, const Matrix& g) { tp.accumulate(ia, g * s); });
}

Var elementwise(ElementwiseOp op, Var a, Var b) {
  switch (op) {
    case ElementwiseOp::kAdd: return add(a, b);
    case ElementwiseOp::kSub: return sub(a, b);
    case ElementwiseOp::kHadamard: return hadamard(a, b);
    default: throw ConfigError("elementwise: op is unary");
  }
}

Var elementwise(ElementwiseOp op, Var a, double scalar) {
  switch (op) {
    case ElementwiseOp::kSigmoid: return sigmoid(a);
    case ElementwiseOp::kTanh: return tanh(a);
    case ElementwiseOp::kRelu: return relu(a);
    case ElementwiseOp::kScale: return scale(a, scalar);
    default: throw ConfigError("elementwise: op is binary");
  }
}

Var add_row_bias(Var a, Var bias) {
  const Matrix& av = a.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw DimensionError("add_row_bias: " + av.shape_string() + " + " + bv.shape_string());
  }
  Matrix out = av;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
  const std::size_t ia = a.id(), ib = bias.id();
  return a.tape().record(std::move(out), {a, bias}, [ia, ib](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, g);
    if (tp.requires_grad(ib)) {
      Matrix gb(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
      tp.accumulate(ib, gb);
    }
  });
}

Var transpose(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record(a.value().transpose(), {a}, [ia](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, g.transpose());
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + parts[0].value().shape_string() +
                           " vs " + p.value().shape_string());
    }
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::size_t> ids, offsets, widths;
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Matrix& v = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + off);
    ids.push_back(p.id());
    offsets.push_back(off);
    widths.push_back(v.cols());
    off += v.cols();
  }
  return parts[0].tape().record(
      std::move(out), parts, [ids, offsets, widths](Tape& tp, const Matrix& g) {
        for (std::size_t k = 0; k < ids.size(); ++k)
          if (tp.requires_grad(ids[k])) tp.accumulate(ids[k], g.col_block(offsets[k], widths[k]));
      });
}

Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no parts");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column mismatch " + parts[0].value().shape_string() +
                           " vs " + p.value().shape_string());
    }
    rows += p.rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  std::vector<std::size_t> ids, offsets, heights;
  std::size_t off = 0;
  for (const Var& p : parts) {
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
    ids.push_back(p.id());
    offsets.push_back(off);
    heights.push_back(p.rows());
    off += p.rows();
  }
  return parts[0].tape().record(
      Matrix(rows, cols, std::move(data)), parts,
      [ids, offsets, heights, cols](Tape& tp, const Matrix& g) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!tp.requires_grad(ids[k])) continue;
          Matrix part(heights[k], cols);
          std::copy_n(g.data().begin() + offsets[k] * cols, heights[k] * cols,
                      part.data().begin());
          tp.accumulate(ids[k], part);
        }
      });
}

Var slice_cols(Var a, std::size_t start, std::size_t count) {
  const std::size_t ia = a.id();
  const std::size_t rows = a.rows(), cols = a.cols();
  return a.tape().record(a.value().col_block(start, count), {a},
                         [ia, start, count, rows, cols](Tape& tp, const Matrix& g) {
                           Matrix d(rows, cols);
                           for (std::size_t r = 0; r < rows; ++r)
                             for (std::size_t c = 0; c < count; ++c) d(r, start + c) = g(r, c);
                           tp.accumulate(ia, d);
                         });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  const std::size_t rows = a.rows(), cols = a.cols();
  return a.tape().record(Matrix(1, 1, s), {a}, [ia, rows, cols](Tape& tp, const Matrix& g) {
    tp.accumulate(ia, Matrix(rows, cols, g[0]));
  });
}

Var row_sums(Var a) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  Matrix out(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (double v : x.row(r)) out(r, 0) += v;
  return t.record(std::move(out), {a}, [ia](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(ia);
    Matrix d(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) d(r, c) = g(r, 0);
    tp.accumulate(ia, d);
  });
}

Var select_rows(Var a, std::span<const std::size_t> rows) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  Matrix out(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= x.rows()) {
      throw DimensionError("select_rows: row " + std::to_string(rows[i]) + " of " +
                           x.shape_string());
    }
    std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), out.row(i).begin());
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return t.record(std::move(out), {a}, [ia, idx](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(ia);
    Matrix d(x.rows(), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < x.cols(); ++c) d(idx[i], c) += g(i, c);
    tp.accumulate(ia, d);
  });
}

Var scale_rows(Var a, Var w) {
  Tape& t = tape_of(a);
  const std::size_t ia = a.id(), iw = w.id();
  const Matrix& x = a.value();
  const Matrix& wv = w.value();
  if (wv.cols() != 1 || wv.rows() != x.rows()) {
    throw DimensionError("scale_rows: " + x.shape_string() + " by " + wv.shape_string());
  }
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (double& v : out.row(r)) v *= wv(r, 0);
  return t.record(std::move(out), {a, w}, [ia, iw](Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(ia);
    const Matrix& wv = tp.value(iw);
    if (tp.requires_grad(ia)) {
      Matrix d = g;
      for (std::size_t r = 0; r < d.rows(); ++r)
        for (double& v : d.row(r)) v *= wv(r, 0);
      tp.accumulate(ia, d);
    }
    if (tp.requires_grad(iw)) {
      Matrix d(wv.rows(), 1);
      for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) d(r, 0) += g(r, c) * x(r, c);
      tp.accumulate(iw, d);
    }
  });
}

Var mean_rows(Var a) {
  const Matrix& v = a.value();
  const std::size_t rows = v.rows(), cols = v.cols();
  if (rows == 0) throw DimensionError("mean_rows: empty input");
  Matrix out(1, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(0, c) += v(r, c);
  out *= 1.0 / static_cast<double>(rows);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, rows, cols](Tape& tp, const Matrix& g) {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) d(r, c) = g(0, c) / static_cast<double>(rows);
    tp.accumulate(ia, d);
  });
}

namespace {

Matrix softmax_rows_value(const Matrix& x) {
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (auto& v : row) {
      v = std::exp(v - m);
      z += v;
    }
    for (auto& v : row) v /= z;
  }
  return out;
}

}  // namespace

Var softmax_rows(Var a) {
  Tape& t = a.tape();
  const std::size_t ia = a.id(), io = t.size();
  return t.record(softmax_rows_value(a.value()), {a}, [ia, io](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(io);
    Matrix d(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) d(r, c) = y(r, c) * (g(r, c) - dot);
    }
    tp.accumulate(ia, d);
  });
}

Var cross_entropy(Var logits, std::span<const int> labels, const std::vector<bool>& mask) {
  const Matrix& x = logits.value();
  if (labels.size() != x.rows() || mask.size() != x.rows()) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                         x.shape_string() + " logits");
  }
  std::size_t count = 0;
  for (bool m : mask) count += m ? 1 : 0;
  if (count == 0) throw ValidationError("cross_entropy: no labeled rows");
  const Matrix p = softmax_rows_value(x);
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (!mask[r]) continue;
    const auto row = x.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    loss -= (x(r, static_cast<std::size_t>(labels[r])) - m) - std::log(z);
  }
  loss /= static_cast<double>(count);
  std::vector<int> lab(labels.begin(), labels.end());
  std::vector<bool> msk = mask;
  const std::size_t ia = logits.id();
  return logits.tape().record(
      Matrix(1, 1, loss), {logits}, [ia, p, lab, msk, count](Tape& tp, const Matrix& g) {
        Matrix d(p.rows(), p.cols());
        const double w = g[0] / static_cast<double>(count);
        for (std::size_t r = 0; r < p.rows(); ++r) {
          if (!msk[r]) continue;
          for (std::size_t c = 0; c < p.cols(); ++c) d(r, c) = w * p(r, c);
          d(r, static_cast<std::size_t>(lab[r])) -= w;
        }
        tp.accumulate(ia, d);
      });
}

Var mean_squared_error(Var pred, std::span<const double> target,
                       const std::vector<bool>& mask) {
  const Matrix& y = pred.value();
  if (y.cols() != 1 || target.size() != y.rows() || mask.size() != y.rows()) {
    throw DimensionError("mean_squared_error: prediction " + y.shape_string() + " vs " +
                         std::to_string(target.size()) + " targets");
  }
  std::size_t count = 0;
  double loss = 0.0;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    if (!mask[r]) continue;
    ++count;
    loss += (y[r] - target[r]) * (y[r] - target[r]);
  }
  if (count == 0) throw ValidationError("mean_squared_error: no selected rows");
  loss /= static_cast<double>(count);
  std::vector<double> tgt(target.begin(), target.end());
  std::vector<bool> msk = mask;
  const std::size_t ia = pred.id();
  return pred.tape().record(Matrix(1, 1, loss), {pred},
                            [ia, tgt, msk, count](Tape& tp, const Matrix& g) {
                              const Matrix& yv = tp.value(ia);
                              Matrix d(yv.rows(), 1);
                              for (std::size_t r = 0; r < yv.rows(); ++r)
                                if (msk[r])
                                  d[r] = g[0] * 2.0 * (yv[r] - tgt[r]) /
                                         static_cast<double>(count);
                              tp.accumulate(ia, d);
                            });
}

}  // namespace cgm::ad
