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
#ifndef CGM_NUMERICS_TAPE_HPP_
#define CGM_NUMERICS_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "cgm/numerics/matrix.hpp"

namespace cgm::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Matrix& value() const;
  // Gradient after Tape::backward; zeros when the node was never reached.
  Matrix grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Dynamic reverse-mode tape. Nodes are appended in evaluation order, so a
// reverse sweep visits every node after all of its consumers. One tape is
// built per training step and must stay on one thread.
class Tape {
 public:
  // Receives the node's accumulated output gradient and pushes contributions
  // to its parents through Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Matrix&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);

  // Appends an op node. The node requires a gradient iff any parent does; the
  // backward rule is dropped otherwise.
  Var record(Matrix value, std::span<const Var> parents, BackwardFn backward);
  Var record(Matrix value, std::initializer_list<Var> parents, BackwardFn backward) {
    return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                  std::move(backward));
  }

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  Matrix grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  void accumulate(std::size_t id, const Matrix& g);

  // Seeds d(root)/d(root) = 1 and sweeps the tape once. root must be 1x1.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // empty until first accumulation
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

enum class ElementwiseOp { kAdd, kSub, kHadamard, kSigmoid, kTanh, kRelu, kScale };

Var matmul(Var a, Var b);
Var elementwise(ElementwiseOp op, Var a, Var b);
Var elementwise(ElementwiseOp op, Var a, double scalar = 1.0);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var scale(Var a, double s);

// a + 1 * bias for a 1 x cols bias row.
Var add_row_bias(Var a, Var bias);
Var transpose(Var a);
Var concat_cols(std::span<const Var> parts);
Var concat_cols(std::initializer_list<Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t start, std::size_t count);
Var sum(Var a);
// rows x 1 sums across each row.
Var row_sums(Var a);
// Gathers rows by index; repeated indices accumulate on the way back.
Var select_rows(Var a, std::span<const std::size_t> rows);
// Multiplies row i of a by w(i, 0) for an N x 1 column w.
Var scale_rows(Var a, Var w);
Var mean_rows(Var a);  // 1 x cols column means
Var softmax_rows(Var a);

// Mean over selected rows of -log softmax(logits)[row, label]. mask picks
// the rows that count; throws if none do.
Var cross_entropy(Var logits, std::span<const int> labels, const std::vector<bool>& mask);
// Mean over selected rows of (pred - target)^2 for an N x 1 prediction.
Var mean_squared_error(Var pred, std::span<const double> target,
                       const std::vector<bool>& mask);

}  // namespace cgm::ad

#endif  // CGM_NUMERICS_TAPE_HPP_
