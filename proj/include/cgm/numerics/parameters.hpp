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
#ifndef CGM_NUMERICS_PARAMETERS_HPP_
#define CGM_NUMERICS_PARAMETERS_HPP_

#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cgm/numerics/matrix.hpp"
#include "cgm/numerics/tape.hpp"

namespace cgm {

// Parameters bound onto one tape, looked up by name.
class BoundParameters {
 public:
  ad::Var operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return vars_.count(name) != 0; }
  const std::map<std::string, ad::Var>& vars() const { return vars_; }

 private:
  friend class ParameterStore;
  std::map<std::string, ad::Var> vars_;
};

// U(-a, a) with a = sqrt(6 / (rows + cols)).
Matrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

using GradientMap = std::map<std::string, Matrix>;

// Named trainable tensors. Iteration order is the lexicographic name order,
// which keeps serialization and optimizer updates deterministic.
class ParameterStore {
 public:
  void add(const std::string& name, Matrix value);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  const Matrix& at(const std::string& name) const;
  Matrix& at(const std::string& name);
  std::vector<std::string> names() const;
  std::size_t entry_count() const;
  const std::map<std::string, Matrix>& items() const { return params_; }
  std::map<std::string, Matrix>& items() { return params_; }

  // Places every parameter on the tape as a gradient-carrying leaf.
  BoundParameters bind(ad::Tape& tape) const;
  // Gradients of all bound parameters after tape.backward().
  static GradientMap gradients(const BoundParameters& bound);

  bool operator==(const ParameterStore& other) const = default;

 private:
  std::map<std::string, Matrix> params_;
};

}  // namespace cgm

#endif  // CGM_NUMERICS_PARAMETERS_HPP_
