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
#include "cgm/numerics/parameters.hpp"

#include <cmath>

#include "cgm/errors.hpp"

namespace cgm {

ad::Var BoundParameters::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

void ParameterStore::add(const std::string& name, Matrix value) {
  if (!params_.emplace(name, std::move(value)).second) {
    throw ConfigError("duplicate parameter '" + name + "'");
  }
}

const Matrix& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

Matrix& ParameterStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParameterStore::entry_count() const {
  std::size_t n = 0;
  for (const auto& [_, m] : params_) n += m.size();
  return n;
}

BoundParameters ParameterStore::bind(ad::Tape& tape) const {
  BoundParameters bound;
  for (const auto& [name, m] : params_) bound.vars_.emplace(name, tape.variable(m));
  return bound;
}

GradientMap ParameterStore::gradients(const BoundParameters& bound) {
  GradientMap out;
  for (const auto& [name, var] : bound.vars()) out.emplace(name, var.grad());
  return out;
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return Matrix::uniform(rows, cols, -a, a, rng);
}

}  // namespace cgm
