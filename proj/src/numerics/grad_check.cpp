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
#include "cgm/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "cgm/errors.hpp"

namespace cgm {

namespace {

double evaluate(const LossBuilder& loss, const ParameterStore& params) {
  ad::Tape tape;
  const BoundParameters bound = params.bind(tape);
  const double v = loss(tape, bound).value()[0];
  if (!std::isfinite(v)) throw NumericalError("grad_check: non-finite loss");
  return v;
}

// Flat (parameter, entry) positions to check. Selection sampling keeps the
// chosen positions in storage order.
std::vector<std::pair<std::string, std::size_t>> pick_entries(const ParameterStore& params,
                                                              const GradCheckOptions& opt) {
  const std::size_t total = params.entry_count();
  std::vector<std::pair<std::string, std::size_t>> out;
  std::mt19937_64 rng(opt.seed);
  std::size_t needed = std::min(total, opt.max_entries);
  std::size_t remaining = total;
  for (const auto& [name, m] : params.items()) {
    for (std::size_t i = 0; i < m.size(); ++i, --remaining) {
      if (needed == 0) return out;
      const bool take = total <= opt.max_entries ||
                        std::uniform_int_distribution<std::size_t>(0, remaining - 1)(rng) < needed;
      if (take) {
        out.emplace_back(name, i);
        --needed;
      }
    }
  }
  return out;
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, const ParameterStore& params,
                           const GradCheckOptions& options) {
  if (!(options.epsilon >= 1e-6 && options.epsilon <= 1e-4)) {
    throw ConfigError("grad_check: epsilon must lie in [1e-6, 1e-4]");
  }
  GradientMap analytic;
  {
    ad::Tape tape;
    const BoundParameters bound = params.bind(tape);
    ad::Var root = loss(tape, bound);
    if (!std::isfinite(root.value()[0])) throw NumericalError("grad_check: non-finite loss");
    tape.backward(root);
    analytic = ParameterStore::gradients(bound);
  }

  GradCheckResult result;
  ParameterStore probe = params;
  for (const auto& [name, index] : pick_entries(params, options)) {
    double& entry = probe.at(name)[index];
    const double original = entry;
    entry = original + options.epsilon;
    const double up = evaluate(loss, probe);
    entry = original - options.epsilon;
    const double down = evaluate(loss, probe);
    entry = original;

    const double numeric = (up - down) / (2.0 * options.epsilon);
    const double a = analytic.at(name)[index];
    const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
    const double rel = std::abs(a - numeric) / denom;
    ++result.checked_entries;
    if (rel > result.max_rel_error || result.worst_param.empty()) {
      result.max_rel_error = rel;
      result.worst_param = name;
      result.worst_index = index;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace cgm
