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
#ifndef CGM_NUMERICS_GRAD_CHECK_HPP_
#define CGM_NUMERICS_GRAD_CHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "cgm/numerics/parameters.hpp"

namespace cgm {

// Builds a scalar loss on a fresh tape from bound parameters. Must be
// deterministic: it is re-evaluated twice per checked entry.
using LossBuilder = std::function<ad::Var(ad::Tape&, const BoundParameters&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked_entries = 0;
};

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::size_t max_entries = 10000;  // above this, a seeded random subsample
  std::uint64_t seed = 17;
  // Denominator floor: rel = |a - n| / max(|a|, |n|, abs_floor).
  double abs_floor = 1e-6;
};

// Compares reverse-mode gradients against central differences for every
// parameter entry (or a subsample). Throws NumericalError on a non-finite
// loss and ConfigError when epsilon is outside [1e-6, 1e-4].
GradCheckResult grad_check(const LossBuilder& loss, const ParameterStore& params,
                           const GradCheckOptions& options = {});

}  // namespace cgm

#endif  // CGM_NUMERICS_GRAD_CHECK_HPP_
