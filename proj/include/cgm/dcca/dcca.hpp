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
#ifndef CGM_DCCA_DCCA_HPP_
#define CGM_DCCA_DCCA_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "cgm/numerics/matrix.hpp"
#include "cgm/numerics/parameters.hpp"
#include "cgm/numerics/tape.hpp"

namespace cgm::dcca {

struct DccaConfig {
  std::size_t output_dim = 32;                  // k
  double ridge = 1e-3;                          // added to both auto-covariances
  std::array<std::size_t, 2> widths = {128, 64};  // hidden widths of each body
};

// Throws ConfigError when k exceeds the last hidden width or ridge < 0.
void validate(const DccaConfig& config);

// Two unshared bodies `dcca.phi.*` and `dcca.psi.*`, each
// affine+tanh, affine+tanh, affine, from input_dim to k.
void add_parameters(ParameterStore& store, std::size_t input_dim, const DccaConfig& config,
                    std::mt19937_64& rng);

struct SiameseOutput {
  ad::Var fx;
  ad::Var fy;
};
SiameseOutput siamese_forward(const BoundParameters& params, ad::Var price, ad::Var volume);
ad::Var body_forward(const BoundParameters& params, const std::string& body, ad::Var x);

struct CorrLoss {
  double loss = 0.0;  // minus the sum of canonical correlations
  Matrix d_fx;        // d loss / d F_X
  Matrix d_fy;
};

// Columns are centered; with S samples and m = S - 1
//   R11 = Xc'Xc/m + rI, R22 = Yc'Yc/m + rI, R12 = Xc'Yc/m
//   T = R11^-1/2 R12 R22^-1/2, loss = -sum of singular values of T.
// Singular values come from the eigenvalues of T'T clamped at 0. The
// gradient is the closed form of the polar factor of T, which stays defined
// for repeated singular values; directions with a zero singular value are
// dropped (a subgradient). Throws NumericalError for a singular covariance.
CorrLoss corr_loss_with_grad(const Matrix& fx, const Matrix& fy, double ridge);
double corr_loss_value(const Matrix& fx, const Matrix& fy, double ridge);

// Tape node wrapping corr_loss_with_grad.
ad::Var corr_loss(ad::Var fx, ad::Var fy, double ridge);
// Process-wide count of corr_loss tape nodes built so far.
std::uint64_t corr_loss_evaluations();

}  // namespace cgm::dcca

#endif  // CGM_DCCA_DCCA_HPP_
