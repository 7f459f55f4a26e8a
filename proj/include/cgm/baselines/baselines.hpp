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
#ifndef CGM_BASELINES_BASELINES_HPP_
#define CGM_BASELINES_BASELINES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgm/model/cgm_model.hpp"
#include "cgm/model/inputs.hpp"
#include "cgm/numerics/matrix.hpp"
#include "cgm/numerics/parameters.hpp"

namespace cgm {

// Fair coin per example: 1 = positive, 0 = negative.
std::vector<int> random_predict(std::size_t count, std::uint64_t seed);

// Mean of the history.
double moving_average(std::span<const double> history);
// Forecast of the log first-hour volume from the window's first-hour volumes.
// Days with zero first-hour volume are left out; 0 if none remain.
double moving_average_predict(const MovementExample& example);

// Per example: the scaled price window then the scaled volume window,
// flattened row-major into n * 6H values.
Matrix flat_features(const ExampleSet& set, std::span<const std::size_t> examples,
                     const FeatureScaler& scaler);

// Column z-scoring fitted on one matrix and applied to others. Constant
// columns keep sd = 1.
struct ColumnScaler {
  std::vector<double> mean;
  std::vector<double> sd;

  static ColumnScaler fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

struct LogisticModel {
  Matrix w;  // d x 1
  double b = 0.0;
};

struct LogisticFit {
  LogisticModel model;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

struct LogisticOptions {
  double l2 = 1e-4;
  double tolerance = 1e-5;  // on the full gradient norm
  std::size_t max_iterations = 5000;
};

// Minimizes mean log loss + l2/2 |w|^2 (intercept unpenalized) with Nesterov
// accelerated gradient descent at step 1/L, L bounding the curvature. On
// hitting the cap the iterate with the smallest gradient norm is returned
// with converged = false. Throws ValidationError unless both classes appear.
LogisticFit logistic_fit(const Matrix& x, std::span<const int> labels,
                         const LogisticOptions& options = {});
// P(label = 1) per row.
std::vector<double> logistic_probabilities(const LogisticModel& model, const Matrix& x);
std::vector<int> logistic_predict(const LogisticModel& model, const Matrix& x);
// Mean log loss + l2/2 |w|^2, the objective logistic_fit minimizes.
double logistic_objective(const LogisticModel& model, const Matrix& x,
                          std::span<const int> labels, double l2);

struct LinearModel {
  Matrix w;  // d x 1
  double b = 0.0;
};

// Minimizes mean squared residual + ridge |w|^2 with an unpenalized
// intercept: centered normal equations solved through the eigendecomposition
// of X'X / N + ridge I. Throws NumericalError when that matrix is singular
// (ridge 0 with collinear or too few rows) and ValidationError for an empty
// fit.
LinearModel linear_fit(const Matrix& x, std::span<const double> targets, double ridge = 1e-4);
std::vector<double> linear_predict(const LinearModel& model, const Matrix& x);

// Plain stacked LSTM over per-day [price, volume] rows with a softmax or
// linear head. Uses config.hours, hidden, layers and task; everything else
// in ModelConfig is ignored.
ParameterStore init_lstm_parameters(const ModelConfig& config, std::uint64_t seed);
// Prediction only; the view states are left invalid.
ForwardOutput lstm_forward(ad::Tape& tape, const BoundParameters& params, const DayBatch& batch,
                           std::size_t layers);

}  // namespace cgm

#endif  // CGM_BASELINES_BASELINES_HPP_
