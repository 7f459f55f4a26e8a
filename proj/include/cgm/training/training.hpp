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
#ifndef CGM_TRAINING_TRAINING_HPP_
#define CGM_TRAINING_TRAINING_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgm/model/cgm_model.hpp"
#include "cgm/model/inputs.hpp"
#include "cgm/numerics/parameters.hpp"
#include "json.hpp"

namespace cgm {

struct TrainConfig {
  double learning_rate = 1e-3;
  double lambda = 1.0;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  double dcca_ridge = 1e-3;  // must match the model's DCCA ridge
  Task task = Task::kClassification;
  Ablation ablation;
  // Data preparation echoed into hashes and manifests.
  std::size_t window_days = 20;
  double movement_threshold = 0.5;
  double graph_threshold = 0.6;
};

// Throws ConfigError for a non-positive rate, negative lambda, zero epochs or
// a non-positive clip norm. Rates off the usual grid are allowed.
void validate(const TrainConfig& config);
inline constexpr std::array<double, 5> kLearningRateGrid = {1e-6, 1e-5, 1e-4, 1e-3, 3e-3};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::size_t step = 0;
  std::map<std::string, Matrix> m;
  std::map<std::string, Matrix> v;
};

// sqrt of the sum of squares over every gradient entry.
double global_norm(const GradientMap& grads);
// Rescales so the global norm is at most max_norm; returns the norm before.
double clip_gradients(GradientMap& grads, double max_norm);
bool all_finite(const GradientMap& grads);

// Bias-corrected Adam. Returns false, leaving params and state untouched,
// when any gradient entry is non-finite.
bool adam_step(ParameterStore& params, const GradientMap& grads, AdamState& state,
               const AdamOptions& options);

// Mean -log p[label] over masked rows of a probability matrix.
double cross_entropy_from_probabilities(const Matrix& probs, std::span<const int> labels,
                                        const std::vector<bool>& mask);
// Task loss plus lambda times the correlation loss.
double combined_loss(const Matrix& probs, std::span<const int> labels,
                     const std::vector<bool>& mask, double corr_loss_value, double lambda);
ad::Var combined_loss(ad::Var task_loss, std::optional<ad::Var> corr_loss, double lambda);

struct MetricsReport {
  std::optional<double> accuracy;           // classification
  std::optional<double> mse_standard;       // regression, raw log volume
  std::optional<double> rmse;
  std::optional<double> mae;  // mean |y - yhat|
  std::size_t examples = 0;                 // rows scored
  std::size_t positives = 0;                // true labels, classification
  std::size_t negatives = 0;
  std::size_t correct = 0;
};

nlohmann::json to_json(const MetricsReport& report);

// Accuracy and class counts for 0/1 labels.
MetricsReport classification_report(std::span<const int> predicted, std::span<const int> truth);
// mse_standard, rmse and mae.
MetricsReport regression_report(std::span<const double> predicted, std::span<const double> truth);

struct Prediction {
  std::size_t stock = 0;
  std::size_t day_index = 0;
  Day day;
  std::optional<double> prob_up;
  std::optional<int> label;
  std::optional<double> log_volume;
};

// Forward pass shared by CGM and the baselines: prediction plus the two view
// states for the correlation loss (left invalid when the model has none).
using ForwardFn =
    std::function<ForwardOutput(ad::Tape&, const BoundParameters&, const DayBatch&)>;

// Predictions for every present stock of every batch.
std::vector<Prediction> predict(const ForwardFn& forward, const ParameterStore& params,
                                std::span<const DayBatch> batches, Task task,
                                const TargetScaling& target);

// Accuracy over labeled rows (classification) or mse / rmse / mae over present
// rows on the raw log-volume scale (regression).
MetricsReport evaluate(const ForwardFn& forward, const ParameterStore& params,
                       std::span<const DayBatch> batches, Task task, const TargetScaling& target);
MetricsReport score(const std::vector<Prediction>& predictions,
                    std::span<const DayBatch> batches, Task task);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean over optimization steps
  MetricsReport train;      // from the pre-update forward of each step
  MetricsReport dev;
  MetricsReport test;
};

struct TrainResult {
  ParameterStore best;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
  std::size_t steps = 0;
  std::size_t skipped_batches = 0;  // nothing to learn from
  std::size_t rejected_steps = 0;   // non-finite gradients
  std::size_t corr_loss_calls = 0;
};

struct TrainData {
  std::vector<DayBatch> train;
  std::vector<DayBatch> dev;
  std::vector<DayBatch> test;
};

// Called after every epoch; used by the CLI for JSONL output and logging.
using EpochCallback = std::function<void(const EpochRecord&)>;

// One Adam step per training day in chronological order. The correlation
// loss joins when lambda > 0, the model returns view states, DCCA is not
// ablated and at least two stocks are present. The parameters with the best
// dev accuracy (dev mse for regression) are kept; ties keep the earlier
// epoch. Throws ConfigError for an empty train or dev split.
TrainResult train(const ForwardFn& forward, ParameterStore params, const TrainData& data,
                  const TrainConfig& config, const TargetScaling& target,
                  const EpochCallback& on_epoch = {});

// Loss of one batch, or nullopt when nothing in it is trainable.
std::optional<ad::Var> batch_loss(const BoundParameters& params,
                                  const ForwardOutput& out, const DayBatch& batch,
                                  const TrainConfig& config, std::size_t* corr_calls = nullptr);

}  // namespace cgm

#endif  // CGM_TRAINING_TRAINING_HPP_
