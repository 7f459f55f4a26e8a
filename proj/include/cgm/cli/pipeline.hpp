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
#ifndef CGM_CLI_PIPELINE_HPP_
#define CGM_CLI_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cgm/graph/relation_graph.hpp"
#include "cgm/market_data/examples.hpp"
#include "cgm/model/checkpoint.hpp"
#include "cgm/numerics/grad_check.hpp"
#include "cgm/training/training.hpp"

namespace cgm {

struct DataOptions {
  std::size_t window_days = 20;
  double movement_threshold = 0.5;
  bool require_news = true;
  std::optional<Day> dev_start;  // both unset: chronological 70/15/15 by target day
  std::optional<Day> test_start;
};

struct Splits {
  std::vector<std::size_t> train, dev, test;  // example indices
  Day dev_start;
  Day test_start;
};

// Throws ConfigError when a split would be empty or the dates are out of
// order.
Splits split_by_date(const ExampleSet& set, std::optional<Day> dev_start,
                     std::optional<Day> test_start);

struct PreparedData {
  std::vector<HourlyBar> bars;
  ExampleSet set;
  DataOptions options;
  Splits splits;
  Vocabulary vocab;
  FeatureScaler scaler;
  TargetScaling target;
  TrainData batches;
};

// Examples, chronological splits, and vocabulary / scalers fitted on the
// training split only.
PreparedData prepare_data(std::vector<HourlyBar> bars, const std::vector<NewsRecord>& news,
                          const DataOptions& options);
// Same, reusing the splits, vocabulary and scalers stored in a checkpoint.
PreparedData prepare_from_checkpoint(std::vector<HourlyBar> bars,
                                     const std::vector<NewsRecord>& news, const Checkpoint& ck);

// Relation graph from the calendar days before the first dev target day.
RelationGraph training_graph(const PreparedData& data, double threshold,
                             CorrelationMethod method = CorrelationMethod::kPearson);

struct RunSpec {
  std::string model = "cgm";  // "cgm" or "lstm"
  ModelConfig model_config;   // stocks and vocab are filled in from the data
  TrainConfig train;
};

struct RunOutcome {
  TrainResult result;
  Checkpoint checkpoint;  // best epoch
};

RunOutcome run_training(const PreparedData& data, const RelationGraph& graph, const RunSpec& spec,
                        const EpochCallback& on_epoch = {});

ForwardFn make_forward(const Checkpoint& ck);

struct GradcheckSuiteOptions {
  double epsilon = 1e-5;
  double threshold = 1e-4;
  std::uint64_t seed = 7;
  // Adds a bogus backward contribution to this parameter (fault injection).
  std::string inject_fault;
};

struct GradcheckCase {
  std::string name;
  GradCheckResult result;
  bool pass = false;
  double seconds = 0.0;
};

// Full CGM forward + combined loss (S=4, hidden=6, 3 days x 2 hours,
// vocab 12), the correlation loss alone (S=10, k=3) and the 2-layer LSTM.
std::vector<GradcheckCase> run_gradcheck_suite(const GradcheckSuiteOptions& options);

}  // namespace cgm

#endif  // CGM_CLI_PIPELINE_HPP_
