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
#ifndef CGM_MODEL_INPUTS_HPP_
#define CGM_MODEL_INPUTS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cgm/market_data/examples.hpp"
#include "cgm/numerics/matrix.hpp"

namespace cgm {

// Token ids with 0 reserved for unknown words.
class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();
  // tokens[0] must be kUnkToken; the rest must be unique.
  explicit Vocabulary(std::vector<std::string> tokens);

  int id(const std::string& token) const;
  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::string hash() const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Sorted unique tokens of the headlines attached to the selected examples.
Vocabulary build_vocabulary(const ExampleSet& set, std::span<const std::size_t> examples);

// Per-stock z-scoring: prices share one mean/sd per stock across the four
// price fields, volumes use log(1 + volume). Proportions pass through.
struct StockScale {
  double price_mean = 0.0;
  double price_sd = 1.0;
  double log_volume_mean = 0.0;
  double log_volume_sd = 1.0;

  bool operator==(const StockScale&) const = default;
};

struct FeatureScaler {
  std::vector<StockScale> stocks;

  // Statistics over the distinct (stock, day) cells covered by the selected
  // examples' windows. Stocks without data keep the identity scale.
  static FeatureScaler fit(const ExampleSet& set, std::span<const std::size_t> examples);
  Matrix scale_price(const MovementExample& ex) const;
  Matrix scale_volume(const MovementExample& ex) const;

  bool operator==(const FeatureScaler&) const = default;
};

// Regression targets are standardized for training; predictions are mapped
// back before metrics.
struct TargetScaling {
  double mean = 0.0;
  double sd = 1.0;

  static TargetScaling fit(const ExampleSet& set, std::span<const std::size_t> examples);
  double forward(double y) const { return (y - mean) / sd; }
  double inverse(double z) const { return z * sd + mean; }

  bool operator==(const TargetScaling&) const = default;
};

// Every stock of the universe for one target day. Stocks without an example
// that day have zero features and present = false.
struct DayBatch {
  std::size_t day_index = 0;
  Day day;
  std::vector<Matrix> price_steps;   // window_days matrices, stocks x 4H
  std::vector<Matrix> volume_steps;  // window_days matrices, stocks x 2H
  std::vector<std::vector<std::vector<int>>> news;  // [stock][headline] token ids
  std::vector<bool> present;
  std::vector<bool> labeled;  // classification subset
  std::vector<int> labels;    // 1 = positive, 0 = negative, -1 = none
  std::vector<double> target;      // standardized log first-hour volume
  std::vector<double> log_volume;  // raw log first-hour volume

  std::size_t stocks() const { return present.size(); }
  std::size_t labeled_count() const;
  std::size_t present_count() const;
};

// Groups the selected examples by target day, oldest day first.
std::vector<DayBatch> make_day_batches(const ExampleSet& set, std::span<const std::size_t> examples,
                                       const FeatureScaler& scaler, const Vocabulary& vocab,
                                       const TargetScaling& target);

}  // namespace cgm

#endif  // CGM_MODEL_INPUTS_HPP_
