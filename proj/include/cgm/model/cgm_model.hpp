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
#ifndef CGM_MODEL_CGM_MODEL_HPP_
#define CGM_MODEL_CGM_MODEL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cgm/dcca/dcca.hpp"
#include "cgm/graph/relation_graph.hpp"
#include "cgm/model/inputs.hpp"
#include "cgm/numerics/parameters.hpp"
#include "cgm/numerics/tape.hpp"

namespace cgm {

enum class Task { kClassification, kRegression };
std::string task_name(Task task);
Task parse_task(const std::string& name);

struct Ablation {
  bool no_news = false;
  bool no_dcca = false;
  bool no_integration_graph = false;
  bool no_price_graph = false;
  bool no_volume_graph = false;

  bool operator==(const Ablation&) const = default;
};

struct ModelConfig {
  std::size_t stocks = 0;
  std::size_t hours = 5;
  std::size_t hidden = 300;
  std::size_t embed = 50;       // stock embedding width
  std::size_t word_embed = 50;  // word embedding width
  std::size_t vocab = 1;
  std::size_t layers = 1;  // composite aggregate+update layers per view
  Task task = Task::kClassification;
  dcca::DccaConfig dcca;

  std::size_t price_dim() const { return 4 * hours; }
  std::size_t volume_dim() const { return 2 * hours; }
  bool operator==(const ModelConfig& o) const;
};

// Throws ConfigError for zero sizes or an invalid DCCA setup.
void validate(const ModelConfig& config);

// Glorot-uniform weights, zero biases, N(0, 0.1^2) stock and word
// embeddings. Includes the DCCA bodies.
ParameterStore init_parameters(const ModelConfig& config, std::uint64_t seed);

// Expected name -> (rows, cols) for every parameter of the configuration.
std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> parameter_shapes(
    const ModelConfig& config);
// Throws DimensionError naming the first missing, extra or misshapen tensor.
void validate_parameters(const ModelConfig& config, const ParameterStore& params);

struct RgcnWeights {
  std::array<ad::Var, kRelationCount> w_r;  // hidden x hidden each
  ad::Var w_h;
  ad::Var bias;  // 1 x hidden
};
RgcnWeights rgcn_weights(const BoundParameters& params, const std::string& prefix);

// xi = sigmoid(sum_r A_r H W_r + H W_h + b). Relations with an all-zero
// operator are skipped.
ad::Var rgcn_aggregate(ad::Var h, const NormalizedAdjacency& adj, const RgcnWeights& w);

// Five affine gate maps a, b, o, u, rho packed side by side.
struct GateWeights {
  ad::Var w;  // (3 * hidden + input) x (5 * hidden)
  ad::Var b;  // 1 x (5 * hidden)
};
GateWeights gate_weights(const BoundParameters& params, const std::string& prefix);

// z = [xi, h, x, h_last] W + b split into a, b, o, u, rho;
//   c' = s(b) * c + s(a) * tanh(u) + s(rho) * h_last
//   h' = s(o) * tanh(c')
std::pair<ad::Var, ad::Var> graph_lstm_step(ad::Var xi, ad::Var h, ad::Var x, ad::Var h_last,
                                            ad::Var c, const GateWeights& gates);

// Runs the per-day steps through `layers` aggregate+update layers under
// `prefix` ("price" or "volume") and returns the final-layer h of the last
// step. States start at zero.
ad::Var encode_view(ad::Tape& tape, const BoundParameters& params, const std::string& prefix,
                    const std::vector<Matrix>& steps, const NormalizedAdjacency& adj,
                    std::size_t layers);

// Per stock: an LSTM over each headline's word embeddings, bilinear
// attention e_s W_att h_t' with the stock embedding as query, headlines
// mean-pooled. Stocks without news get a zero row.
ad::Var encode_news(ad::Tape& tape, const BoundParameters& params,
                    const std::vector<std::vector<std::vector<int>>>& news, ad::Var embeddings);
// Attention weights of one headline for one stock (rows sum to one).
Matrix news_attention(const ParameterStore& params, const std::vector<int>& tokens,
                      std::size_t stock);

// g = ReLU([e, news, h_price, h_volume] W2 + b2) W1 + b1, followed by one
// aggregation over the integration graph.
ad::Var fuse_and_integrate(const BoundParameters& params, ad::Var embeddings, ad::Var news,
                           ad::Var h_price, ad::Var h_volume, const NormalizedAdjacency& adj);

ad::Var class_logits(const BoundParameters& params, ad::Var g);  // stocks x 2
ad::Var regression_output(const BoundParameters& params, ad::Var g);  // stocks x 1

struct ForwardOutput {
  ad::Var prediction;  // logits for classification, standardized volume for regression
  ad::Var h_price;
  ad::Var h_volume;
  ad::Var fused;
};

// The full network. Each view uses every relation of the graph; ablation
// flags swap in empty operators or a zero news vector.
class CgmModel {
 public:
  CgmModel(ModelConfig config, const RelationGraph& graph, Ablation ablation = {});

  ForwardOutput forward(ad::Tape& tape, const BoundParameters& params,
                        const DayBatch& batch) const;

  const ModelConfig& config() const { return config_; }
  const Ablation& ablation() const { return ablation_; }

 private:
  ModelConfig config_;
  Ablation ablation_;
  NormalizedAdjacency price_adj_;
  NormalizedAdjacency volume_adj_;
  NormalizedAdjacency integration_adj_;
};

}  // namespace cgm

#endif  // CGM_MODEL_CGM_MODEL_HPP_
