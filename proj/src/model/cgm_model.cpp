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
#include "cgm/model/cgm_model.hpp"

#include <map>
#include <random>

#include "cgm/errors.hpp"

namespace cgm {

namespace {

constexpr std::array<const char*, 5> kGates = {"a", "b", "o", "u", "rho"};

std::string layer_prefix(const std::string& view, std::size_t l) {
  return view + ".l" + std::to_string(l + 1) + ".";
}

bool all_zero(const Matrix& m) {
  for (double v : m.data())
    if (v != 0.0) return false;
  return true;
}

struct Headline {
  std::size_t stock;
  const std::vector<int>* tokens;
};

struct EncodedHeadlines {
  ad::Var rows;                    // one attention-pooled state per headline
  std::vector<std::size_t> order;  // input index of each row
  std::vector<ad::Var> attention;  // per length group, headlines x length
};

// Groups headlines by length so each group runs as one batched recurrence.
EncodedHeadlines encode_headlines(ad::Tape& tape, const BoundParameters& params,
                                  const std::vector<Headline>& items, ad::Var embeddings) {
  const ad::Var words = params["news.word_embedding"];
  const ad::Var w = params["news.lstm.w"];
  const ad::Var b = params["news.lstm.b"];
  const ad::Var w_att = params["news.attention"];
  const std::size_t hid = w.cols() / 4;

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) groups[items[i].tokens->size()].push_back(i);

  EncodedHeadlines out;
  std::vector<ad::Var> pooled;
  for (const auto& [len, members] : groups) {
    const std::size_t batch = members.size();
    ad::Var h = tape.constant(Matrix(batch, hid));
    ad::Var c = tape.constant(Matrix(batch, hid));
    std::vector<ad::Var> states;
    std::vector<std::size_t> ids(batch);
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t j = 0; j < batch; ++j)
        ids[j] = static_cast<std::size_t>((*items[members[j]].tokens)[t]);
      const ad::Var x = ad::select_rows(words, ids);
      const ad::Var z = ad::add_row_bias(ad::matmul(ad::concat_cols({x, h}), w), b);
      const ad::Var in = ad::sigmoid(ad::slice_cols(z, 0, hid));
      const ad::Var forget = ad::sigmoid(ad::slice_cols(z, hid, hid));
      const ad::Var outg = ad::sigmoid(ad::slice_cols(z, 2 * hid, hid));
      const ad::Var cand = ad::tanh(ad::slice_cols(z, 3 * hid, hid));
      c = ad::add(ad::hadamard(forget, c), ad::hadamard(in, cand));
      h = ad::hadamard(outg, ad::tanh(c));
      states.push_back(h);
    }
    std::vector<std::size_t> who(batch);
    for (std::size_t j = 0; j < batch; ++j) who[j] = items[members[j]].stock;
    const ad::Var query = ad::matmul(ad::select_rows(embeddings, who), w_att);
    std::vector<ad::Var> scores;
    for (const ad::Var& s : states) scores.push_back(ad::row_sums(ad::hadamard(query, s)));
    const ad::Var alpha = ad::softmax_rows(ad::concat_cols(scores));
    ad::Var acc = ad::scale_rows(states[0], ad::slice_cols(alpha, 0, 1));
    for (std::size_t t = 1; t < len; ++t)
      acc = ad::add(acc, ad::scale_rows(states[t], ad::slice_cols(alpha, t, 1)));
    pooled.push_back(acc);
    out.attention.push_back(alpha);
    out.order.insert(out.order.end(), members.begin(), members.end());
  }
  out.rows = pooled.size() == 1 ? pooled[0] : ad::concat_rows(pooled);
  return out;
}

}  // namespace

std::string task_name(Task task) {
  return task == Task::kClassification ? "classification" : "regression";
}

Task parse_task(const std::string& name) {
  if (name == "classification") return Task::kClassification;
  if (name == "regression") return Task::kRegression;
  throw ConfigError("unknown task '" + name + "' (classification|regression)");
}

bool ModelConfig::operator==(const ModelConfig& o) const {
  return stocks == o.stocks && hours == o.hours && hidden == o.hidden && embed == o.embed &&
         word_embed == o.word_embed && vocab == o.vocab && layers == o.layers && task == o.task &&
         dcca.output_dim == o.dcca.output_dim && dcca.ridge == o.dcca.ridge &&
         dcca.widths == o.dcca.widths;
}

void validate(const ModelConfig& c) {
  const auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string("model: ") + what + " must be >= 1");
  };
  positive(c.stocks, "stocks");
  positive(c.hours, "hours");
  positive(c.hidden, "hidden");
  positive(c.embed, "embed");
  positive(c.word_embed, "word embed");
  positive(c.vocab, "vocab");
  positive(c.layers, "layers");
  dcca::validate(c.dcca);
}

std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> parameter_shapes(
    const ModelConfig& c) {
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> out;
  const std::size_t h = c.hidden;
  const auto add = [&](std::string name, std::size_t r, std::size_t k) {
    out.push_back({std::move(name), {r, k}});
  };
  const auto rgcn = [&](const std::string& p) {
    for (Relation r : kAllRelations) add(p + "w_r." + std::string(relation_name(r)), h, h);
    add(p + "w_h", h, h);
    add(p + "agg_b", 1, h);
  };
  for (const auto& [view, in] : {std::pair<std::string, std::size_t>{"price", c.price_dim()},
                                 std::pair<std::string, std::size_t>{"volume", c.volume_dim()}}) {
    for (std::size_t l = 0; l < c.layers; ++l) {
      const std::string p = layer_prefix(view, l);
      rgcn(p);
      for (const char* g : kGates) {
        add(p + "gate_" + g + ".w", 3 * h + in, h);
        add(p + "gate_" + g + ".b", 1, h);
      }
    }
  }
  add("stock_embedding", c.stocks, c.embed);
  add("news.word_embedding", c.vocab, c.word_embed);
  add("news.lstm.w", c.word_embed + h, 4 * h);
  add("news.lstm.b", 1, 4 * h);
  add("news.attention", c.embed, h);
  add("fusion.w2", c.embed + 3 * h, h);
  add("fusion.b2", 1, h);
  add("fusion.w1", h, h);
  add("fusion.b1", 1, h);
  rgcn("integration.");
  if (c.task == Task::kClassification) {
    add("head.cls.w", h, 2);
    add("head.cls.b", 1, 2);
  } else {
    add("head.reg.w", h, 1);
    add("head.reg.b", 1, 1);
  }
  const std::array<std::size_t, 4> dims = {h, c.dcca.widths[0], c.dcca.widths[1],
                                           c.dcca.output_dim};
  for (const char* body : {"phi", "psi"}) {
    for (std::size_t l = 0; l < 3; ++l) {
      const std::string p = std::string("dcca.") + body + ".l" + std::to_string(l + 1);
      add(p + ".w", dims[l], dims[l + 1]);
      add(p + ".b", 1, dims[l + 1]);
    }
  }
  return out;
}

ParameterStore init_parameters(const ModelConfig& c, std::uint64_t seed) {
  validate(c);
  std::mt19937_64 rng(seed);
  ParameterStore store;
  for (const auto& [name, shape] : parameter_shapes(c)) {
    if (name.starts_with("dcca.")) continue;
    const auto [r, k] = shape;
    if (name == "stock_embedding" || name == "news.word_embedding") {
      store.add(name, Matrix::normal(r, k, 0.1, rng));
    } else if (r == 1) {
      store.add(name, Matrix(r, k));
    } else {
      store.add(name, glorot_uniform(r, k, rng));
    }
  }
  dcca::add_parameters(store, c.hidden, c.dcca, rng);
  validate_parameters(c, store);
  return store;
}

void validate_parameters(const ModelConfig& c, const ParameterStore& params) {
  const auto shapes = parameter_shapes(c);
  for (const auto& [name, shape] : shapes) {
    if (!params.contains(name)) throw DimensionError("missing parameter '" + name + "'");
    const Matrix& m = params.at(name);
    if (m.rows() != shape.first || m.cols() != shape.second) {
      throw DimensionError("parameter '" + name + "' is " + m.shape_string() + ", expected " +
                           std::to_string(shape.first) + "x" + std::to_string(shape.second));
    }
  }
  if (params.items().size() != shapes.size()) {
    for (const auto& [name, m] : params.items()) {
      bool known = false;
      for (const auto& s : shapes) known = known || s.first == name;
      if (!known) throw DimensionError("unexpected parameter '" + name + "'");
    }
  }
}

RgcnWeights rgcn_weights(const BoundParameters& params, const std::string& prefix) {
  RgcnWeights w;
  for (Relation r : kAllRelations)
    w.w_r[static_cast<std::size_t>(r)] = params[prefix + "w_r." + std::string(relation_name(r))];
  w.w_h = params[prefix + "w_h"];
  w.bias = params[prefix + "agg_b"];
  return w;
}

ad::Var rgcn_aggregate(ad::Var h, const NormalizedAdjacency& adj, const RgcnWeights& w) {
  ad::Tape& tape = h.tape();
  if (adj.size() != h.rows()) {
    throw DimensionError("rgcn_aggregate: adjacency over " + std::to_string(adj.size()) +
                         " nodes vs features " + h.value().shape_string());
  }
  ad::Var total = ad::matmul(h, w.w_h);
  for (Relation r : kAllRelations) {
    const Matrix& a = adj[r];
    if (all_zero(a)) continue;
    const ad::Var msg =
        ad::matmul(tape.constant(a), ad::matmul(h, w.w_r[static_cast<std::size_t>(r)]));
    total = ad::add(total, msg);
  }
  return ad::sigmoid(ad::add_row_bias(total, w.bias));
}

GateWeights gate_weights(const BoundParameters& params, const std::string& prefix) {
  std::vector<ad::Var> ws, bs;
  for (const char* g : kGates) {
    ws.push_back(params[prefix + "gate_" + g + ".w"]);
    bs.push_back(params[prefix + "gate_" + g + ".b"]);
  }
  return {ad::concat_cols(ws), ad::concat_cols(bs)};
}

std::pair<ad::Var, ad::Var> graph_lstm_step(ad::Var xi, ad::Var h, ad::Var x, ad::Var h_last,
                                            ad::Var c, const GateWeights& gates) {
  const std::size_t hid = h.cols();
  const ad::Var input = ad::concat_cols({xi, h, x, h_last});
  if (gates.w.rows() != input.cols() || gates.w.cols() != 5 * hid) {
    throw DimensionError("graph_lstm_step: gate weights " + gates.w.value().shape_string() +
                         " for input " + input.value().shape_string());
  }
  const ad::Var z = ad::add_row_bias(ad::matmul(input, gates.w), gates.b);
  const ad::Var a = ad::sigmoid(ad::slice_cols(z, 0, hid));
  const ad::Var b = ad::sigmoid(ad::slice_cols(z, hid, hid));
  const ad::Var o = ad::sigmoid(ad::slice_cols(z, 2 * hid, hid));
  const ad::Var u = ad::tanh(ad::slice_cols(z, 3 * hid, hid));
  const ad::Var rho = ad::sigmoid(ad::slice_cols(z, 4 * hid, hid));
  const ad::Var c_next = ad::add(ad::add(ad::hadamard(b, c), ad::hadamard(a, u)),
                                 ad::hadamard(rho, h_last));
  const ad::Var h_next = ad::hadamard(o, ad::tanh(c_next));
  return {h_next, c_next};
}

ad::Var encode_view(ad::Tape& tape, const BoundParameters& params, const std::string& prefix,
                    const std::vector<Matrix>& steps, const NormalizedAdjacency& adj,
                    std::size_t layers) {
  if (steps.empty()) throw DimensionError("encode_view: no timesteps");
  const std::size_t S = steps[0].rows();
  const std::size_t hid = params[layer_prefix(prefix, 0) + "w_h"].cols();
  std::vector<RgcnWeights> agg;
  std::vector<GateWeights> gates;
  for (std::size_t l = 0; l < layers; ++l) {
    agg.push_back(rgcn_weights(params, layer_prefix(prefix, l)));
    gates.push_back(gate_weights(params, layer_prefix(prefix, l)));
  }
  ad::Var h_last = tape.constant(Matrix(S, hid));
  ad::Var c_last = h_last;
  for (const Matrix& step : steps) {
    const ad::Var x = tape.constant(step);
    ad::Var h = h_last, c = c_last;
    for (std::size_t l = 0; l < layers; ++l) {
      const ad::Var xi = rgcn_aggregate(h, adj, agg[l]);
      std::tie(h, c) = graph_lstm_step(xi, h, x, h_last, c, gates[l]);
    }
    h_last = h;
    c_last = c;
  }
  return h_last;
}

ad::Var encode_news(ad::Tape& tape, const BoundParameters& params,
                    const std::vector<std::vector<std::vector<int>>>& news, ad::Var embeddings) {
  const std::size_t S = news.size();
  const std::size_t hid = params["news.attention"].cols();
  const std::size_t vocab = params["news.word_embedding"].rows();
  std::vector<Headline> items;
  for (std::size_t s = 0; s < S; ++s) {
    for (const auto& tokens : news[s]) {
      if (tokens.empty()) continue;
      for (int id : tokens) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
          throw DimensionError("encode_news: token id " + std::to_string(id) +
                               " outside vocabulary of " + std::to_string(vocab));
        }
      }
      items.push_back({s, &tokens});
    }
  }
  if (items.empty()) return tape.constant(Matrix(S, hid));

  const EncodedHeadlines enc = encode_headlines(tape, params, items, embeddings);
  std::vector<double> count(S, 0.0);
  for (const Headline& it : items) count[it.stock] += 1.0;
  Matrix pool(S, items.size());
  for (std::size_t row = 0; row < enc.order.size(); ++row) {
    const std::size_t s = items[enc.order[row]].stock;
    pool(s, row) = 1.0 / count[s];
  }
  return ad::matmul(tape.constant(std::move(pool)), enc.rows);
}

Matrix news_attention(const ParameterStore& params, const std::vector<int>& tokens,
                      std::size_t stock) {
  ad::Tape tape;
  const BoundParameters bound = params.bind(tape);
  const std::vector<Headline> items = {{stock, &tokens}};
  return encode_headlines(tape, bound, items, bound["stock_embedding"]).attention[0].value();
}

ad::Var fuse_and_integrate(const BoundParameters& params, ad::Var embeddings, ad::Var news,
                           ad::Var h_price, ad::Var h_volume, const NormalizedAdjacency& adj) {
  const ad::Var joined = ad::concat_cols({embeddings, news, h_price, h_volume});
  const ad::Var hidden =
      ad::relu(ad::add_row_bias(ad::matmul(joined, params["fusion.w2"]), params["fusion.b2"]));
  const ad::Var g =
      ad::add_row_bias(ad::matmul(hidden, params["fusion.w1"]), params["fusion.b1"]);
  return rgcn_aggregate(g, adj, rgcn_weights(params, "integration."));
}

ad::Var class_logits(const BoundParameters& params, ad::Var g) {
  return ad::add_row_bias(ad::matmul(g, params["head.cls.w"]), params["head.cls.b"]);
}

ad::Var regression_output(const BoundParameters& params, ad::Var g) {
  return ad::add_row_bias(ad::matmul(g, params["head.reg.w"]), params["head.reg.b"]);
}

CgmModel::CgmModel(ModelConfig config, const RelationGraph& graph, Ablation ablation)
    : config_(std::move(config)), ablation_(ablation) {
  validate(config_);
  if (graph.size() != config_.stocks) {
    throw DimensionError("model over " + std::to_string(config_.stocks) + " stocks, graph over " +
                         std::to_string(graph.size()));
  }
  const NormalizedAdjacency full = normalize(graph);
  const NormalizedAdjacency none = NormalizedAdjacency::zeros(config_.stocks);
  price_adj_ = ablation_.no_price_graph ? none : full;
  volume_adj_ = ablation_.no_volume_graph ? none : full;
  integration_adj_ = ablation_.no_integration_graph ? none : full;
}

ForwardOutput CgmModel::forward(ad::Tape& tape, const BoundParameters& params,
                                const DayBatch& batch) const {
  if (batch.stocks() != config_.stocks) {
    throw DimensionError("batch over " + std::to_string(batch.stocks()) + " stocks, model over " +
                         std::to_string(config_.stocks));
  }
  ForwardOutput out;
  const ad::Var e = params["stock_embedding"];
  out.h_price = encode_view(tape, params, "price", batch.price_steps, price_adj_, config_.layers);
  out.h_volume =
      encode_view(tape, params, "volume", batch.volume_steps, volume_adj_, config_.layers);
  const ad::Var news = ablation_.no_news
                           ? tape.constant(Matrix(config_.stocks, config_.hidden))
                           : encode_news(tape, params, batch.news, e);
  out.fused = fuse_and_integrate(params, e, news, out.h_price, out.h_volume, integration_adj_);
  out.prediction = config_.task == Task::kClassification ? class_logits(params, out.fused)
                                                         : regression_output(params, out.fused);
  return out;
}

}  // namespace cgm
