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
#include "cgm/cli/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <random>
#include <set>

#include "cgm/baselines/baselines.hpp"
#include "cgm/dcca/dcca.hpp"
#include "cgm/errors.hpp"

namespace cgm {

namespace {

std::vector<DayBatch> batches_for(const PreparedData& d, const std::vector<std::size_t>& idx) {
  return make_day_batches(d.set, idx, d.scaler, d.vocab, d.target);
}

ExampleSet examples_for(const std::vector<HourlyBar>& bars, const std::vector<NewsRecord>& news,
                        const DataOptions& o) {
  ExampleOptions eo;
  eo.window_days = o.window_days;
  eo.movement_threshold = o.movement_threshold;
  eo.require_news = o.require_news;
  return build_examples(bars, news, eo);
}

nlohmann::json data_json(const DataOptions& o, const Splits& s) {
  return {{"require_news", o.require_news},
          {"dev_start", to_iso(s.dev_start)},
          {"test_start", to_iso(s.test_start)}};
}

// Same-length random batch, used by the gradient-check toy instances.
DayBatch toy_batch(std::size_t stocks, std::size_t days, std::size_t hours, int vocab,
                   std::mt19937_64& rng) {
  DayBatch b;
  for (std::size_t k = 0; k < days; ++k) {
    b.price_steps.push_back(Matrix::uniform(stocks, 4 * hours, -1.0, 1.0, rng));
    b.volume_steps.push_back(Matrix::uniform(stocks, 2 * hours, -1.0, 1.0, rng));
  }
  std::uniform_int_distribution<int> tok(0, vocab - 1);
  b.news.assign(stocks, {});
  for (std::size_t s = 0; s < stocks; ++s)
    for (std::size_t h = 0; h < s % 3; ++h) b.news[s].push_back({tok(rng), tok(rng), tok(rng)});
  b.present.assign(stocks, true);
  b.labeled.assign(stocks, true);
  for (std::size_t s = 0; s < stocks; ++s) b.labels.push_back(static_cast<int>(s % 2));
  b.target.assign(stocks, 0.0);
  b.log_volume.assign(stocks, 0.0);
  return b;
}

// Adds a node whose value is zero but whose backward rule pushes a constant
// into one parameter, so only that parameter's analytic gradient is wrong.
ad::Var with_fault(ad::Var loss, const BoundParameters& params, const std::string& name) {
  if (name.empty() || !params.contains(name)) return loss;
  const ad::Var target = params[name];
  const std::size_t id = target.id();
  const std::size_t r = target.rows(), c = target.cols();
  const ad::Var bogus = loss.tape().record(Matrix(1, 1), {target},
                                           [id, r, c](ad::Tape& t, const Matrix& g) {
                                             t.accumulate(id, Matrix(r, c, g(0, 0)));
                                           });
  return ad::add(loss, bogus);
}

}  // namespace

Splits split_by_date(const ExampleSet& set, std::optional<Day> dev_start,
                     std::optional<Day> test_start) {
  std::set<Day> days;
  for (const auto& ex : set.examples) days.insert(ex.target_day);
  if (days.size() < 3) {
    throw ConfigError("need at least 3 target days to split, got " + std::to_string(days.size()));
  }
  const std::vector<Day> ordered(days.begin(), days.end());
  Splits s;
  if (dev_start.has_value() != test_start.has_value()) {
    throw ConfigError("--dev-start and --test-start go together");
  }
  if (dev_start) {
    if (!(*dev_start < *test_start)) throw ConfigError("dev start must precede test start");
    s.dev_start = *dev_start;
    s.test_start = *test_start;
  } else {
    const std::size_t n = ordered.size();
    const std::size_t n_train = std::max<std::size_t>(1, n * 70 / 100);
    const std::size_t n_dev = std::max<std::size_t>(1, n * 15 / 100);
    if (n_train + n_dev >= n) throw ConfigError("too few target days for a 70/15/15 split");
    s.dev_start = ordered[n_train];
    s.test_start = ordered[n_train + n_dev];
  }
  for (std::size_t i = 0; i < set.examples.size(); ++i) {
    const Day d = set.examples[i].target_day;
    (d < s.dev_start ? s.train : d < s.test_start ? s.dev : s.test).push_back(i);
  }
  if (s.train.empty()) throw ConfigError("training split is empty");
  if (s.dev.empty()) throw ConfigError("dev split is empty");
  if (s.test.empty()) throw ConfigError("test split is empty");
  return s;
}

PreparedData prepare_data(std::vector<HourlyBar> bars, const std::vector<NewsRecord>& news,
                          const DataOptions& options) {
  PreparedData d;
  d.options = options;
  d.set = examples_for(bars, news, options);
  d.bars = std::move(bars);
  d.splits = split_by_date(d.set, options.dev_start, options.test_start);
  d.vocab = build_vocabulary(d.set, d.splits.train);
  d.scaler = FeatureScaler::fit(d.set, d.splits.train);
  d.target = TargetScaling::fit(d.set, d.splits.train);
  d.batches.train = batches_for(d, d.splits.train);
  d.batches.dev = batches_for(d, d.splits.dev);
  d.batches.test = batches_for(d, d.splits.test);
  return d;
}

PreparedData prepare_from_checkpoint(std::vector<HourlyBar> bars,
                                     const std::vector<NewsRecord>& news, const Checkpoint& ck) {
  PreparedData d;
  d.options.window_days = ck.window_days;
  d.options.movement_threshold = ck.movement_threshold;
  try {
    d.options.require_news = ck.data.at("require_news").get<bool>();
    d.options.dev_start = parse_iso_day(ck.data.at("dev_start").get<std::string>());
    d.options.test_start = parse_iso_day(ck.data.at("test_start").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint data settings: ") + e.what());
  }
  d.set = examples_for(bars, news, d.options);
  d.bars = std::move(bars);
  if (d.set.stocks != ck.stocks) {
    throw CompatibilityError("stocks: checkpoint universe differs from the data");
  }
  d.splits = split_by_date(d.set, d.options.dev_start, d.options.test_start);
  d.vocab = ck.vocab;
  d.scaler = ck.scaler;
  d.target = ck.target;
  d.batches.train = batches_for(d, d.splits.train);
  d.batches.dev = batches_for(d, d.splits.dev);
  d.batches.test = batches_for(d, d.splits.test);
  return d;
}

RelationGraph training_graph(const PreparedData& data, double threshold,
                             CorrelationMethod method) {
  const MarketPanel panel = build_panel(data.bars);
  const std::size_t end =
      static_cast<std::size_t>(std::lower_bound(panel.calendar.begin(), panel.calendar.end(),
                                                data.splits.dev_start) -
                               panel.calendar.begin());
  return build_graph(panel.stocks, graph_series(panel, end), threshold, method);
}

ForwardFn make_forward(const Checkpoint& ck) {
  if (ck.model == "lstm") {
    const std::size_t layers = ck.config.layers;
    return [layers](ad::Tape& t, const BoundParameters& p, const DayBatch& b) {
      return lstm_forward(t, p, b, layers);
    };
  }
  if (ck.model != "cgm") throw CompatibilityError("unknown model kind '" + ck.model + "'");
  auto model = std::make_shared<const CgmModel>(ck.config, ck.graph, ck.ablation);
  return [model](ad::Tape& t, const BoundParameters& p, const DayBatch& b) {
    return model->forward(t, p, b);
  };
}

RunOutcome run_training(const PreparedData& data, const RelationGraph& graph, const RunSpec& spec,
                        const EpochCallback& on_epoch) {
  Checkpoint ck;
  ck.model = spec.model;
  ck.config = spec.model_config;
  ck.config.stocks = data.set.stocks.size();
  ck.config.hours = data.set.hours;
  ck.config.vocab = data.vocab.size();
  ck.config.task = spec.train.task;
  ck.ablation = spec.train.ablation;
  ck.stocks = data.set.stocks;
  ck.window_days = data.set.window_days;
  ck.movement_threshold = data.options.movement_threshold;
  ck.vocab = data.vocab;
  ck.scaler = data.scaler;
  ck.target = data.target;
  ck.graph = graph;
  ck.data = data_json(data.options, data.splits);
  if (graph.stocks != ck.stocks) {
    throw CompatibilityError("graph stocks differ from the data's stock universe");
  }

  TrainConfig tc = spec.train;
  tc.dcca_ridge = ck.config.dcca.ridge;
  tc.window_days = data.set.window_days;
  ParameterStore init;
  if (spec.model == "lstm") {
    init = init_lstm_parameters(ck.config, tc.seed);
    tc.ablation.no_dcca = true;
  } else if (spec.model == "cgm") {
    init = init_parameters(ck.config, tc.seed);
  } else {
    throw ConfigError("unknown model kind '" + spec.model + "'");
  }

  RunOutcome out;
  out.result = train(make_forward(ck), std::move(init), data.batches, tc, data.target, on_epoch);
  ck.params = out.result.best;
  ck.epoch = out.result.best_epoch;
  out.checkpoint = std::move(ck);
  return out;
}

std::vector<GradcheckCase> run_gradcheck_suite(const GradcheckSuiteOptions& o) {
  GradCheckOptions gco;
  gco.epsilon = o.epsilon;
  gco.seed = o.seed;
  std::vector<GradcheckCase> cases;
  const auto timed = [&](const std::string& name, const LossBuilder& loss,
                         const ParameterStore& params) {
    const auto t0 = std::chrono::steady_clock::now();
    const LossBuilder faulty = [&](ad::Tape& t, const BoundParameters& b) {
      return with_fault(loss(t, b), b, o.inject_fault);
    };
    GradcheckCase c;
    c.name = name;
    c.result = grad_check(faulty, params, gco);
    c.pass = c.result.max_rel_error < o.threshold;
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cases.push_back(c);
  };

  std::mt19937_64 rng(o.seed);
  {
    ModelConfig c;
    c.stocks = 4;
    c.hours = 2;
    c.hidden = 6;
    c.embed = 4;
    c.word_embed = 3;
    c.vocab = 12;
    c.dcca.output_dim = 2;
    c.dcca.widths = {4, 3};
    c.dcca.ridge = 1e-2;
    std::vector<std::string> names = {"A", "B", "C", "D"};
    RelationGraph g = RelationGraph::empty(names);
    const auto edge = [&](Relation r, std::size_t i, std::size_t j, double w) {
      g[r](i, j) = g[r](j, i) = w;
    };
    edge(Relation::kPricePos, 0, 1, 0.8);
    edge(Relation::kPriceNeg, 1, 2, -0.7);
    edge(Relation::kVolPos, 2, 3, 0.9);
    edge(Relation::kVolNeg, 0, 3, -0.65);
    const auto model = std::make_shared<CgmModel>(c, g);
    const DayBatch batch = toy_batch(4, 3, 2, 12, rng);
    TrainConfig tc;
    tc.lambda = 1.0;
    tc.dcca_ridge = c.dcca.ridge;
    timed("cgm_full_forward_combined_loss",
          [model, batch, tc](ad::Tape& t, const BoundParameters& b) {
            return *batch_loss(b, model->forward(t, b, batch), batch, tc);
          },
          init_parameters(c, o.seed));
  }
  {
    ParameterStore p;
    p.add("fx", Matrix::normal(10, 3, 1.0, rng));
    p.add("fy", Matrix::normal(10, 3, 1.0, rng));
    timed("dcca_corr_loss",
          [](ad::Tape&, const BoundParameters& b) {
            return dcca::corr_loss(b["fx"], b["fy"], 1e-3);
          },
          p);
  }
  {
    ModelConfig c;
    c.stocks = 4;
    c.hours = 2;
    c.hidden = 6;
    c.layers = 2;
    const DayBatch batch = toy_batch(4, 3, 2, 1, rng);
    timed("lstm_two_layer",
          [batch](ad::Tape& t, const BoundParameters& b) {
            return ad::cross_entropy(lstm_forward(t, b, batch, 2).prediction, batch.labels,
                                     batch.labeled);
          },
          init_lstm_parameters(c, o.seed));
  }
  return cases;
}

}  // namespace cgm
