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
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cgm/dcca/dcca.hpp"
#include "cgm/errors.hpp"
#include "cgm/model/checkpoint.hpp"
#include "cgm/training/training.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cgm;

namespace {

std::string bytes_of(const Checkpoint& ck) {
  std::ostringstream s;
  write_checkpoint(s, ck);
  return s.str();
}

const RunOutcome& shared_run() {
  static const RunOutcome run = [] {
    const PreparedData d = testing::small_data();
    return run_training(d, training_graph(d, 0.6), testing::small_spec(2));
  }();
  return run;
}

}  // namespace

TEST_CASE("cross entropy of uniform predictions is ln 2 and of perfect ones is 0") {
  const Matrix half(3, 2, 0.5);
  const std::vector<int> labels = {0, 1, 1};
  const std::vector<bool> mask = {true, true, true};
  CHECK(cross_entropy_from_probabilities(half, labels, mask) == doctest::Approx(std::log(2.0)));
  Matrix perfect(3, 2);
  for (std::size_t r = 0; r < 3; ++r) perfect(r, labels[r]) = 1.0;
  CHECK(cross_entropy_from_probabilities(perfect, labels, mask) == doctest::Approx(0.0));
  // masked rows do not count
  Matrix mixed = perfect;
  mixed(0, 0) = 0.5;
  mixed(0, 1) = 0.5;
  CHECK(cross_entropy_from_probabilities(mixed, labels, {false, true, true}) ==
        doctest::Approx(0.0));
}

TEST_CASE("combined loss is linear in lambda") {
  const Matrix probs{{0.7, 0.3}, {0.2, 0.8}};
  const std::vector<int> labels = {0, 1};
  const std::vector<bool> mask = {true, true};
  const double corr = -1.7;
  const double l0 = combined_loss(probs, labels, mask, corr, 0.0);
  const double l1 = combined_loss(probs, labels, mask, corr, 1.0);
  const double l25 = combined_loss(probs, labels, mask, corr, 2.5);
  CHECK(l0 == doctest::Approx(-(std::log(0.7) + std::log(0.8)) / 2));
  CHECK(l1 - l0 == doctest::Approx(corr));
  CHECK(l25 - l0 == doctest::Approx(2.5 * corr));
}

TEST_CASE("adam leaves parameters alone under a zero gradient") {
  ParameterStore p;
  p.add("w", Matrix{{1.0, -2.0}});
  const ParameterStore before = p;
  AdamState st;
  GradientMap g{{"w", Matrix(1, 2)}};
  for (int i = 0; i < 3; ++i) CHECK(adam_step(p, g, st, {}));
  CHECK(p == before);
  CHECK(st.step == 3);
}

TEST_CASE("first adam step moves each entry by about -lr * sign(g)") {
  ParameterStore p;
  p.add("w", Matrix{{0.0, 0.0, 0.0}});
  AdamState st;
  AdamOptions o;
  o.learning_rate = 0.01;
  CHECK(adam_step(p, {{"w", Matrix{{3.0, -0.5, 1e-3}}}}, st, o));
  CHECK(p.at("w")(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p.at("w")(0, 1) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(p.at("w")(0, 2) == doctest::Approx(-0.01).epsilon(1e-4));
}

TEST_CASE("adam updates do not depend on the gradient scale") {
  std::mt19937_64 rng(5);
  const auto run = [&](double factor) {
    std::mt19937_64 local(11);
    ParameterStore p;
    p.add("w", Matrix::uniform(4, 3, -1, 1, local));
    AdamState st;
    for (int step = 0; step < 10; ++step) {
      Matrix g = Matrix::uniform(4, 3, -1, 1, local);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= factor;
      adam_step(p, {{"w", g}}, st, {});
    }
    return p.at("w");
  };
  const Matrix a = run(1.0), b = run(1000.0);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6);
}

TEST_CASE("adam rejects non-finite gradients without touching state") {
  ParameterStore p;
  p.add("w", Matrix{{1.0}});
  AdamState st;
  CHECK_FALSE(adam_step(p, {{"w", Matrix{{std::nan("")}}}}, st, {}));
  CHECK_FALSE(adam_step(p, {{"w", Matrix{{INFINITY}}}}, st, {}));
  CHECK(p.at("w")(0, 0) == 1.0);
  CHECK(st.step == 0);
}

TEST_CASE("gradient clipping rescales to the limit") {
  GradientMap g{{"a", Matrix{{3.0}}}, {"b", Matrix{{4.0}}}};
  CHECK(global_norm(g) == doctest::Approx(5.0));
  CHECK(clip_gradients(g, 1.0) == doctest::Approx(5.0));
  CHECK(g["a"](0, 0) == doctest::Approx(0.6));
  CHECK(g["b"](0, 0) == doctest::Approx(0.8));
  CHECK(clip_gradients(g, 10.0) == doctest::Approx(1.0));
  CHECK(g["a"](0, 0) == doctest::Approx(0.6));
  CHECK(all_finite(g));
  g["a"](0, 0) = std::nan("");
  CHECK_FALSE(all_finite(g));
}

TEST_CASE("adam memorizes a tiny labelled batch") {
  std::mt19937_64 rng(2);
  const Matrix x = Matrix::normal(6, 8, 1.0, rng);  // more columns than rows: separable
  const std::vector<int> labels = {0, 1, 1, 0, 1, 0};
  const std::vector<bool> mask(6, true);
  ParameterStore p;
  p.add("w", Matrix::normal(8, 2, 0.1, rng));
  p.add("b", Matrix(1, 2));
  AdamState st;
  AdamOptions o;
  o.learning_rate = 0.1;
  double loss = 0.0;
  for (int step = 0; step < 200; ++step) {
    ad::Tape tape;
    const BoundParameters b = p.bind(tape);
    const ad::Var out =
        ad::cross_entropy(ad::add_row_bias(ad::matmul(tape.constant(x), b["w"]), b["b"]), labels,
                          mask);
    loss = out.value()(0, 0);
    tape.backward(out);
    adam_step(p, ParameterStore::gradients(b), st, o);
  }
  CHECK(loss < 1e-2);
}

TEST_CASE("metric identities") {
  const std::vector<double> y = {1.0, 2.0, 4.0, -1.0};
  const std::vector<double> yhat = {1.5, 1.0, 4.0, 0.0};
  const MetricsReport r = regression_report(yhat, y);
  REQUIRE(r.mse_standard);
  CHECK(*r.mse_standard == doctest::Approx((0.25 + 1.0 + 0.0 + 1.0) / 4));
  CHECK(*r.rmse * *r.rmse == doctest::Approx(*r.mse_standard));
  CHECK(*r.mae == doctest::Approx((0.5 + 1.0 + 0.0 + 1.0) / 4));
  CHECK_FALSE(r.accuracy);

  const std::vector<int> truth = {1, 0, 1, 1, 0};
  const MetricsReport all = classification_report(truth, truth);
  CHECK(*all.accuracy == 1.0);
  CHECK(all.positives == 3);
  CHECK(all.negatives == 2);

  const std::vector<int> guess = {1, 1, 0, 1, 0};
  std::vector<int> t2 = truth, g2 = guess;
  std::reverse(t2.begin(), t2.end());
  std::reverse(g2.begin(), g2.end());
  CHECK(*classification_report(guess, truth).accuracy == doctest::Approx(0.6));
  CHECK(*classification_report(g2, t2).accuracy == *classification_report(guess, truth).accuracy);
}

TEST_CASE("an empty split is a config error") {
  const PreparedData d = testing::small_data();
  const Day last = d.set.examples.back().target_day;
  const Day first = d.set.examples.front().target_day;
  CHECK_THROWS_AS(split_by_date(d.set, Day{last.ordinal + 10}, Day{last.ordinal + 20}),
                  ConfigError);
  CHECK_THROWS_AS(split_by_date(d.set, first, Day{first.ordinal + 20}), ConfigError);
  CHECK_THROWS_AS(split_by_date(d.set, first, std::nullopt), ConfigError);
  TrainConfig tc;
  tc.epochs = 1;
  CHECK_THROWS_AS(train(make_forward(shared_run().checkpoint), shared_run().checkpoint.params,
                        TrainData{{}, d.batches.dev, d.batches.test}, tc, d.target),
                  ConfigError);
}

TEST_CASE("invalid train configs are rejected") {
  TrainConfig c;
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = {};
  c.lambda = -1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = {};
  c.learning_rate = 0.02;  // off grid is fine
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("training loss falls over five epochs") {
  const PreparedData d = testing::small_data();
  RunSpec spec = testing::small_spec(5);
  spec.train.lambda = 0.0;
  const RunOutcome run = run_training(d, training_graph(d, 0.6), spec);
  REQUIRE(run.result.history.size() == 5);
  CHECK(run.result.history.back().train_loss < run.result.history.front().train_loss);
  CHECK(run.result.rejected_steps == 0);
  CHECK(run.result.steps == 5 * d.batches.train.size() - run.result.skipped_batches);
}

TEST_CASE("training is deterministic under a fixed seed") {
  const PreparedData d = testing::small_data();
  const RunOutcome again = run_training(d, training_graph(d, 0.6), testing::small_spec(2));
  CHECK(bytes_of(again.checkpoint) == bytes_of(shared_run().checkpoint));
  REQUIRE(again.result.history.size() == shared_run().result.history.size());
  for (std::size_t e = 0; e < again.result.history.size(); ++e) {
    CHECK(again.result.history[e].train_loss == shared_run().result.history[e].train_loss);
    CHECK(to_json(again.result.history[e].dev) == to_json(shared_run().result.history[e].dev));
  }
}

TEST_CASE("the correlation loss is never evaluated under no_dcca") {
  const PreparedData d = testing::small_data();
  RunSpec spec = testing::small_spec(1);
  spec.train.ablation.no_dcca = true;
  const std::uint64_t before = dcca::corr_loss_evaluations();
  const RunOutcome run = run_training(d, training_graph(d, 0.6), spec);
  CHECK(dcca::corr_loss_evaluations() == before);
  CHECK(run.result.corr_loss_calls == 0);
  CHECK(shared_run().result.corr_loss_calls > 0);

  spec.train.ablation.no_dcca = false;
  spec.train.lambda = 0.0;
  const std::uint64_t before_zero = dcca::corr_loss_evaluations();
  run_training(d, training_graph(d, 0.6), spec);
  CHECK(dcca::corr_loss_evaluations() == before_zero);
}

TEST_CASE("best epoch parameters are the checkpoint") {
  const RunOutcome& run = shared_run();
  CHECK(run.checkpoint.params == run.result.best);
  CHECK(run.checkpoint.epoch == run.result.best_epoch);
  double best = -1.0;
  std::size_t at = 0;
  for (const EpochRecord& e : run.result.history)
    if (*e.dev.accuracy > best) {
      best = *e.dev.accuracy;
      at = e.epoch;
    }
  CHECK(at == run.result.best_epoch);
}

TEST_CASE("checkpoints round-trip byte for byte") {
  const Checkpoint& ck = shared_run().checkpoint;
  const std::string first = bytes_of(ck);
  std::istringstream in(first);
  const Checkpoint back = read_checkpoint(in);
  CHECK(bytes_of(back) == first);
  CHECK(back.params == ck.params);
  CHECK(back.config == ck.config);
  CHECK(back.vocab == ck.vocab);
  CHECK(back.scaler == ck.scaler);
  CHECK(back.stocks == ck.stocks);
  for (Relation r : kAllRelations) CHECK(back.graph[r] == ck.graph[r]);
}

TEST_CASE("damaged checkpoints are parse errors") {
  const std::string good = bytes_of(shared_run().checkpoint);
  std::string bad = good;
  bad[0] = 'X';
  std::istringstream a(bad);
  CHECK_THROWS_AS(read_checkpoint(a), ParseError);
  for (std::size_t cut : {std::size_t{4}, std::size_t{20}, good.size() / 2, good.size() - 1}) {
    std::istringstream t(good.substr(0, cut));
    CHECK_THROWS_AS(read_checkpoint(t), ParseError);
  }
  std::istringstream extra(good + "x");
  CHECK_THROWS_AS(read_checkpoint(extra), ParseError);
}

TEST_CASE("compatibility errors name the differing fields") {
  const Checkpoint& ck = shared_run().checkpoint;
  CHECK_NOTHROW(check_compatible(ck, ck.config, ck.stocks));
  ModelConfig want = ck.config;
  want.hidden = 64;
  want.layers = 2;
  try {
    check_compatible(ck, want, ck.stocks);
    FAIL("expected a compatibility error");
  } catch (const CompatibilityError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("hidden: checkpoint 6, requested 64") != std::string::npos);
    CHECK(msg.find("layers") != std::string::npos);
    CHECK(msg.find("embed:") == std::string::npos);
  }
  std::vector<std::string> other = ck.stocks;
  std::swap(other[0], other[1]);
  CHECK_THROWS_AS(check_compatible(ck, ck.config, other), CompatibilityError);
}

TEST_CASE("eval from a reloaded checkpoint matches the training record") {
  const Checkpoint& ck = shared_run().checkpoint;
  const PreparedData d = testing::small_data();
  std::istringstream in(bytes_of(ck));
  const Checkpoint back = read_checkpoint(in);
  const PreparedData again = prepare_from_checkpoint(d.bars, {}, back);
  CHECK(again.splits.dev == d.splits.dev);
  const SynthData s = synth_generate(testing::small_synth(), 3);
  const PreparedData with_news = prepare_from_checkpoint(s.bars, s.news, back);
  const MetricsReport dev =
      evaluate(make_forward(back), back.params, with_news.batches.dev, back.config.task, back.target);
  const EpochRecord& rec = shared_run().result.history.at(ck.epoch - 1);
  CHECK(to_json(dev) == to_json(rec.dev));
}
