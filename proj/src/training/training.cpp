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
#include "cgm/training/training.hpp"

#include <cmath>

#include "cgm/dcca/dcca.hpp"
#include "cgm/errors.hpp"

namespace cgm {

namespace {

std::vector<std::size_t> present_rows(const DayBatch& b) {
  std::vector<std::size_t> rows;
  for (std::size_t s = 0; s < b.stocks(); ++s)
    if (b.present[s]) rows.push_back(s);
  return rows;
}

void append_predictions(const Matrix& out, const DayBatch& b, Task task,
                        const TargetScaling& target, std::vector<Prediction>& preds) {
  for (std::size_t s = 0; s < b.stocks(); ++s) {
    if (!b.present[s]) continue;
    Prediction p;
    p.stock = s;
    p.day_index = b.day_index;
    p.day = b.day;
    if (task == Task::kClassification) {
      // two-way softmax written as a logistic of the logit gap
      const double up = 1.0 / (1.0 + std::exp(out(s, 0) - out(s, 1)));
      p.prob_up = up;
      p.label = out(s, 1) > out(s, 0) ? 1 : 0;
    } else {
      p.log_volume = target.inverse(out(s, 0));
    }
    preds.push_back(p);
  }
}

bool better(const MetricsReport& a, const MetricsReport& b, Task task) {
  if (task == Task::kClassification) return a.accuracy.value_or(0.0) > b.accuracy.value_or(0.0);
  return a.mse_standard.value_or(INFINITY) < b.mse_standard.value_or(INFINITY);
}

}  // namespace

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw ConfigError("learning rate must be > 0");
  }
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw ConfigError("lambda must be >= 0");
  if (c.epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(c.clip_norm > 0.0)) throw ConfigError("clip norm must be > 0");
  if (c.window_days < 2) throw ConfigError("window must be at least 2 days");
}

double global_norm(const GradientMap& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.data()) sq += v * v;
  return std::sqrt(sq);
}

double clip_gradients(GradientMap& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double k = max_norm / norm;
    for (auto& [name, g] : grads)
      for (double& v : g.data()) v *= k;
  }
  return norm;
}

bool all_finite(const GradientMap& grads) {
  for (const auto& [name, g] : grads)
    for (double v : g.data())
      if (!std::isfinite(v)) return false;
  return true;
}

bool adam_step(ParameterStore& params, const GradientMap& grads, AdamState& state,
               const AdamOptions& o) {
  if (!all_finite(grads)) return false;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (const auto& [name, g] : grads) {
    Matrix& p = params.at(name);
    if (!p.same_shape(g)) throw DimensionError("adam: gradient shape for '" + name + "'");
    auto [mit, fresh_m] = state.m.try_emplace(name, g.rows(), g.cols());
    auto [vit, fresh_v] = state.v.try_emplace(name, g.rows(), g.cols());
    Matrix& m = mit->second;
    Matrix& v = vit->second;
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
      p[i] -= o.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + o.epsilon);
    }
  }
  return true;
}

double cross_entropy_from_probabilities(const Matrix& probs, std::span<const int> labels,
                                        const std::vector<bool>& mask) {
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    if (!mask[r]) continue;
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= probs.cols()) {
      throw ValidationError("cross entropy: row " + std::to_string(r) + " has no valid label");
    }
    total -= std::log(probs(r, static_cast<std::size_t>(labels[r])));
    ++n;
  }
  if (n == 0) throw ValidationError("cross entropy: no labeled rows");
  return total / static_cast<double>(n);
}

double combined_loss(const Matrix& probs, std::span<const int> labels,
                     const std::vector<bool>& mask, double corr_loss_value, double lambda) {
  return cross_entropy_from_probabilities(probs, labels, mask) + lambda * corr_loss_value;
}

ad::Var combined_loss(ad::Var task_loss, std::optional<ad::Var> corr_loss, double lambda) {
  if (!corr_loss || lambda == 0.0) return task_loss;
  return ad::add(task_loss, ad::scale(*corr_loss, lambda));
}

nlohmann::json to_json(const MetricsReport& r) {
  const auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"accuracy", opt(r.accuracy)},
          {"mse_standard", opt(r.mse_standard)},
          {"rmse", opt(r.rmse)},
          {"mae", opt(r.mae)},
          {"examples", r.examples},
          {"positives", r.positives},
          {"negatives", r.negatives},
          {"correct", r.correct}};
}

std::vector<Prediction> predict(const ForwardFn& forward, const ParameterStore& params,
                                std::span<const DayBatch> batches, Task task,
                                const TargetScaling& target) {
  std::vector<Prediction> preds;
  for (const DayBatch& b : batches) {
    ad::Tape tape;
    const BoundParameters bound = params.bind(tape);
    append_predictions(forward(tape, bound, b).prediction.value(), b, task, target, preds);
  }
  return preds;
}

MetricsReport classification_report(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw DimensionError("classification report: sizes");
  MetricsReport r;
  r.examples = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    (truth[i] == 1 ? r.positives : r.negatives) += 1;
    if (predicted[i] == truth[i]) ++r.correct;
  }
  if (r.examples > 0) r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.examples);
  return r;
}

MetricsReport regression_report(std::span<const double> predicted,
                                std::span<const double> truth) {
  if (predicted.size() != truth.size()) throw DimensionError("regression report: sizes");
  MetricsReport r;
  r.examples = truth.size();
  if (r.examples == 0) return r;
  double sq = 0.0, abs = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predicted[i] - truth[i];
    sq += e * e;
    abs += std::abs(e);
  }
  const double n = static_cast<double>(r.examples);
  r.mse_standard = sq / n;
  r.rmse = std::sqrt(*r.mse_standard);
  r.mae = abs / n;
  return r;
}

MetricsReport score(const std::vector<Prediction>& preds, std::span<const DayBatch> batches,
                    Task task) {
  std::map<std::size_t, const DayBatch*> by_day;
  for (const DayBatch& b : batches) by_day[b.day_index] = &b;
  std::vector<int> got, want;
  std::vector<double> got_v, want_v;
  for (const Prediction& p : preds) {
    const DayBatch& b = *by_day.at(p.day_index);
    if (task == Task::kClassification) {
      if (!b.labeled[p.stock]) continue;
      got.push_back(*p.label);
      want.push_back(b.labels[p.stock]);
    } else {
      got_v.push_back(*p.log_volume);
      want_v.push_back(b.log_volume[p.stock]);
    }
  }
  return task == Task::kClassification ? classification_report(got, want)
                                       : regression_report(got_v, want_v);
}

MetricsReport evaluate(const ForwardFn& forward, const ParameterStore& params,
                       std::span<const DayBatch> batches, Task task, const TargetScaling& target) {
  return score(predict(forward, params, batches, task, target), batches, task);
}

std::optional<ad::Var> batch_loss(const BoundParameters& params,
                                  const ForwardOutput& out, const DayBatch& b,
                                  const TrainConfig& config, std::size_t* corr_calls) {
  std::optional<ad::Var> task_loss;
  if (config.task == Task::kClassification) {
    if (b.labeled_count() > 0) task_loss = ad::cross_entropy(out.prediction, b.labels, b.labeled);
  } else if (b.present_count() > 0) {
    task_loss = ad::mean_squared_error(out.prediction, b.target, b.present);
  }
  if (!task_loss) return std::nullopt;

  std::optional<ad::Var> corr;
  const std::vector<std::size_t> rows = present_rows(b);
  if (config.lambda > 0.0 && !config.ablation.no_dcca && out.h_price.valid() &&
      out.h_volume.valid() && rows.size() >= 2) {
    const dcca::SiameseOutput z = dcca::siamese_forward(
        params, ad::select_rows(out.h_price, rows), ad::select_rows(out.h_volume, rows));
    corr = dcca::corr_loss(z.fx, z.fy, config.dcca_ridge);
    if (corr_calls) ++*corr_calls;
  }
  return combined_loss(*task_loss, corr, config.lambda);
}

TrainResult train(const ForwardFn& forward, ParameterStore params, const TrainData& data,
                  const TrainConfig& config, const TargetScaling& target,
                  const EpochCallback& on_epoch) {
  validate(config);
  if (data.train.empty()) throw ConfigError("training split is empty");
  if (data.dev.empty()) throw ConfigError("dev split is empty");

  TrainResult result;
  result.best = params;
  AdamState adam;
  const AdamOptions opts{config.learning_rate};
  std::optional<MetricsReport> best_dev;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    std::vector<Prediction> seen;
    double loss_sum = 0.0;
    std::size_t loss_n = 0;
    for (const DayBatch& b : data.train) {
      ad::Tape tape;
      const BoundParameters bound = params.bind(tape);
      const ForwardOutput out = forward(tape, bound, b);
      append_predictions(out.prediction.value(), b, config.task, target, seen);
      const std::optional<ad::Var> loss =
          batch_loss(bound, out, b, config, &result.corr_loss_calls);
      if (!loss) {
        ++result.skipped_batches;
        continue;
      }
      tape.backward(*loss);
      GradientMap grads = ParameterStore::gradients(bound);
      if (!all_finite(grads)) {
        ++result.rejected_steps;
        continue;
      }
      clip_gradients(grads, config.clip_norm);
      adam_step(params, grads, adam, opts);
      loss_sum += loss->value()(0, 0);
      ++loss_n;
      ++result.steps;
    }
    rec.train_loss = loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0;
    rec.train = score(seen, data.train, config.task);
    rec.dev = evaluate(forward, params, data.dev, config.task, target);
    if (!data.test.empty()) rec.test = evaluate(forward, params, data.test, config.task, target);
    if (!best_dev || better(rec.dev, *best_dev, config.task)) {
      best_dev = rec.dev;
      result.best = params;
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

}  // namespace cgm
