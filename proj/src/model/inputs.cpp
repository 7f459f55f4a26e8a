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
#include "cgm/model/inputs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cgm/errors.hpp"
#include "cgm/util/hash.hpp"

namespace cgm {

namespace {

struct Moments {
  double sum = 0.0;
  double sq = 0.0;
  double n = 0.0;

  void add(double x) {
    sum += x;
    sq += x * x;
    n += 1.0;
  }
  std::pair<double, double> mean_sd() const {
    if (n < 2.0) return {n > 0.0 ? sum / n : 0.0, 1.0};
    const double mean = sum / n;
    const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
    const double sd = std::sqrt(var);
    return {mean, sd > 1e-12 ? sd : 1.0};
  }
};

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{std::string(kUnkToken)}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_[0] != kUnkToken) {
    throw ValidationError("vocabulary must start with " + std::string(kUnkToken));
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::string Vocabulary::hash() const {
  std::string joined;
  for (const auto& t : tokens_) {
    joined += t;
    joined += '\n';
  }
  return sha256_hex(joined);
}

Vocabulary build_vocabulary(const ExampleSet& set, std::span<const std::size_t> examples) {
  std::set<std::string> seen;
  for (std::size_t i : examples)
    for (const auto& headline : set.examples.at(i).news)
      for (const auto& tok : headline) seen.insert(tok);
  seen.erase(std::string(Vocabulary::kUnkToken));
  std::vector<std::string> tokens{std::string(Vocabulary::kUnkToken)};
  tokens.insert(tokens.end(), seen.begin(), seen.end());
  return Vocabulary(std::move(tokens));
}

FeatureScaler FeatureScaler::fit(const ExampleSet& set, std::span<const std::size_t> examples) {
  const std::size_t n = set.window_days;
  const std::size_t h = set.hours;
  std::vector<Moments> price(set.stocks.size()), volume(set.stocks.size());
  std::set<std::pair<std::size_t, std::size_t>> done;
  for (std::size_t i : examples) {
    const MovementExample& ex = set.examples.at(i);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t day = ex.day_index - n + k;
      if (!done.insert({ex.stock, day}).second) continue;
      for (std::size_t j = 0; j < 4 * h; ++j) price[ex.stock].add(ex.price_window(k, j));
      for (std::size_t j = 0; j < h; ++j)
        volume[ex.stock].add(std::log1p(ex.volume_window(k, 2 * j)));
    }
  }
  FeatureScaler out;
  out.stocks.resize(set.stocks.size());
  for (std::size_t s = 0; s < set.stocks.size(); ++s) {
    std::tie(out.stocks[s].price_mean, out.stocks[s].price_sd) = price[s].mean_sd();
    std::tie(out.stocks[s].log_volume_mean, out.stocks[s].log_volume_sd) = volume[s].mean_sd();
  }
  return out;
}

Matrix FeatureScaler::scale_price(const MovementExample& ex) const {
  const StockScale& sc = stocks.at(ex.stock);
  Matrix out = ex.price_window;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - sc.price_mean) / sc.price_sd;
  return out;
}

Matrix FeatureScaler::scale_volume(const MovementExample& ex) const {
  const StockScale& sc = stocks.at(ex.stock);
  Matrix out = ex.volume_window;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); c += 2)
      out(r, c) = (std::log1p(out(r, c)) - sc.log_volume_mean) / sc.log_volume_sd;
  return out;
}

TargetScaling TargetScaling::fit(const ExampleSet& set, std::span<const std::size_t> examples) {
  Moments m;
  for (std::size_t i : examples) m.add(set.examples.at(i).log_volume_target);
  TargetScaling out;
  std::tie(out.mean, out.sd) = m.mean_sd();
  return out;
}

std::size_t DayBatch::labeled_count() const {
  return static_cast<std::size_t>(std::count(labeled.begin(), labeled.end(), true));
}

std::size_t DayBatch::present_count() const {
  return static_cast<std::size_t>(std::count(present.begin(), present.end(), true));
}

std::vector<DayBatch> make_day_batches(const ExampleSet& set, std::span<const std::size_t> examples,
                                       const FeatureScaler& scaler, const Vocabulary& vocab,
                                       const TargetScaling& target) {
  const std::size_t S = set.stocks.size();
  const std::size_t n = set.window_days;
  const std::size_t h = set.hours;
  std::map<std::size_t, std::vector<std::size_t>> by_day;
  for (std::size_t i : examples) by_day[set.examples.at(i).day_index].push_back(i);

  std::vector<DayBatch> out;
  out.reserve(by_day.size());
  for (const auto& [day, members] : by_day) {
    DayBatch b;
    b.day_index = day;
    b.day = set.calendar.at(day);
    b.price_steps.assign(n, Matrix(S, 4 * h));
    b.volume_steps.assign(n, Matrix(S, 2 * h));
    b.news.assign(S, {});
    b.present.assign(S, false);
    b.labeled.assign(S, false);
    b.labels.assign(S, -1);
    b.target.assign(S, 0.0);
    b.log_volume.assign(S, 0.0);
    for (std::size_t i : members) {
      const MovementExample& ex = set.examples[i];
      const std::size_t s = ex.stock;
      if (b.present[s]) throw ValidationError("two examples for one stock and day");
      b.present[s] = true;
      const Matrix p = scaler.scale_price(ex);
      const Matrix v = scaler.scale_volume(ex);
      for (std::size_t k = 0; k < n; ++k) {
        std::copy(p.row(k).begin(), p.row(k).end(), b.price_steps[k].row(s).begin());
        std::copy(v.row(k).begin(), v.row(k).end(), b.volume_steps[k].row(s).begin());
      }
      for (const auto& headline : ex.news) {
        if (!headline.empty()) b.news[s].push_back(vocab.encode(headline));
      }
      if (ex.label) b.labels[s] = *ex.label == Movement::kPositive ? 1 : 0;
      b.labeled[s] = ex.labeled;
      b.log_volume[s] = ex.log_volume_target;
      b.target[s] = target.forward(ex.log_volume_target);
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace cgm
