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
#include "cgm/market_data/examples.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "cgm/errors.hpp"
#include "cgm/market_data/io.hpp"

namespace cgm {

double MarketPanel::Cell::total_volume() const {
  double t = 0.0;
  for (double v : volume) t += v;
  return t;
}

std::size_t MarketPanel::stock_index(const std::string& name) const {
  auto it = std::lower_bound(stocks.begin(), stocks.end(), name);
  if (it == stocks.end() || *it != name) throw ConfigError("unknown stock '" + name + "'");
  return static_cast<std::size_t>(it - stocks.begin());
}

std::size_t MarketPanel::day_index(Day day) const {
  auto it = std::lower_bound(calendar.begin(), calendar.end(), day);
  if (it == calendar.end() || *it != day) {
    throw ConfigError("day " + to_iso(day) + " is not a trading day");
  }
  return static_cast<std::size_t>(it - calendar.begin());
}

MarketPanel build_panel(std::vector<HourlyBar> bars, std::size_t hours) {
  std::sort(bars.begin(), bars.end(), [](const HourlyBar& a, const HourlyBar& b) {
    return std::tie(a.stock, a.day, a.hour) < std::tie(b.stock, b.day, b.hour);
  });
  MarketPanel panel;
  for (const HourlyBar& b : bars) {
    panel.stocks.push_back(b.stock);
    panel.calendar.push_back(b.day);
    panel.hours = std::max(panel.hours, static_cast<std::size_t>(b.hour) + 1);
  }
  if (hours != 0) panel.hours = hours;
  std::sort(panel.stocks.begin(), panel.stocks.end());
  panel.stocks.erase(std::unique(panel.stocks.begin(), panel.stocks.end()), panel.stocks.end());
  std::sort(panel.calendar.begin(), panel.calendar.end());
  panel.calendar.erase(std::unique(panel.calendar.begin(), panel.calendar.end()),
                       panel.calendar.end());

  const std::size_t h = panel.hours;
  panel.cells.assign(panel.stocks.size(), std::vector<MarketPanel::Cell>(panel.calendar.size()));
  std::vector<std::vector<std::size_t>> seen(panel.stocks.size(),
                                             std::vector<std::size_t>(panel.calendar.size()));
  for (const HourlyBar& b : bars) {
    const std::size_t s = panel.stock_index(b.stock);
    const std::size_t d = panel.day_index(b.day);
    const auto hour = static_cast<std::size_t>(b.hour);
    if (hour >= h) continue;
    auto& cell = panel.cells[s][d];
    if (cell.ohlc.empty()) {
      cell.ohlc.assign(4 * h, 0.0);
      cell.volume.assign(h, 0.0);
    }
    cell.ohlc[4 * hour + 0] = b.open;
    cell.ohlc[4 * hour + 1] = b.high;
    cell.ohlc[4 * hour + 2] = b.low;
    cell.ohlc[4 * hour + 3] = b.close;
    cell.volume[hour] = b.volume;
    ++seen[s][d];
  }
  for (std::size_t s = 0; s < panel.stocks.size(); ++s)
    for (std::size_t d = 0; d < panel.calendar.size(); ++d)
      panel.cells[s][d].complete = seen[s][d] == h;
  return panel;
}

ExampleSet build_examples(const MarketPanel& panel, const std::vector<NewsRecord>& news,
                          const ExampleOptions& options) {
  const std::size_t n = options.window_days;
  if (n < 2) throw ConfigError("build_examples: window must span at least 2 days");
  const std::size_t h = panel.hours;

  // (stock, calendar slot) -> tokenized headlines, slot = index of the last
  // trading day on or before the headline's date.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::string>> headlines;
  for (const NewsRecord& r : news) {
    auto sit = std::lower_bound(panel.stocks.begin(), panel.stocks.end(), r.stock);
    if (sit == panel.stocks.end() || *sit != r.stock) continue;
    auto dit = std::upper_bound(panel.calendar.begin(), panel.calendar.end(), r.day);
    if (dit == panel.calendar.begin()) continue;
    const auto slot = static_cast<std::size_t>(dit - panel.calendar.begin()) - 1;
    headlines[{static_cast<std::size_t>(sit - panel.stocks.begin()), slot}].push_back(r.headline);
  }

  ExampleSet out;
  out.stocks = panel.stocks;
  out.calendar = panel.calendar;
  out.hours = h;
  out.window_days = n;

  for (std::size_t t = n; t < panel.calendar.size(); ++t) {
    for (std::size_t s = 0; s < panel.stocks.size(); ++s) {
      const auto& row = panel.cells[s];
      bool complete = row[t].complete;
      for (std::size_t k = t - n; k < t && complete; ++k) complete = row[k].complete;
      if (!complete) {
        ++out.incomplete_windows;
        continue;
      }

      MovementExample ex;
      ex.stock = s;
      ex.day_index = t;
      ex.target_day = panel.calendar[t];
      try {
        std::vector<double> history(n);
        for (std::size_t k = 0; k < n; ++k)
          history[k] = first_hour_proportion(row[t - n + k].volume);
        const double target = first_hour_proportion(row[t].volume);
        const MovementScore score = movement_label(history, target, options.movement_threshold);
        ex.y_score = score.y_score;
        ex.label = score.label;
      } catch (const DegenerateError&) {
        ++out.degenerate_windows;
        continue;
      }
      if (!(row[t].volume[0] > 0.0)) {
        ++out.degenerate_windows;
        continue;
      }
      ex.log_volume_target = std::log(row[t].volume[0]);

      ex.price_window = Matrix(n, 4 * h);
      ex.volume_window = Matrix(n, 2 * h);
      for (std::size_t k = 0; k < n; ++k) {
        const auto& cell = row[t - n + k];
        const double total = cell.total_volume();
        for (std::size_t j = 0; j < 4 * h; ++j) ex.price_window(k, j) = cell.ohlc[j];
        for (std::size_t j = 0; j < h; ++j) {
          ex.volume_window(k, 2 * j) = cell.volume[j];
          ex.volume_window(k, 2 * j + 1) = cell.volume[j] / total;
        }
      }

      if (auto it = headlines.find({s, t - 1}); it != headlines.end()) {
        std::vector<std::string> sorted = it->second;
        std::sort(sorted.begin(), sorted.end());
        for (const auto& text : sorted) ex.news.push_back(tokenize_headline(text));
      }
      ex.labeled = ex.label.has_value() && (!options.require_news || ex.has_news());
      out.examples.push_back(std::move(ex));
    }
  }
  return out;
}

ExampleSet build_examples(const std::vector<HourlyBar>& bars,
                          const std::vector<NewsRecord>& news, const ExampleOptions& options) {
  return build_examples(build_panel(bars), news, options);
}

}  // namespace cgm
