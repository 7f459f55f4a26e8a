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
#ifndef CGM_MARKET_DATA_EXAMPLES_HPP_
#define CGM_MARKET_DATA_EXAMPLES_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "cgm/market_data/labels.hpp"
#include "cgm/market_data/types.hpp"

namespace cgm {

// Bars regrouped as a (stock x trading day) grid. A cell is complete when
// the stock has every hour 0..hours-1 on that day.
struct MarketPanel {
  struct Cell {
    bool complete = false;
    std::vector<double> ohlc;    // 4 * hours, hour-major (o, h, l, c)
    std::vector<double> volume;  // hours
    double close() const { return ohlc.empty() ? 0.0 : ohlc.back(); }
    double total_volume() const;
  };

  std::vector<std::string> stocks;  // sorted
  std::vector<Day> calendar;        // sorted union of trading days
  std::size_t hours = 0;
  std::vector<std::vector<Cell>> cells;  // [stock][day index]

  std::size_t stock_index(const std::string& name) const;  // throws ConfigError
  std::size_t day_index(Day day) const;                    // throws ConfigError
};

// Hours per day default to max(hour) + 1 over the input when 0.
MarketPanel build_panel(std::vector<HourlyBar> bars, std::size_t hours = 0);

struct ExampleOptions {
  std::size_t window_days = 20;
  double movement_threshold = kDefaultMovementThreshold;
  // Classification subset also requires news on the target-day eve.
  bool require_news = true;
};

struct ExampleSet {
  std::vector<std::string> stocks;
  std::vector<Day> calendar;
  std::size_t hours = 0;
  std::size_t window_days = 0;
  std::vector<MovementExample> examples;  // sorted by (day_index, stock)
  std::size_t degenerate_windows = 0;     // zero variance or zero volume
  std::size_t incomplete_windows = 0;     // missing bars inside the window
};

// One example per (stock, calendar day) with a complete n-day history and a
// complete target day. Headlines dated in [calendar[t-1], calendar[t]) are
// the target's news. Degenerate windows are skipped and counted.
ExampleSet build_examples(const MarketPanel& panel, const std::vector<NewsRecord>& news,
                          const ExampleOptions& options);
ExampleSet build_examples(const std::vector<HourlyBar>& bars,
                          const std::vector<NewsRecord>& news, const ExampleOptions& options);

}  // namespace cgm

#endif  // CGM_MARKET_DATA_EXAMPLES_HPP_
