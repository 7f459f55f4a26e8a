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
#ifndef CGM_MARKET_DATA_TYPES_HPP_
#define CGM_MARKET_DATA_TYPES_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgm/numerics/matrix.hpp"

namespace cgm {

// Calendar day as days since 1970-01-01.
struct Day {
  std::int32_t ordinal = 0;
  auto operator<=>(const Day&) const = default;
};

// Accepts YYYY-MM-DD; throws ParseError otherwise.
Day parse_iso_day(std::string_view text);
std::string to_iso(Day day);
bool is_weekday(Day day);

// One stock-hour OHLCV record.
struct HourlyBar {
  std::string stock;
  Day day;
  int hour = 0;  // 0-based slot within the trading day
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;

  bool operator==(const HourlyBar&) const = default;
};

struct NewsRecord {
  std::string stock;
  Day day;
  std::string headline;

  bool operator==(const NewsRecord&) const = default;
};

enum class Movement { kNegative = 0, kPositive = 1 };

// One (stock, target day) instance. Windows hold the n trading days before
// target_day, oldest first, as raw (unscaled) values:
//   price_window  n x 4H  (open, high, low, close per hour)
//   volume_window n x 2H  (volume, share of the day's volume per hour)
struct MovementExample {
  std::size_t stock = 0;       // index into ExampleSet::stocks
  std::size_t day_index = 0;   // index of target_day in ExampleSet::calendar
  Day target_day;
  Matrix price_window;
  Matrix volume_window;
  // Tokenized headlines dated on the last window day (the target-day eve).
  std::vector<std::vector<std::string>> news;
  double y_score = 0.0;
  std::optional<Movement> label;  // set iff |y_score| > threshold
  bool labeled = false;           // member of the classification subset
  double log_volume_target = 0.0;

  bool has_news() const { return !news.empty(); }
};

}  // namespace cgm

#endif  // CGM_MARKET_DATA_TYPES_HPP_
