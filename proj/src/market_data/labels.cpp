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
#include "cgm/market_data/labels.hpp"

#include <cmath>
#include <vector>

#include "cgm/errors.hpp"

namespace cgm {

double first_hour_proportion(std::span<const double> hourly_volumes) {
  if (hourly_volumes.empty()) throw DegenerateError("first_hour_proportion: no bars");
  double total = 0.0;
  for (double v : hourly_volumes) total += v;
  if (!(total > 0.0)) throw DegenerateError("first_hour_proportion: zero total volume");
  return hourly_volumes[0] / total;
}

double first_hour_proportion(std::span<const HourlyBar> day_bars) {
  std::vector<double> volumes(day_bars.size());
  for (const HourlyBar& b : day_bars) {
    if (b.hour < 0 || static_cast<std::size_t>(b.hour) >= day_bars.size()) {
      throw ValidationError("first_hour_proportion: hours are not contiguous from 0");
    }
    volumes[static_cast<std::size_t>(b.hour)] = b.volume;
  }
  return first_hour_proportion(volumes);
}

MovementScore movement_label(std::span<const double> history, double target,
                             double threshold) {
  const std::size_t n = history.size();
  if (n < 2) throw ValidationError("movement_label: need at least two history points");
  double mean = 0.0;
  for (double v : history) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : history) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd < 1e-12) throw DegenerateError("movement_label: zero-variance window");

  MovementScore out;
  out.y_score = (target - mean) / sd;
  if (out.y_score > threshold) {
    out.label = Movement::kPositive;
  } else if (out.y_score < -threshold) {
    out.label = Movement::kNegative;
  }
  return out;
}

}  // namespace cgm
