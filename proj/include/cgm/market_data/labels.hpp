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
#ifndef CGM_MARKET_DATA_LABELS_HPP_
#define CGM_MARKET_DATA_LABELS_HPP_

#include <optional>
#include <span>

#include "cgm/market_data/types.hpp"

namespace cgm {

inline constexpr double kDefaultMovementThreshold = 0.5;

// volume(hour 0) / total volume over the day's bars. Throws DegenerateError
// when the day's total volume is zero.
double first_hour_proportion(std::span<const HourlyBar> day_bars);
double first_hour_proportion(std::span<const double> hourly_volumes);

struct MovementScore {
  double y_score = 0.0;
  std::optional<Movement> label;
};

// Standardizes the target-day proportion against the preceding series:
// Y = (target - mean) / sample_std, with the n-1 divisor. Positive when
// Y > threshold, negative when Y < -threshold, unlabeled otherwise.
// Throws DegenerateError when the sample std is below 1e-12 and
// ValidationError when fewer than two history points are given.
MovementScore movement_label(std::span<const double> history, double target,
                             double threshold = kDefaultMovementThreshold);

}  // namespace cgm

#endif  // CGM_MARKET_DATA_LABELS_HPP_
