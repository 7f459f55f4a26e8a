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
#ifndef CGM_MARKET_DATA_SYNTH_HPP_
#define CGM_MARKET_DATA_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cgm/graph/relation_graph.hpp"
#include "cgm/market_data/types.hpp"

namespace cgm {

// Latent-factor market. Stock s loads on factor s mod factors with sign +1,
// or -1 for a seeded negative_fraction of stocks. Daily returns and daily
// volume levels follow independent price and volume factors, so same-group
// stocks are correlated and cross-group stocks are not.
//
// First-hour share on day d has logit
//   logit(0.25) + news_effect * polarity(d-1)
//               + neighbor_effect * sign(sum of same-group pulses on d-1)
//               + noise * eps
// where polarity is +1/-1 for a surge/slump headline on d-1 and 0 without
// one, and pulses are +-1 draws that scale the last hour's volume by
// exp(pulse * draw). The first-hour share enters the first-hour log volume
// additively through its logit.
struct SynthConfig {
  std::size_t stocks = 20;
  std::size_t days = 80;
  std::size_t hours = 5;
  std::size_t factors = 3;
  std::size_t window = 20;  // only used to validate days
  double news_effect = 1.5;
  double noise = 0.1;
  double news_prob = 0.3;
  double neighbor_effect = 0.0;
  double pulse = 0.0;
  double negative_fraction = 0.2;
  double volume_factor_scale = 1.0;
  double newsless_fraction = 0.0;  // stocks that never get headlines
  Day start{16440};                // 2015-01-05
};

// Throws ConfigError for stocks < 2, days < window + 2, hours < 2,
// factors < 1 or out-of-range rates.
void validate(const SynthConfig& config);

struct SynthData {
  std::vector<HourlyBar> bars;
  std::vector<NewsRecord> news;
  RelationGraph planted;  // same-group pairs, weight = loading product / (1 + noise^2)
  std::vector<bool> newsless;
};

SynthData synth_generate(const SynthConfig& config, std::uint64_t seed);

// Weekday calendar of `days` trading days from `start` (inclusive if a weekday).
std::vector<Day> weekday_calendar(Day start, std::size_t days);

}  // namespace cgm

#endif  // CGM_MARKET_DATA_SYNTH_HPP_
