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
#ifndef CGM_TESTS_FIXTURES_HPP_
#define CGM_TESTS_FIXTURES_HPP_

#include <cstdint>

#include "cgm/cli/pipeline.hpp"
#include "cgm/market_data/synth.hpp"

namespace cgm::testing {

// Small planted market: 8 stocks, 3 hours, window 5.
inline SynthConfig small_synth() {
  SynthConfig c;
  c.stocks = 8;
  c.days = 60;
  c.hours = 3;
  c.factors = 2;
  c.window = 5;
  c.neighbor_effect = 1.0;
  c.pulse = 1.0;
  c.news_prob = 0.4;
  return c;
}

inline PreparedData small_data(std::uint64_t seed = 3) {
  const SynthData s = synth_generate(small_synth(), seed);
  DataOptions o;
  o.window_days = 5;
  o.require_news = false;
  return prepare_data(s.bars, s.news, o);
}

inline RunSpec small_spec(std::size_t epochs = 3) {
  RunSpec spec;
  spec.model_config.hidden = 6;
  spec.model_config.embed = 4;
  spec.model_config.word_embed = 4;
  spec.model_config.dcca.output_dim = 2;
  spec.model_config.dcca.widths = {6, 4};
  spec.train.epochs = epochs;
  spec.train.learning_rate = 3e-3;
  spec.train.window_days = 5;
  return spec;
}

}  // namespace cgm::testing

#endif  // CGM_TESTS_FIXTURES_HPP_
