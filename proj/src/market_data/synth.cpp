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
#include "cgm/market_data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "cgm/errors.hpp"

namespace cgm {

namespace {

constexpr std::array<const char*, 4> kSurgeWords = {"surge", "soar", "jump", "rally"};
constexpr std::array<const char*, 4> kSlumpWords = {"slump", "plunge", "drop", "slide"};
constexpr std::array<const char*, 8> kFiller = {"shares", "after", "report", "analyst",
                                                "update", "market", "today", "trading"};

std::string stock_name(std::size_t s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "S%03zu", s);
  return buf;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

void validate(const SynthConfig& c) {
  const auto fail = [](const std::string& why) { throw ConfigError("synth: " + why); };
  if (c.stocks < 2) fail("need at least 2 stocks, got " + std::to_string(c.stocks));
  if (c.days < c.window + 2) {
    fail("need at least window + 2 = " + std::to_string(c.window + 2) + " days, got " +
         std::to_string(c.days));
  }
  if (c.hours < 2) fail("need at least 2 hours per day");
  if (c.factors < 1) fail("need at least 1 factor");
  if (!(c.noise >= 0.0)) fail("noise must be >= 0");
  if (!(c.news_prob >= 0.0 && c.news_prob <= 1.0)) fail("news probability must lie in [0, 1]");
  if (!(c.negative_fraction >= 0.0 && c.negative_fraction <= 1.0)) {
    fail("negative fraction must lie in [0, 1]");
  }
  if (!(c.newsless_fraction >= 0.0 && c.newsless_fraction <= 1.0)) {
    fail("newsless fraction must lie in [0, 1]");
  }
  if (!(c.volume_factor_scale > 0.0)) fail("volume factor scale must be > 0");
  for (double v : {c.news_effect, c.neighbor_effect, c.pulse}) {
    if (!std::isfinite(v)) fail("effects must be finite");
  }
}

std::vector<Day> weekday_calendar(Day start, std::size_t days) {
  std::vector<Day> out;
  out.reserve(days);
  for (Day d = start; out.size() < days; ++d.ordinal)
    if (is_weekday(d)) out.push_back(d);
  return out;
}

SynthData synth_generate(const SynthConfig& c, std::uint64_t seed) {
  validate(c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto coin = [&] { return unif(rng) < 0.5 ? -1 : 1; };

  const std::size_t S = c.stocks, D = c.days, H = c.hours, F = c.factors;
  const auto calendar = weekday_calendar(c.start, D);

  std::vector<std::string> names(S);
  for (std::size_t s = 0; s < S; ++s) names[s] = stock_name(s);

  // Loading signs and news-free stocks come from seeded shuffles so the
  // requested fractions are hit exactly.
  std::vector<std::size_t> perm(S);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> sign(S, 1);
  const auto negatives = static_cast<std::size_t>(std::lround(c.negative_fraction * S));
  for (std::size_t i = 0; i < negatives; ++i) sign[perm[i]] = -1;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<bool> newsless(S, false);
  const auto silent = static_cast<std::size_t>(std::lround(c.newsless_fraction * S));
  for (std::size_t i = 0; i < silent; ++i) newsless[perm[i]] = true;

  std::vector<double> base_volume(S), start_price(S);
  for (std::size_t s = 0; s < S; ++s) {
    base_volume[s] = std::log(2e4) + (unif(rng) - 0.5);
    start_price[s] = 100.0 * std::exp(unif(rng) - 0.5);
  }
  std::vector<double> profile(H, 0.0);
  for (std::size_t h = 1; h < H; ++h) {
    const double x = static_cast<double>(h) / static_cast<double>(H - 1);
    profile[h] = 0.8 * (x - 0.5) * (x - 0.5) - 0.2;
  }

  SynthData out;
  out.newsless = newsless;
  out.planted = RelationGraph::empty(names);
  out.planted.threshold = 0.0;
  const double w = 1.0 / (1.0 + c.noise * c.noise);
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = i + 1; j < S; ++j) {
      if (i % F != j % F) continue;
      const double v = sign[i] * sign[j] * w;
      const Relation pr = v > 0 ? Relation::kPricePos : Relation::kPriceNeg;
      const Relation vr = v > 0 ? Relation::kVolPos : Relation::kVolNeg;
      out.planted[pr](i, j) = out.planted[pr](j, i) = v;
      out.planted[vr](i, j) = out.planted[vr](j, i) = v;
    }
  }

  std::vector<double> close = start_price;
  std::vector<int> polarity(S, 0), prev_polarity(S, 0);
  std::vector<int> pulse(S, 0), prev_pulse(S, 0);
  std::vector<double> fp(F), fv(F);
  std::vector<double> u(H);
  out.bars.reserve(S * D * H);

  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t f = 0; f < F; ++f) {
      fp[f] = gauss(rng);
      fv[f] = gauss(rng);
    }
    for (std::size_t s = 0; s < S; ++s) pulse[s] = coin();

    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t g = s % F;
      const double r = 0.01 * (sign[s] * fp[g] + c.noise * gauss(rng));
      const double level =
          base_volume[s] + c.volume_factor_scale * (sign[s] * fv[g] + c.noise * gauss(rng));

      int neighbor_sum = 0;
      for (std::size_t j = g; j < S; j += F)
        if (j != s) neighbor_sum += prev_pulse[j];
      const double neighbor = (neighbor_sum > 0) - (neighbor_sum < 0);
      const double z = logit(0.25) + c.news_effect * prev_polarity[s] +
                       c.neighbor_effect * neighbor + c.noise * gauss(rng);
      const double p = 1.0 / (1.0 + std::exp(-z));

      double rest = 0.0;
      for (std::size_t h = 1; h < H; ++h) {
        u[h] = std::exp(level + profile[h] + 0.1 * c.noise * gauss(rng));
        if (h == H - 1) u[h] *= std::exp(c.pulse * pulse[s]);
        rest += u[h];
      }
      u[0] = p / (1.0 - p) * rest;

      std::vector<double> eta(H);
      double eta_mean = 0.0;
      for (auto& e : eta) {
        e = gauss(rng);
        eta_mean += e / static_cast<double>(H);
      }
      for (std::size_t h = 0; h < H; ++h) {
        const double step = r / static_cast<double>(H) + 0.001 * (eta[h] - eta_mean);
        HourlyBar b;
        b.stock = names[s];
        b.day = calendar[d];
        b.hour = static_cast<int>(h);
        b.open = close[s];
        b.close = close[s] * std::exp(step);
        b.high = std::max(b.open, b.close) * std::exp(0.0005 * std::abs(gauss(rng)));
        b.low = std::min(b.open, b.close) * std::exp(-0.0005 * std::abs(gauss(rng)));
        b.volume = u[h];
        close[s] = b.close;
        out.bars.push_back(std::move(b));
      }

      polarity[s] = 0;
      const double draw = unif(rng);
      if (!newsless[s] && draw < c.news_prob) {
        polarity[s] = coin();
        const auto& words = polarity[s] > 0 ? kSurgeWords : kSlumpWords;
        std::string text = names[s];
        text += ' ';
        text += kFiller[static_cast<std::size_t>(unif(rng) * kFiller.size()) % kFiller.size()];
        text += ' ';
        text += words[static_cast<std::size_t>(unif(rng) * words.size()) % words.size()];
        text += ' ';
        text += kFiller[static_cast<std::size_t>(unif(rng) * kFiller.size()) % kFiller.size()];
        out.news.push_back({names[s], calendar[d], std::move(text)});
      }
    }
    prev_polarity = polarity;
    prev_pulse = pulse;
  }
  return out;
}

}  // namespace cgm
