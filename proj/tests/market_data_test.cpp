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
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cgm/errors.hpp"
#include "cgm/graph/relation_graph.hpp"
#include "cgm/market_data/examples.hpp"
#include "cgm/market_data/io.hpp"
#include "cgm/market_data/labels.hpp"
#include "cgm/market_data/synth.hpp"
#include "doctest.h"

using namespace cgm;

namespace {

// Random valid bars on consecutive weekdays.
std::vector<HourlyBar> random_bars(std::size_t stocks, std::size_t days, std::size_t hours,
                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<HourlyBar> bars;
  const auto cal = weekday_calendar(parse_iso_day("2020-03-02"), days);
  for (std::size_t s = 0; s < stocks; ++s) {
    for (std::size_t d = 0; d < days; ++d) {
      for (std::size_t h = 0; h < hours; ++h) {
        HourlyBar b;
        b.stock = "T" + std::to_string(s);
        b.day = cal[d];
        b.hour = static_cast<int>(h);
        b.open = 10.0 + u(rng);
        b.close = 10.0 + u(rng);
        b.high = std::max(b.open, b.close) + u(rng);
        b.low = std::min(b.open, b.close) - u(rng);
        b.volume = 100.0 + 1000.0 * u(rng);
        bars.push_back(b);
      }
    }
  }
  return bars;
}

std::string bars_text(const std::vector<HourlyBar>& bars) {
  std::ostringstream out;
  write_bars(out, bars);
  return out.str();
}

void check_same_examples(const ExampleSet& a, const ExampleSet& b) {
  REQUIRE(a.examples.size() == b.examples.size());
  for (std::size_t i = 0; i < a.examples.size(); ++i) {
    const auto& x = a.examples[i];
    const auto& y = b.examples[i];
    CHECK(x.stock == y.stock);
    CHECK(x.day_index == y.day_index);
    CHECK(x.price_window == y.price_window);
    CHECK(x.volume_window == y.volume_window);
    CHECK(x.news == y.news);
    CHECK(x.y_score == y.y_score);
    CHECK(x.label == y.label);
    CHECK(x.labeled == y.labeled);
    CHECK(x.log_volume_target == y.log_volume_target);
  }
}

}  // namespace

TEST_CASE("first_hour_proportion examples") {
  const std::vector<double> uniform = {10, 10, 10, 10, 10};
  const std::vector<double> front = {50, 0, 0, 0, 0};
  const std::vector<double> mixed = {3, 1, 2, 2, 2};
  CHECK(first_hour_proportion(uniform) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(first_hour_proportion(front) == 1.0);
  CHECK(first_hour_proportion(mixed) == doctest::Approx(0.3).epsilon(1e-15));
  const std::vector<double> dead = {0, 0, 0};
  CHECK_THROWS_AS(first_hour_proportion(dead), DegenerateError);
}

TEST_CASE("movement_label examples") {
  const std::vector<double> flat = {0.2, 0.2, 0.2};
  CHECK_THROWS_AS(movement_label(flat, 0.3), DegenerateError);

  const std::vector<double> v = {0.2, 0.4};
  const auto score = movement_label(v, 0.5);
  // mean 0.3, sd sqrt(0.02)
  CHECK(score.y_score == doctest::Approx(0.2 / std::sqrt(0.02)).epsilon(1e-12));
  CHECK(score.y_score == doctest::Approx(1.41421356).epsilon(1e-8));
  REQUIRE(score.label.has_value());
  CHECK(*score.label == Movement::kPositive);

  const auto mid = movement_label(v, 0.3);
  CHECK(std::abs(mid.y_score) < 1e-12);
  CHECK_FALSE(mid.label.has_value());

  const auto low = movement_label(v, 0.1);
  REQUIRE(low.label.has_value());
  CHECK(*low.label == Movement::kNegative);

  const std::vector<double> one = {0.2};
  CHECK_THROWS_AS(movement_label(one, 0.3), ValidationError);
}

TEST_CASE("movement_label is scale invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(20), scaled(20);
    for (auto& x : v) x = u(rng);
    const double target = u(rng);
    const double c = 0.1 + 9.9 * (u(rng) - 0.05) / 0.9;
    for (std::size_t i = 0; i < v.size(); ++i) scaled[i] = c * v[i];
    const double a = movement_label(v, target).y_score;
    const double b = movement_label(scaled, c * target).y_score;
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("build_examples counting") {
  std::mt19937_64 rng(5);
  const auto bars = random_bars(4, 21, 5, rng);
  ExampleOptions opt;
  opt.window_days = 20;
  const auto set = build_examples(bars, {}, opt);
  CHECK(set.examples.size() == 4);
  for (std::size_t s = 0; s < 4; ++s) CHECK(set.examples[s].stock == s);
  CHECK(set.examples[0].price_window.rows() == 20);
  CHECK(set.examples[0].price_window.cols() == 20);
  CHECK(set.examples[0].volume_window.cols() == 10);
}

TEST_CASE("classification subset needs news and a large move") {
  // History alternates 0.2 / 0.4 (mean 0.3, sd ~0.1026 over 20 days); a
  // target share of 0.33 gives Y ~ 0.29, below the threshold.
  const auto cal = weekday_calendar(parse_iso_day("2021-01-04"), 21);
  std::vector<HourlyBar> bars;
  for (std::size_t d = 0; d < 21; ++d) {
    const double p = d == 20 ? 0.33 : (d % 2 == 0 ? 0.2 : 0.4);
    for (int h = 0; h < 2; ++h) {
      HourlyBar b{"A", cal[d], h, 10, 11, 9, 10, h == 0 ? 1000 * p : 1000 * (1 - p)};
      bars.push_back(b);
    }
  }
  const std::vector<NewsRecord> news = {{"A", cal[19], "A beats forecasts"}};
  ExampleOptions opt;
  const auto set = build_examples(bars, news, opt);
  REQUIRE(set.examples.size() == 1);
  const auto& ex = set.examples[0];
  CHECK(ex.has_news());
  CHECK(std::abs(ex.y_score) < 0.5);
  CHECK(std::abs(ex.y_score) > 0.1);
  CHECK_FALSE(ex.labeled);

  // Same window with a decisive move is included.
  bars[2 * 20].volume = 900;
  bars[2 * 20 + 1].volume = 100;
  const auto moved = build_examples(bars, news, opt);
  CHECK(moved.examples[0].labeled);
  // and dropped again without news.
  CHECK_FALSE(build_examples(bars, {}, opt).examples[0].labeled);
}

TEST_CASE("build_examples matches brute-force enumeration") {
  std::mt19937_64 rng(11);
  const std::size_t S = 3, D = 30, H = 5, n = 20;
  auto bars = random_bars(S, D, H, rng);
  // Knock out one bar so one stock has an incomplete day.
  bars.erase(bars.begin() + static_cast<std::ptrdiff_t>(D * H + 23 * H + 2));
  const auto cal = weekday_calendar(parse_iso_day("2020-03-02"), D);
  std::vector<NewsRecord> news = {{"T0", cal[21], "x rises"}, {"T2", cal[25], "y falls"}};

  ExampleOptions opt;
  const auto set = build_examples(bars, news, opt);

  std::size_t expected = 0, expected_labeled = 0;
  for (std::size_t s = 0; s < S; ++s) {
    const std::string name = "T" + std::to_string(s);
    const auto bars_of = [&](std::size_t d) {
      std::vector<double> vol;
      for (const auto& b : bars)
        if (b.stock == name && b.day == cal[d]) vol.push_back(b.volume);
      return vol;
    };
    for (std::size_t t = n; t < D; ++t) {
      bool complete = true;
      std::vector<double> props;
      for (std::size_t d = t - n; d <= t; ++d) {
        const auto vol = bars_of(d);
        if (vol.size() != H) complete = false;
        double tot = 0;
        for (double x : vol) tot += x;
        if (!vol.empty()) props.push_back(vol[0] / tot);
      }
      if (!complete) continue;
      ++expected;
      double mean = 0;
      for (std::size_t k = 0; k < n; ++k) mean += props[k] / n;
      double var = 0;
      for (std::size_t k = 0; k < n; ++k) var += (props[k] - mean) * (props[k] - mean);
      const double y = (props[n] - mean) / std::sqrt(var / (n - 1));
      bool has_news = false;
      for (const auto& r : news) has_news = has_news || (r.stock == name && r.day == cal[t - 1]);
      if (std::abs(y) > 0.5 && has_news) ++expected_labeled;
    }
  }
  std::size_t labeled = 0;
  for (const auto& ex : set.examples) labeled += ex.labeled ? 1 : 0;
  CHECK(set.examples.size() == expected);
  CHECK(labeled == expected_labeled);
  CHECK(set.incomplete_windows == S * (D - n) - expected);
  CHECK(expected == 30 - 7);
}

TEST_CASE("build_examples is independent of record order") {
  SynthConfig cfg;
  cfg.stocks = 4;
  cfg.days = 30;
  auto data = synth_generate(cfg, 21);
  const auto a = build_examples(data.bars, data.news, ExampleOptions{});
  std::mt19937_64 rng(2);
  std::shuffle(data.bars.begin(), data.bars.end(), rng);
  std::shuffle(data.news.begin(), data.news.end(), rng);
  const auto b = build_examples(data.bars, data.news, ExampleOptions{});
  check_same_examples(a, b);
}

TEST_CASE("windows have no look-ahead") {
  SynthConfig cfg;
  cfg.stocks = 3;
  cfg.days = 26;
  const auto data = synth_generate(cfg, 4);
  const auto base = build_examples(data.bars, data.news, ExampleOptions{});
  REQUIRE(!base.examples.empty());
  for (const auto& ex : base.examples) {
    auto bars = data.bars;
    for (auto& b : bars) {
      if (b.day >= ex.target_day) {
        b.volume *= 3.0;
        b.high *= 1.5;
        b.close = b.high;
      }
    }
    const auto changed = build_examples(bars, data.news, ExampleOptions{});
    bool found = false;
    for (const auto& other : changed.examples) {
      if (other.stock == ex.stock && other.day_index == ex.day_index) {
        found = true;
        CHECK(other.price_window == ex.price_window);
        CHECK(other.volume_window == ex.volume_window);
      }
    }
    CHECK(found);
  }
}

TEST_CASE("label counts partition candidates") {
  SynthConfig cfg;
  cfg.stocks = 6;
  cfg.days = 60;
  const auto data = synth_generate(cfg, 8);
  ExampleOptions opt;
  opt.require_news = false;
  const auto set = build_examples(data.bars, data.news, opt);
  std::size_t pos = 0, neg = 0, none = 0;
  for (const auto& ex : set.examples) {
    if (!ex.label) {
      ++none;
    } else if (*ex.label == Movement::kPositive) {
      ++pos;
    } else {
      ++neg;
    }
  }
  CHECK(pos + neg + none == set.examples.size());
  CHECK(pos > 0);
  CHECK(neg > 0);
  CHECK(set.degenerate_windows == 0);
}

TEST_CASE("bars csv io") {
  std::istringstream empty("");
  CHECK(read_bars(empty).empty());

  std::istringstream bad(
      "stock,day,hour,open,high,low,close,volume\n"
      "A,2020-01-02,0,10,11,9,10,100\n"
      "A,2020-01-02,1,10,9,11,10,100\n");
  try {
    read_bars(bad);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("A 2020-01-02 hour 1") != std::string::npos);
  }

  std::istringstream garbage("stock,day,hour,open,high,low,close,volume\nA,2020-01-02,x,1,1,1,1,1\n");
  CHECK_THROWS_WITH_AS(read_bars(garbage), doctest::Contains("line 2"), ParseError);

  std::istringstream dup(
      "stock,day,hour,open,high,low,close,volume\n"
      "A,2020-01-02,0,10,11,9,10,100\n"
      "A,2020-01-02,0,10,11,9,10,100\n");
  CHECK_THROWS_AS(read_bars(dup), ValidationError);
}

TEST_CASE("bars and news round-trip byte-identically") {
  SynthConfig cfg;
  cfg.stocks = 5;
  cfg.days = 25;
  const auto data = synth_generate(cfg, 99);
  const std::string first = bars_text(data.bars);
  std::istringstream in(first);
  const auto loaded = read_bars(in);
  CHECK(loaded.size() == data.bars.size());
  CHECK(bars_text(loaded) == first);
  auto sorted = data.bars;
  std::sort(sorted.begin(), sorted.end(), [](const HourlyBar& a, const HourlyBar& b) {
    return std::tie(a.stock, a.day, a.hour) < std::tie(b.stock, b.day, b.hour);
  });
  CHECK(loaded == sorted);

  std::ostringstream n1;
  write_news(n1, data.news);
  std::istringstream nin(n1.str());
  const auto news = read_news(nin);
  CHECK(news.size() == data.news.size());
  std::ostringstream n2;
  write_news(n2, news);
  CHECK(n1.str() == n2.str());

  std::istringstream blank("{\"stock\":\"A\",\"day\":\"2020-01-02\",\"headline\":\"  \"}\n");
  CHECK_THROWS_AS(read_news(blank), ValidationError);
}

TEST_CASE("tokenize_headline") {
  const auto t = tokenize_headline("S001 Shares SURGE, after-report!");
  const std::vector<std::string> want = {"s001", "shares", "surge", "after", "report"};
  CHECK(t == want);
}

TEST_CASE("synth config validation") {
  SynthConfig cfg;
  cfg.stocks = 1;
  CHECK_THROWS_AS(synth_generate(cfg, 1), ConfigError);
  cfg.stocks = 3;
  cfg.days = 21;
  CHECK_THROWS_AS(synth_generate(cfg, 1), ConfigError);
  cfg.days = 22;
  CHECK_NOTHROW(synth_generate(cfg, 1));
}

TEST_CASE("synth without news or noise gives identical first-hour shares") {
  SynthConfig cfg;
  cfg.stocks = 4;
  cfg.days = 25;
  cfg.factors = 1;
  cfg.news_effect = 0.0;
  cfg.noise = 0.0;
  const auto data = synth_generate(cfg, 12);
  const auto panel = build_panel(data.bars);
  for (std::size_t d = 0; d < panel.calendar.size(); ++d) {
    const double p0 = first_hour_proportion(panel.cells[0][d].volume);
    for (std::size_t s = 1; s < panel.stocks.size(); ++s)
      CHECK(first_hour_proportion(panel.cells[s][d].volume) == doctest::Approx(p0).epsilon(1e-12));
  }
}

TEST_CASE("synth same-factor stocks have perfectly correlated volumes") {
  SynthConfig cfg;
  cfg.stocks = 2;
  cfg.days = 40;
  cfg.factors = 1;
  cfg.noise = 0.0;
  cfg.negative_fraction = 0.0;
  cfg.news_effect = 0.0;
  const auto data = synth_generate(cfg, 3);
  const auto panel = build_panel(data.bars);
  std::vector<double> a, b;
  for (std::size_t d = 0; d < panel.calendar.size(); ++d) {
    a.push_back(panel.cells[0][d].total_volume());
    b.push_back(panel.cells[1][d].total_volume());
  }
  CHECK(pearson(a, b) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("synth is deterministic and trades only on weekdays") {
  SynthConfig cfg;
  cfg.stocks = 5;
  cfg.days = 30;
  cfg.pulse = 0.7;
  cfg.neighbor_effect = 1.0;
  const auto a = synth_generate(cfg, 77);
  const auto b = synth_generate(cfg, 77);
  CHECK(bars_text(a.bars) == bars_text(b.bars));
  CHECK(a.news == b.news);
  CHECK(a.planted.adjacency == b.planted.adjacency);
  for (const auto& bar : a.bars) {
    CHECK(is_weekday(bar.day));
    CHECK_NOTHROW(validate_bar(bar));
  }
  const auto c = synth_generate(cfg, 78);
  CHECK(bars_text(a.bars) != bars_text(c.bars));
}

TEST_CASE("synth newsless stocks never get headlines") {
  SynthConfig cfg;
  cfg.stocks = 10;
  cfg.days = 40;
  cfg.news_prob = 0.8;
  cfg.newsless_fraction = 0.5;
  const auto data = synth_generate(cfg, 5);
  CHECK(std::count(data.newsless.begin(), data.newsless.end(), true) == 5);
  for (const auto& r : data.news) {
    const auto s = static_cast<std::size_t>(std::stoi(r.stock.substr(1)));
    CHECK_FALSE(data.newsless[s]);
  }
}
