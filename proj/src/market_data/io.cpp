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
#include "cgm/market_data/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "cgm/errors.hpp"
#include "json.hpp"

namespace cgm {

namespace {

using nlohmann::json;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string bar_identity(const HourlyBar& b) {
  return b.stock + " " + to_iso(b.day) + " hour " + std::to_string(b.hour);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

Day parse_iso_day(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned m = 0, d = 0;
  const auto bad = [&] { return ParseError("invalid ISO date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto p1 = std::from_chars(text.data(), text.data() + 4, y);
  auto p2 = std::from_chars(text.data() + 5, text.data() + 7, m);
  auto p3 = std::from_chars(text.data() + 8, text.data() + 10, d);
  if (p1.ec != std::errc() || p2.ec != std::errc() || p3.ec != std::errc() ||
      p1.ptr != text.data() + 4 || p2.ptr != text.data() + 7 || p3.ptr != text.data() + 10) {
    throw bad();
  }
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw bad();
  return Day{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

std::string to_iso(Day day) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day.ordinal}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

bool is_weekday(Day day) {
  using namespace std::chrono;
  const unsigned wd = weekday{sys_days{days{day.ordinal}}}.c_encoding();
  return wd != 0 && wd != 6;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("invalid number '" + std::string(text) + "'");
  }
  return v;
}

void validate_bar(const HourlyBar& b) {
  const auto fail = [&](const std::string& why) {
    throw ValidationError("bar " + bar_identity(b) + ": " + why);
  };
  if (b.stock.empty()) fail("empty stock id");
  if (b.hour < 0) fail("negative hour");
  for (double p : {b.open, b.high, b.low, b.close}) {
    if (!std::isfinite(p) || !(p > 0.0)) fail("prices must be finite and > 0");
  }
  if (!std::isfinite(b.volume) || b.volume < 0.0) fail("volume must be finite and >= 0");
  if (!(b.low <= std::min(b.open, b.close) && std::max(b.open, b.close) <= b.high)) {
    fail("requires low <= min(open, close) <= max(open, close) <= high");
  }
}

std::vector<HourlyBar> read_bars(std::istream& in) {
  std::vector<HourlyBar> bars;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (trim(line) != kBarsHeader) {
        throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                         std::string(kBarsHeader) + "'");
      }
      continue;
    }
    const auto fields = split(line, ',');
    try {
      if (fields.size() != 8) throw ParseError("expected 8 fields, got " +
                                               std::to_string(fields.size()));
      HourlyBar b;
      b.stock = std::string(trim(fields[0]));
      b.day = parse_iso_day(trim(fields[1]));
      const auto hour_text = trim(fields[2]);
      const auto res = std::from_chars(hour_text.data(), hour_text.data() + hour_text.size(),
                                       b.hour);
      if (res.ec != std::errc() || res.ptr != hour_text.data() + hour_text.size()) {
        throw ParseError("invalid hour '" + std::string(hour_text) + "'");
      }
      b.open = parse_double(trim(fields[3]));
      b.high = parse_double(trim(fields[4]));
      b.low = parse_double(trim(fields[5]));
      b.close = parse_double(trim(fields[6]));
      b.volume = parse_double(trim(fields[7]));
      validate_bar(b);
      bars.push_back(std::move(b));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  const auto key = [](const HourlyBar& b) { return std::tie(b.stock, b.day, b.hour); };
  std::stable_sort(bars.begin(), bars.end(),
                   [&](const HourlyBar& a, const HourlyBar& b) { return key(a) < key(b); });
  for (std::size_t i = 1; i < bars.size(); ++i) {
    if (key(bars[i - 1]) == key(bars[i])) {
      throw ValidationError("duplicate bar " + bar_identity(bars[i]));
    }
  }
  return bars;
}

std::vector<HourlyBar> load_bars(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_bars(in);
}

void write_bars(std::ostream& out, std::vector<HourlyBar> bars) {
  std::sort(bars.begin(), bars.end(), [](const HourlyBar& a, const HourlyBar& b) {
    return std::tie(a.stock, a.day, a.hour) < std::tie(b.stock, b.day, b.hour);
  });
  out << kBarsHeader << '\n';
  for (const HourlyBar& b : bars) {
    if (b.stock.find(',') != std::string::npos) {
      throw ValidationError("stock id '" + b.stock + "' contains a comma");
    }
    out << b.stock << ',' << to_iso(b.day) << ',' << b.hour << ',' << format_double(b.open)
        << ',' << format_double(b.high) << ',' << format_double(b.low) << ','
        << format_double(b.close) << ',' << format_double(b.volume) << '\n';
  }
}

void save_bars(const std::filesystem::path& path, const std::vector<HourlyBar>& bars) {
  auto out = open_out(path);
  write_bars(out, bars);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<NewsRecord> read_news(std::istream& in) {
  std::vector<NewsRecord> news;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      NewsRecord r;
      r.stock = j.at("stock").get<std::string>();
      r.day = parse_iso_day(j.at("day").get<std::string>());
      r.headline = j.at("headline").get<std::string>();
      if (trim(r.headline).empty()) {
        throw ValidationError("empty headline for " + r.stock + " " + to_iso(r.day));
      }
      news.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return news;
}

std::vector<NewsRecord> load_news(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_news(in);
}

void write_news(std::ostream& out, std::vector<NewsRecord> news) {
  std::sort(news.begin(), news.end(), [](const NewsRecord& a, const NewsRecord& b) {
    return std::tie(a.stock, a.day, a.headline) < std::tie(b.stock, b.day, b.headline);
  });
  for (const NewsRecord& r : news) {
    json j;
    j["stock"] = r.stock;
    j["day"] = to_iso(r.day);
    j["headline"] = r.headline;
    out << j.dump() << '\n';
  }
}

void save_news(const std::filesystem::path& path, const std::vector<NewsRecord>& news) {
  auto out = open_out(path);
  write_news(out, news);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<std::string> tokenize_headline(std::string_view headline) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : headline) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

}  // namespace cgm
