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
#ifndef CGM_MARKET_DATA_IO_HPP_
#define CGM_MARKET_DATA_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cgm/market_data/types.hpp"

namespace cgm {

inline constexpr std::string_view kBarsHeader = "stock,day,hour,open,high,low,close,volume";

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

// Bars CSV. Records come back sorted by (stock, day, hour). Throws ParseError
// (with line number) for malformed rows and ValidationError for OHLC or
// volume violations and duplicate (stock, day, hour) keys.
std::vector<HourlyBar> read_bars(std::istream& in);
std::vector<HourlyBar> load_bars(const std::filesystem::path& path);
void write_bars(std::ostream& out, std::vector<HourlyBar> bars);
void save_bars(const std::filesystem::path& path, const std::vector<HourlyBar>& bars);

// Throws ValidationError naming the record when an invariant fails.
void validate_bar(const HourlyBar& bar);

// News JSONL: {"stock": ..., "day": "YYYY-MM-DD", "headline": ...} per line.
std::vector<NewsRecord> read_news(std::istream& in);
std::vector<NewsRecord> load_news(const std::filesystem::path& path);
void write_news(std::ostream& out, std::vector<NewsRecord> news);
void save_news(const std::filesystem::path& path, const std::vector<NewsRecord>& news);

// Lowercased alphanumeric tokens of a headline.
std::vector<std::string> tokenize_headline(std::string_view headline);

}  // namespace cgm

#endif  // CGM_MARKET_DATA_IO_HPP_
