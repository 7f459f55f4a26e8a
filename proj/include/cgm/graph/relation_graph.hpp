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
#ifndef CGM_GRAPH_RELATION_GRAPH_HPP_
#define CGM_GRAPH_RELATION_GRAPH_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgm/market_data/examples.hpp"
#include "cgm/numerics/matrix.hpp"

namespace cgm {

enum class Relation : std::size_t { kPricePos = 0, kPriceNeg = 1, kVolPos = 2, kVolNeg = 3 };
inline constexpr std::size_t kRelationCount = 4;
inline constexpr std::array<Relation, kRelationCount> kAllRelations = {
    Relation::kPricePos, Relation::kPriceNeg, Relation::kVolPos, Relation::kVolNeg};

std::string_view relation_name(Relation r);  // price_pos, price_neg, vol_pos, vol_neg
Relation parse_relation(std::string_view name);

// Four signed, symmetric, zero-diagonal adjacency matrices over one stock
// universe. Weights are the correlations that produced the edges.
struct RelationGraph {
  std::vector<std::string> stocks;
  double threshold = 0.0;
  std::array<Matrix, kRelationCount> adjacency;
  std::size_t skipped_pairs = 0;  // pairs with an undefined correlation

  static RelationGraph empty(std::vector<std::string> stocks);
  std::size_t size() const { return stocks.size(); }
  Matrix& operator[](Relation r) { return adjacency[static_cast<std::size_t>(r)]; }
  const Matrix& operator[](Relation r) const { return adjacency[static_cast<std::size_t>(r)]; }
  std::size_t edge_count(Relation r) const;  // undirected edges
  std::size_t edge_count() const;
};

// Per relation: D^-1/2 |A| D^-1/2 with D the degree of |A|. Isolated nodes
// get zero rows.
struct NormalizedAdjacency {
  std::array<Matrix, kRelationCount> relations;
  const Matrix& operator[](Relation r) const { return relations[static_cast<std::size_t>(r)]; }
  std::size_t size() const { return relations[0].rows(); }
  static NormalizedAdjacency zeros(std::size_t stocks);
};

enum class CorrelationMethod { kPearson, kSpearman };

// Pearson product-moment correlation, clamped to [-1, 1]. Throws
// ValidationError for mismatched or too-short (< 3) series and
// DegenerateError when either series is constant.
double pearson(std::span<const double> x, std::span<const double> y);
// Pearson on average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Aligned per-stock daily series used for correlation.
struct GraphSeries {
  std::vector<std::vector<double>> price;   // close-to-close log returns
  std::vector<std::vector<double>> volume;  // first differences of log(1 + day volume)
};

// Uses calendar days [0, end_day) where every stock has complete bars on the
// day and the day before. end_day = 0 means the whole calendar.
GraphSeries graph_series(const MarketPanel& panel, std::size_t end_day = 0);

// Throws ConfigError unless threshold lies in (0, 1) and ValidationError
// (naming the 3-day minimum) when series are shorter than 3.
RelationGraph build_graph(const std::vector<std::string>& stocks, const GraphSeries& series,
                          double threshold,
                          CorrelationMethod method = CorrelationMethod::kPearson);

NormalizedAdjacency normalize(const RelationGraph& graph);

// `relation<TAB>stock_a<TAB>stock_b<TAB>weight`, one line per undirected
// edge with stock_a < stock_b, after a header line; rows sorted.
void write_graph_tsv(std::ostream& out, const RelationGraph& graph);
void save_graph_tsv(const std::filesystem::path& path, const RelationGraph& graph);
RelationGraph read_graph_tsv(std::istream& in, const std::vector<std::string>& stocks);
RelationGraph load_graph_tsv(const std::filesystem::path& path,
                             const std::vector<std::string>& stocks);

// Ground-truth layout: `stock_a<TAB>stock_b<TAB>relation<TAB>weight`.
void write_planted_tsv(std::ostream& out, const RelationGraph& graph);
void save_planted_tsv(const std::filesystem::path& path, const RelationGraph& graph);
RelationGraph read_planted_tsv(std::istream& in, const std::vector<std::string>& stocks);

struct GraphSummary {
  std::array<std::size_t, kRelationCount> edges{};
  std::vector<std::size_t> degree_histogram;  // [k] = stocks with k neighbors (any relation)
};
GraphSummary summarize(const RelationGraph& graph);

}  // namespace cgm

#endif  // CGM_GRAPH_RELATION_GRAPH_HPP_
