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
#include "cgm/graph/relation_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "cgm/errors.hpp"
#include "cgm/market_data/io.hpp"

namespace cgm {

namespace {

constexpr std::string_view kGraphHeader = "relation\tstock_a\tstock_b\tweight";
constexpr std::string_view kPlantedHeader = "stock_a\tstock_b\trelation\tweight";

struct EdgeRow {
  std::string relation;
  std::string a;
  std::string b;
  double weight;
};

std::vector<EdgeRow> edge_rows(const RelationGraph& g) {
  std::vector<EdgeRow> rows;
  for (Relation r : kAllRelations) {
    const Matrix& a = g[r];
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        if (a(i, j) == 0.0) continue;
        std::string x = g.stocks[i], y = g.stocks[j];
        if (y < x) std::swap(x, y);
        rows.push_back({std::string(relation_name(r)), x, y, a(i, j)});
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const EdgeRow& p, const EdgeRow& q) {
    return std::tie(p.relation, p.a, p.b) < std::tie(q.relation, q.a, q.b);
  });
  return rows;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) out.push_back(field);
  return out;
}

RelationGraph read_edges(std::istream& in, const std::vector<std::string>& stocks,
                         std::string_view header, bool relation_first) {
  RelationGraph g = RelationGraph::empty(stocks);
  const auto index = [&](const std::string& name, std::size_t line_no) {
    auto it = std::find(stocks.begin(), stocks.end(), name);
    if (it == stocks.end()) {
      throw ValidationError("line " + std::to_string(line_no) + ": unknown stock '" + name + "'");
    }
    return static_cast<std::size_t>(it - stocks.begin());
  };
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line != header) {
        throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                         std::string(header) + "'");
      }
      continue;
    }
    const auto f = split_tabs(line);
    if (f.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    try {
      const Relation r = parse_relation(relation_first ? f[0] : f[2]);
      const std::size_t a = index(relation_first ? f[1] : f[0], line_no);
      const std::size_t b = index(relation_first ? f[2] : f[1], line_no);
      if (a == b) throw ValidationError("self-loop on '" + stocks[a] + "'");
      const double w = parse_double(f[3]);
      g[r](a, b) = w;
      g[r](b, a) = w;
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return g;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::kPricePos: return "price_pos";
    case Relation::kPriceNeg: return "price_neg";
    case Relation::kVolPos: return "vol_pos";
    case Relation::kVolNeg: return "vol_neg";
  }
  return "unknown";
}

Relation parse_relation(std::string_view name) {
  for (Relation r : kAllRelations)
    if (relation_name(r) == name) return r;
  throw ParseError("unknown relation '" + std::string(name) + "'");
}

RelationGraph RelationGraph::empty(std::vector<std::string> stocks) {
  RelationGraph g;
  const std::size_t n = stocks.size();
  g.stocks = std::move(stocks);
  for (auto& a : g.adjacency) a = Matrix(n, n);
  return g;
}

std::size_t RelationGraph::edge_count(Relation r) const {
  const Matrix& a = (*this)[r];
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) count += a(i, j) != 0.0 ? 1 : 0;
  return count;
}

std::size_t RelationGraph::edge_count() const {
  std::size_t total = 0;
  for (Relation r : kAllRelations) total += edge_count(r);
  return total;
}

NormalizedAdjacency NormalizedAdjacency::zeros(std::size_t stocks) {
  NormalizedAdjacency out;
  for (auto& m : out.relations) m = Matrix(stocks, stocks);
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: series lengths differ");
  if (x.size() < 3) throw ValidationError("pearson: need at least 3 observations");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateError("pearson: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

GraphSeries graph_series(const MarketPanel& panel, std::size_t end_day) {
  const std::size_t days = end_day == 0 ? panel.calendar.size()
                                        : std::min(end_day, panel.calendar.size());
  GraphSeries out;
  out.price.assign(panel.stocks.size(), {});
  out.volume.assign(panel.stocks.size(), {});
  for (std::size_t d = 1; d < days; ++d) {
    bool aligned = true;
    for (std::size_t s = 0; s < panel.stocks.size() && aligned; ++s)
      aligned = panel.cells[s][d].complete && panel.cells[s][d - 1].complete;
    if (!aligned) continue;
    for (std::size_t s = 0; s < panel.stocks.size(); ++s) {
      const auto& today = panel.cells[s][d];
      const auto& prev = panel.cells[s][d - 1];
      out.price[s].push_back(std::log(today.close() / prev.close()));
      out.volume[s].push_back(std::log1p(today.total_volume()) -
                              std::log1p(prev.total_volume()));
    }
  }
  return out;
}

RelationGraph build_graph(const std::vector<std::string>& stocks, const GraphSeries& series,
                          double threshold, CorrelationMethod method) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("graph threshold must lie in (0, 1), got " + format_double(threshold));
  }
  const std::size_t n = stocks.size();
  if (series.price.size() != n || series.volume.size() != n) {
    throw DimensionError("build_graph: series count does not match stock count");
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (series.price[s].size() < 3 || series.volume[s].size() < 3) {
      throw ValidationError(
          "build_graph: insufficient history, need at least 3 aligned trading days of "
          "returns (4 days of bars)");
    }
  }
  const auto corr = [method](const std::vector<double>& a, const std::vector<double>& b) {
    return method == CorrelationMethod::kPearson ? pearson(a, b) : spearman(a, b);
  };

  RelationGraph g = RelationGraph::empty(stocks);
  g.threshold = threshold;
  const auto assign = [&](double c, Relation pos, Relation neg, std::size_t i, std::size_t j) {
    if (c >= threshold) {
      g[pos](i, j) = g[pos](j, i) = c;
    } else if (c <= -threshold) {
      g[neg](i, j) = g[neg](j, i) = c;
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      try {
        assign(corr(series.price[i], series.price[j]), Relation::kPricePos, Relation::kPriceNeg,
               i, j);
      } catch (const DegenerateError&) {
        ++g.skipped_pairs;
      }
      try {
        assign(corr(series.volume[i], series.volume[j]), Relation::kVolPos, Relation::kVolNeg, i,
               j);
      } catch (const DegenerateError&) {
        ++g.skipped_pairs;
      }
    }
  }
  return g;
}

NormalizedAdjacency normalize(const RelationGraph& graph) {
  NormalizedAdjacency out;
  const std::size_t n = graph.size();
  for (Relation r : kAllRelations) {
    const Matrix& a = graph[r];
    std::vector<double> inv_sqrt_deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < n; ++j) d += std::abs(a(i, j));
      inv_sqrt_deg[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m(i, j) = std::abs(a(i, j)) * (inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    out.relations[static_cast<std::size_t>(r)] = std::move(m);
  }
  return out;
}

void write_graph_tsv(std::ostream& out, const RelationGraph& graph) {
  out << kGraphHeader << '\n';
  for (const EdgeRow& e : edge_rows(graph))
    out << e.relation << '\t' << e.a << '\t' << e.b << '\t' << format_double(e.weight) << '\n';
}

void save_graph_tsv(const std::filesystem::path& path, const RelationGraph& graph) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_graph_tsv(out, graph);
}

RelationGraph read_graph_tsv(std::istream& in, const std::vector<std::string>& stocks) {
  return read_edges(in, stocks, kGraphHeader, true);
}

RelationGraph load_graph_tsv(const std::filesystem::path& path,
                             const std::vector<std::string>& stocks) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_graph_tsv(in, stocks);
}

void write_planted_tsv(std::ostream& out, const RelationGraph& graph) {
  out << kPlantedHeader << '\n';
  auto rows = edge_rows(graph);
  std::sort(rows.begin(), rows.end(), [](const EdgeRow& p, const EdgeRow& q) {
    return std::tie(p.a, p.b, p.relation) < std::tie(q.a, q.b, q.relation);
  });
  for (const EdgeRow& e : rows)
    out << e.a << '\t' << e.b << '\t' << e.relation << '\t' << format_double(e.weight) << '\n';
}

void save_planted_tsv(const std::filesystem::path& path, const RelationGraph& graph) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_planted_tsv(out, graph);
}

RelationGraph read_planted_tsv(std::istream& in, const std::vector<std::string>& stocks) {
  return read_edges(in, stocks, kPlantedHeader, false);
}

GraphSummary summarize(const RelationGraph& graph) {
  GraphSummary s;
  const std::size_t n = graph.size();
  for (Relation r : kAllRelations) s.edges[static_cast<std::size_t>(r)] = graph.edge_count(r);
  s.degree_histogram.assign(n == 0 ? 1 : n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t degree = 0;
    for (std::size_t j = 0; j < n; ++j) {
      bool linked = false;
      for (Relation r : kAllRelations) linked = linked || graph[r](i, j) != 0.0;
      degree += linked ? 1 : 0;
    }
    ++s.degree_histogram[degree];
  }
  return s;
}

}  // namespace cgm
