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
#include "cgm/model/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cgm/errors.hpp"

namespace cgm {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O writes host doubles as little-endian");

namespace {

using nlohmann::json;

constexpr std::uint64_t kMaxName = 1 << 12;

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ParseError(std::string("checkpoint truncated reading ") + what);
  }
  return v;
}

std::string get_bytes(std::istream& in, std::uint64_t n, const char* what) {
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw ParseError(std::string("checkpoint truncated reading ") + what);
  }
  return s;
}

std::string graph_text(const RelationGraph& g) {
  std::ostringstream out;
  write_graph_tsv(out, g);
  return out.str();
}

json header_json(const Checkpoint& ck) {
  json scaler = json::array();
  for (const StockScale& s : ck.scaler.stocks) {
    scaler.push_back({s.price_mean, s.price_sd, s.log_volume_mean, s.log_volume_sd});
  }
  return {
      {"format_version", 1},
      {"model", ck.model},
      {"config", to_json(ck.config)},
      {"ablation", to_json(ck.ablation)},
      {"relations", {"price_pos", "price_neg", "vol_pos", "vol_neg"}},
      {"stocks", ck.stocks},
      {"window_days", ck.window_days},
      {"movement_threshold", ck.movement_threshold},
      {"vocab", ck.vocab.tokens()},
      {"vocab_hash", ck.vocab.hash()},
      {"scaler", scaler},
      {"target_scaling", {ck.target.mean, ck.target.sd}},
      {"epoch", ck.epoch},
      {"graph_threshold", ck.graph.threshold},
      {"graph_tsv", graph_text(ck.graph)},
      {"data", ck.data},
  };
}

}  // namespace

json to_json(const ModelConfig& c) {
  return {{"stocks", c.stocks},
          {"hours", c.hours},
          {"hidden", c.hidden},
          {"embed", c.embed},
          {"word_embed", c.word_embed},
          {"vocab", c.vocab},
          {"layers", c.layers},
          {"task", task_name(c.task)},
          {"dcca_output_dim", c.dcca.output_dim},
          {"dcca_ridge", c.dcca.ridge},
          {"dcca_widths", {c.dcca.widths[0], c.dcca.widths[1]}}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.stocks = j.at("stocks").get<std::size_t>();
  c.hours = j.at("hours").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.embed = j.at("embed").get<std::size_t>();
  c.word_embed = j.at("word_embed").get<std::size_t>();
  c.vocab = j.at("vocab").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.task = parse_task(j.at("task").get<std::string>());
  c.dcca.output_dim = j.at("dcca_output_dim").get<std::size_t>();
  c.dcca.ridge = j.at("dcca_ridge").get<double>();
  c.dcca.widths = {j.at("dcca_widths").at(0).get<std::size_t>(),
                   j.at("dcca_widths").at(1).get<std::size_t>()};
  return c;
}

json to_json(const Ablation& a) {
  return {{"no_news", a.no_news},
          {"no_dcca", a.no_dcca},
          {"no_integration_graph", a.no_integration_graph},
          {"no_price_graph", a.no_price_graph},
          {"no_volume_graph", a.no_volume_graph}};
}

Ablation ablation_from_json(const json& j) {
  Ablation a;
  a.no_news = j.at("no_news").get<bool>();
  a.no_dcca = j.at("no_dcca").get<bool>();
  a.no_integration_graph = j.at("no_integration_graph").get<bool>();
  a.no_price_graph = j.at("no_price_graph").get<bool>();
  a.no_volume_graph = j.at("no_volume_graph").get<bool>();
  return a;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  const std::string header = header_json(ck).dump();
  out.write(kCheckpointMagic.data(), static_cast<std::streamsize>(kCheckpointMagic.size()));
  put_u64(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  put_u64(out, ck.params.items().size());
  for (const auto& [name, m] : ck.params.items()) {
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(out, m.rows());
    put_u64(out, m.cols());
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  if (get_bytes(in, kCheckpointMagic.size(), "magic") != kCheckpointMagic) {
    throw ParseError("not a CGM checkpoint (bad magic)");
  }
  const std::uint64_t header_len = get_u64(in, "header length");
  if (header_len > (1ull << 32)) throw ParseError("checkpoint header length is implausible");
  json h;
  try {
    h = json::parse(get_bytes(in, header_len, "header"));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }

  Checkpoint ck;
  try {
    if (h.at("format_version").get<int>() != 1) {
      throw CompatibilityError("unsupported checkpoint format_version " +
                               h.at("format_version").dump());
    }
    ck.model = h.at("model").get<std::string>();
    ck.config = model_config_from_json(h.at("config"));
    ck.ablation = ablation_from_json(h.at("ablation"));
    ck.stocks = h.at("stocks").get<std::vector<std::string>>();
    ck.window_days = h.at("window_days").get<std::size_t>();
    ck.movement_threshold = h.at("movement_threshold").get<double>();
    ck.vocab = Vocabulary(h.at("vocab").get<std::vector<std::string>>());
    for (const auto& s : h.at("scaler")) {
      ck.scaler.stocks.push_back({s.at(0).get<double>(), s.at(1).get<double>(),
                                  s.at(2).get<double>(), s.at(3).get<double>()});
    }
    ck.target = {h.at("target_scaling").at(0).get<double>(),
                 h.at("target_scaling").at(1).get<double>()};
    ck.epoch = h.at("epoch").get<std::size_t>();
    std::istringstream graph(h.at("graph_tsv").get<std::string>());
    ck.graph = read_graph_tsv(graph, ck.stocks);
    ck.graph.threshold = h.at("graph_threshold").get<double>();
    ck.data = h.at("data");
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  if (ck.vocab.hash() != h.at("vocab_hash").get<std::string>()) {
    throw ValidationError("checkpoint vocabulary does not match its stored hash");
  }

  const std::uint64_t count = get_u64(in, "tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t name_len = get_u64(in, "tensor name length");
    if (name_len == 0 || name_len > kMaxName) throw ParseError("checkpoint tensor name length");
    const std::string name = get_bytes(in, name_len, "tensor name");
    const std::uint64_t rows = get_u64(in, "tensor rows");
    const std::uint64_t cols = get_u64(in, "tensor cols");
    if (rows > (1u << 24) || cols > (1u << 24) || rows * cols > (1ull << 28)) {
      throw ParseError("checkpoint tensor '" + name + "' has implausible shape");
    }
    const std::string raw = get_bytes(in, rows * cols * sizeof(double), "tensor values");
    Matrix m(rows, cols);
    if (!raw.empty()) std::memcpy(m.data().data(), raw.data(), raw.size());
    if (ck.params.contains(name)) throw ParseError("duplicate tensor '" + name + "'");
    ck.params.add(name, std::move(m));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("trailing bytes after checkpoint tensors");
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  write_checkpoint(out, ck);
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  return read_checkpoint(in);
}

void check_compatible(const Checkpoint& ck, const ModelConfig& requested,
                      const std::vector<std::string>& stocks) {
  std::vector<std::string> diffs;
  const json have = to_json(ck.config);
  const json want = to_json(requested);
  for (const auto& [key, value] : want.items()) {
    if (have.at(key) != value) {
      diffs.push_back(key + ": checkpoint " + have.at(key).dump() + ", requested " + value.dump());
    }
  }
  if (ck.stocks != stocks) diffs.push_back("stocks: checkpoint universe differs from the data");
  if (diffs.empty()) return;
  std::string msg = "checkpoint is incompatible with the requested configuration:";
  for (const auto& d : diffs) msg += "\n  " + d;
  throw CompatibilityError(msg);
}

}  // namespace cgm
