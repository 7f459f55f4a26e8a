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
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cgm/cli/cli.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cgm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

// "run directory: <path>" from a train / baseline run
fs::path run_dir(const Run& r) {
  const std::string key = "run directory: ";
  const auto at = r.out.rfind(key);
  REQUIRE(at != std::string::npos);
  return fs::path(lines(r.out.substr(at + key.size())).front());
}

const fs::path& root() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("cgm_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

const std::vector<std::string> kSynth = {"--stocks", "8",  "--days",    "60", "--hours",
                                         "3",        "--factors", "2", "--window", "5",
                                         "--neighbor-effect", "1", "--pulse", "1",
                                         "--newsless-fraction", "0.5", "--seed", "7"};

const fs::path& dataset() {
  static const fs::path dir = [] {
    std::vector<std::string> a = {"synth", "--out", (root() / "data").string()};
    a.insert(a.end(), kSynth.begin(), kSynth.end());
    const Run r = cli(a);
    REQUIRE(r.code == 0);
    return root() / "data";
  }();
  return dir;
}

std::vector<std::string> small_train(const std::string& out) {
  return {"train",  "--bars",   (dataset() / "bars.csv").string(), "--news",
          (dataset() / "news.jsonl").string(), "--out", out, "--hidden", "6", "--embed", "4",
          "--word-embed", "4", "--dcca-k", "2", "--dcca-widths", "6", "4", "--n", "5",
          "--epochs", "2", "--no-require-news", "--quiet"};
}

const fs::path& trained() {
  static const fs::path dir = [] {
    const Run r = cli(small_train((root() / "runs").string()));
    REQUIRE(r.code == 0);
    return run_dir(r);
  }();
  return dir;
}

}  // namespace

TEST_CASE("help and usage errors") {
  const Run help = cli({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("Formats:") != std::string::npos);
  CHECK(help.out.find("build-graph") != std::string::npos);
  const Run sub = cli({"train", "--help"});
  CHECK(sub.code == kExitOk);
  CHECK(sub.out.find("--no-integration-graph") != std::string::npos);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"gradcheck", "--bogus"}).code == kExitUsage);
  CHECK(cli({"synth", "--stocks", "x", "--out", "y"}).code == kExitUsage);
}

TEST_CASE("synth is deterministic and validates its flags") {
  std::vector<std::string> a = {"synth", "--out", (root() / "s1").string()};
  std::vector<std::string> b = {"synth", "--out", (root() / "s2").string()};
  a.insert(a.end(), kSynth.begin(), kSynth.end());
  b.insert(b.end(), kSynth.begin(), kSynth.end());
  REQUIRE(cli(a).code == 0);
  REQUIRE(cli(b).code == 0);
  for (const char* f : {"bars.csv", "news.jsonl", "planted_graph.tsv", "newsless.txt"})
    CHECK(slurp(root() / "s1" / f) == slurp(root() / "s2" / f));
  auto m1 = nlohmann::json::parse(slurp(root() / "s1" / "manifest.json"));
  auto m2 = nlohmann::json::parse(slurp(root() / "s2" / "manifest.json"));
  m1.erase("created_at");
  m2.erase("created_at");
  CHECK(m1 == m2);

  const Run one = cli({"synth", "--stocks", "1", "--out", (root() / "s3").string()});
  CHECK(one.code == kExitUsage);
  CHECK(one.err.find("stocks") != std::string::npos);
}

TEST_CASE("unwritable outputs are I/O errors") {
  std::ofstream(root() / "plainfile") << "x";
  const Run r = cli({"synth", "--out", (root() / "plainfile" / "sub").string()});
  CHECK(r.code == kExitIo);
  CHECK(cli({"build-graph", "--bars", (root() / "missing.csv").string(), "--out",
             (root() / "g0").string()})
            .code == kExitIo);
}

TEST_CASE("build-graph recovers the planted graph and thins out with the threshold") {
  const std::string bars = (dataset() / "bars.csv").string();
  const Run r = cli({"build-graph", "--bars", bars, "--out", (root() / "g1").string(),
                     "--planted", (dataset() / "planted_graph.tsv").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("planted: precision 1 recall 1") != std::string::npos);
  CHECK(fs::exists(root() / "g1" / "graph.tsv"));

  std::size_t previous = SIZE_MAX;
  for (const std::string t : {"0.2", "0.5", "0.8", "0.95"}) {
    const fs::path dir = root() / ("g_" + t);
    REQUIRE(cli({"build-graph", "--bars", bars, "--out", dir.string(), "--threshold", t}).code ==
            0);
    const auto s = nlohmann::json::parse(slurp(dir / "graph_summary.json"));
    std::size_t edges = 0;
    for (const auto& [k, v] : s["edges"].items()) edges += v.get<std::size_t>();
    CHECK(edges <= previous);
    previous = edges;
  }
  CHECK(cli({"build-graph", "--bars", bars, "--out", (root() / "g2").string(), "--threshold",
             "1.01"})
            .code == kExitUsage);
}

TEST_CASE("gradcheck passes, survives a larger step and catches an injected fault") {
  const Run ok = cli({"gradcheck"});
  CHECK(ok.code == kExitOk);
  CHECK(lines(ok.out).size() == 3);
  for (const std::string& l : lines(ok.out)) CHECK(l.rfind("PASS ", 0) == 0);
  CHECK(cli({"gradcheck", "--eps", "1e-4"}).code == kExitOk);
  const Run bad = cli({"gradcheck", "--inject-fault", "price.l1.gate_o.w"});
  CHECK(bad.code == kExitFailure);
  CHECK(bad.out.find("FAIL cgm_full_forward_combined_loss") != std::string::npos);
  CHECK(bad.out.find("worst offender: price.l1.gate_o.w") != std::string::npos);
  CHECK(cli({"gradcheck", "--eps", "1e-2"}).code == kExitUsage);
}

TEST_CASE("train writes manifest, checkpoint and metrics under the config hash") {
  const fs::path dir = trained();
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "checkpoint.bin"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(dir.filename().string() == manifest["config_hash"].get<std::string>());
  const std::vector<std::string> m = lines(slurp(dir / "metrics.jsonl"));
  CHECK(m.size() == 2 * 3);
  for (const std::string& l : m) {
    const auto j = nlohmann::json::parse(l);
    CHECK(j["model"] == "cgm");
    CHECK(j["config_hash"] == manifest["config_hash"]);
  }
}

TEST_CASE("eval is deterministic and checks compatibility") {
  const std::vector<std::string> base = {
      "eval", "--checkpoint", (trained() / "checkpoint.bin").string(), "--bars",
      (dataset() / "bars.csv").string(), "--news", (dataset() / "news.jsonl").string(),
      "--split", "all"};
  const Run a = cli(base), b = cli(base);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines(a.out).size() == 3);

  std::vector<std::string> wrong = base;
  wrong.insert(wrong.end(), {"--hidden", "64", "--layers", "2"});
  const Run w = cli(wrong);
  CHECK(w.code == kExitUsage);
  CHECK(w.err.find("hidden: checkpoint 6, requested 64") != std::string::npos);
  CHECK(w.err.find("layers") != std::string::npos);

  std::ofstream(root() / "junk.bin") << "not a checkpoint";
  std::vector<std::string> junk = base;
  junk[2] = (root() / "junk.bin").string();
  CHECK(cli(junk).code == kExitUsage);
  junk[2] = (root() / "absent.bin").string();
  CHECK(cli(junk).code == kExitIo);
}

TEST_CASE("predict covers every stock, with or without news") {
  const fs::path csv = root() / "pred.csv";
  const Run r = cli({"predict", "--checkpoint", (trained() / "checkpoint.bin").string(),
                     "--bars", (dataset() / "bars.csv").string(), "--news",
                     (dataset() / "news.jsonl").string(), "--out", csv.string()});
  REQUIRE(r.code == 0);
  const std::vector<std::string> rows = lines(slurp(csv));
  REQUIRE(rows.size() > 1);
  CHECK(rows[0] == "stock,day,prob_up,pred_label,pred_log_volume");
  std::map<std::string, std::set<std::string>> by_day;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string stock, day, prob, label, vol;
    std::getline(in, stock, ',');
    std::getline(in, day, ',');
    std::getline(in, prob, ',');
    std::getline(in, label, ',');
    std::getline(in, vol);
    CHECK_FALSE(prob.empty());
    CHECK((label == "0" || label == "1"));
    CHECK(vol.empty());
    by_day[day].insert(stock);
  }
  // half the universe never gets headlines, yet every stock is predicted every day
  CHECK_FALSE(lines(slurp(dataset() / "newsless.txt")).empty());
  for (const auto& [day, stocks] : by_day) CHECK(stocks.size() == 8);

  const std::string one_day = by_day.begin()->first;
  const Run d = cli({"predict", "--checkpoint", (trained() / "checkpoint.bin").string(),
                     "--bars", (dataset() / "bars.csv").string(), "--out",
                     (root() / "day.csv").string(), "--day", one_day});
  REQUIRE(d.code == 0);
  CHECK(lines(slurp(root() / "day.csv")).size() == 1 + 8);
}

TEST_CASE("ablation grid gives six distinct runs with metric rows") {
  const std::vector<std::vector<std::string>> grid = {{},
                                                      {"--no-news"},
                                                      {"--no-dcca"},
                                                      {"--no-integration-graph"},
                                                      {"--no-price-graph"},
                                                      {"--no-volume-graph"}};
  std::set<std::string> dirs;
  for (const auto& flags : grid) {
    std::vector<std::string> a = small_train((root() / "grid").string());
    a.insert(a.end(), flags.begin(), flags.end());
    const Run r = cli(a);
    REQUIRE(r.code == 0);
    const fs::path dir = run_dir(r);
    dirs.insert(dir.string());
    CHECK(lines(slurp(dir / "metrics.jsonl")).size() == 6);
  }
  CHECK(dirs.size() == 6);
}

TEST_CASE("baselines emit metrics JSONL naming the model") {
  const std::string bars = (dataset() / "bars.csv").string();
  for (const std::vector<std::string>& extra :
       std::vector<std::vector<std::string>>{{"--model", "random", "--no-require-news"},
                                             {"--model", "logistic", "--no-require-news"},
                                             {"--model", "moving-average", "--task", "regression"},
                                             {"--model", "linear", "--task", "regression"}}) {
    std::vector<std::string> a = {"baseline", "--bars", bars, "--n", "5", "--out",
                                  (root() / "base").string()};
    a.insert(a.end(), extra.begin(), extra.end());
    const Run r = cli(a);
    REQUIRE(r.code == 0);
    const std::vector<std::string> m = lines(slurp(run_dir(r) / "metrics.jsonl"));
    CHECK(m.size() == 3);
    for (const std::string& l : m) CHECK(nlohmann::json::parse(l)["model"] == extra[1]);
  }
  CHECK(cli({"baseline", "--bars", bars, "--out", (root() / "base").string(), "--model",
             "linear"})
            .code == kExitUsage);
  CHECK(cli({"baseline", "--bars", bars, "--out", (root() / "base").string(), "--model", "svm"})
            .code == kExitUsage);
}
