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
#include "cgm/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cgm/baselines/baselines.hpp"
#include "cgm/cli/pipeline.hpp"
#include "cgm/errors.hpp"
#include "cgm/market_data/io.hpp"
#include "cgm/market_data/synth.hpp"
#include "cgm/util/hash.hpp"

namespace cgm {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kFormats = R"(Formats:
  bars CSV      header stock,day,hour,open,high,low,close,volume; day is
                YYYY-MM-DD, hour a 0-based slot within the trading day
  news JSONL    one {"stock": ..., "day": "YYYY-MM-DD", "headline": ...} per line
  graph TSV     header relation,stock_a,stock_b,weight (tab separated);
                relation is price_pos, price_neg, vol_pos or vol_neg
  planted TSV   header stock_a,stock_b,relation,weight (tab separated)
  checkpoint    binary: magic CGMCKPT1, JSON header, named float64 tensors
  metrics JSONL one object per epoch and split
  predictions   CSV stock,day,prob_up,pred_label,pred_log_volume

Exit codes: 0 ok, 1 verification failure, 2 usage or config error, 3 I/O error.)";

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string config_hash(const json& config) { return sha256_hex(config.dump()).substr(0, 16); }

json input_hashes(const std::vector<std::pair<std::string, std::string>>& named_paths) {
  json j = json::object();
  for (const auto& [name, path] : named_paths) {
    if (path.empty()) continue;
    j[name] = {{"path", path}, {"sha256", sha256_file(path)}};
  }
  return j;
}

// The manifest goes out before any other output. created_at is the only
// time-dependent field and is not part of the config hash.
void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const json& inputs, const std::vector<std::string>& outputs) {
  json m = {{"command", command},
            {"config", config},
            {"config_hash", config_hash(config)},
            {"inputs", inputs},
            {"outputs", outputs},
            {"created_at", utc_now()}};
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::optional<Day> opt_day(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_iso_day(text);
}

std::vector<NewsRecord> maybe_news(const std::string& path) {
  return path.empty() ? std::vector<NewsRecord>{} : load_news(path);
}

struct DataFlags {
  std::string bars, news;
  std::size_t n = 20;
  double movement_threshold = 0.5;
  std::string dev_start, test_start;
  bool require_news = true;

  void add(CLI::App* app) {
    app->add_option("--bars", bars, "Hourly bars CSV")->required();
    app->add_option("--news", news, "News JSONL (optional)");
    app->add_option("--n", n, "Window length in trading days")->capture_default_str();
    app->add_option("--movement-threshold", movement_threshold,
                    "Label threshold on the standardized first-hour share")
        ->capture_default_str();
    app->add_option("--dev-start", dev_start, "First dev target day YYYY-MM-DD");
    app->add_option("--test-start", test_start, "First test target day YYYY-MM-DD");
    app->add_flag("--require-news,!--no-require-news", require_news,
                  "Classification subset keeps only examples with eve news (default on)");
  }
  DataOptions options() const {
    DataOptions o;
    o.window_days = n;
    o.movement_threshold = movement_threshold;
    o.require_news = require_news;
    o.dev_start = opt_day(dev_start);
    o.test_start = opt_day(test_start);
    return o;
  }
  json to_json() const {
    return {{"n", n},
            {"movement_threshold", movement_threshold},
            {"dev_start", dev_start},
            {"test_start", test_start},
            {"require_news", require_news}};
  }
};

json metrics_line(const std::string& model, const std::string& split, std::size_t epoch,
                  const std::string& hash, const MetricsReport& r) {
  json j = to_json(r);
  j["model"] = model;
  j["split"] = split;
  j["epoch"] = epoch;
  j["config_hash"] = hash;
  return j;
}

std::string describe(const MetricsReport& r) {
  std::ostringstream s;
  s << std::setprecision(4);
  if (r.accuracy) s << "acc " << *r.accuracy;
  if (r.mse_standard) s << "mse " << *r.mse_standard << " rmse " << *r.rmse;
  s << " (n=" << r.examples << ")";
  return s.str();
}

// ---------------------------------------------------------------- synth

int cmd_synth(const SynthConfig& cfg, std::uint64_t seed, const std::string& out_dir,
              std::ostream& out) {
  validate(cfg);
  const fs::path dir(out_dir);
  make_dir(dir);
  const json config = {{"stocks", cfg.stocks},
                       {"days", cfg.days},
                       {"hours", cfg.hours},
                       {"factors", cfg.factors},
                       {"noise", cfg.noise},
                       {"news_effect", cfg.news_effect},
                       {"news_prob", cfg.news_prob},
                       {"neighbor_effect", cfg.neighbor_effect},
                       {"pulse", cfg.pulse},
                       {"negative_fraction", cfg.negative_fraction},
                       {"newsless_fraction", cfg.newsless_fraction},
                       {"volume_factor_scale", cfg.volume_factor_scale},
                       {"start", to_iso(cfg.start)},
                       {"seed", seed}};
  write_manifest(dir, "synth", config, json::object(),
                 {"bars.csv", "news.jsonl", "planted_graph.tsv", "newsless.txt"});
  const SynthData data = synth_generate(cfg, seed);
  save_bars(dir / "bars.csv", data.bars);
  save_news(dir / "news.jsonl", data.news);
  save_planted_tsv(dir / "planted_graph.tsv", data.planted);
  std::string silent;
  for (std::size_t s = 0; s < data.newsless.size(); ++s)
    if (data.newsless[s]) silent += data.planted.stocks[s] + "\n";
  write_text(dir / "newsless.txt", silent);
  out << "wrote " << data.bars.size() << " bars, " << data.news.size() << " headlines, "
      << data.planted.edge_count() << " planted edges to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- build-graph

struct GraphFlags {
  std::string bars, out, method = "pearson", end_date, planted;
  double threshold = 0.6;
};

int cmd_build_graph(const GraphFlags& f, std::ostream& out) {
  CorrelationMethod method;
  if (f.method == "pearson") {
    method = CorrelationMethod::kPearson;
  } else if (f.method == "spearman") {
    method = CorrelationMethod::kSpearman;
  } else {
    throw ConfigError("unknown correlation method '" + f.method + "' (pearson|spearman)");
  }
  if (!(f.threshold > 0.0 && f.threshold < 1.0)) {
    throw ConfigError("graph threshold must lie in (0, 1), got " + std::to_string(f.threshold));
  }
  const fs::path dir(f.out);
  make_dir(dir);
  const json config = {{"threshold", f.threshold}, {"method", f.method}, {"end_date", f.end_date}};
  write_manifest(dir, "build-graph", config, input_hashes({{"bars", f.bars}}),
                 {"graph.tsv", "graph_summary.json"});
  const MarketPanel panel = build_panel(load_bars(f.bars));
  std::size_t end = 0;
  if (!f.end_date.empty()) {
    const Day d = parse_iso_day(f.end_date);
    end = static_cast<std::size_t>(
        std::lower_bound(panel.calendar.begin(), panel.calendar.end(), d) -
        panel.calendar.begin());
    if (end == 0) throw ValidationError("no trading days before --end-date " + f.end_date);
  }
  const RelationGraph g = build_graph(panel.stocks, graph_series(panel, end), f.threshold, method);
  save_graph_tsv(dir / "graph.tsv", g);
  const GraphSummary sum = summarize(g);
  json js = {{"threshold", f.threshold}, {"skipped_pairs", g.skipped_pairs}};
  for (Relation r : kAllRelations)
    js["edges"][std::string(relation_name(r))] = sum.edges[static_cast<std::size_t>(r)];
  js["degree_histogram"] = sum.degree_histogram;
  write_text(dir / "graph_summary.json", js.dump(2) + "\n");

  out << "stocks " << g.size() << ", threshold " << f.threshold << "\n";
  for (Relation r : kAllRelations)
    out << "  " << relation_name(r) << " edges " << g.edge_count(r) << "\n";
  out << "  degree histogram:";
  for (std::size_t k = 0; k < sum.degree_histogram.size(); ++k)
    if (sum.degree_histogram[k]) out << " " << k << ":" << sum.degree_histogram[k];
  out << "\n";

  if (!f.planted.empty()) {
    std::ifstream in(f.planted);
    if (!in) throw IoError("cannot read " + f.planted);
    const RelationGraph truth = read_planted_tsv(in, g.stocks);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (Relation r : kAllRelations)
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j) {
          const bool got = g[r](i, j) != 0.0, want = truth[r](i, j) != 0.0;
          tp += got && want;
          fp += got && !want;
          fn += !got && want;
        }
    const double precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : 1.0;
    const double recall = tp + fn ? static_cast<double>(tp) / (tp + fn) : 1.0;
    out << "  planted: precision " << precision << " recall " << recall << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  DataFlags data;
  std::string graph, out, task = "classification";
  std::size_t epochs = 30, hidden = 300, embed = 50, word_embed = 50, layers = 1, dcca_k = 32;
  std::vector<std::size_t> dcca_widths = {128, 64};
  double lr = 1e-3, lambda = 1.0, graph_threshold = 0.6, dcca_ridge = 1e-3, clip = 5.0;
  std::uint64_t seed = 1;
  Ablation ablation;
  bool quiet = false;

  void add(CLI::App* app) {
    data.add(app);
    app->add_option("--graph", graph, "Graph TSV; built from the training period if omitted")
        ;
    app->add_option("--out", out, "Output root; the run goes to <out>/<config-hash>/")
        ->required();
    app->add_option("--task", task, "classification | regression")->capture_default_str();
    app->add_option("--epochs", epochs)->capture_default_str();
    app->add_option("--lr", lr, "Adam learning rate (grid 1e-6 1e-5 1e-4 1e-3 3e-3)")
        ->capture_default_str();
    app->add_option("--lambda", lambda, "Weight of the correlation loss")->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--hidden", hidden)->capture_default_str();
    app->add_option("--embed", embed, "Stock embedding width")->capture_default_str();
    app->add_option("--word-embed", word_embed)->capture_default_str();
    app->add_option("--layers", layers, "Aggregate+update layers per view")->capture_default_str();
    app->add_option("--dcca-k", dcca_k, "Correlation output dimension")->capture_default_str();
    app->add_option("--dcca-widths", dcca_widths, "Hidden widths of each DCCA body")
        ->expected(2)
        ->capture_default_str();
    app->add_option("--dcca-ridge", dcca_ridge)->capture_default_str();
    app->add_option("--graph-threshold", graph_threshold,
                    "Correlation threshold when building the graph")
        ->capture_default_str();
    app->add_option("--clip", clip, "Global gradient-norm clip")->capture_default_str();
    app->add_flag("--no-news", ablation.no_news);
    app->add_flag("--no-dcca", ablation.no_dcca);
    app->add_flag("--no-integration-graph", ablation.no_integration_graph);
    app->add_flag("--no-price-graph", ablation.no_price_graph);
    app->add_flag("--no-volume-graph", ablation.no_volume_graph);
    app->add_flag("--quiet", quiet, "Only print the run directory");
  }

  ModelConfig model_config() const {
    ModelConfig c;
    c.hidden = hidden;
    c.embed = embed;
    c.word_embed = word_embed;
    c.layers = layers;
    c.task = parse_task(task);
    c.dcca.output_dim = dcca_k;
    c.dcca.widths = {dcca_widths.at(0), dcca_widths.at(1)};
    c.dcca.ridge = dcca_ridge;
    return c;
  }
  TrainConfig train_config() const {
    TrainConfig t;
    t.learning_rate = lr;
    t.lambda = lambda;
    t.epochs = epochs;
    t.seed = seed;
    t.clip_norm = clip;
    t.dcca_ridge = dcca_ridge;
    t.task = parse_task(task);
    t.ablation = ablation;
    t.window_days = data.n;
    t.movement_threshold = data.movement_threshold;
    t.graph_threshold = graph_threshold;
    return t;
  }
  json to_json(const std::string& model) const {
    ModelConfig mc = model_config();
    return {{"model", model},
            {"model_config", cgm::to_json(mc)},
            {"ablation", cgm::to_json(ablation)},
            {"data", data.to_json()},
            {"epochs", epochs},
            {"lr", lr},
            {"lambda", lambda},
            {"seed", seed},
            {"clip", clip},
            {"graph_threshold", graph_threshold},
            {"graph_given", !graph.empty()}};
  }
};

void warn_off_grid(double lr, std::ostream& err) {
  if (std::find(kLearningRateGrid.begin(), kLearningRateGrid.end(), lr) ==
      kLearningRateGrid.end()) {
    err << "warning: learning rate " << lr << " is off the usual grid\n";
  }
}

int run_model_training(const TrainFlags& f, const std::string& model, const std::string& command,
                       std::ostream& out, std::ostream& err) {
  validate(f.train_config());
  warn_off_grid(f.lr, err);
  const json config = f.to_json(model);
  const std::string hash = config_hash(config);
  const fs::path dir = fs::path(f.out) / hash;
  make_dir(dir);
  write_manifest(
      dir, command, config,
      input_hashes({{"bars", f.data.bars}, {"news", f.data.news}, {"graph", f.graph}}),
      {"checkpoint.bin", "metrics.jsonl"});

  PreparedData data = prepare_data(load_bars(f.data.bars), maybe_news(f.data.news),
                                   f.data.options());
  RelationGraph graph;
  if (!f.graph.empty()) {
    graph = load_graph_tsv(f.graph, data.set.stocks);
    graph.threshold = f.graph_threshold;
  } else {
    graph = training_graph(data, f.graph_threshold);
  }

  std::ofstream metrics(dir / "metrics.jsonl", std::ios::binary);
  if (!metrics) throw IoError("cannot write " + (dir / "metrics.jsonl").string());
  const auto on_epoch = [&](const EpochRecord& rec) {
    json tl = metrics_line(model, "train", rec.epoch, hash, rec.train);
    tl["train_loss"] = rec.train_loss;
    metrics << tl.dump() << "\n";
    metrics << metrics_line(model, "dev", rec.epoch, hash, rec.dev).dump() << "\n";
    metrics << metrics_line(model, "test", rec.epoch, hash, rec.test).dump() << "\n";
    if (!f.quiet) {
      out << "epoch " << rec.epoch << " loss " << std::setprecision(5) << rec.train_loss
          << " | train " << describe(rec.train) << " | dev " << describe(rec.dev) << "\n";
    }
  };

  RunSpec spec;
  spec.model = model;
  spec.model_config = f.model_config();
  if (model == "lstm") spec.model_config.layers = f.layers;
  spec.train = f.train_config();
  const RunOutcome run = run_training(data, graph, spec, on_epoch);
  metrics.close();
  save_checkpoint(dir / "checkpoint.bin", run.checkpoint);

  const EpochRecord& best = run.result.history.at(run.result.best_epoch - 1);
  if (!f.quiet) {
    out << "best epoch " << run.result.best_epoch << " | dev " << describe(best.dev)
        << " | test " << describe(best.test) << "\n";
    if (run.result.rejected_steps) {
      err << "warning: " << run.result.rejected_steps << " steps rejected (non-finite gradients)\n";
    }
  }
  out << "run directory: " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval / predict

struct CheckpointFlags {
  std::string checkpoint, bars, news, split = "test", out;
  std::optional<std::size_t> hidden, embed, layers, window;
  std::optional<std::string> task;

  void add(CLI::App* app) {
    app->add_option("--checkpoint", checkpoint)->required();
    app->add_option("--bars", bars)->required();
    app->add_option("--news", news);
    app->add_option("--split", split, "train | dev | test | all")->capture_default_str();
    app->add_option("--hidden", hidden, "Expected hidden size (checked against the checkpoint)");
    app->add_option("--embed", embed, "Expected stock embedding width");
    app->add_option("--layers", layers, "Expected layer count");
    app->add_option("--task", task, "Expected task");
    app->add_option("--n", window, "Expected window length");
  }

  void check(const Checkpoint& ck, const std::vector<std::string>& stocks) const {
    ModelConfig want = ck.config;
    if (hidden) want.hidden = *hidden;
    if (embed) want.embed = *embed;
    if (layers) want.layers = *layers;
    if (task) want.task = parse_task(*task);
    check_compatible(ck, want, stocks);
    if (window && *window != ck.window_days) {
      throw CompatibilityError("checkpoint is incompatible with the requested configuration:\n"
                               "  n: checkpoint " + std::to_string(ck.window_days) +
                               ", requested " + std::to_string(*window));
    }
  }

  std::vector<std::pair<std::string, const std::vector<DayBatch>*>> splits(
      const PreparedData& d) const {
    std::vector<std::pair<std::string, const std::vector<DayBatch>*>> out;
    if (split == "train" || split == "all") out.push_back({"train", &d.batches.train});
    if (split == "dev" || split == "all") out.push_back({"dev", &d.batches.dev});
    if (split == "test" || split == "all") out.push_back({"test", &d.batches.test});
    if (out.empty()) throw ConfigError("unknown split '" + split + "' (train|dev|test|all)");
    return out;
  }
};

int cmd_eval(const CheckpointFlags& f, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(f.checkpoint);
  const PreparedData data = prepare_from_checkpoint(load_bars(f.bars), maybe_news(f.news), ck);
  f.check(ck, data.set.stocks);
  const ForwardFn forward = make_forward(ck);
  const std::string ck_hash = sha256_file(f.checkpoint);
  std::string lines;
  for (const auto& [name, batches] : f.splits(data)) {
    const MetricsReport r = evaluate(forward, ck.params, *batches, ck.config.task, ck.target);
    json j = metrics_line(ck.model, name, ck.epoch, ck_hash.substr(0, 16), r);
    j["checkpoint_sha256"] = ck_hash;
    lines += j.dump() + "\n";
  }
  if (!f.out.empty()) write_text(f.out, lines);
  out << lines;
  return kExitOk;
}

int cmd_predict(const CheckpointFlags& f, const std::string& day, std::ostream& out) {
  if (f.out.empty()) throw ConfigError("predict needs --out for the predictions CSV");
  const Checkpoint ck = load_checkpoint(f.checkpoint);
  const PreparedData data = prepare_from_checkpoint(load_bars(f.bars), maybe_news(f.news), ck);
  f.check(ck, data.set.stocks);
  const ForwardFn forward = make_forward(ck);
  const std::optional<Day> only = opt_day(day);
  std::string csv = "stock,day,prob_up,pred_label,pred_log_volume\n";
  std::size_t rows = 0;
  for (const auto& [name, batches] : f.splits(data)) {
    std::vector<DayBatch> chosen;
    for (const DayBatch& b : *batches)
      if (!only || b.day == *only) chosen.push_back(b);
    for (const Prediction& p : predict(forward, ck.params, chosen, ck.config.task, ck.target)) {
      csv += ck.stocks[p.stock] + "," + to_iso(p.day) + ",";
      csv += (p.prob_up ? format_double(*p.prob_up) : "") + ",";
      csv += (p.label ? std::to_string(*p.label) : "") + ",";
      csv += (p.log_volume ? format_double(*p.log_volume) : "") + "\n";
      ++rows;
    }
  }
  if (only && rows == 0) throw ValidationError("no examples on " + day + " in the chosen split");
  write_text(f.out, csv);
  out << "wrote " << rows << " predictions to " << f.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const GradcheckSuiteOptions& o, std::ostream& out) {
  if (!(o.epsilon >= 1e-6 && o.epsilon <= 1e-4)) {
    throw ConfigError("--eps must lie in [1e-6, 1e-4]");
  }
  const std::vector<GradcheckCase> cases = run_gradcheck_suite(o);
  bool ok = true;
  for (const GradcheckCase& c : cases) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << " max_rel_error " << std::setprecision(3)
        << c.result.max_rel_error << " entries " << c.result.checked_entries << " worst "
        << c.result.worst_param << "[" << c.result.worst_index << "] time " << std::fixed
        << std::setprecision(2) << c.seconds << "s" << std::defaultfloat << "\n";
    if (!c.pass) {
      out << "  worst offender: " << c.result.worst_param << " analytic "
          << c.result.worst_analytic << " numeric " << c.result.worst_numeric << "\n";
    }
    ok = ok && c.pass;
  }
  return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- baseline

int cmd_baseline(const TrainFlags& f, const std::string& model, double l2, double ridge,
                 std::ostream& out, std::ostream& err) {
  if (model == "lstm") return run_model_training(f, "lstm", "baseline", out, err);
  const Task task = parse_task(f.task);
  const bool cls_only = model == "random" || model == "logistic";
  const bool reg_only = model == "moving-average" || model == "linear";
  if (!cls_only && !reg_only) {
    throw ConfigError("unknown baseline '" + model +
                      "' (random|moving-average|logistic|linear|lstm)");
  }
  if (cls_only && task != Task::kClassification) {
    throw ConfigError(model + " is a classification baseline; use --task classification");
  }
  if (reg_only && task != Task::kRegression) {
    throw ConfigError(model + " is a regression baseline; use --task regression");
  }

  json config = {{"model", model}, {"data", f.data.to_json()}, {"seed", f.seed},
                 {"task", f.task}};
  if (model == "logistic") config["l2"] = l2;
  if (model == "linear") config["ridge"] = ridge;
  const std::string hash = config_hash(config);
  const fs::path dir = fs::path(f.out) / hash;
  make_dir(dir);
  write_manifest(dir, "baseline", config,
                 input_hashes({{"bars", f.data.bars}, {"news", f.data.news}}), {"metrics.jsonl"});
  const PreparedData d = prepare_data(load_bars(f.data.bars), maybe_news(f.data.news),
                                      f.data.options());

  const auto subset = [&](const std::vector<std::size_t>& idx) {
    if (task == Task::kRegression) return idx;
    std::vector<std::size_t> out_idx;
    for (std::size_t i : idx)
      if (d.set.examples[i].labeled) out_idx.push_back(i);
    return out_idx;
  };
  const auto labels_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<int> y;
    for (std::size_t i : idx) y.push_back(*d.set.examples[i].label == Movement::kPositive);
    return y;
  };
  const auto targets_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<double> y;
    for (std::size_t i : idx) y.push_back(d.set.examples[i].log_volume_target);
    return y;
  };

  const std::vector<std::size_t> train_idx = subset(d.splits.train);
  std::optional<LogisticModel> logistic;
  std::optional<LinearModel> linear;
  std::optional<ColumnScaler> columns;
  if (model == "logistic" || model == "linear") {
    const Matrix x = flat_features(d.set, train_idx, d.scaler);
    columns = ColumnScaler::fit(x);
    if (model == "logistic") {
      LogisticOptions lo;
      lo.l2 = l2;
      const LogisticFit fit = logistic_fit(columns->apply(x), labels_of(train_idx), lo);
      if (!fit.converged) {
        err << "warning: logistic regression stopped at the iteration cap with gradient norm "
            << fit.gradient_norm << "; using the best iterate\n";
      }
      logistic = fit.model;
    } else {
      linear = linear_fit(columns->apply(x), targets_of(train_idx), ridge);
    }
  }

  std::string lines;
  std::uint64_t split_seed = f.seed;
  for (const auto& [name, idx_all] :
       {std::pair<std::string, const std::vector<std::size_t>*>{"train", &d.splits.train},
        {"dev", &d.splits.dev},
        {"test", &d.splits.test}}) {
    const std::vector<std::size_t> idx = subset(*idx_all);
    MetricsReport r;
    if (model == "random") {
      r = classification_report(random_predict(idx.size(), split_seed++), labels_of(idx));
    } else if (model == "logistic") {
      const Matrix x = columns->apply(flat_features(d.set, idx, d.scaler));
      r = classification_report(logistic_predict(*logistic, x), labels_of(idx));
    } else if (model == "linear") {
      const Matrix x = columns->apply(flat_features(d.set, idx, d.scaler));
      r = regression_report(linear_predict(*linear, x), targets_of(idx));
    } else {
      std::vector<double> pred;
      for (std::size_t i : idx) pred.push_back(moving_average_predict(d.set.examples[i]));
      r = regression_report(pred, targets_of(idx));
    }
    lines += metrics_line(model, name, 0, hash, r).dump() + "\n";
    out << model << " " << name << " " << describe(r) << "\n";
  }
  write_text(dir / "metrics.jsonl", lines);
  out << "run directory: " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cgm: correlation-powered graph multi-view model for trading-volume movement"};
  app.footer(kFormats);
  app.require_subcommand(1);
  app.fallthrough(false);

  SynthConfig synth;
  std::uint64_t synth_seed = 7;
  std::string synth_out;
  std::string start_day = to_iso(synth.start);
  CLI::App* sc = app.add_subcommand("synth", "Generate a synthetic market with planted structure");
  sc->add_option("--stocks", synth.stocks)->capture_default_str();
  sc->add_option("--days", synth.days)->capture_default_str();
  sc->add_option("--hours", synth.hours)->capture_default_str();
  sc->add_option("--factors", synth.factors)->capture_default_str();
  sc->add_option("--window", synth.window, "Window the data must support")->capture_default_str();
  sc->add_option("--noise", synth.noise)->capture_default_str();
  sc->add_option("--news-effect", synth.news_effect, "Log-odds shift of a headline")
      ->capture_default_str();
  sc->add_option("--news-prob", synth.news_prob)->capture_default_str();
  sc->add_option("--neighbor-effect", synth.neighbor_effect,
                 "Log-odds shift from same-group volume pulses")
      ->capture_default_str();
  sc->add_option("--pulse", synth.pulse, "Size of the last-hour volume pulse")
      ->capture_default_str();
  sc->add_option("--negative-fraction", synth.negative_fraction)->capture_default_str();
  sc->add_option("--newsless-fraction", synth.newsless_fraction)->capture_default_str();
  sc->add_option("--volume-factor-scale", synth.volume_factor_scale)->capture_default_str();
  sc->add_option("--start", start_day, "First calendar day")->capture_default_str();
  sc->add_option("--seed", synth_seed)->capture_default_str();
  sc->add_option("--out", synth_out, "Output directory")->required();

  GraphFlags gf;
  CLI::App* gc = app.add_subcommand("build-graph", "Build the relation graph from bars");
  gc->add_option("--bars", gf.bars)->required();
  gc->add_option("--out", gf.out, "Output directory")->required();
  gc->add_option("--threshold", gf.threshold)->capture_default_str();
  gc->add_option("--method", gf.method, "pearson | spearman")->capture_default_str();
  gc->add_option("--end-date", gf.end_date, "Use only trading days before this date");
  gc->add_option("--planted", gf.planted, "Planted TSV to score the graph against")
      ;

  TrainFlags tf;
  CLI::App* tc = app.add_subcommand("train", "Train CGM and write checkpoint and metrics");
  tf.add(tc);

  CheckpointFlags ef;
  CLI::App* ec = app.add_subcommand("eval", "Evaluate a checkpoint");
  ef.add(ec);
  ec->add_option("--out", ef.out, "Also write the metrics JSONL here");

  CheckpointFlags pf;
  std::string predict_day;
  CLI::App* pc = app.add_subcommand("predict", "Per-stock predictions CSV");
  pf.add(pc);
  pc->add_option("--out", pf.out, "Predictions CSV")->required();
  pc->add_option("--day", predict_day, "Only this target day YYYY-MM-DD");

  GradcheckSuiteOptions go;
  CLI::App* gcc = app.add_subcommand("gradcheck", "Finite-difference checks of all gradients");
  gcc->add_option("--eps", go.epsilon, "Central-difference step in [1e-6, 1e-4]")
      ->capture_default_str();
  gcc->add_option("--threshold", go.threshold, "Maximum relative error")->capture_default_str();
  gcc->add_option("--seed", go.seed)->capture_default_str();
  gcc->add_option("--inject-fault", go.inject_fault,
                  "Corrupt the backward rule of this parameter (self-test)");

  TrainFlags bf;
  std::string baseline_model;
  double l2 = 1e-4, ridge = 1e-4;
  bf.hidden = 64;
  bf.layers = 2;
  CLI::App* bc = app.add_subcommand("baseline", "Run a reference predictor");
  bc->add_option("--model", baseline_model, "random | moving-average | logistic | linear | lstm")
      ->required();
  bc->add_option("--l2", l2, "Logistic L2 penalty")->capture_default_str();
  bc->add_option("--ridge", ridge, "Linear ridge penalty")->capture_default_str();
  bf.add(bc);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // subcommand help lands here as well
    if (e.get_exit_code() == 0) {
      for (CLI::App* sub : app.get_subcommands()) out << sub->help();
      if (app.get_subcommands().empty()) out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (sc->parsed()) {
      synth.start = parse_iso_day(start_day);
      return cmd_synth(synth, synth_seed, synth_out, out);
    }
    if (gc->parsed()) return cmd_build_graph(gf, out);
    if (tc->parsed()) return run_model_training(tf, "cgm", "train", out, err);
    if (ec->parsed()) return cmd_eval(ef, out);
    if (pc->parsed()) return cmd_predict(pf, predict_day, out);
    if (gcc->parsed()) return cmd_gradcheck(go, out);
    if (bc->parsed()) return cmd_baseline(bf, baseline_model, l2, ridge, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitFailure;
  } catch (const DegenerateError& e) {
    err << "degenerate data: " << e.what() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cgm
