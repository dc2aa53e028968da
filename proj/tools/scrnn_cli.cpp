// Copyright 2026 The SCRNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// scrnn: simulate | train | eval | search

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scrnn/scrnn.hpp"

#ifndef SCRNN_VERSION
#define SCRNN_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace scrnn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

struct Common {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string config;
  std::vector<std::string> overrides;  // key=value
};

TrainConfig load_train_config(const Common& c, const std::string& arch) {
  TrainConfig cfg;
  if (!c.config.empty()) cfg.apply(read_key_values(c.config));
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + kv + "'");
    cfg.set(std::string(detail::trim(kv.substr(0, eq))), std::string(detail::trim(kv.substr(eq + 1))));
  }
  if (!arch.empty()) cfg.arch = arch;
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

SpikeDataset load_data(const std::string& dir) { return load_spike_dataset(dir, detect_label_kind(dir)); }

void write_report(const ErrorReport& r, const fs::path& out, const std::string& title) {
  std::ostringstream csv;
  r.write_csv(csv);
  write_text(out / "decoded.csv", csv.str());
  write_text(out / "summary.json", r.summary_json().dump(2) + "\n");
  std::vector<PlotPanel> panels;
  if (r.kind == LabelKind::kHeadDirection) {
    PlotPanel p{"head direction (deg)", {{"true", "#1f77b4", {}}, {"decoded", "#d62728", {}}}};
    for (std::size_t i = 0; i < r.n_bins(); ++i) {
      p.series[0].y.push_back(r.truth[i][0]);
      p.series[1].y.push_back(r.decoded[i][0]);
    }
    panels.push_back(std::move(p));
  } else {
    for (int c = 0; c < 2; ++c) {
      PlotPanel p{c == 0 ? "x (cm)" : "y (cm)", {{"true", "#1f77b4", {}}, {"decoded", "#d62728", {}}}};
      for (std::size_t i = 0; i < r.n_bins(); ++i) {
        p.series[0].y.push_back(r.truth[i][static_cast<std::size_t>(c)]);
        p.series[1].y.push_back(r.decoded[i][static_cast<std::size_t>(c)]);
      }
      panels.push_back(std::move(p));
    }
    PlotPanel e{"error (cm)", {{"AED", "#2ca02c", r.errors}}};
    panels.push_back(std::move(e));
  }
  write_text(out / "plot.svg", render_svg(title, "time (s)", r.times, panels));
}

int cmd_simulate(const std::string& kind, const Common& c) {
  const auto t0 = Clock::now();
  KeyValues kv;
  if (!c.config.empty()) kv = read_key_values(c.config);
  SpikeDataset d;
  std::uint64_t seed = 0;
  std::ostringstream echo;
  if (kind == "hd") {
    auto cfg = hd_sim_config(kv);
    if (c.seed) cfg.seed = *c.seed;
    seed = cfg.seed;
    d = simulate_hd(cfg);
  } else {
    auto cfg = grid_sim_config(kv);
    if (c.seed) cfg.seed = *c.seed;
    seed = cfg.seed;
    d = simulate_grid(cfg);
  }
  for (const auto& [k, v] : kv) echo << k << " = " << v << '\n';
  fs::create_directories(c.out);
  write_spike_dataset(d, c.out);
  RunManifest m{"simulate " + kind, echo.str(), seed, c.config.empty() ? std::vector<std::string>{} : std::vector<std::string>{c.config},
                {"spikes.csv", "labels.csv"}, SCRNN_VERSION, seconds_since(t0)};
  m.write(c.out);
  std::cout << "wrote " << d.num_neurons() << " neurons, " << d.label_times.size() << " labels to " << c.out << '\n';
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& arch, const Common& c) {
  const auto t0 = Clock::now();
  const auto cfg = load_train_config(c, arch);
  const auto d = load_data(data_dir);
  auto x = run_experiment(d, cfg);
  fs::create_directories(c.out);
  save_checkpoint(c.out, cfg, x.encoder, x.data.num_neurons(), *x.model);
  std::ostringstream curve;
  x.result.write_csv(curve);
  write_text(fs::path(c.out) / "loss_curve.csv", curve.str());
  write_text(fs::path(c.out) / "summary.json", x.test_report.summary_json().dump(2) + "\n");
  RunManifest m{"train", cfg.to_text(), cfg.seed, {data_dir},
                {"complex.json", "weights.json", "config.txt", "model.json", "loss_curve.csv", "summary.json"},
                SCRNN_VERSION, seconds_since(t0)};
  if (!x.model->complex()) m.outputs.erase(m.outputs.begin());
  m.write(c.out);
  std::cout << cfg.arch << ": " << x.model->parameter_count() << " parameters, best epoch " << x.result.best_epoch
            << ", held-out " << x.test_report.summary_json().dump() << '\n';
  return x.test_report.finite() && std::isfinite(x.result.best_val_loss) ? 0 : 2;
}

int cmd_eval(const std::string& ckpt_dir, const std::string& data_dir, const std::string& span, const Common& c) {
  const auto t0 = Clock::now();
  auto ck = load_checkpoint(ckpt_dir);
  const auto kind = detect_label_kind(data_dir);
  if (kind != ck.encoder.kind) {
    throw ValidationError("checkpoint decodes " + to_string(ck.encoder.kind) + " but data holds " + to_string(kind));
  }
  const auto d = load_spike_dataset(data_dir, kind);
  const auto data = prepare_data(d, ck.config.t_bin, ck.config.p);
  SCRNN_REQUIRE(data.num_neurons() == ck.n_neurons, ValidationError, "data neuron count differs from checkpoint");
  ColumnRange range{0, data.num_bins()};
  if (span != "all") {
    const auto split = chronological_split(data.num_bins(), ck.config.test_fraction);
    range = span == "train" ? split.train : split.test;
  }
  const auto report = evaluate(*ck.model, data, range, ck.encoder);
  fs::create_directories(c.out);
  write_report(report, c.out, ck.config.arch + " decoding (" + span + " span)");
  RunManifest m{"eval --span " + span, ck.config.to_text(), ck.config.seed, {ckpt_dir, data_dir},
                {"decoded.csv", "summary.json", "plot.svg"}, SCRNN_VERSION, seconds_since(t0)};
  m.write(c.out);
  std::cout << report.summary_json().dump() << '\n';
  return report.finite() ? 0 : 2;
}

int cmd_search(const std::string& data_dir, const std::string& space_path, const std::string& arch, int budget,
               const Common& c) {
  const auto t0 = Clock::now();
  const auto base = load_train_config(c, arch);
  const auto d = load_data(data_dir);
  const auto space = space_path.empty() ? SearchSpace::table(d.kind, base.arch) : SearchSpace::from_file(space_path);
  const auto r = random_search(d, space, base, budget, base.seed);
  fs::create_directories(c.out);
  std::ostringstream board;
  r.write_csv(board, space, d.kind);
  write_text(fs::path(c.out) / "leaderboard.csv", board.str());
  write_text(fs::path(c.out) / "best_config.txt", r.best().to_text());
  write_text(fs::path(c.out) / "space.txt", space.to_text());
  std::vector<std::string> inputs{data_dir};
  if (!space_path.empty()) inputs.push_back(space_path);
  RunManifest m{"search --budget " + std::to_string(budget), base.to_text(), base.seed, inputs,
                {"leaderboard.csv", "best_config.txt", "space.txt"}, SCRNN_VERSION, seconds_since(t0)};
  m.write(c.out);
  std::cout << "best score " << r.leaderboard.front().score << " (trial " << r.leaderboard.front().trial << ")\n";
  bool finite = true;
  for (const auto& t : r.leaderboard) finite = finite && std::isfinite(t.score);
  return finite ? 0 : 2;
}

void add_common(CLI::App* app, Common& c, bool config = true) {
  app->add_option("--out", c.out, "output directory")->required();
  app->add_option("--seed", c.seed, "random seed (overrides the config)");
  if (config) app->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simplicial convolutional recurrent decoding of spike trains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SCRNN_VERSION);

  Common sim_c, train_c, eval_c, search_c;
  std::string sim_kind;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("kind", sim_kind, "hd | grid")->required()->check(CLI::IsMember({"hd", "grid"}));
  add_common(sim, sim_c);

  std::string train_data, train_arch;
  auto* tr = app.add_subcommand("train", "train a decoder and write a checkpoint");
  tr->add_option("--data", train_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--arch", train_arch, "scrnn | ffnn | rnn | gnn")->check(CLI::IsMember({"scrnn", "ffnn", "rnn", "gnn"}));
  tr->add_option("--set", train_c.overrides, "config override key=value (repeatable)");
  add_common(tr, train_c);

  std::string eval_ckpt, eval_data, eval_span = "test";
  auto* ev = app.add_subcommand("eval", "decode a dataset with a checkpoint");
  ev->add_option("--checkpoint", eval_ckpt, "checkpoint directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--data", eval_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--span", eval_span, "test | train | all")->check(CLI::IsMember({"test", "train", "all"}));
  add_common(ev, eval_c, false);

  std::string search_data, search_space, search_arch;
  int budget = 8;
  auto* se = app.add_subcommand("search", "seeded random hyperparameter search");
  se->add_option("--data", search_data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  se->add_option("--space", search_space, "search space file (default: built-in table)")->check(CLI::ExistingFile);
  se->add_option("--arch", search_arch, "scrnn | ffnn | rnn | gnn")->check(CLI::IsMember({"scrnn", "ffnn", "rnn", "gnn"}));
  se->add_option("--budget", budget, "number of trials")->check(CLI::PositiveNumber);
  se->add_option("--set", search_c.overrides, "base config override key=value (repeatable)");
  add_common(se, search_c);

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(sim_kind, sim_c);
    if (tr->parsed()) return cmd_train(train_data, train_arch, train_c);
    if (ev->parsed()) return cmd_eval(eval_ckpt, eval_data, eval_span, eval_c);
    if (se->parsed()) return cmd_search(search_data, search_space, search_arch, budget, search_c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
