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

// Key-value configuration files (`key = value`, '#' comments) for training,
// hyperparameter search spaces and the simulators.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "scrnn/error.hpp"
#include "scrnn/filters.hpp"
#include "scrnn/spikes.hpp"
#include "scrnn/synth.hpp"

namespace scrnn {

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in, const std::string& source = "<config>") {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto t = detail::trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto key = std::string(detail::trim(t.substr(0, eq)));
    if (key.empty()) throw ParseError(source + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = std::string(detail::trim(t.substr(eq + 1)));
  }
  return kv;
}

inline KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return parse_key_values(in, path.string());
}

namespace detail {

inline double parse_number(const std::string& key, const std::string& v) {
  auto d = to_double(v);
  if (!d) throw ParseError("config key '" + key + "': expected a number, got '" + v + "'");
  return *d;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  auto i = to_integer(v);
  if (!i) throw ParseError("config key '" + key + "': expected an integer, got '" + v + "'");
  return *i;
}

}  // namespace detail

/// Everything needed to preprocess data, build a decoder and train it.
struct TrainConfig {
  std::string arch = "scrnn";  // scrnn | ffnn | rnn | gnn
  int epochs = 100;
  int batch_size = 8;
  double learning_rate = 1e-4;
  double dropout = 0.3;
  int nn_layers = 2;      // RNN blocks, or FFNN hidden layers
  int layer_width = 128;  // FFNN hidden width
  int hidden_size = 200;  // RNN hidden size
  int sc_layers = 2;
  int filters = 2;
  int degree = 1;
  int k_max = 2;
  int seq_len = 5;
  int n_col = 1;
  double p = 0.3;
  double t_bin = 0.1;
  double test_fraction = 0.25;
  double train_fraction = 0.75;
  double grad_clip = 5.0;
  std::string sc_activation = "relu";
  std::uint64_t seed = 7;

  void set(const std::string& key, const std::string& v) {
    using detail::parse_int;
    using detail::parse_number;
    if (key == "arch") arch = v;
    else if (key == "epochs") epochs = static_cast<int>(parse_int(key, v));
    else if (key == "batch_size") batch_size = static_cast<int>(parse_int(key, v));
    else if (key == "learning_rate") learning_rate = parse_number(key, v);
    else if (key == "dropout") dropout = parse_number(key, v);
    else if (key == "nn_layers") nn_layers = static_cast<int>(parse_int(key, v));
    else if (key == "layer_width") layer_width = static_cast<int>(parse_int(key, v));
    else if (key == "hidden_size") hidden_size = static_cast<int>(parse_int(key, v));
    else if (key == "sc_layers") sc_layers = static_cast<int>(parse_int(key, v));
    else if (key == "filters") filters = static_cast<int>(parse_int(key, v));
    else if (key == "degree") degree = static_cast<int>(parse_int(key, v));
    else if (key == "k_max") k_max = static_cast<int>(parse_int(key, v));
    else if (key == "seq_len") seq_len = static_cast<int>(parse_int(key, v));
    else if (key == "n_col") n_col = static_cast<int>(parse_int(key, v));
    else if (key == "p") p = parse_number(key, v);
    else if (key == "t_bin") t_bin = parse_number(key, v);
    else if (key == "test_fraction") { test_fraction = parse_number(key, v); train_fraction = 1.0 - test_fraction; }
    else if (key == "train_fraction") { train_fraction = parse_number(key, v); test_fraction = 1.0 - train_fraction; }
    else if (key == "grad_clip") grad_clip = parse_number(key, v);
    else if (key == "sc_activation") sc_activation = v;
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, v));
    else throw ParseError("unknown config key '" + key + "'");
  }

  void apply(const KeyValues& kv) {
    for (const auto& [k, v] : kv) set(k, v);
  }

  static TrainConfig from_file(const std::filesystem::path& path) {
    TrainConfig c;
    c.apply(read_key_values(path));
    c.validate();
    return c;
  }

  /// Epochs may be zero; everything else must be positive.
  void validate() const {
    SCRNN_REQUIRE(arch == "scrnn" || arch == "ffnn" || arch == "rnn" || arch == "gnn", ParseError,
                  "arch must be one of scrnn|ffnn|rnn|gnn");
    SCRNN_REQUIRE(epochs >= 0, std::invalid_argument, "epochs must be >= 0");
    SCRNN_REQUIRE(batch_size >= 1 && nn_layers >= 1 && layer_width >= 1 && hidden_size >= 1, std::invalid_argument,
                  "batch size, layer counts and widths must be positive");
    SCRNN_REQUIRE(sc_layers >= 1 && filters >= 1 && degree >= 1 && k_max >= 1, std::invalid_argument,
                  "SC layers, filters, degree and k_max must be positive");
    SCRNN_REQUIRE(seq_len >= 1 && n_col >= 1, std::invalid_argument, "seq_len and n_col must be positive");
    SCRNN_REQUIRE(learning_rate >= 0.0 && std::isfinite(learning_rate), std::invalid_argument,
                  "learning rate must be finite and non-negative");
    SCRNN_REQUIRE(dropout >= 0.0 && dropout < 1.0, std::invalid_argument, "dropout must lie in [0, 1)");
    SCRNN_REQUIRE(p > 0.0 && p <= 1.0, std::invalid_argument, "p must lie in (0, 1]");
    SCRNN_REQUIRE(t_bin > 0.0, std::invalid_argument, "t_bin must be positive");
    SCRNN_REQUIRE(test_fraction > 0.0 && train_fraction > 0.0 && std::abs(test_fraction + train_fraction - 1.0) < 1e-9,
                  std::invalid_argument, "split fractions must be positive and sum to 1");
    SCRNN_REQUIRE(grad_clip > 0.0, std::invalid_argument, "grad_clip must be positive");
    parse_activation(sc_activation);
  }

  KeyValues to_key_values() const {
    using detail::format_double;
    return {{"arch", arch},
            {"epochs", std::to_string(epochs)},
            {"batch_size", std::to_string(batch_size)},
            {"learning_rate", format_double(learning_rate)},
            {"dropout", format_double(dropout)},
            {"nn_layers", std::to_string(nn_layers)},
            {"layer_width", std::to_string(layer_width)},
            {"hidden_size", std::to_string(hidden_size)},
            {"sc_layers", std::to_string(sc_layers)},
            {"filters", std::to_string(filters)},
            {"degree", std::to_string(degree)},
            {"k_max", std::to_string(k_max)},
            {"seq_len", std::to_string(seq_len)},
            {"n_col", std::to_string(n_col)},
            {"p", format_double(p)},
            {"t_bin", format_double(t_bin)},
            {"test_fraction", format_double(test_fraction)},
            {"grad_clip", format_double(grad_clip)},
            {"sc_activation", sc_activation},
            {"seed", std::to_string(seed)}};
  }

  std::string to_text() const {
    std::ostringstream out;
    for (const auto& [k, v] : to_key_values()) out << k << " = " << v << '\n';
    return out.str();
  }
};

/// Candidate values per TrainConfig key, written as `key = [v1, v2, ...]`.
struct SearchSpace {
  std::map<std::string, std::vector<std::string>> candidates;

  static SearchSpace parse(const KeyValues& kv) {
    SearchSpace s;
    for (const auto& [key, raw] : kv) {
      std::string_view body = detail::trim(raw);
      if (!body.empty() && body.front() == '[') {
        SCRNN_REQUIRE(body.back() == ']', ParseError, "unterminated list for key '" + key + "'");
        body = body.substr(1, body.size() - 2);
      }
      std::vector<std::string> values;
      for (auto v : detail::split(body, ',')) {
        if (!v.empty()) values.emplace_back(v);
      }
      SCRNN_REQUIRE(!values.empty(), ParseError, "empty candidate list for key '" + key + "'");
      TrainConfig probe;
      for (const auto& v : values) probe.set(key, v);
      s.candidates[key] = std::move(values);
    }
    return s;
  }

  static SearchSpace from_file(const std::filesystem::path& path) { return parse(read_key_values(path)); }

  bool empty() const { return candidates.empty(); }

  std::string to_text() const {
    std::ostringstream out;
    for (const auto& [k, vs] : candidates) {
      out << k << " = [";
      for (std::size_t i = 0; i < vs.size(); ++i) out << (i ? ", " : "") << vs[i];
      out << "]\n";
    }
    return out.str();
  }

  /// Default spaces (hd|grid x ffnn|rnn|scrnn/gnn) per data kind and architecture.
  static SearchSpace table(LabelKind kind, const std::string& arch) {
    SearchSpace s;
    auto& c = s.candidates;
    const bool hd = kind == LabelKind::kHeadDirection;
    const bool sc = arch == "scrnn" || arch == "gnn";
    if (arch == "ffnn") {
      c["epochs"] = hd ? std::vector<std::string>{"25", "50", "100"} : std::vector<std::string>{"50", "100"};
      c["batch_size"] = {"8", "16", "32"};
      c["learning_rate"] = hd ? std::vector<std::string>{"0.01", "0.001", "0.0001"}
                              : std::vector<std::string>{"0.001", "0.0001", "0.00001"};
      c["dropout"] = {"0.2", "0.3", "0.4"};
      c["nn_layers"] = {"2", "3", "4"};
      c["layer_width"] = hd ? std::vector<std::string>{"64", "128", "256"} : std::vector<std::string>{"128", "256", "512"};
    } else if (arch == "rnn") {
      c["epochs"] = {"25", "50", "100"};
      c["batch_size"] = {"8", "16", "32", "64"};
      c["learning_rate"] = hd ? std::vector<std::string>{"0.01", "0.001", "0.0001", "0.00001"}
                              : std::vector<std::string>{"0.001", "0.0001", "0.00001"};
      c["dropout"] = hd ? std::vector<std::string>{"0.2", "0.3", "0.4"} : std::vector<std::string>{"0.2", "0.3", "0.4", "0.5"};
      c["nn_layers"] = {"1", "2", "3"};
      c["hidden_size"] = hd ? std::vector<std::string>{"50", "100", "200"} : std::vector<std::string>{"100", "200", "400"};
    } else if (sc) {
      c["epochs"] = {"50", "100"};
      c["batch_size"] = hd ? std::vector<std::string>{"8", "16", "32", "64"} : std::vector<std::string>{"8", "16"};
      c["learning_rate"] = {"0.001", "0.0001", "0.00001"};
      c["dropout"] = {"0.2", "0.3", "0.4"};
      c["nn_layers"] = {"1", "2", "3"};
      c["layer_width"] = hd ? std::vector<std::string>{"32", "64", "128"} : std::vector<std::string>{"32", "64", "128", "256"};
      c["hidden_size"] = {"50", "100", "200"};
      c["degree"] = {"1", "2"};
      c["sc_layers"] = hd ? std::vector<std::string>{"1", "2", "3", "4"} : std::vector<std::string>{"1", "2", "3"};
      c["filters"] = {"1", "3", "5"};
    } else {
      throw ParseError("unknown arch '" + arch + "'");
    }
    return s;
  }
};

namespace detail {

inline std::vector<double> parse_number_list(const std::string& key, std::string_view raw) {
  raw = trim(raw);
  if (!raw.empty() && raw.front() == '[') raw = raw.substr(1, raw.size() - 2);
  std::vector<double> out;
  for (auto v : split(raw, ',')) {
    if (!v.empty()) out.push_back(parse_number(key, std::string(v)));
  }
  return out;
}

}  // namespace detail

inline HdSimConfig hd_sim_config(const KeyValues& kv) {
  using detail::parse_int;
  using detail::parse_number;
  HdSimConfig c;
  for (const auto& [k, v] : kv) {
    if (k == "n_neurons") c.n_neurons = static_cast<int>(parse_int(k, v));
    else if (k == "peak_rate_hz") c.peak_rate_hz = parse_number(k, v);
    else if (k == "kappa") c.kappa = parse_number(k, v);
    else if (k == "preferred_deg") c.preferred_deg = detail::parse_number_list(k, v);
    else if (k == "step_std_deg") c.step_std_deg = parse_number(k, v);
    else if (k == "duration_s") c.duration_s = parse_number(k, v);
    else if (k == "label_rate_hz") c.label_rate_hz = parse_number(k, v);
    else if (k == "seed") c.seed = static_cast<std::uint64_t>(parse_int(k, v));
    else throw ParseError("unknown hd simulation key '" + k + "'");
  }
  c.validate();
  return c;
}

/// Grid modules are given as parallel lists: `module_scales_cm`,
/// `module_orientations_deg`, `module_cells`.
inline GridSimConfig grid_sim_config(const KeyValues& kv) {
  using detail::parse_int;
  using detail::parse_number;
  GridSimConfig c;
  std::vector<double> scales, orientations, cells;
  for (const auto& [k, v] : kv) {
    if (k == "module_scales_cm") scales = detail::parse_number_list(k, v);
    else if (k == "module_orientations_deg") orientations = detail::parse_number_list(k, v);
    else if (k == "module_cells") cells = detail::parse_number_list(k, v);
    else if (k == "arena_cm") c.arena_cm = parse_number(k, v);
    else if (k == "speed_cm_s") c.speed_cm_s = parse_number(k, v);
    else if (k == "turn_std_deg") c.turn_std_deg = parse_number(k, v);
    else if (k == "peak_rate_hz") c.peak_rate_hz = parse_number(k, v);
    else if (k == "duration_s") c.duration_s = parse_number(k, v);
    else if (k == "label_rate_hz") c.label_rate_hz = parse_number(k, v);
    else if (k == "seed") c.seed = static_cast<std::uint64_t>(parse_int(k, v));
    else throw ParseError("unknown grid simulation key '" + k + "'");
  }
  if (!scales.empty()) {
    SCRNN_REQUIRE(orientations.empty() || orientations.size() == scales.size(), ParseError,
                  "module_orientations_deg length must match module_scales_cm");
    SCRNN_REQUIRE(cells.empty() || cells.size() == scales.size(), ParseError,
                  "module_cells length must match module_scales_cm");
    c.modules.clear();
    for (std::size_t i = 0; i < scales.size(); ++i) {
      c.modules.push_back({scales[i], orientations.empty() ? 0.0 : orientations[i],
                           cells.empty() ? 24 : static_cast<int>(cells[i]), {}});
    }
  }
  c.validate();
  return c;
}

}  // namespace scrnn
