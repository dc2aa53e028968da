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

// Decoders behind one interface: the simplicial recurrent model, its K = 1
// graph restriction, and the feed-forward and plain recurrent baselines.

#pragma once

#include <Eigen/Dense>
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scrnn/complex.hpp"
#include "scrnn/config.hpp"
#include "scrnn/error.hpp"
#include "scrnn/filters.hpp"
#include "scrnn/metrics.hpp"
#include "scrnn/recurrent.hpp"
#include "scrnn/spikes.hpp"

namespace scrnn {

/// Binned counts, their binarization and per-bin labels.
struct DecodingData {
  LabelKind kind = LabelKind::kHeadDirection;
  SpikeCountMatrix counts;
  BinaryMatrix binary;
  LabelSeries labels;
  std::uint64_t id = 0;  // identifies the data for per-model caches

  Eigen::Index num_bins() const { return counts.num_bins(); }
  Eigen::Index num_neurons() const { return counts.num_neurons(); }
  double bin_center(Eigen::Index j) const { return counts.bin_left(j) + 0.5 * counts.t_bin; }
};

inline DecodingData prepare_data(const SpikeDataset& d, double t_bin, double p) {
  static std::atomic<std::uint64_t> next_id{1};
  DecodingData out;
  out.kind = d.kind;
  out.counts = bin_spikes(d, t_bin);
  out.binary = binarize_rows(out.counts, p);
  out.labels = bin_labels(d, t_bin);
  SCRNN_REQUIRE(out.labels.size() == out.counts.num_bins(), DimensionError, "label and count bin counts differ");
  out.id = next_id++;
  return out;
}

/// Chronological split: the leading block is held out, the rest trains.
struct Split {
  ColumnRange test;
  ColumnRange train;
};

inline Split chronological_split(Eigen::Index n_bins, double test_fraction) {
  SCRNN_REQUIRE(test_fraction > 0.0 && test_fraction < 1.0, std::invalid_argument, "test fraction must lie in (0, 1)");
  const auto n_test = static_cast<Eigen::Index>(std::llround(test_fraction * static_cast<double>(n_bins)));
  SCRNN_REQUIRE(n_test >= 1 && n_test < n_bins, std::invalid_argument, "split leaves an empty block");
  return {{0, n_test}, {n_test, n_bins}};
}

/// Final bins of every complete window inside `r` (windows never straddle
/// the split, so train and test stay disjoint).
inline std::vector<Eigen::Index> window_ends(ColumnRange r, int seq_len, int n_col) {
  std::vector<Eigen::Index> ends;
  for (Eigen::Index e = r.begin + seq_len - 1; e + n_col <= r.end; ++e) ends.push_back(e);
  return ends;
}

/// Maps labels to training targets: (cos, sin) for head direction, the unit
/// square (by training-label bounding box) for position.
struct TargetEncoder {
  LabelKind kind = LabelKind::kHeadDirection;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  static TargetEncoder fit(const DecodingData& data, ColumnRange train) {
    TargetEncoder e;
    e.kind = data.kind;
    if (e.kind == LabelKind::kPosition) {
      const auto block = data.labels.values.middleRows(train.begin, train.end - train.begin);
      for (int c = 0; c < 2; ++c) {
        e.lo[static_cast<std::size_t>(c)] = block.col(c).minCoeff();
        e.hi[static_cast<std::size_t>(c)] = block.col(c).maxCoeff();
        if (e.hi[static_cast<std::size_t>(c)] <= e.lo[static_cast<std::size_t>(c)]) {
          e.hi[static_cast<std::size_t>(c)] = e.lo[static_cast<std::size_t>(c)] + 1.0;
        }
      }
    }
    return e;
  }

  Eigen::Vector2d encode(const DecodingData& data, Eigen::Index j) const {
    const auto& v = data.labels.values;
    if (kind == LabelKind::kHeadDirection) {
      const double r = v(j, 0) / kDegPerRad;
      return {std::cos(r), std::sin(r)};
    }
    return {(v(j, 0) - lo[0]) / (hi[0] - lo[0]), (v(j, 1) - lo[1]) / (hi[1] - lo[1])};
  }

  Eigen::MatrixXd encode(const DecodingData& data, std::span<const Eigen::Index> ends) const {
    Eigen::MatrixXd y(2, static_cast<Eigen::Index>(ends.size()));
    for (std::size_t b = 0; b < ends.size(); ++b) y.col(static_cast<Eigen::Index>(b)) = encode(data, ends[b]);
    return y;
  }

  Point2 decode(const Eigen::Vector2d& y) const;

  Point2 truth(const DecodingData& data, Eigen::Index j) const {
    const auto& v = data.labels.values;
    return kind == LabelKind::kHeadDirection ? Point2{v(j, 0), 0.0} : Point2{v(j, 0), v(j, 1)};
  }

  nlohmann::json to_json() const {
    return {{"kind", to_string(kind)}, {"lo", lo}, {"hi", hi}};
  }

  static TargetEncoder from_json(const nlohmann::json& j) {
    TargetEncoder e;
    e.kind = parse_label_kind(j.at("kind").get<std::string>());
    e.lo = j.at("lo").get<std::array<double, 2>>();
    e.hi = j.at("hi").get<std::array<double, 2>>();
    return e;
  }
};

/// atan2(y2, y1) in [0, 360).
inline double decode_angle(const Eigen::Vector2d& y) {
  SCRNN_REQUIRE(!(y(0) == 0.0 && y(1) == 0.0), ValidationError, "angle of the zero vector is undefined");
  return angle_of(y(0), y(1));
}

inline Point2 TargetEncoder::decode(const Eigen::Vector2d& y) const {
  if (kind == LabelKind::kHeadDirection) return {decode_angle(y), 0.0};
  return {lo[0] + y(0) * (hi[0] - lo[0]), lo[1] + y(1) * (hi[1] - lo[1])};
}

/// Visitor over raw parameter storage: (values, grads, length).
using ParameterVisitor = std::function<void(double*, double*, Eigen::Index)>;

/// Common decoder surface. forward() maps windows (given by their final bin)
/// to 2 x B predictions; backward() consumes dLoss/dY for the latest
/// training forward.
class Decoder {
 public:
  virtual ~Decoder() = default;

  virtual std::string arch() const = 0;
  virtual int seq_len() const = 0;
  virtual int n_col() const { return 1; }
  virtual void init(std::mt19937_64& rng) = 0;
  virtual Eigen::MatrixXd forward(const DecodingData& data, std::span<const Eigen::Index> ends, bool training,
                                  std::mt19937_64* rng) = 0;
  virtual void backward(const Eigen::MatrixXd& dy) = 0;
  virtual void zero_grad() = 0;
  virtual void for_each_parameter(const ParameterVisitor& f) = 0;
  virtual nlohmann::json weights_json() const = 0;
  virtual void load_weights_json(const nlohmann::json& j) = 0;
  virtual const SimplicialComplex* complex() const { return nullptr; }

  long long parameter_count() {
    long long n = 0;
    for_each_parameter([&](double*, double*, Eigen::Index len) { n += len; });
    return n;
  }

  /// Inference over many windows in fixed-size chunks.
  Eigen::MatrixXd predict(const DecodingData& data, std::span<const Eigen::Index> ends, std::size_t chunk = 256) {
    Eigen::MatrixXd out(2, static_cast<Eigen::Index>(ends.size()));
    for (std::size_t at = 0; at < ends.size(); at += chunk) {
      const std::size_t n = std::min(chunk, ends.size() - at);
      out.middleCols(static_cast<Eigen::Index>(at), static_cast<Eigen::Index>(n)) =
          forward(data, ends.subspan(at, n), false, nullptr);
    }
    return out;
  }

 protected:
  void check_ends(const DecodingData& data, std::span<const Eigen::Index> ends) const {
    SCRNN_REQUIRE(!ends.empty(), std::invalid_argument, "no windows to decode");
    for (auto e : ends) {
      SCRNN_REQUIRE(e - seq_len() + 1 >= 0 && e + n_col() <= data.num_bins(), std::out_of_range,
                    "window outside the data range");
    }
  }
};

namespace detail {

template <typename M>
void visit(const ParameterVisitor& f, M& value, M& grad) {
  f(value.data(), grad.data(), value.size());
}

}  // namespace detail

/// Simplicial convolution stack per bin, flattened and fed as a sequence to
/// an Elman stack with a linear 2-unit head.
class ScrnnModel : public Decoder {
 public:
  ScrnnModel(std::shared_ptr<const SimplicialComplex> complex, const TrainConfig& cfg, std::string arch = "scrnn")
      : complex_(std::move(complex)),
        ops_(shift_operators(*complex_)),
        sc_(cfg.sc_layers, cfg.filters, cfg.degree, complex_->max_dim(), parse_activation(cfg.sc_activation)),
        seq_len_(cfg.seq_len),
        n_col_(cfg.n_col),
        arch_(std::move(arch)) {
    SCRNN_REQUIRE(seq_len_ >= 1 && n_col_ >= 1, std::invalid_argument, "seq_len and n_col must be >= 1");
    rnn_ = RnnStack(static_cast<Eigen::Index>(complex_->total_count()), cfg.hidden_size, cfg.nn_layers, 2, cfg.dropout);
  }

  std::string arch() const override { return arch_; }
  int seq_len() const override { return seq_len_; }
  int n_col() const override { return n_col_; }
  const SimplicialComplex* complex() const override { return complex_.get(); }
  const ScLayerStack& sc() const { return sc_; }
  ScLayerStack& sc() { return sc_; }
  const RnnStack& rnn() const { return rnn_; }
  RnnStack& rnn() { return rnn_; }

  /// Length of one flattened SC output, fixed by the complex.
  Eigen::Index input_width() const { return static_cast<Eigen::Index>(complex_->total_count()); }

  void init(std::mt19937_64& rng) override {
    sc_.init_uniform(rng);
    rnn_.init_uniform(rng);
  }

  Eigen::MatrixXd forward(const DecodingData& data, std::span<const Eigen::Index> ends, bool training,
                          std::mt19937_64* rng) override {
    check_ends(data, ends);
    SCRNN_REQUIRE(data.num_neurons() == complex_->num_vertices(), DimensionError,
                  "data neuron count differs from complex vertex count");
    const auto& active = active_cache(data);
    // Every distinct bin is convolved once, all bins batched column-wise.
    bins_.clear();
    for (auto e : ends) {
      for (Eigen::Index j = e - seq_len_ + 1; j <= e; ++j) bins_.push_back(j);
    }
    std::sort(bins_.begin(), bins_.end());
    bins_.erase(std::unique(bins_.begin(), bins_.end()), bins_.end());
    const auto n_bins = static_cast<Eigen::Index>(bins_.size());
    std::vector<Eigen::MatrixXd> x(static_cast<std::size_t>(complex_->max_dim()) + 1);
    x[0].resize(complex_->num_vertices(), n_bins * n_col_);
    for (Eigen::Index b = 0; b < n_bins; ++b) {
      x[0].middleCols(b * n_col_, n_col_) = data.counts.counts.middleCols(bins_[static_cast<std::size_t>(b)], n_col_).cast<double>();
    }
    for (int k = 1; k <= complex_->max_dim(); ++k) {
      auto& xk = x[static_cast<std::size_t>(k)];
      xk = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(complex_->count(k)), n_bins);
      for (Eigen::Index b = 0; b < n_bins; ++b) {
        for (auto i : active[static_cast<std::size_t>(bins_[static_cast<std::size_t>(b)])][static_cast<std::size_t>(k)]) {
          xk(i, b) = 1.0;
        }
      }
    }
    auto out = sc_.forward_batch(ops_, x, n_col_, training ? &sc_trace_ : nullptr);
    Eigen::MatrixXd z(input_width(), n_bins);
    Eigen::Index row = 0;
    for (const auto& o : out) {
      z.middleRows(row, o.rows()) = o;
      row += o.rows();
    }
    std::vector<Eigen::MatrixXd> seq(static_cast<std::size_t>(seq_len_),
                                     Eigen::MatrixXd(input_width(), static_cast<Eigen::Index>(ends.size())));
    for (std::size_t b = 0; b < ends.size(); ++b) {
      for (int t = 0; t < seq_len_; ++t) {
        seq[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(b)) = z.col(column_of(ends[b] - seq_len_ + 1 + t));
      }
    }
    if (training) {
      ends_.assign(ends.begin(), ends.end());
      y_ = rnn_.forward(seq, true, rng, &rnn_trace_);
      return y_;
    }
    return rnn_.forward(seq, false, nullptr, nullptr);
  }

  void backward(const Eigen::MatrixXd& dy) override {
    auto d_seq = rnn_.backward(rnn_trace_, y_, dy, true);
    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(input_width(), static_cast<Eigen::Index>(bins_.size()));
    for (std::size_t b = 0; b < ends_.size(); ++b) {
      for (int t = 0; t < seq_len_; ++t) {
        dz.col(column_of(ends_[b] - seq_len_ + 1 + t)) += d_seq[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(b));
      }
    }
    std::vector<Eigen::MatrixXd> grad_out;
    Eigen::Index row = 0;
    for (int k = 0; k <= complex_->max_dim(); ++k) {
      const auto n = static_cast<Eigen::Index>(complex_->count(k));
      grad_out.push_back(dz.middleRows(row, n));
      row += n;
    }
    sc_.backward_batch(ops_, sc_trace_, grad_out);
  }

  void zero_grad() override {
    sc_.zero_grad();
    rnn_.zero_grad();
  }

  void for_each_parameter(const ParameterVisitor& f) override {
    sc_.for_each_parameter([&](auto& w, auto& g) { detail::visit(f, w, g); });
    rnn_.for_each_parameter([&](auto& w, auto& g) { detail::visit(f, w, g); });
  }

  nlohmann::json weights_json() const override { return {{"sc", sc_.to_json()}, {"rnn", rnn_.to_json()}}; }

  void load_weights_json(const nlohmann::json& j) override {
    sc_.load_json(j.at("sc"));
    rnn_.load_json(j.at("rnn"));
  }

 private:
  using ActiveLists = std::vector<std::vector<std::vector<std::uint32_t>>>;

  const ActiveLists& active_cache(const DecodingData& data) {
    auto it = active_.find(data.id);
    if (it != active_.end()) return it->second;
    ActiveLists lists(static_cast<std::size_t>(data.num_bins()));
    for (Eigen::Index j = 0; j < data.num_bins(); ++j) {
      lists[static_cast<std::size_t>(j)] = active_simplices(*complex_, data.binary, j);
    }
    return active_.emplace(data.id, std::move(lists)).first->second;
  }

  Eigen::Index column_of(Eigen::Index bin) const {
    return static_cast<Eigen::Index>(std::lower_bound(bins_.begin(), bins_.end(), bin) - bins_.begin());
  }

  std::shared_ptr<const SimplicialComplex> complex_;
  std::vector<ShiftOperators> ops_;
  ScLayerStack sc_;
  RnnStack rnn_;
  int seq_len_ = 5;
  int n_col_ = 1;
  std::string arch_;
  std::unordered_map<std::uint64_t, ActiveLists> active_;
  // Latest training forward.
  std::vector<Eigen::Index> bins_;
  std::vector<Eigen::Index> ends_;
  ScTrace sc_trace_;
  RnnTrace rnn_trace_;
  Eigen::MatrixXd y_;
};

/// Fully-connected ReLU stack on the flattened seq_len x N count window.
class FfnnModel : public Decoder {
 public:
  FfnnModel(Eigen::Index n_neurons, const TrainConfig& cfg) : seq_len_(cfg.seq_len), dropout_(cfg.dropout) {
    SCRNN_REQUIRE(n_neurons >= 1, std::invalid_argument, "need at least one neuron");
    Eigen::Index in = n_neurons * seq_len_;
    for (int l = 0; l <= cfg.nn_layers; ++l) {
      const Eigen::Index out = l == cfg.nn_layers ? 2 : cfg.layer_width;
      w_.push_back(Eigen::MatrixXd::Zero(out, in));
      b_.push_back(Eigen::VectorXd::Zero(out));
      in = out;
    }
    g_w_ = w_;
    g_b_ = b_;
  }

  std::string arch() const override { return "ffnn"; }
  int seq_len() const override { return seq_len_; }
  std::size_t num_layers() const { return w_.size(); }
  const Eigen::MatrixXd& weight(std::size_t l) const { return w_.at(l); }

  void init(std::mt19937_64& rng) override {
    for (std::size_t l = 0; l < w_.size(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(w_[l].cols()));
      detail::fill_uniform(w_[l], bound, rng);
      Eigen::MatrixXd b = b_[l];
      detail::fill_uniform(b, bound, rng);
      b_[l] = b;
    }
  }

  Eigen::MatrixXd forward(const DecodingData& data, std::span<const Eigen::Index> ends, bool training,
                          std::mt19937_64* rng) override {
    check_ends(data, ends);
    const Eigen::Index n = data.num_neurons();
    SCRNN_REQUIRE(n * seq_len_ == w_.front().cols(), DimensionError, "data neuron count differs from model input");
    Eigen::MatrixXd x(n * seq_len_, static_cast<Eigen::Index>(ends.size()));
    for (std::size_t b = 0; b < ends.size(); ++b) {
      for (int t = 0; t < seq_len_; ++t) {
        x.col(static_cast<Eigen::Index>(b)).segment(t * n, n) =
            data.counts.counts.col(ends[b] - seq_len_ + 1 + t).cast<double>();
      }
    }
    const bool drop = training && dropout_ > 0.0 && rng != nullptr;
    if (training) {
      acts_.assign(1, x);
      masks_.clear();
    }
    for (std::size_t l = 0; l < w_.size(); ++l) {
      Eigen::MatrixXd h = w_[l] * x;
      h.colwise() += b_[l];
      if (l + 1 < w_.size()) {
        h = h.cwiseMax(0.0);
        if (drop) {
          Eigen::MatrixXd m = detail::dropout_mask(h.rows(), h.cols(), dropout_, *rng);
          h.array() *= m.array();
          masks_.push_back(std::move(m));
        }
      }
      if (training) acts_.push_back(h);
      x = std::move(h);
    }
    return x;
  }

  void backward(const Eigen::MatrixXd& dy) override {
    Eigen::MatrixXd d = dy;
    for (std::size_t l = w_.size(); l-- > 0;) {
      if (l + 1 < w_.size()) {
        // acts_[l + 1] is post-ReLU (and post-dropout) output of layer l.
        if (!masks_.empty()) d.array() *= masks_[l].array();
        d = (acts_[l + 1].array() > 0.0).select(d, 0.0);
      }
      g_w_[l].noalias() += d * acts_[l].transpose();
      g_b_[l] += d.rowwise().sum();
      if (l > 0) d = w_[l].transpose() * d;
    }
  }

  void zero_grad() override {
    for (auto& g : g_w_) g.setZero();
    for (auto& g : g_b_) g.setZero();
  }

  void for_each_parameter(const ParameterVisitor& f) override {
    for (std::size_t l = 0; l < w_.size(); ++l) {
      detail::visit(f, w_[l], g_w_[l]);
      detail::visit(f, b_[l], g_b_[l]);
    }
  }

  nlohmann::json weights_json() const override {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t l = 0; l < w_.size(); ++l) {
      auto w = detail::matrix_to_json(w_[l]);
      w["layer"] = l;
      w["matrix"] = "W";
      list.push_back(std::move(w));
      auto b = detail::matrix_to_json(b_[l]);
      b["layer"] = l;
      b["matrix"] = "b";
      list.push_back(std::move(b));
    }
    return {{"ffnn", list}};
  }

  void load_weights_json(const nlohmann::json& j) override {
    for (const auto& e : j.at("ffnn")) {
      const auto l = e.at("layer").get<std::size_t>();
      SCRNN_REQUIRE(l < w_.size(), ParseError, "checkpoint layer out of range");
      if (e.at("matrix").get<std::string>() == "W") {
        detail::matrix_from_json(e, w_[l]);
      } else {
        Eigen::MatrixXd b = b_[l];
        detail::matrix_from_json(e, b);
        b_[l] = b;
      }
    }
  }

 private:
  int seq_len_ = 5;
  double dropout_ = 0.0;
  std::vector<Eigen::MatrixXd> w_, g_w_;
  std::vector<Eigen::VectorXd> b_, g_b_;
  std::vector<Eigen::MatrixXd> acts_;
  std::vector<Eigen::MatrixXd> masks_;
};

/// Elman stack on per-bin count vectors.
class RnnBaseline : public Decoder {
 public:
  RnnBaseline(Eigen::Index n_neurons, const TrainConfig& cfg)
      : rnn_(n_neurons, cfg.hidden_size, cfg.nn_layers, 2, cfg.dropout), seq_len_(cfg.seq_len) {}

  std::string arch() const override { return "rnn"; }
  int seq_len() const override { return seq_len_; }
  const RnnStack& rnn() const { return rnn_; }

  void init(std::mt19937_64& rng) override { rnn_.init_uniform(rng); }

  Eigen::MatrixXd forward(const DecodingData& data, std::span<const Eigen::Index> ends, bool training,
                          std::mt19937_64* rng) override {
    check_ends(data, ends);
    const Eigen::Index n = data.num_neurons();
    SCRNN_REQUIRE(n == rnn_.input_size(), DimensionError, "data neuron count differs from model input");
    std::vector<Eigen::MatrixXd> seq(static_cast<std::size_t>(seq_len_),
                                     Eigen::MatrixXd(n, static_cast<Eigen::Index>(ends.size())));
    for (std::size_t b = 0; b < ends.size(); ++b) {
      for (int t = 0; t < seq_len_; ++t) {
        seq[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(b)) =
            data.counts.counts.col(ends[b] - seq_len_ + 1 + t).cast<double>();
      }
    }
    if (!training) return rnn_.forward(seq, false, nullptr, nullptr);
    y_ = rnn_.forward(seq, true, rng, &trace_);
    return y_;
  }

  void backward(const Eigen::MatrixXd& dy) override { rnn_.backward(trace_, y_, dy, false); }
  void zero_grad() override { rnn_.zero_grad(); }

  void for_each_parameter(const ParameterVisitor& f) override {
    rnn_.for_each_parameter([&](auto& w, auto& g) { detail::visit(f, w, g); });
  }

  nlohmann::json weights_json() const override { return {{"rnn", rnn_.to_json()}}; }
  void load_weights_json(const nlohmann::json& j) override { rnn_.load_json(j.at("rnn")); }

 private:
  RnnStack rnn_;
  int seq_len_ = 5;
  RnnTrace trace_;
  Eigen::MatrixXd y_;
};

/// Global complex over the training columns; `gnn` caps it at dimension 1.
inline std::shared_ptr<const SimplicialComplex> training_complex(const DecodingData& data, ColumnRange train,
                                                                  int k_max) {
  return std::make_shared<const SimplicialComplex>(build_complex(data.binary, k_max, train));
}

/// Builds (uninitialized) weights for `cfg.arch`, given an existing complex
/// for the simplicial kinds.
inline std::unique_ptr<Decoder> make_decoder(const TrainConfig& cfg, Eigen::Index n_neurons,
                                             std::shared_ptr<const SimplicialComplex> complex) {
  if (cfg.arch == "ffnn") return std::make_unique<FfnnModel>(n_neurons, cfg);
  if (cfg.arch == "rnn") return std::make_unique<RnnBaseline>(n_neurons, cfg);
  if (cfg.arch == "scrnn" || cfg.arch == "gnn") {
    SCRNN_REQUIRE(complex != nullptr, std::invalid_argument, "simplicial decoder needs a complex");
    SCRNN_REQUIRE(cfg.arch != "gnn" || complex->max_dim() == 1, std::invalid_argument, "gnn complex must stop at dimension 1");
    return std::make_unique<ScrnnModel>(std::move(complex), cfg, cfg.arch);
  }
  throw std::invalid_argument("unknown architecture '" + cfg.arch + "'");
}

/// Builds and seeds a decoder from training data. gnn is the simplicial
/// model with K_max = 1.
inline std::unique_ptr<Decoder> build_model(const TrainConfig& cfg, const DecodingData& data, ColumnRange train) {
  std::shared_ptr<const SimplicialComplex> complex;
  if (cfg.arch == "scrnn") complex = training_complex(data, train, cfg.k_max);
  if (cfg.arch == "gnn") complex = training_complex(data, train, 1);
  auto m = make_decoder(cfg, data.num_neurons(), std::move(complex));
  std::mt19937_64 rng(cfg.seed);
  m->init(rng);
  return m;
}

inline std::unique_ptr<Decoder> build_baseline(const std::string& kind, TrainConfig cfg, const DecodingData& data,
                                               ColumnRange train) {
  SCRNN_REQUIRE(kind == "ffnn" || kind == "rnn" || kind == "gnn", std::invalid_argument,
                "unknown baseline kind '" + kind + "'");
  cfg.arch = kind;
  return build_model(cfg, data, train);
}

/// Prediction for the window ending at bin `end`.
inline Eigen::Vector2d scrnn_predict(Decoder& m, const DecodingData& data, Eigen::Index end) {
  const Eigen::Index ends[] = {end};
  return m.forward(data, ends, false, nullptr).col(0);
}

/// Everything needed to decode new data: weights, complex, encoder, config.
struct Checkpoint {
  TrainConfig config;
  TargetEncoder encoder;
  Eigen::Index n_neurons = 0;
  std::unique_ptr<Decoder> model;
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  SCRNN_REQUIRE(static_cast<bool>(out), ValidationError, "cannot write " + path.string());
  out << text;
  SCRNN_REQUIRE(static_cast<bool>(out), ValidationError, "write failed for " + path.string());
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  SCRNN_REQUIRE(static_cast<bool>(in), ParseError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& dir, const TrainConfig& cfg, const TargetEncoder& enc,
                            Eigen::Index n_neurons, const Decoder& model) {
  std::filesystem::create_directories(dir);
  if (const auto* s = model.complex()) detail::write_text(dir / "complex.json", complex_to_json(*s, true).dump());
  detail::write_text(dir / "weights.json", model.weights_json().dump());
  detail::write_text(dir / "config.txt", cfg.to_text());
  nlohmann::json meta = {{"arch", model.arch()}, {"n_neurons", n_neurons}, {"encoder", enc.to_json()}};
  detail::write_text(dir / "model.json", meta.dump(2));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  Checkpoint c;
  c.config = TrainConfig::from_file(dir / "config.txt");
  const auto meta = detail::read_json(dir / "model.json");
  c.n_neurons = meta.at("n_neurons").get<Eigen::Index>();
  c.encoder = TargetEncoder::from_json(meta.at("encoder"));
  SCRNN_REQUIRE(meta.at("arch").get<std::string>() == c.config.arch, ParseError, "checkpoint arch mismatch");
  std::shared_ptr<const SimplicialComplex> complex;
  if (c.config.arch == "scrnn" || c.config.arch == "gnn") {
    complex = std::make_shared<const SimplicialComplex>(complex_from_json(detail::read_json(dir / "complex.json")));
  }
  c.model = make_decoder(c.config, c.n_neurons, std::move(complex));
  c.model->load_weights_json(detail::read_json(dir / "weights.json"));
  return c;
}

}  // namespace scrnn
