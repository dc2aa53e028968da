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

// Stacked Elman RNN with a dense read-out head, batched over sequences.

#pragma once

#include <Eigen/Dense>
#include "json.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "scrnn/error.hpp"
#include "scrnn/filters.hpp"

namespace scrnn {

namespace detail {

inline void fill_uniform(Eigen::MatrixXd& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
  }
}

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline void matrix_from_json(const nlohmann::json& j, Eigen::MatrixXd& m) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  SCRNN_REQUIRE(rows == m.rows() && cols == m.cols(), ParseError, "checkpoint matrix shape mismatch");
  const auto& data = j.at("data");
  SCRNN_REQUIRE(static_cast<Eigen::Index>(data.size()) == rows * cols, ParseError, "checkpoint matrix size mismatch");
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  }
}

/// Inverted-dropout mask (entries 0 or 1/(1-rate)).
inline Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  Eigen::MatrixXd mask(rows, cols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep = 1.0 - rate;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) mask(r, c) = u(rng) < keep ? 1.0 / keep : 0.0;
  }
  return mask;
}

}  // namespace detail

/// h_t = sigma(W_h z_t + b_h + W_c h_{t-1} + b_c)
struct ElmanLayer {
  Eigen::MatrixXd w_h, w_c;
  Eigen::VectorXd b_h, b_c;
  Eigen::MatrixXd g_w_h, g_w_c;
  Eigen::VectorXd g_b_h, g_b_c;
  Activation act = Activation::kTanh;

  ElmanLayer() = default;
  ElmanLayer(Eigen::Index input, Eigen::Index hidden, Activation a = Activation::kTanh)
      : w_h(Eigen::MatrixXd::Zero(hidden, input)),
        w_c(Eigen::MatrixXd::Zero(hidden, hidden)),
        b_h(Eigen::VectorXd::Zero(hidden)),
        b_c(Eigen::VectorXd::Zero(hidden)),
        g_w_h(Eigen::MatrixXd::Zero(hidden, input)),
        g_w_c(Eigen::MatrixXd::Zero(hidden, hidden)),
        g_b_h(Eigen::VectorXd::Zero(hidden)),
        g_b_c(Eigen::VectorXd::Zero(hidden)),
        act(a) {}

  Eigen::Index input_size() const { return w_h.cols(); }
  Eigen::Index hidden_size() const { return w_h.rows(); }
};

inline Eigen::VectorXd cell_step(const ElmanLayer& layer, const Eigen::VectorXd& z, const Eigen::VectorXd& h_prev) {
  SCRNN_REQUIRE(z.size() == layer.input_size() && h_prev.size() == layer.hidden_size(), DimensionError,
                "cell_step input or state size mismatch");
  Eigen::MatrixXd pre = layer.w_h * z + layer.b_h + layer.w_c * h_prev + layer.b_c;
  activate_inplace(layer.act, pre);
  return pre;
}

/// Intermediates of a batched forward pass.
struct RnnTrace {
  std::vector<Eigen::MatrixXd> inputs;            // [t] in x B, bottom-layer input
  std::vector<std::vector<Eigen::MatrixXd>> h;    // [layer][t] hidden x B
  std::vector<std::vector<Eigen::MatrixXd>> mask; // [layer][t] dropout on the input of layer >= 1
};

/// Elman layers fed bottom-up, then y = sigma_out(W h_T + b) on the top
/// layer's final state. Dropout (training only) sits between stacked layers.
class RnnStack {
 public:
  RnnStack() = default;
  RnnStack(Eigen::Index input, Eigen::Index hidden, int n_layers, Eigen::Index output, double dropout = 0.0)
      : dropout_(dropout) {
    SCRNN_REQUIRE(input >= 1 && hidden >= 1 && n_layers >= 1 && output >= 1, std::invalid_argument,
                  "RNN sizes must be positive");
    SCRNN_REQUIRE(dropout >= 0.0 && dropout < 1.0, std::invalid_argument, "dropout must lie in [0, 1)");
    for (int l = 0; l < n_layers; ++l) layers_.emplace_back(l == 0 ? input : hidden, hidden);
    w_ = Eigen::MatrixXd::Zero(output, hidden);
    b_ = Eigen::VectorXd::Zero(output);
    g_w_ = w_;
    g_b_ = b_;
  }

  std::vector<ElmanLayer>& layers() { return layers_; }
  const std::vector<ElmanLayer>& layers() const { return layers_; }
  Eigen::MatrixXd& head_w() { return w_; }
  Eigen::VectorXd& head_b() { return b_; }
  const Eigen::MatrixXd& head_w() const { return w_; }
  const Eigen::VectorXd& head_b() const { return b_; }
  Activation output_activation() const { return out_act_; }
  void set_output_activation(Activation a) { out_act_ = a; }
  double dropout() const { return dropout_; }
  Eigen::Index input_size() const { return layers_.front().input_size(); }
  Eigen::Index output_size() const { return w_.rows(); }

  void init_uniform(std::mt19937_64& rng) {
    for (auto& l : layers_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(l.hidden_size()));
      detail::fill_uniform(l.w_h, bound, rng);
      detail::fill_uniform(l.w_c, bound, rng);
      Eigen::MatrixXd bh = l.b_h, bc = l.b_c;
      detail::fill_uniform(bh, bound, rng);
      detail::fill_uniform(bc, bound, rng);
      l.b_h = bh;
      l.b_c = bc;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(w_.cols()));
    detail::fill_uniform(w_, bound, rng);
    Eigen::MatrixXd b = b_;
    detail::fill_uniform(b, bound, rng);
    b_ = b;
  }

  /// Runs a batch of sequences. inputs[t] is input x B. With `training`,
  /// dropout masks are drawn from `rng`.
  Eigen::MatrixXd forward(const std::vector<Eigen::MatrixXd>& inputs, bool training = false,
                          std::mt19937_64* rng = nullptr, RnnTrace* trace = nullptr) const {
    SCRNN_REQUIRE(!inputs.empty(), std::invalid_argument, "empty input sequence");
    const Eigen::Index batch = inputs.front().cols();
    for (const auto& z : inputs) {
      SCRNN_REQUIRE(z.rows() == input_size() && z.cols() == batch, DimensionError,
                    "sequence element shape mismatch");
    }
    const bool drop = training && dropout_ > 0.0 && rng != nullptr;
    if (trace) {
      trace->inputs = inputs;
      trace->h.assign(layers_.size(), {});
      trace->mask.assign(layers_.size(), {});
    }
    std::vector<Eigen::MatrixXd> below = inputs;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      if (l > 0 && drop) {
        for (auto& x : below) {
          Eigen::MatrixXd m = detail::dropout_mask(x.rows(), x.cols(), dropout_, *rng);
          x.array() *= m.array();
          if (trace) trace->mask[l].push_back(std::move(m));
        }
      }
      std::vector<Eigen::MatrixXd> hs;
      hs.reserve(below.size());
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(layer.hidden_size(), batch);
      const Eigen::VectorXd bias = layer.b_h + layer.b_c;
      for (const auto& x : below) {
        Eigen::MatrixXd pre = layer.w_h * x;
        pre.noalias() += layer.w_c * h;
        pre.colwise() += bias;
        activate_inplace(layer.act, pre);
        h = pre;
        hs.push_back(h);
      }
      if (trace) trace->h[l] = hs;
      below = std::move(hs);
    }
    Eigen::MatrixXd y = w_ * below.back();
    y.colwise() += b_;
    activate_inplace(out_act_, y);
    return y;
  }

  /// Accumulates gradients from dLoss/dy (output x B). Returns dLoss/dinputs[t]
  /// when `want_input_grad`, else an empty vector.
  std::vector<Eigen::MatrixXd> backward(const RnnTrace& trace, const Eigen::MatrixXd& y, Eigen::MatrixXd dy,
                                       bool want_input_grad) {
    activation_backward(out_act_, y, dy);
    const auto& top = trace.h.back();
    const std::size_t steps = top.size();
    g_w_.noalias() += dy * top.back().transpose();
    g_b_ += dy.rowwise().sum();

    std::vector<Eigen::MatrixXd> d_above(steps);
    d_above[steps - 1] = w_.transpose() * dy;
    for (std::size_t t = 0; t + 1 < steps; ++t) d_above[t] = Eigen::MatrixXd::Zero(top[t].rows(), top[t].cols());

    std::vector<Eigen::MatrixXd> d_input;
    for (std::size_t li = layers_.size(); li-- > 0;) {
      auto& layer = layers_[li];
      const auto& hs = trace.h[li];
      const bool need_dx = li > 0 || want_input_grad;
      std::vector<Eigen::MatrixXd> d_below(need_dx ? steps : 0);
      Eigen::MatrixXd carry = Eigen::MatrixXd::Zero(layer.hidden_size(), hs.front().cols());
      for (std::size_t t = steps; t-- > 0;) {
        Eigen::MatrixXd d = d_above[t] + carry;
        activation_backward(layer.act, hs[t], d);
        if (li == 0) {
          layer.g_w_h.noalias() += d * trace.inputs[t].transpose();
        } else {
          layer.g_w_h.noalias() += d * layer_input(trace, li, t).transpose();
        }
        const Eigen::VectorXd dsum = d.rowwise().sum();
        layer.g_b_h += dsum;
        layer.g_b_c += dsum;
        if (t > 0) layer.g_w_c.noalias() += d * hs[t - 1].transpose();
        carry.noalias() = layer.w_c.transpose() * d;
        if (need_dx) {
          d_below[t].noalias() = layer.w_h.transpose() * d;
          if (li > 0 && !trace.mask[li].empty()) d_below[t].array() *= trace.mask[li][t].array();
        }
      }
      if (li == 0) {
        d_input = std::move(d_below);
      } else {
        d_above = std::move(d_below);
      }
    }
    return d_input;
  }

  void zero_grad() {
    for (auto& l : layers_) {
      l.g_w_h.setZero();
      l.g_w_c.setZero();
      l.g_b_h.setZero();
      l.g_b_c.setZero();
    }
    g_w_.setZero();
    g_b_.setZero();
  }

  /// Visits (value, grad) pairs in a fixed order.
  template <typename F>
  void for_each_parameter(F&& f) {
    for (auto& l : layers_) {
      f(l.w_h, l.g_w_h);
      f(l.w_c, l.g_w_c);
      f(l.b_h, l.g_b_h);
      f(l.b_c, l.g_b_c);
    }
    f(w_, g_w_);
    f(b_, g_b_);
  }

  long long parameter_count() const {
    long long n = w_.size() + b_.size();
    for (const auto& l : layers_) n += l.w_h.size() + l.w_c.size() + l.b_h.size() + l.b_c.size();
    return n;
  }

  nlohmann::json to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      auto put = [&](const char* name, const Eigen::MatrixXd& m) {
        auto j = detail::matrix_to_json(m);
        j["layer"] = l;
        j["matrix"] = name;
        list.push_back(std::move(j));
      };
      put("W_h", layer.w_h);
      put("W_c", layer.w_c);
      put("b_h", layer.b_h);
      put("b_c", layer.b_c);
    }
    auto w = detail::matrix_to_json(w_);
    w["layer"] = "head";
    w["matrix"] = "W";
    list.push_back(std::move(w));
    auto b = detail::matrix_to_json(b_);
    b["layer"] = "head";
    b["matrix"] = "b";
    list.push_back(std::move(b));
    return list;
  }

  void load_json(const nlohmann::json& list) {
    for (const auto& e : list) {
      const auto name = e.at("matrix").get<std::string>();
      if (e.at("layer").is_string()) {
        if (name == "W") {
          detail::matrix_from_json(e, w_);
        } else {
          Eigen::MatrixXd b = b_;
          detail::matrix_from_json(e, b);
          b_ = b;
        }
        continue;
      }
      auto& layer = layers_.at(e.at("layer").get<std::size_t>());
      if (name == "W_h") {
        detail::matrix_from_json(e, layer.w_h);
      } else if (name == "W_c") {
        detail::matrix_from_json(e, layer.w_c);
      } else {
        Eigen::MatrixXd v = name == "b_h" ? Eigen::MatrixXd(layer.b_h) : Eigen::MatrixXd(layer.b_c);
        detail::matrix_from_json(e, v);
        (name == "b_h" ? layer.b_h : layer.b_c) = v;
      }
    }
  }

 private:
  Eigen::MatrixXd layer_input(const RnnTrace& trace, std::size_t li, std::size_t t) const {
    Eigen::MatrixXd x = trace.h[li - 1][t];
    if (!trace.mask[li].empty()) x.array() *= trace.mask[li][t].array();
    return x;
  }

  std::vector<ElmanLayer> layers_;
  Eigen::MatrixXd w_, g_w_;
  Eigen::VectorXd b_, g_b_;
  Activation out_act_ = Activation::kIdentity;
  double dropout_ = 0.0;
};

/// Single-sequence forward: returns the head output at the final step.
inline Eigen::VectorXd rnn_forward(const RnnStack& stack, const std::vector<Eigen::VectorXd>& sequence) {
  SCRNN_REQUIRE(!sequence.empty(), std::invalid_argument, "empty input sequence");
  std::vector<Eigen::MatrixXd> inputs;
  inputs.reserve(sequence.size());
  for (const auto& z : sequence) {
    SCRNN_REQUIRE(z.size() == sequence.front().size(), DimensionError, "non-uniform sequence element length");
    inputs.emplace_back(z);
  }
  return stack.forward(inputs).col(0);
}

}  // namespace scrnn
