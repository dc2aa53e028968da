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

// Polynomial simplicial filters and the stacked simplicial convolutional
// layers that feed the recurrent back end.
//
// A degree-D filter on k-simplices is
//   H_k = w_0 I + sum_i w_i (lower_k)^i + sum_i w_{i+D} (upper_k)^i
// with scalar weights. The lower term is absent for k = 0 and the upper
// term for k = K, so those dimensions carry D + 1 weights instead of 2D + 1.

#pragma once

#include <Eigen/Dense>
#include "json.hpp"

#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "scrnn/complex.hpp"
#include "scrnn/error.hpp"
#include "scrnn/sparse.hpp"

namespace scrnn {

enum class Activation { kRelu, kIdentity, kTanh };

inline Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "identity" || s == "linear") return Activation::kIdentity;
  if (s == "tanh") return Activation::kTanh;
  throw ParseError("unknown activation '" + std::string(s) + "'");
}

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
    case Activation::kTanh: return "tanh";
  }
  return "?";
}

template <typename Derived>
void activate_inplace(Activation a, Eigen::MatrixBase<Derived>& x) {
  switch (a) {
    case Activation::kRelu: x = x.cwiseMax(0.0); break;
    case Activation::kTanh: x = x.array().tanh().matrix(); break;
    case Activation::kIdentity: break;
  }
}

/// Multiplies `grad` in place by sigma'(.), given the activation's output.
inline void activation_backward(Activation a, const Eigen::MatrixXd& output, Eigen::MatrixXd& grad) {
  switch (a) {
    case Activation::kRelu: grad = (output.array() > 0.0).select(grad, 0.0); break;
    case Activation::kTanh: grad.array() *= 1.0 - output.array().square(); break;
    case Activation::kIdentity: break;
  }
}

/// Real-valued lower/upper Laplacian parts of one dimension. Built from a
/// complex, each part is kept as its boundary factors (lower = B_k^T B_k,
/// upper = B_{k+1} B_{k+1}^T), which are far sparser than the products.
struct ShiftOperators {
  using Op = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  Op lower_left, lower_right;  // lower = lower_left * lower_right
  Op upper_left, upper_right;
  bool lower_factored = false;
  bool upper_factored = false;
  bool has_lower = false;
  bool has_upper = false;
  std::size_t n = 0;

  static ShiftOperators from(const HodgeLaplacian& lap, bool has_lower, bool has_upper) {
    ShiftOperators o;
    o.lower_left = lap.lower.to_eigen();
    o.upper_left = lap.upper.to_eigen();
    o.has_lower = has_lower;
    o.has_upper = has_upper;
    o.n = lap.lower.rows();
    return o;
  }

  static ShiftOperators from(const SimplicialComplex& s, int k) {
    ShiftOperators o;
    o.n = s.count(k);
    o.has_lower = k > 0;
    o.has_upper = k < s.max_dim();
    if (o.has_lower) {
      o.lower_right = s.boundary(k).to_eigen();
      o.lower_left = o.lower_right.transpose();
      o.lower_factored = true;
    }
    if (o.has_upper) {
      o.upper_left = s.boundary(k + 1).to_eigen();
      o.upper_right = o.upper_left.transpose();
      o.upper_factored = true;
    }
    return o;
  }

  Eigen::MatrixXd lower(const Eigen::MatrixXd& x) const {
    if (!lower_factored) return lower_left * x;
    Eigen::MatrixXd mid = lower_right * x;
    return lower_left * mid;
  }

  Eigen::MatrixXd upper(const Eigen::MatrixXd& x) const {
    if (!upper_factored) return upper_left * x;
    Eigen::MatrixXd mid = upper_right * x;
    return upper_left * mid;
  }

  std::size_t size() const { return n; }
};

inline std::vector<ShiftOperators> shift_operators(const SimplicialComplex& s) {
  std::vector<ShiftOperators> ops;
  for (int k = 0; k <= s.max_dim(); ++k) ops.push_back(ShiftOperators::from(s, k));
  return ops;
}

inline int filter_term_count(int k, int max_dim, int degree) {
  return (k == 0 || k == max_dim) ? degree + 1 : 2 * degree + 1;
}

/// Powers [x, lower x, ..., lower^D x, upper x, ..., upper^D x], with absent
/// parts skipped. Powers are applied by repeated multiplication.
inline std::vector<Eigen::MatrixXd> filter_terms(const ShiftOperators& ops, const Eigen::MatrixXd& x, int degree) {
  std::vector<Eigen::MatrixXd> terms;
  terms.reserve(static_cast<std::size_t>(2 * degree + 1));
  terms.push_back(x);
  if (ops.has_lower) {
    for (int i = 1; i <= degree; ++i) {
      Eigen::MatrixXd next = ops.lower(terms.back());
      terms.push_back(std::move(next));
    }
  }
  if (ops.has_upper) {
    const Eigen::MatrixXd* prev = &x;
    for (int i = 1; i <= degree; ++i) {
      Eigen::MatrixXd next = ops.upper(*prev);
      terms.push_back(std::move(next));
      prev = &terms.back();
    }
  }
  return terms;
}

template <typename Weights>
Eigen::MatrixXd combine_terms(const std::vector<Eigen::MatrixXd>& terms, const Weights& w) {
  Eigen::MatrixXd out = w(0) * terms[0];
  for (std::size_t t = 1; t < terms.size(); ++t) out += w(static_cast<Eigen::Index>(t)) * terms[t];
  return out;
}

/// One degree-D filter on dimension k. `weights` is ordered
/// [w_0, lower 1..D, upper 1..D] with absent parts omitted.
struct SimplicialFilter {
  int dim = 0;
  int degree = 1;
  bool has_lower = false;
  bool has_upper = false;
  Eigen::VectorXd weights;

  static SimplicialFilter for_dimension(int k, int max_dim, int degree) {
    SimplicialFilter h;
    h.dim = k;
    h.degree = degree;
    h.has_lower = k > 0;
    h.has_upper = k < max_dim;
    h.weights = Eigen::VectorXd::Zero(filter_term_count(k, max_dim, degree));
    return h;
  }

  Eigen::Index parameter_count() const { return weights.size(); }
};

/// H x for one cochain, without activation.
inline Eigen::MatrixXd apply_filter(const SimplicialFilter& h, const ShiftOperators& ops, const Eigen::MatrixXd& x) {
  SCRNN_REQUIRE(static_cast<std::size_t>(x.rows()) == ops.size(), DimensionError,
                "cochain rows differ from simplex count");
  SCRNN_REQUIRE(h.has_lower == ops.has_lower && h.has_upper == ops.has_upper, DimensionError,
                "filter dimension does not match Laplacian dimension");
  const int expected = 1 + (h.has_lower ? h.degree : 0) + (h.has_upper ? h.degree : 0);
  SCRNN_REQUIRE(h.weights.size() == expected, DimensionError, "filter weight count mismatch");
  return combine_terms(filter_terms(ops, x, h.degree), h.weights);
}

inline Eigen::MatrixXd apply_filter(const SimplicialFilter& h, const HodgeLaplacian& lap, const Eigen::MatrixXd& x) {
  return apply_filter(h, ShiftOperators::from(lap, h.has_lower, h.has_upper), x);
}

/// Per-dimension feature sets: features[k][g] is the g-th feature cochain on
/// the k-simplices.
using Features = std::vector<std::vector<Eigen::MatrixXd>>;

/// Intermediates kept by a forward pass for the backward pass.
struct ScTrace {
  struct Layer {
    // [k][input] -> filter terms of that input
    std::vector<std::vector<std::vector<Eigen::MatrixXd>>> terms;
    Features outputs;
  };
  std::vector<Layer> layers;
  int n_col = 1;
};

/// Closed-form count of simplicial convolution weights.
inline long long param_count(long long filters, long long degree, long long max_dim, long long layers) {
  return filters * (2 * (degree + 1) + (max_dim - 1) * (2 * degree + 1)) * layers;
}

/// L simplicial convolutional layers with F scalar-weight filters per
/// dimension k = 0..K. Layer l >= 2 applies the summed filter bank to each of
/// the F incoming features, so every layer emits exactly F features per
/// dimension.
class ScLayerStack {
 public:
  ScLayerStack() = default;
  ScLayerStack(int layers, int filters, int degree, int max_dim, Activation act = Activation::kRelu)
      : layers_(layers), filters_(filters), degree_(degree), max_dim_(max_dim), act_(act) {
    SCRNN_REQUIRE(layers >= 1 && filters >= 1 && degree >= 1 && max_dim >= 1, std::invalid_argument,
                  "layers, filters, degree and max_dim must all be >= 1");
    weights_.resize(static_cast<std::size_t>(layers));
    grads_.resize(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l) {
      for (int k = 0; k <= max_dim; ++k) {
        const int terms = filter_term_count(k, max_dim, degree);
        weights_[static_cast<std::size_t>(l)].push_back(Eigen::MatrixXd::Zero(filters, terms));
        grads_[static_cast<std::size_t>(l)].push_back(Eigen::MatrixXd::Zero(filters, terms));
      }
    }
  }

  int layers() const { return layers_; }
  int filters() const { return filters_; }
  int degree() const { return degree_; }
  int max_dim() const { return max_dim_; }
  Activation activation() const { return act_; }

  /// weights(l, k) is F x terms(k); row f holds filter f's weights.
  Eigen::MatrixXd& weights(int l, int k) { return weights_.at(static_cast<std::size_t>(l)).at(static_cast<std::size_t>(k)); }
  const Eigen::MatrixXd& weights(int l, int k) const {
    return weights_.at(static_cast<std::size_t>(l)).at(static_cast<std::size_t>(k));
  }
  Eigen::MatrixXd& grad(int l, int k) { return grads_.at(static_cast<std::size_t>(l)).at(static_cast<std::size_t>(k)); }

  SimplicialFilter filter(int l, int f, int k) const {
    auto h = SimplicialFilter::for_dimension(k, max_dim_, degree_);
    h.weights = weights(l, k).row(f).transpose();
    return h;
  }

  /// Number of stored scalar weights, by enumeration.
  long long parameter_count() const {
    long long n = 0;
    for (const auto& layer : weights_) {
      for (const auto& w : layer) n += w.size();
    }
    return n;
  }

  void init_uniform(std::mt19937_64& rng) {
    for (auto& layer : weights_) {
      for (auto& w : layer) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
          for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
        }
      }
    }
  }

  void zero_grad() {
    for (auto& layer : grads_) {
      for (auto& g : layer) g.setZero();
    }
  }

  /// Visits (weights, grad) pairs in a fixed order.
  template <typename F>
  void for_each_parameter(F&& f) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      for (std::size_t k = 0; k < weights_[l].size(); ++k) f(weights_[l][k], grads_[l][k]);
    }
  }

  void check_inputs(const std::vector<ShiftOperators>& ops, const std::vector<Eigen::MatrixXd>& x) const {
    SCRNN_REQUIRE(static_cast<int>(ops.size()) == max_dim_ + 1 && static_cast<int>(x.size()) == max_dim_ + 1,
                  DimensionError, "need one cochain and one operator set per dimension");
    for (std::size_t k = 0; k < x.size(); ++k) {
      SCRNN_REQUIRE(static_cast<std::size_t>(x[k].rows()) == ops[k].size(), DimensionError,
                    "cochain rows differ from simplex count in dimension " + std::to_string(k));
    }
  }

  /// First layer: x^f_k(1) = sigma(H^f_k(1) x_k(0)) for every filter f and
  /// every dimension k, including k = 0.
  Features forward_first(const std::vector<ShiftOperators>& ops, const std::vector<Eigen::MatrixXd>& x,
                         ScTrace::Layer* trace = nullptr) const {
    check_inputs(ops, x);
    Features out(x.size());
    if (trace) trace->terms.assign(x.size(), {});
    for (std::size_t k = 0; k < x.size(); ++k) {
      auto terms = filter_terms(ops[k], x[k], degree_);
      const auto& w = weights(0, static_cast<int>(k));
      for (int f = 0; f < filters_; ++f) {
        Eigen::MatrixXd y = combine_terms(terms, w.row(f));
        activate_inplace(act_, y);
        out[k].push_back(std::move(y));
      }
      if (trace) trace->terms[k].push_back(std::move(terms));
    }
    if (trace) trace->outputs = out;
    return out;
  }

  /// Layer l >= 2 (zero-based index `layer` >= 1):
  /// x^g_k(l) = sigma(sum_f H^f_k(l) x^g_k(l-1)).
  Features forward_intermediate(int layer, const std::vector<ShiftOperators>& ops, const Features& in,
                                ScTrace::Layer* trace = nullptr) const {
    SCRNN_REQUIRE(layer >= 1 && layer < layers_, std::out_of_range, "intermediate layer index out of range");
    SCRNN_REQUIRE(in.size() == ops.size(), DimensionError, "feature dimensions differ from operator count");
    Features out(in.size());
    if (trace) trace->terms.assign(in.size(), {});
    for (std::size_t k = 0; k < in.size(); ++k) {
      SCRNN_REQUIRE(static_cast<int>(in[k].size()) == filters_, DimensionError,
                    "expected F input features per dimension");
      const Eigen::VectorXd summed = weights(layer, static_cast<int>(k)).colwise().sum().transpose();
      for (const auto& xg : in[k]) {
        SCRNN_REQUIRE(static_cast<std::size_t>(xg.rows()) == ops[k].size(), DimensionError,
                      "feature rows differ from simplex count");
        auto terms = filter_terms(ops[k], xg, degree_);
        Eigen::MatrixXd y = combine_terms(terms, summed);
        activate_inplace(act_, y);
        out[k].push_back(std::move(y));
        if (trace) trace->terms[k].push_back(std::move(terms));
      }
    }
    if (trace) trace->outputs = out;
    return out;
  }

  /// Final summation: x_k(L) = sum_g x^g_k(L), with x_0 additionally summed
  /// across its columns.
  static std::vector<Eigen::VectorXd> forward_final(const Features& in) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(in.size());
    for (const auto& feats : in) {
      SCRNN_REQUIRE(!feats.empty(), DimensionError, "no features to sum");
      Eigen::MatrixXd sum = feats[0];
      for (std::size_t g = 1; g < feats.size(); ++g) {
        SCRNN_REQUIRE(feats[g].rows() == sum.rows() && feats[g].cols() == sum.cols(), DimensionError,
                      "feature shapes differ");
        sum += feats[g];
      }
      out.push_back(sum.rowwise().sum());
    }
    return out;
  }

  /// Full stack for one time bin, returning per-dimension outputs x_k(L).
  std::vector<Eigen::VectorXd> forward(const std::vector<ShiftOperators>& ops, const std::vector<Eigen::MatrixXd>& x,
                                       ScTrace* trace = nullptr) const {
    if (trace) {
      trace->layers.assign(static_cast<std::size_t>(layers_), {});
      trace->n_col = static_cast<int>(x.empty() ? 1 : x[0].cols());
    }
    Features feats = forward_first(ops, x, trace ? &trace->layers[0] : nullptr);
    for (int l = 1; l < layers_; ++l) {
      feats = forward_intermediate(l, ops, feats, trace ? &trace->layers[static_cast<std::size_t>(l)] : nullptr);
    }
    return forward_final(feats);
  }

  /// Batched stack over many bins: x[k] has one column per bin for k >= 1
  /// and `n_col` adjacent columns per bin for k = 0. Returns x_k(L) with one
  /// column per bin.
  std::vector<Eigen::MatrixXd> forward_batch(const std::vector<ShiftOperators>& ops,
                                             const std::vector<Eigen::MatrixXd>& x, int n_col,
                                             ScTrace* trace = nullptr) const {
    SCRNN_REQUIRE(n_col >= 1 && !x.empty() && x[0].cols() % n_col == 0, DimensionError,
                  "vertex cochain columns must be a multiple of n_col");
    if (trace) {
      trace->layers.assign(static_cast<std::size_t>(layers_), {});
      trace->n_col = n_col;
    }
    Features feats = forward_first(ops, x, trace ? &trace->layers[0] : nullptr);
    for (int l = 1; l < layers_; ++l) {
      feats = forward_intermediate(l, ops, feats, trace ? &trace->layers[static_cast<std::size_t>(l)] : nullptr);
    }
    std::vector<Eigen::MatrixXd> out;
    for (std::size_t k = 0; k < feats.size(); ++k) {
      Eigen::MatrixXd sum = feats[k][0];
      for (std::size_t g = 1; g < feats[k].size(); ++g) sum += feats[k][g];
      const Eigen::Index group = k == 0 ? n_col : 1;
      Eigen::MatrixXd grouped = Eigen::MatrixXd::Zero(sum.rows(), sum.cols() / group);
      for (Eigen::Index c = 0; c < sum.cols(); ++c) grouped.col(c / group) += sum.col(c);
      out.push_back(std::move(grouped));
    }
    return out;
  }

  /// Accumulates weight gradients given dLoss/d x_k(L) for every k.
  void backward(const std::vector<ShiftOperators>& ops, const ScTrace& trace,
                const std::vector<Eigen::VectorXd>& grad_out) {
    std::vector<Eigen::MatrixXd> g(grad_out.begin(), grad_out.end());
    backward_batch(ops, trace, g);
  }

  /// Batched counterpart of backward(): grad_out[k] has one column per bin,
  /// matching forward_batch().
  void backward_batch(const std::vector<ShiftOperators>& ops, const ScTrace& trace,
                      const std::vector<Eigen::MatrixXd>& grad_out) {
    const std::size_t dims = grad_out.size();
    // d loss / d x^g_k(l), starting from the final sum (and column sum for k = 0).
    Features d_feat(dims);
    for (std::size_t k = 0; k < dims; ++k) {
      const auto& outs = trace.layers.back().outputs[k];
      for (const auto& o : outs) {
        const Eigen::Index rep = o.cols() / grad_out[k].cols();
        Eigen::MatrixXd d(o.rows(), o.cols());
        for (Eigen::Index c = 0; c < o.cols(); ++c) d.col(c) = grad_out[k].col(c / rep);
        d_feat[k].push_back(std::move(d));
      }
    }
    for (int l = layers_ - 1; l >= 0; --l) {
      const auto& lt = trace.layers[static_cast<std::size_t>(l)];
      for (std::size_t k = 0; k < dims; ++k) {
        auto& gw = grad(l, static_cast<int>(k));
        for (std::size_t g = 0; g < d_feat[k].size(); ++g) {
          activation_backward(act_, lt.outputs[k][g], d_feat[k][g]);
        }
        if (l == 0) {
          const auto& terms = lt.terms[k][0];
          for (int f = 0; f < filters_; ++f) {
            const auto& dpre = d_feat[k][static_cast<std::size_t>(f)];
            for (std::size_t t = 0; t < terms.size(); ++t) gw(f, static_cast<Eigen::Index>(t)) += (dpre.cwiseProduct(terms[t])).sum();
          }
          continue;
        }
        const Eigen::VectorXd summed = weights(l, static_cast<int>(k)).colwise().sum().transpose();
        std::vector<Eigen::MatrixXd> d_in;
        for (std::size_t g = 0; g < d_feat[k].size(); ++g) {
          const auto& dpre = d_feat[k][g];
          const auto& terms = lt.terms[k][g];
          for (std::size_t t = 0; t < terms.size(); ++t) {
            const double s = dpre.cwiseProduct(terms[t]).sum();
            gw.col(static_cast<Eigen::Index>(t)).array() += s;
          }
          // Lower/upper parts are symmetric, so the adjoint reuses filter_terms.
          d_in.push_back(combine_terms(filter_terms(ops[k], dpre, degree_), summed));
        }
        d_feat[k] = std::move(d_in);
      }
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (int l = 0; l < layers_; ++l) {
      for (int k = 0; k <= max_dim_; ++k) {
        const auto& w = weights(l, k);
        for (Eigen::Index f = 0; f < w.rows(); ++f) {
          for (Eigen::Index t = 0; t < w.cols(); ++t) {
            list.push_back({{"layer", l}, {"filter", f}, {"dim", k}, {"term", t}, {"value", w(f, t)}});
          }
        }
      }
    }
    return list;
  }

  void load_json(const nlohmann::json& list) {
    long long seen = 0;
    for (const auto& e : list) {
      const int l = e.at("layer").get<int>();
      const int f = e.at("filter").get<int>();
      const int k = e.at("dim").get<int>();
      const int t = e.at("term").get<int>();
      auto& w = weights(l, k);
      SCRNN_REQUIRE(f >= 0 && f < w.rows() && t >= 0 && t < w.cols(), ParseError, "filter weight key out of range");
      w(f, t) = e.at("value").get<double>();
      ++seen;
    }
    SCRNN_REQUIRE(seen == parameter_count(), ParseError, "checkpoint filter weight count mismatch");
  }

 private:
  int layers_ = 1;
  int filters_ = 1;
  int degree_ = 1;
  int max_dim_ = 1;
  Activation act_ = Activation::kRelu;
  std::vector<std::vector<Eigen::MatrixXd>> weights_;
  std::vector<std::vector<Eigen::MatrixXd>> grads_;
};

/// Concatenates x_0(L), ..., x_K(L).
inline Eigen::VectorXd flatten(const std::vector<Eigen::VectorXd>& outputs) {
  Eigen::Index n = 0;
  for (const auto& o : outputs) n += o.size();
  Eigen::VectorXd v(n);
  Eigen::Index at = 0;
  for (const auto& o : outputs) {
    v.segment(at, o.size()) = o;
    at += o.size();
  }
  return v;
}

}  // namespace scrnn
