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

// Loss, Adam, the training loop, finite-difference gradient checks and a
// seeded random hyperparameter search.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "scrnn/config.hpp"
#include "scrnn/error.hpp"
#include "scrnn/metrics.hpp"
#include "scrnn/model.hpp"

namespace scrnn {

/// Squared error averaged over components, then over the batch (columns).
inline double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  SCRNN_REQUIRE(pred.rows() == target.rows() && pred.cols() == target.cols(), DimensionError,
                "prediction and target shapes differ");
  SCRNN_REQUIRE(pred.size() > 0, std::invalid_argument, "empty batch");
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

inline Eigen::MatrixXd mse_grad(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  return 2.0 * (pred - target) / static_cast<double>(pred.size());
}

/// Flat copy of every parameter, in visitor order.
inline std::vector<double> snapshot(Decoder& m) {
  std::vector<double> out;
  m.for_each_parameter([&](double* v, double*, Eigen::Index n) { out.insert(out.end(), v, v + n); });
  return out;
}

inline void restore(Decoder& m, const std::vector<double>& values) {
  std::size_t at = 0;
  m.for_each_parameter([&](double* v, double*, Eigen::Index n) {
    SCRNN_REQUIRE(at + static_cast<std::size_t>(n) <= values.size(), DimensionError, "snapshot too short");
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(at), n, v);
    at += static_cast<std::size_t>(n);
  });
  SCRNN_REQUIRE(at == values.size(), DimensionError, "snapshot length mismatch");
}

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
inline double clip_gradients(Decoder& m, double max_norm) {
  double sq = 0.0;
  m.for_each_parameter([&](double*, double* g, Eigen::Index n) {
    sq += Eigen::Map<Eigen::VectorXd>(g, n).squaredNorm();
  });
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    m.for_each_parameter([&](double*, double* g, Eigen::Index n) { Eigen::Map<Eigen::VectorXd>(g, n) *= s; });
  }
  return norm;
}

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Decoder& m) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::size_t at = 0;
    m.for_each_parameter([&](double* v, double* g, Eigen::Index n) {
      if (m1_.size() < at + static_cast<std::size_t>(n)) {
        m1_.resize(at + static_cast<std::size_t>(n), 0.0);
        m2_.resize(at + static_cast<std::size_t>(n), 0.0);
      }
      for (Eigen::Index i = 0; i < n; ++i, ++at) {
        m1_[at] = beta1_ * m1_[at] + (1.0 - beta1_) * g[i];
        m2_[at] = beta2_ * m2_[at] + (1.0 - beta2_) * g[i] * g[i];
        v[i] -= lr_ * (m1_[at] / c1) / (std::sqrt(m2_[at] / c2) + eps_);
      }
    });
  }

  long long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<double> m1_, m2_;
};

struct EpochLoss {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  double initial_val_loss = 0.0;
  std::vector<EpochLoss> curve;
  int best_epoch = 0;  // 0 means the initial weights
  double best_val_loss = 0.0;
  long long optimizer_steps = 0;

  void write_csv(std::ostream& out) const {
    out << "epoch,train_loss,val_loss\n";
    for (const auto& e : curve) {
      out << e.epoch << ',' << detail::format_double(e.train_loss) << ',' << detail::format_double(e.val_loss) << '\n';
    }
  }
};

inline double dataset_loss(Decoder& m, const DecodingData& data, std::span<const Eigen::Index> ends,
                           const TargetEncoder& enc) {
  return mse_loss(m.predict(data, ends), enc.encode(data, ends));
}

/// Minibatch Adam over shuffled training windows with gradient clipping;
/// the weights with the lowest held-out loss (initial weights included) are
/// restored at the end.
inline TrainResult train(Decoder& m, const DecodingData& data, const Split& split, const TargetEncoder& enc,
                         const TrainConfig& cfg) {
  SCRNN_REQUIRE(split.train.end <= split.test.begin || split.test.end <= split.train.begin, std::invalid_argument,
                "train and validation blocks overlap");
  auto train_ends = window_ends(split.train, m.seq_len(), m.n_col());
  const auto val_ends = window_ends(split.test, m.seq_len(), m.n_col());
  SCRNN_REQUIRE(!train_ends.empty() && !val_ends.empty(), std::invalid_argument, "split too short for a window");

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Adam opt(cfg.learning_rate);
  TrainResult r;
  r.initial_val_loss = dataset_loss(m, data, val_ends, enc);
  SCRNN_REQUIRE(std::isfinite(r.initial_val_loss), DivergenceError, "initial validation loss is not finite");
  r.best_val_loss = r.initial_val_loss;
  auto best = snapshot(m);

  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train_ends.begin(), train_ends.end(), rng);
    double total = 0.0;
    std::size_t seen = 0;
    for (std::size_t at = 0; at < train_ends.size(); at += batch) {
      const std::span<const Eigen::Index> ends(train_ends.data() + at, std::min(batch, train_ends.size() - at));
      const Eigen::MatrixXd target = enc.encode(data, ends);
      m.zero_grad();
      const Eigen::MatrixXd y = m.forward(data, ends, true, &rng);
      const double loss = mse_loss(y, target);
      if (!std::isfinite(loss)) {
        throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(at / batch));
      }
      m.backward(mse_grad(y, target));
      clip_gradients(m, cfg.grad_clip);
      opt.step(m);
      total += loss * static_cast<double>(ends.size());
      seen += ends.size();
    }
    EpochLoss e{epoch, total / static_cast<double>(seen), dataset_loss(m, data, val_ends, enc)};
    if (!std::isfinite(e.val_loss)) {
      throw DivergenceError("validation loss became non-finite at epoch " + std::to_string(epoch));
    }
    r.curve.push_back(e);
    if (e.val_loss < r.best_val_loss) {
      r.best_val_loss = e.val_loss;
      r.best_epoch = epoch;
      best = snapshot(m);
    }
  }
  restore(m, best);
  r.optimizer_steps = opt.steps();
  return r;
}

/// Decodes every window ending in `range` and scores it against the labels.
inline ErrorReport evaluate(Decoder& m, const DecodingData& data, ColumnRange range, const TargetEncoder& enc) {
  const auto ends = window_ends(range, m.seq_len(), m.n_col());
  SCRNN_REQUIRE(!ends.empty(), std::invalid_argument, "range too short for a window");
  const Eigen::MatrixXd y = m.predict(data, ends);
  std::vector<double> times;
  std::vector<Point2> decoded, truth;
  for (std::size_t b = 0; b < ends.size(); ++b) {
    times.push_back(data.bin_center(ends[b]));
    decoded.push_back(enc.decode(y.col(static_cast<Eigen::Index>(b))));
    truth.push_back(enc.truth(data, ends[b]));
  }
  return make_report(data.kind, std::move(times), std::move(decoded), std::move(truth));
}

struct GradientCheck {
  double max_rel_error = 0.0;
  long long n_params = 0;
  long long n_failed = 0;
};

/// Central finite differences of the batch loss against the analytic
/// gradient of every parameter. Runs without dropout.
inline GradientCheck check_gradients(Decoder& m, const DecodingData& data, std::span<const Eigen::Index> ends,
                                     const Eigen::MatrixXd& target, double eps = 1e-5, double rel_tol = 1e-4,
                                     double abs_floor = 1e-6) {
  // Analytic pass: a training forward with no rng draws no dropout masks.
  m.zero_grad();
  const Eigen::MatrixXd y = m.forward(data, ends, true, nullptr);
  m.backward(mse_grad(y, target));
  std::vector<double> analytic;
  m.for_each_parameter([&](double*, double* g, Eigen::Index n) { analytic.insert(analytic.end(), g, g + n); });

  auto loss = [&] { return mse_loss(m.forward(data, ends, false, nullptr), target); };
  GradientCheck out;
  std::size_t at = 0;
  m.for_each_parameter([&](double* v, double*, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i, ++at) {
      const double keep = v[i];
      v[i] = keep + eps;
      const double up = loss();
      v[i] = keep - eps;
      const double down = loss();
      v[i] = keep;
      const double numeric = (up - down) / (2.0 * eps);
      const double diff = std::abs(numeric - analytic[at]);
      const double scale = std::max(std::abs(numeric), std::abs(analytic[at]));
      const double rel = scale > 0.0 ? diff / scale : 0.0;
      if (diff > abs_floor) out.max_rel_error = std::max(out.max_rel_error, rel);
      if (diff > abs_floor && rel > rel_tol) ++out.n_failed;
      ++out.n_params;
    }
  });
  return out;
}

/// One trained decoder with its data split, encoder and scores.
struct Experiment {
  TrainConfig config;
  DecodingData data;
  Split split;
  TargetEncoder encoder;
  std::unique_ptr<Decoder> model;
  TrainResult result;
  ErrorReport test_report;

  /// Headline held-out error: AAE (deg) for head direction, AED (cm) for position.
  double score() const {
    return data.kind == LabelKind::kHeadDirection ? test_report.aae_deg : test_report.aed_cm;
  }
};

inline Experiment run_experiment(const SpikeDataset& d, const TrainConfig& cfg) {
  cfg.validate();
  Experiment x;
  x.config = cfg;
  x.data = prepare_data(d, cfg.t_bin, cfg.p);
  x.split = chronological_split(x.data.num_bins(), cfg.test_fraction);
  x.encoder = TargetEncoder::fit(x.data, x.split.train);
  x.model = build_model(cfg, x.data, x.split.train);
  x.result = train(*x.model, x.data, x.split, x.encoder, cfg);
  x.test_report = evaluate(*x.model, x.data, x.split.test, x.encoder);
  return x;
}

struct SearchTrial {
  int trial = 0;
  TrainConfig config;
  double score = 0.0;
  double val_loss = 0.0;
};

struct SearchResult {
  std::vector<SearchTrial> leaderboard;  // best first
  const TrainConfig& best() const { return leaderboard.front().config; }

  void write_csv(std::ostream& out, const SearchSpace& space, LabelKind kind) const {
    out << "rank,trial," << (kind == LabelKind::kHeadDirection ? "aae_deg" : "aed_cm") << ",val_loss";
    for (const auto& [k, _] : space.candidates) out << ',' << k;
    out << '\n';
    for (std::size_t i = 0; i < leaderboard.size(); ++i) {
      const auto& t = leaderboard[i];
      const auto kv = t.config.to_key_values();
      out << i + 1 << ',' << t.trial << ',' << detail::format_double(t.score) << ','
          << detail::format_double(t.val_loss);
      for (const auto& [k, _] : space.candidates) out << ',' << kv.at(k);
      out << '\n';
    }
  }
};

/// Draws `budget` configs uniformly from `space` (keys in sorted order) on
/// top of `base`.
inline std::vector<TrainConfig> sample_configs(const SearchSpace& space, const TrainConfig& base, int budget,
                                               std::uint64_t seed) {
  SCRNN_REQUIRE(!space.empty(), std::invalid_argument, "empty search space");
  SCRNN_REQUIRE(budget >= 1, std::invalid_argument, "budget must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<TrainConfig> out;
  for (int i = 0; i < budget; ++i) {
    TrainConfig c = base;
    for (const auto& [key, values] : space.candidates) {
      std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
      c.set(key, values[pick(rng)]);
    }
    c.validate();
    out.push_back(c);
  }
  return out;
}

/// Trains each sampled config and ranks by held-out AAE (head direction) or
/// AED (position); ties keep trial order.
inline SearchResult random_search(const SpikeDataset& d, const SearchSpace& space, const TrainConfig& base, int budget,
                                  std::uint64_t seed) {
  SearchResult r;
  int trial = 0;
  for (const auto& c : sample_configs(space, base, budget, seed)) {
    auto x = run_experiment(d, c);
    r.leaderboard.push_back({trial++, c, x.score(), x.result.best_val_loss});
  }
  std::stable_sort(r.leaderboard.begin(), r.leaderboard.end(),
                   [](const SearchTrial& a, const SearchTrial& b) { return a.score < b.score; });
  return r;
}

}  // namespace scrnn
