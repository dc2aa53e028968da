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

#include <gtest/gtest.h>

#include <filesystem>

#include "scrnn/model.hpp"
#include "scrnn/synth.hpp"

namespace scrnn {
namespace {

SpikeDataset small_hd(double duration = 60.0) {
  HdSimConfig cfg;
  cfg.n_neurons = 8;
  cfg.duration_s = duration;
  return simulate_hd(cfg);
}

TrainConfig small_config(const std::string& arch) {
  TrainConfig c;
  c.arch = arch;
  c.hidden_size = 6;
  c.layer_width = 5;
  c.nn_layers = 1;
  c.sc_layers = 2;
  c.filters = 2;
  c.seq_len = 3;
  return c;
}

TEST(DecodeAngle, CardinalAndDiagonalDirections) {
  EXPECT_DOUBLE_EQ(decode_angle({1.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(decode_angle({0.0, -1.0}), 270.0);
  EXPECT_NEAR(decode_angle({-0.7071, 0.7071}), 135.0, 1e-9);
  EXPECT_NEAR(decode_angle({0.0, 2.0}), 90.0, 1e-12);
  EXPECT_THROW(decode_angle({0.0, 0.0}), ValidationError);
}

TEST(TargetEncoder, AngleRoundTripOnFullCircle) {
  DecodingData data;
  data.kind = LabelKind::kHeadDirection;
  data.labels.kind = LabelKind::kHeadDirection;
  data.labels.values = Eigen::MatrixXd::Zero(360, 1);
  for (int i = 0; i < 360; ++i) data.labels.values(i, 0) = i;
  const auto enc = TargetEncoder::fit(data, {0, 360});
  for (int i = 0; i < 360; ++i) {
    const double back = enc.decode(enc.encode(data, i))[0];
    EXPECT_NEAR(std::min(std::abs(back - i), 360.0 - std::abs(back - i)), 0.0, 1e-9);
  }
}

TEST(TargetEncoder, PositionUsesTrainingBoundingBox) {
  DecodingData data;
  data.kind = LabelKind::kPosition;
  data.labels.values.resize(4, 2);
  data.labels.values << 10, 20, 30, 60, 20, 40, 100, 100;
  const auto enc = TargetEncoder::fit(data, {0, 3});
  EXPECT_EQ(enc.lo, (std::array<double, 2>{10, 20}));
  EXPECT_EQ(enc.hi, (std::array<double, 2>{30, 60}));
  EXPECT_TRUE(enc.encode(data, 2).isApprox(Eigen::Vector2d(0.5, 0.5)));
  const auto p = enc.decode(enc.encode(data, 3));
  EXPECT_NEAR(p[0], 100.0, 1e-12);
  EXPECT_NEAR(p[1], 100.0, 1e-12);
  const auto back = TargetEncoder::from_json(enc.to_json());
  EXPECT_EQ(back.lo, enc.lo);
  EXPECT_EQ(back.kind, enc.kind);
}

TEST(Split, ChronologicalLeadingTestBlock) {
  const auto s = chronological_split(100, 0.25);
  EXPECT_EQ(s.test.begin, 0);
  EXPECT_EQ(s.test.end, 25);
  EXPECT_EQ(s.train.begin, 25);
  EXPECT_EQ(s.train.end, 100);
  EXPECT_THROW(chronological_split(100, 0.0), std::invalid_argument);
  EXPECT_THROW(chronological_split(1, 0.5), std::invalid_argument);
}

TEST(Split, WindowsStayInsideTheirBlock) {
  const auto ends = window_ends({10, 20}, 3, 2);
  ASSERT_FALSE(ends.empty());
  EXPECT_EQ(ends.front(), 12);
  EXPECT_EQ(ends.back(), 18);
  EXPECT_TRUE(window_ends({0, 2}, 3, 1).empty());
}

TEST(ScrnnModel, FixedInputWidthAndFiniteOutput) {
  const auto data = prepare_data(small_hd(), 0.1, 0.3);
  const auto split = chronological_split(data.num_bins(), 0.25);
  auto m = build_model(small_config("scrnn"), data, split.train);
  auto* s = dynamic_cast<ScrnnModel*>(m.get());
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->input_width(), static_cast<Eigen::Index>(s->complex()->total_count()));
  EXPECT_EQ(s->rnn().input_size(), s->input_width());
  const auto ends = window_ends(split.test, 3, 1);
  const Eigen::MatrixXd y = m->predict(data, ends);
  EXPECT_EQ(y.rows(), 2);
  EXPECT_TRUE(y.allFinite());
  for (Eigen::Index b = 0; b < y.cols(); ++b) EXPECT_NO_THROW(decode_angle(y.col(b)));
  EXPECT_THROW(scrnn_predict(*m, data, 1), std::out_of_range);
  EXPECT_THROW(scrnn_predict(*m, data, data.num_bins()), std::out_of_range);
}

TEST(ScrnnModel, BatchPredictionMatchesSingleWindows) {
  const auto data = prepare_data(small_hd(), 0.1, 0.3);
  const auto split = chronological_split(data.num_bins(), 0.25);
  auto cfg = small_config("scrnn");
  cfg.n_col = 2;
  auto m = build_model(cfg, data, split.train);
  const auto ends = window_ends(split.test, cfg.seq_len, cfg.n_col);
  const Eigen::MatrixXd y = m->predict(data, ends);
  for (std::size_t b = 0; b < ends.size(); b += 17) {
    EXPECT_TRUE(y.col(static_cast<Eigen::Index>(b)).isApprox(scrnn_predict(*m, data, ends[b]), 1e-12));
  }
}

TEST(ScrnnModel, SilentWindowWithZeroBiasesGivesZero) {
  auto d = small_hd();
  const auto data_full = prepare_data(d, 0.1, 0.3);
  const auto split = chronological_split(data_full.num_bins(), 0.25);
  auto m = build_model(small_config("scrnn"), data_full, split.train);
  auto* s = dynamic_cast<ScrnnModel*>(m.get());
  for (auto& l : s->rnn().layers()) {
    l.b_h.setZero();
    l.b_c.setZero();
  }
  s->rnn().head_b().setZero();
  auto silent = data_full;
  silent.counts.counts.setZero();
  silent.binary.bits.setZero();
  silent.id = 0xfeed;
  EXPECT_EQ(scrnn_predict(*m, silent, 10), Eigen::Vector2d::Zero());
}

TEST(Baselines, GnnComplexStopsAtEdges) {
  const auto data = prepare_data(small_hd(), 0.1, 0.3);
  const auto split = chronological_split(data.num_bins(), 0.25);
  auto m = build_baseline("gnn", small_config("scrnn"), data, split.train);
  EXPECT_EQ(m->arch(), "gnn");
  ASSERT_NE(m->complex(), nullptr);
  EXPECT_EQ(m->complex()->max_dim(), 1);
  EXPECT_THROW(build_baseline("cnn", small_config("scrnn"), data, split.train), std::invalid_argument);
}

TEST(Baselines, GnnMatchesScrnnCappedAtDimensionOne) {
  const auto data = prepare_data(small_hd(), 0.1, 0.3);
  const auto split = chronological_split(data.num_bins(), 0.25);
  auto cfg = small_config("scrnn");
  cfg.k_max = 1;
  auto a = build_model(cfg, data, split.train);
  auto b = build_baseline("gnn", cfg, data, split.train);
  const auto ends = window_ends({0, data.num_bins()}, cfg.seq_len, 1);
  EXPECT_EQ(a->predict(data, ends), b->predict(data, ends));
}

TEST(Baselines, TableShapes) {
  const auto data = prepare_data(small_hd(), 0.1, 0.3);
  const auto split = chronological_split(data.num_bins(), 0.25);
  TrainConfig cfg;
  cfg.layer_width = 128;
  cfg.nn_layers = 2;
  auto f = build_baseline("ffnn", cfg, data, split.train);
  auto* ffnn = dynamic_cast<FfnnModel*>(f.get());
  ASSERT_NE(ffnn, nullptr);
  ASSERT_EQ(ffnn->num_layers(), 3u);
  EXPECT_EQ(ffnn->weight(0).rows(), 128);
  EXPECT_EQ(ffnn->weight(0).cols(), 8 * cfg.seq_len);
  EXPECT_EQ(ffnn->weight(1).rows(), 128);
  EXPECT_EQ(ffnn->weight(2).rows(), 2);

  cfg.hidden_size = 200;
  auto r = build_baseline("rnn", cfg, data, split.train);
  auto* rnn = dynamic_cast<RnnBaseline*>(r.get());
  ASSERT_NE(rnn, nullptr);
  EXPECT_EQ(rnn->rnn().layers()[0].w_h.rows(), 200);
  EXPECT_EQ(rnn->rnn().layers()[0].w_h.cols(), 8);
  EXPECT_EQ(rnn->rnn().layers()[0].w_c.rows(), 200);
  EXPECT_EQ(rnn->rnn().output_size(), 2);
}

TEST(Checkpoint, RoundTripsEveryArchitecture) {
  const auto d = small_hd();
  const auto data = prepare_data(d, 0.1, 0.3);
  const auto split = chronological_split(data.num_bins(), 0.25);
  const auto enc = TargetEncoder::fit(data, split.train);
  const auto ends = window_ends(split.test, 3, 1);
  const auto root = std::filesystem::temp_directory_path() / "scrnn_test_checkpoint";
  for (const std::string arch : {"scrnn", "gnn", "ffnn", "rnn"}) {
    const auto cfg = small_config(arch);
    auto m = build_model(cfg, data, split.train);
    const auto dir = root / arch;
    std::filesystem::remove_all(dir);
    save_checkpoint(dir, cfg, enc, data.num_neurons(), *m);
    EXPECT_EQ(std::filesystem::exists(dir / "complex.json"), arch == "scrnn" || arch == "gnn");
    auto ck = load_checkpoint(dir);
    EXPECT_EQ(ck.model->arch(), arch);
    EXPECT_EQ(ck.n_neurons, 8);
    EXPECT_EQ(ck.model->predict(data, ends), m->predict(data, ends)) << arch;
  }
  std::filesystem::remove_all(root);
}

}  // namespace
}  // namespace scrnn
