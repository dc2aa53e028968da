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

#include <random>
#include <sstream>

#include "scrnn/metrics.hpp"

namespace scrnn {
namespace {

TEST(Rescale, WrapsAroundTheRing) {
  EXPECT_DOUBLE_EQ(rescale(350.0 - 60.0), 70.0);
  EXPECT_DOUBLE_EQ(rescale(1.0 - 359.0), 2.0);
  EXPECT_DOUBLE_EQ(rescale(180.0), 180.0);
  EXPECT_DOUBLE_EQ(rescale(-720.0), 0.0);
  EXPECT_DOUBLE_EQ(rescale(725.0), 5.0);
}

TEST(Rescale, StaysInRangeAndIsSymmetric) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2000.0, 2000.0);
  for (int i = 0; i < 1000; ++i) {
    const double d = u(rng);
    EXPECT_GE(rescale(d), 0.0);
    EXPECT_LE(rescale(d), 180.0);
    EXPECT_NEAR(rescale(d), rescale(-d), 1e-9);
  }
}

TEST(AngularMetrics, MedianAndMean) {
  const std::vector<double> truth{0, 0, 0};
  const std::vector<double> dec{10, 20, 30};
  EXPECT_DOUBLE_EQ(mae(dec, truth), 20.0);
  EXPECT_DOUBLE_EQ(aae(dec, truth), 20.0);
  const std::vector<double> dec4{10, 20, 30, 100}, truth4{0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(mae(dec4, truth4), 25.0);
  EXPECT_DOUBLE_EQ(aae(dec4, truth4), 40.0);
}

TEST(AngularMetrics, RejectsBadInput) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(mae(a, b), DimensionError);
  EXPECT_THROW(aae(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST(AngularMetrics, UniformGuessingAveragesNinetyDegrees) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 360.0);
  std::vector<double> d(20000), t(20000);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = u(rng), t[i] = u(rng);
  EXPECT_NEAR(aae(d, t), 90.0, 5.0);
  EXPECT_NEAR(mae(d, t), 90.0, 5.0);
}

TEST(EuclideanMetrics, AverageDistance) {
  const std::vector<Point2> truth{{0, 0}, {1, 1}};
  const std::vector<Point2> dec{{3, 4}, {1, 1}};
  EXPECT_DOUBLE_EQ(aed(dec, truth), 2.5);
  const std::vector<Point2> one_d{{3, 4}}, one_t{{0, 0}};
  EXPECT_DOUBLE_EQ(aed(one_d, one_t), 5.0);
}

TEST(EuclideanMetrics, InvariantToTranslation) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<Point2> d(100), t(100), ds(100), ts(100);
  const Point2 shift{u(rng), u(rng)};
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = {u(rng), u(rng)};
    t[i] = {u(rng), u(rng)};
    ds[i] = {d[i][0] + shift[0], d[i][1] + shift[1]};
    ts[i] = {t[i][0] + shift[0], t[i][1] + shift[1]};
  }
  EXPECT_NEAR(aed(d, t), aed(ds, ts), 1e-9);
}

TEST(ErrorReport, HeadDirectionSummaryAndCsv) {
  auto r = make_report(LabelKind::kHeadDirection, {0.05, 0.15}, {{350, 0}, {10, 0}}, {{10, 0}, {10, 0}});
  EXPECT_DOUBLE_EQ(r.aae_deg, 10.0);
  EXPECT_DOUBLE_EQ(r.mae_deg, 10.0);
  EXPECT_TRUE(r.finite());
  std::ostringstream csv;
  r.write_csv(csv);
  EXPECT_EQ(csv.str().rfind("time_s,true_deg,decoded_deg,error_deg\n", 0), 0u);
  EXPECT_EQ(r.summary_json().at("n_bins"), 2);
}

TEST(ErrorReport, GridSummary) {
  auto r = make_report(LabelKind::kPosition, {0.05}, {{3, 4}}, {{0, 0}});
  EXPECT_DOUBLE_EQ(r.aed_cm, 5.0);
  EXPECT_TRUE(r.summary_json().contains("aed_cm"));
}

}  // namespace
}  // namespace scrnn
