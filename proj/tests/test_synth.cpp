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

#include <algorithm>
#include <cmath>

#include "scrnn/synth.hpp"

namespace scrnn {
namespace {

double circular_distance(double a, double b) {
  const double d = std::abs(std::fmod(a - b, 360.0));
  return std::min(d, 360.0 - d);
}

// Fraction of the tuning curve's mass within +-w degrees, by Simpson's rule.
double tuning_mass_fraction(double kappa, double w) {
  auto f = [kappa](double d) { return std::exp(kappa * (std::cos(d / kDegPerRad) - 1.0)); };
  auto simpson = [&](double a, double b) {
    const int n = 20000;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  return simpson(-w, w) / simpson(-180.0, 180.0);
}

// Angle at time t from the label stream, along the shortest arc.
double angle_at(const SpikeDataset& d, double t) {
  const auto it = std::upper_bound(d.label_times.begin(), d.label_times.end(), t);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - d.label_times.begin() - 1));
  if (i + 1 >= d.label_times.size()) return d.label_values.back()[0];
  const double w = (t - d.label_times[i]) / (d.label_times[i + 1] - d.label_times[i]);
  double delta = d.label_values[i + 1][0] - d.label_values[i][0];
  if (delta > 180.0) delta -= 360.0;
  if (delta < -180.0) delta += 360.0;
  return d.label_values[i][0] + w * delta;
}

TEST(SimulateHd, SharpTuningConcentratesSpikesNearPreference) {
  HdSimConfig cfg;
  cfg.kappa = 50.0;
  cfg.n_neurons = 8;
  cfg.duration_s = 600.0;
  const auto d = simulate_hd(cfg);
  std::size_t near = 0, total = 0;
  for (int i = 0; i < cfg.n_neurons; ++i) {
    for (double t : d.neurons[static_cast<std::size_t>(i)]) {
      ++total;
      if (circular_distance(angle_at(d, t), cfg.preferred(i)) <= 20.0) ++near;
    }
  }
  ASSERT_GT(total, 1000u);
  const double expected = tuning_mass_fraction(50.0, 20.0);
  EXPECT_NEAR(expected, 0.98569, 1e-4);
  EXPECT_NEAR(static_cast<double>(near) / static_cast<double>(total), expected, 0.01);
}

TEST(SimulateHd, ZeroPeakRateIsSilent) {
  HdSimConfig cfg;
  cfg.peak_rate_hz = 0.0;
  cfg.duration_s = 30.0;
  const auto d = simulate_hd(cfg);
  for (const auto& n : d.neurons) EXPECT_TRUE(n.empty());
  EXPECT_EQ(d.label_times.size(), 1501u);
}

TEST(SimulateHd, FixedSeedIsDeterministic) {
  HdSimConfig cfg;
  cfg.duration_s = 60.0;
  const auto a = simulate_hd(cfg);
  const auto b = simulate_hd(cfg);
  EXPECT_EQ(a.neurons, b.neurons);
  EXPECT_EQ(a.label_values, b.label_values);
  cfg.seed = 8;
  EXPECT_NE(simulate_hd(cfg).neurons, a.neurons);
}

TEST(SimulateHd, SpikesSortedAndInRange) {
  HdSimConfig cfg;
  cfg.duration_s = 120.0;
  const auto d = simulate_hd(cfg);
  for (const auto& n : d.neurons) {
    EXPECT_TRUE(std::is_sorted(n.begin(), n.end()));
    for (double t : n) {
      EXPECT_GE(t, 0.0);
      EXPECT_LT(t, cfg.duration_s);
    }
  }
  for (const auto& v : d.label_values) {
    EXPECT_GE(v[0], 0.0);
    EXPECT_LT(v[0], 360.0);
  }
}

TEST(SimulateHd, PopulationRateMatchesTrajectoryExpectation) {
  HdSimConfig cfg;
  cfg.duration_s = 300.0;
  const auto d = simulate_hd(cfg);
  double expected = 0.0;
  const double dt = 0.002;
  for (double t = 0.5 * dt; t < cfg.duration_s; t += dt) {
    const double theta = angle_at(d, t);
    for (int i = 0; i < cfg.n_neurons; ++i) expected += hd_rate(cfg.peak_rate_hz, cfg.kappa, theta, cfg.preferred(i)) * dt;
  }
  std::size_t total = 0;
  for (const auto& n : d.neurons) total += n.size();
  EXPECT_NEAR(static_cast<double>(total) / expected, 1.0, 0.05);
}

TEST(SimulateHd, MostActiveNeuronTracksTheAngle) {
  HdSimConfig cfg;
  const auto d = simulate_hd(cfg);
  const auto counts = bin_spikes(d, 0.1);
  const auto labels = bin_labels(d, 0.1);
  const double spacing = 360.0 / cfg.n_neurons;
  int active = 0, hits = 0;
  for (Eigen::Index j = 0; j < counts.num_bins(); ++j) {
    if (counts.counts.col(j).sum() == 0) continue;
    ++active;
    Eigen::Index top = 0;
    counts.counts.col(j).maxCoeff(&top);
    // Within two neighbours of the cell tuned nearest the true angle.
    const auto nearest = static_cast<int>(std::lround(labels.values(j, 0) / spacing)) % cfg.n_neurons;
    const int steps = std::abs(static_cast<int>(top) - nearest);
    if (std::min(steps, cfg.n_neurons - steps) <= 2) ++hits;
  }
  ASSERT_GT(active, 1000);
  EXPECT_GE(static_cast<double>(hits) / active, 0.8);
}

TEST(SimulateHd, InvalidConfigThrows) {
  HdSimConfig cfg;
  cfg.kappa = 0.0;
  EXPECT_THROW(simulate_hd(cfg), std::invalid_argument);
  cfg = HdSimConfig{};
  cfg.preferred_deg = {0.0, 90.0};
  EXPECT_THROW(simulate_hd(cfg), std::invalid_argument);
}

TEST(GridField, AutocorrelationHasSixFoldPeaks) {
  const double scale = 40.0;
  const GridField f(scale, 10.0, {0.0, 0.0});
  std::vector<std::array<double, 2>> pts;
  std::vector<double> val;
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 60; ++j) {
      pts.push_back({i * 2.0, j * 2.0});
      val.push_back(f(i * 2.0, j * 2.0));
    }
  }
  double mean = 0.0;
  for (double v : val) mean += v;
  mean /= static_cast<double>(val.size());
  double var = 0.0;
  for (double v : val) var += (v - mean) * (v - mean);
  auto corr = [&](double dx, double dy) {
    double c = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) c += (val[i] - mean) * (f(pts[i][0] + dx, pts[i][1] + dy) - mean);
    return c / var;
  };
  std::vector<double> ring(360);
  for (int a = 0; a < 360; ++a) ring[static_cast<std::size_t>(a)] = corr(scale * std::cos(a / kDegPerRad), scale * std::sin(a / kDegPerRad));
  std::vector<int> peaks;
  for (int a = 0; a < 360; ++a) {
    const double v = ring[static_cast<std::size_t>(a)];
    if (v > 0.5 && v >= ring[static_cast<std::size_t>((a + 359) % 360)] && v > ring[static_cast<std::size_t>((a + 1) % 360)]) {
      peaks.push_back(a);
    }
  }
  ASSERT_EQ(peaks.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    const int gap = (peaks[(i + 1) % 6] - peaks[i] + 360) % 360;
    EXPECT_NEAR(gap, 60, 2);
    EXPECT_GT(ring[static_cast<std::size_t>(peaks[i])], 0.95);
  }
  // Half a period away the field is anticorrelated with itself.
  EXPECT_LT(ring[static_cast<std::size_t>((peaks[0] + 30) % 360)], 0.5);
}

TEST(GridField, PeaksAtCenterWithUnitRate) {
  const GridField f(55.0, 17.0, {12.0, -3.0});
  EXPECT_NEAR(f(12.0, -3.0), 1.0, 1e-12);
  for (int i = 0; i < 200; ++i) {
    const double v = f(i * 1.3, i * -0.7);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-12);
  }
}

TEST(SimulateGrid, StationaryAtPeakFiresAtPeakRate) {
  GridSimConfig cfg;
  cfg.modules = {GridModule{40.0, 0.0, 1, {{0.0, 0.0}}}};
  cfg.speed_cm_s = 0.0;
  cfg.duration_s = 300.0;
  const auto d = simulate_grid(cfg);
  const double mean = cfg.peak_rate_hz * cfg.duration_s;
  EXPECT_NEAR(static_cast<double>(d.neurons[0].size()), mean, 3.0 * std::sqrt(mean));
  for (const auto& p : d.label_values) {
    EXPECT_DOUBLE_EQ(p[0], 75.0);
    EXPECT_DOUBLE_EQ(p[1], 75.0);
  }
}

TEST(SimulateGrid, TrajectoryStaysInTheArena) {
  GridSimConfig cfg;
  cfg.duration_s = 300.0;
  cfg.speed_cm_s = 60.0;
  const auto d = simulate_grid(cfg);
  EXPECT_EQ(d.num_neurons(), 48u);
  for (const auto& p : d.label_values) {
    EXPECT_GE(p[0], 0.0);
    EXPECT_LE(p[0], cfg.arena_cm);
    EXPECT_GE(p[1], 0.0);
    EXPECT_LE(p[1], cfg.arena_cm);
  }
  for (std::size_t i = 1; i < d.label_values.size(); ++i) {
    const double step = std::hypot(d.label_values[i][0] - d.label_values[i - 1][0],
                                   d.label_values[i][1] - d.label_values[i - 1][1]);
    EXPECT_LE(step, cfg.speed_cm_s / cfg.label_rate_hz + 1e-9);
  }
  for (const auto& n : d.neurons) {
    EXPECT_TRUE(std::is_sorted(n.begin(), n.end()));
    if (!n.empty()) {
      EXPECT_LT(n.back(), cfg.duration_s);
    }
  }
}

TEST(SimulateGrid, PopulationRateMatchesTrajectoryExpectation) {
  GridSimConfig cfg;
  cfg.duration_s = 300.0;
  const auto d = simulate_grid(cfg);
  const auto fields = grid_fields(cfg);
  double expected = 0.0;
  const double dt = 1.0 / cfg.label_rate_hz;
  for (std::size_t n = 0; n + 1 < d.label_values.size(); ++n) {
    const auto& a = d.label_values[n];
    const auto& b = d.label_values[n + 1];
    for (int s = 0; s < 4; ++s) {
      const double w = (s + 0.5) / 4.0;
      const double x = a[0] + w * (b[0] - a[0]), y = a[1] + w * (b[1] - a[1]);
      for (const auto& f : fields) expected += cfg.peak_rate_hz * f(x, y) * dt / 4.0;
    }
  }
  std::size_t total = 0;
  for (const auto& n : d.neurons) total += n.size();
  EXPECT_NEAR(static_cast<double>(total) / expected, 1.0, 0.05);
}

TEST(SimulateGrid, FixedSeedIsDeterministic) {
  GridSimConfig cfg;
  cfg.duration_s = 30.0;
  const auto a = simulate_grid(cfg);
  const auto b = simulate_grid(cfg);
  EXPECT_EQ(a.neurons, b.neurons);
  EXPECT_EQ(a.label_values, b.label_values);
}

TEST(SimulateGrid, InvalidConfigThrows) {
  GridSimConfig cfg;
  cfg.modules = {GridModule{40.0, 0.0, 2, {}}, GridModule{40.0, 30.0, 2, {}}};
  EXPECT_THROW(simulate_grid(cfg), std::invalid_argument);
  cfg.modules = {GridModule{40.0, 0.0, 1, {{1.0, 0.0}}}};
  EXPECT_THROW(simulate_grid(cfg), std::invalid_argument);
}

}  // namespace
}  // namespace scrnn
