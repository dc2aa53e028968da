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

// Synthetic head-direction and grid-cell populations with Poisson spiking.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "scrnn/error.hpp"
#include "scrnn/spikes.hpp"

namespace scrnn {

struct HdSimConfig {
  int n_neurons = 30;
  double peak_rate_hz = 20.0;
  double kappa = 4.0;
  /// Empty means evenly spaced around the circle.
  std::vector<double> preferred_deg;
  double step_std_deg = 3.0;  // per label step
  double duration_s = 600.0;
  double label_rate_hz = 50.0;
  std::uint64_t seed = 7;

  double preferred(int i) const {
    if (!preferred_deg.empty()) return preferred_deg.at(static_cast<std::size_t>(i));
    return 360.0 * i / n_neurons;
  }

  void validate() const {
    SCRNN_REQUIRE(n_neurons >= 1, std::invalid_argument, "need at least one neuron");
    SCRNN_REQUIRE(peak_rate_hz >= 0.0, std::invalid_argument, "peak rate must be non-negative");
    SCRNN_REQUIRE(kappa > 0.0, std::invalid_argument, "kappa must be positive");
    SCRNN_REQUIRE(preferred_deg.empty() || static_cast<int>(preferred_deg.size()) == n_neurons,
                  std::invalid_argument, "preferred direction count must match neuron count");
    SCRNN_REQUIRE(duration_s > 0.0 && label_rate_hz > 0.0 && step_std_deg >= 0.0, std::invalid_argument,
                  "duration, label rate and step size must be positive");
  }
};

/// Von Mises tuning curve r_max * exp(kappa * (cos(theta - theta_i) - 1)).
inline double hd_rate(double peak_rate, double kappa, double theta_deg, double preferred_deg) {
  return peak_rate * std::exp(kappa * (std::cos((theta_deg - preferred_deg) / kDegPerRad) - 1.0));
}

struct GridModule {
  double scale_cm = 40.0;
  double orientation_deg = 0.0;
  int n_cells = 24;
  /// Fractional offsets (u, v) in the unit rhombus; empty means a
  /// low-discrepancy fill.
  std::vector<std::array<double, 2>> phases;

  std::array<double, 2> phase(int i) const {
    if (!phases.empty()) return phases.at(static_cast<std::size_t>(i));
    // R2 sequence, constants from the plastic number.
    constexpr double a1 = 0.7548776662466927;
    constexpr double a2 = 0.5698402909980532;
    return {std::fmod(0.5 + a1 * i, 1.0), std::fmod(0.5 + a2 * i, 1.0)};
  }
};

struct GridSimConfig {
  std::vector<GridModule> modules = {{40.0, 0.0, 24, {}}, {60.0, 20.0, 24, {}}};
  double arena_cm = 150.0;
  double speed_cm_s = 20.0;
  double turn_std_deg = 15.0;  // heading change per label step
  double peak_rate_hz = 20.0;
  double duration_s = 600.0;
  double label_rate_hz = 50.0;
  /// Starting position; arena center when absent.
  std::optional<std::array<double, 2>> start;
  std::uint64_t seed = 7;

  int n_cells() const {
    int n = 0;
    for (const auto& m : modules) n += m.n_cells;
    return n;
  }

  void validate() const {
    SCRNN_REQUIRE(!modules.empty(), std::invalid_argument, "need at least one grid module");
    for (std::size_t i = 0; i < modules.size(); ++i) {
      const auto& m = modules[i];
      SCRNN_REQUIRE(m.scale_cm > 0.0 && m.n_cells >= 1, std::invalid_argument, "grid module needs scale > 0 and cells");
      SCRNN_REQUIRE(m.phases.empty() || static_cast<int>(m.phases.size()) == m.n_cells, std::invalid_argument,
                    "phase count must match cell count");
      for (const auto& p : m.phases) {
        SCRNN_REQUIRE(p[0] >= 0.0 && p[0] < 1.0 && p[1] >= 0.0 && p[1] < 1.0, std::invalid_argument,
                      "phases must lie in the unit rhombus");
      }
      for (std::size_t j = 0; j < i; ++j) {
        SCRNN_REQUIRE(modules[j].scale_cm != m.scale_cm, std::invalid_argument, "module scales must be distinct");
      }
    }
    SCRNN_REQUIRE(arena_cm > 0.0 && speed_cm_s >= 0.0 && peak_rate_hz >= 0.0, std::invalid_argument,
                  "arena, speed and peak rate must be non-negative");
    SCRNN_REQUIRE(duration_s > 0.0 && label_rate_hz > 0.0, std::invalid_argument, "duration and label rate must be positive");
  }
};

/// Hexagonal firing field: the rectified sum of three plane waves at 60
/// degree separations, peaking (value 1) on the lattice through `center`.
struct GridField {
  std::array<std::array<double, 2>, 3> waves;
  std::array<double, 2> center;

  GridField(double scale_cm, double orientation_deg, std::array<double, 2> center_cm) : center(center_cm) {
    const double k = 4.0 * std::numbers::pi / (std::sqrt(3.0) * scale_cm);
    for (int i = 0; i < 3; ++i) {
      const double a = (orientation_deg + 30.0 + 60.0 * i) / kDegPerRad;
      waves[static_cast<std::size_t>(i)] = {k * std::cos(a), k * std::sin(a)};
    }
  }

  /// Normalized rate in [0, 1].
  double operator()(double x, double y) const {
    double g = 0.0;
    for (const auto& w : waves) g += std::cos(w[0] * (x - center[0]) + w[1] * (y - center[1]));
    return std::max(0.0, g) / 3.0;
  }
};

inline std::vector<GridField> grid_fields(const GridSimConfig& cfg) {
  std::vector<GridField> fields;
  const double c = cfg.arena_cm / 2.0;
  for (const auto& m : cfg.modules) {
    const double o = m.orientation_deg / kDegPerRad;
    const double o60 = (m.orientation_deg + 60.0) / kDegPerRad;
    for (int i = 0; i < m.n_cells; ++i) {
      const auto [u, v] = m.phase(i);
      const std::array<double, 2> center = {c + m.scale_cm * (u * std::cos(o) + v * std::cos(o60)),
                                            c + m.scale_cm * (u * std::sin(o) + v * std::sin(o60))};
      fields.emplace_back(m.scale_cm, m.orientation_deg, center);
    }
  }
  return fields;
}

namespace detail {

/// Inhomogeneous Poisson process on [0, duration) by thinning a homogeneous
/// process at `max_rate`; `rate(t)` must not exceed it.
template <typename Rate>
std::vector<double> thinned_poisson(double max_rate, double duration, Rate&& rate, std::mt19937_64& rng) {
  std::vector<double> out;
  if (max_rate <= 0.0) return out;
  std::exponential_distribution<double> gap(max_rate);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double t = gap(rng);
  while (t < duration) {
    if (u(rng) * max_rate < rate(t)) out.push_back(t);
    t += gap(rng);
  }
  return out;
}

inline std::size_t label_count(double duration, double label_rate) {
  return static_cast<std::size_t>(std::llround(duration * label_rate)) + 1;
}

}  // namespace detail

/// Head angle follows a wrapped Gaussian random walk sampled at the label
/// rate (linearly interpolated along the shortest arc in between); each cell
/// spikes as an inhomogeneous Poisson process under its tuning curve.
inline SpikeDataset simulate_hd(const HdSimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  SpikeDataset d;
  d.kind = LabelKind::kHeadDirection;
  d.t_start = 0.0;
  d.t_end = cfg.duration_s;
  const std::size_t n_labels = detail::label_count(cfg.duration_s, cfg.label_rate_hz);
  const double dt = 1.0 / cfg.label_rate_hz;
  std::uniform_real_distribution<double> start(0.0, 360.0);
  std::normal_distribution<double> step(0.0, cfg.step_std_deg);
  double theta = start(rng);
  for (std::size_t n = 0; n < n_labels; ++n) {
    d.label_times.push_back(std::min(static_cast<double>(n) * dt, cfg.duration_s));
    d.label_values.push_back({theta, 0.0});
    theta = wrap_degrees(theta + step(rng));
  }
  auto angle_at = [&](double t) {
    const auto i = std::min(static_cast<std::size_t>(t / dt), n_labels - 2);
    const double w = (t - d.label_times[i]) / (d.label_times[i + 1] - d.label_times[i]);
    double delta = d.label_values[i + 1][0] - d.label_values[i][0];
    if (delta > 180.0) delta -= 360.0;
    if (delta < -180.0) delta += 360.0;
    return d.label_values[i][0] + w * delta;
  };
  d.neurons.resize(static_cast<std::size_t>(cfg.n_neurons));
  for (int i = 0; i < cfg.n_neurons; ++i) {
    const double pref = cfg.preferred(i);
    d.neurons[static_cast<std::size_t>(i)] = detail::thinned_poisson(
        cfg.peak_rate_hz, cfg.duration_s,
        [&](double t) { return hd_rate(cfg.peak_rate_hz, cfg.kappa, angle_at(t), pref); }, rng);
  }
  return d;
}

/// Position follows a constant-speed walk with Gaussian heading changes,
/// reflecting off the arena walls; each grid cell spikes as an
/// inhomogeneous Poisson process under its hexagonal field.
inline SpikeDataset simulate_grid(const GridSimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  SpikeDataset d;
  d.kind = LabelKind::kPosition;
  d.t_start = 0.0;
  d.t_end = cfg.duration_s;
  const std::size_t n_labels = detail::label_count(cfg.duration_s, cfg.label_rate_hz);
  const double dt = 1.0 / cfg.label_rate_hz;
  const double side = cfg.arena_cm;
  std::array<double, 2> pos = cfg.start.value_or(std::array<double, 2>{side / 2.0, side / 2.0});
  std::uniform_real_distribution<double> start(0.0, 360.0);
  std::normal_distribution<double> turn(0.0, cfg.turn_std_deg);
  double heading = start(rng);
  for (std::size_t n = 0; n < n_labels; ++n) {
    d.label_times.push_back(std::min(static_cast<double>(n) * dt, cfg.duration_s));
    d.label_values.push_back(pos);
    heading += turn(rng);
    const double h = heading / kDegPerRad;
    double x = pos[0] + cfg.speed_cm_s * dt * std::cos(h);
    double y = pos[1] + cfg.speed_cm_s * dt * std::sin(h);
    if (x < 0.0 || x > side) {
      x = x < 0.0 ? -x : 2.0 * side - x;
      heading = 180.0 - heading;
    }
    if (y < 0.0 || y > side) {
      y = y < 0.0 ? -y : 2.0 * side - y;
      heading = -heading;
    }
    pos = {std::clamp(x, 0.0, side), std::clamp(y, 0.0, side)};
  }
  auto position_at = [&](double t) {
    const auto i = std::min(static_cast<std::size_t>(t / dt), n_labels - 2);
    const double w = (t - d.label_times[i]) / (d.label_times[i + 1] - d.label_times[i]);
    const auto& a = d.label_values[i];
    const auto& b = d.label_values[i + 1];
    return std::array<double, 2>{a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])};
  };
  const auto fields = grid_fields(cfg);
  d.neurons.resize(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    d.neurons[i] = detail::thinned_poisson(
        cfg.peak_rate_hz, cfg.duration_s,
        [&](double t) {
          const auto p = position_at(t);
          return cfg.peak_rate_hz * fields[i](p[0], p[1]);
        },
        rng);
  }
  return d;
}

}  // namespace scrnn
