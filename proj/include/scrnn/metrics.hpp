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

#pragma once

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "scrnn/error.hpp"
#include "scrnn/spikes.hpp"

namespace scrnn {

/// Shortest arc, in [0, 180], for an angular difference in degrees.
inline double rescale(double delta_deg) {
  const double m = std::abs(std::fmod(delta_deg, 360.0));
  return std::min(m, 360.0 - m);
}

/// Ring-rescaled absolute error per bin.
inline std::vector<double> angular_errors(std::span<const double> decoded, std::span<const double> truth) {
  SCRNN_REQUIRE(decoded.size() == truth.size(), DimensionError, "series lengths differ");
  SCRNN_REQUIRE(!decoded.empty(), std::invalid_argument, "empty series");
  std::vector<double> e(decoded.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = rescale(decoded[i] - truth[i]);
  return e;
}

/// Median; for an even count, the mean of the middle two.
inline double median(std::vector<double> v) {
  SCRNN_REQUIRE(!v.empty(), std::invalid_argument, "median of empty series");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

inline double mean(std::span<const double> v) {
  SCRNN_REQUIRE(!v.empty(), std::invalid_argument, "mean of empty series");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Median absolute angular error (degrees).
inline double mae(std::span<const double> decoded, std::span<const double> truth) {
  return median(angular_errors(decoded, truth));
}

/// Average absolute angular error (degrees).
inline double aae(std::span<const double> decoded, std::span<const double> truth) {
  return mean(angular_errors(decoded, truth));
}

using Point2 = std::array<double, 2>;

inline std::vector<double> euclidean_errors(std::span<const Point2> decoded, std::span<const Point2> truth) {
  SCRNN_REQUIRE(decoded.size() == truth.size(), DimensionError, "series lengths differ");
  SCRNN_REQUIRE(!decoded.empty(), std::invalid_argument, "empty series");
  std::vector<double> e(decoded.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = std::hypot(decoded[i][0] - truth[i][0], decoded[i][1] - truth[i][1]);
  }
  return e;
}

/// Average Euclidean distance (centimeters).
inline double aed(std::span<const Point2> decoded, std::span<const Point2> truth) {
  return mean(euclidean_errors(decoded, truth));
}

/// Per-bin errors with summary statistics. For head direction, `decoded`
/// and `truth` hold angles in column 0; for position, x and y.
struct ErrorReport {
  LabelKind kind = LabelKind::kHeadDirection;
  std::vector<double> times;
  std::vector<Point2> decoded;
  std::vector<Point2> truth;
  std::vector<double> errors;
  double mae_deg = 0.0;
  double aae_deg = 0.0;
  double aed_cm = 0.0;

  std::size_t n_bins() const { return errors.size(); }

  bool finite() const {
    return kind == LabelKind::kHeadDirection ? std::isfinite(mae_deg) && std::isfinite(aae_deg)
                                             : std::isfinite(aed_cm);
  }

  nlohmann::json summary_json() const {
    if (kind == LabelKind::kHeadDirection) {
      return {{"mae_deg", mae_deg}, {"aae_deg", aae_deg}, {"n_bins", n_bins()}};
    }
    return {{"aed_cm", aed_cm}, {"n_bins", n_bins()}};
  }

  /// Per-bin rows followed by a commented summary footer.
  void write_csv(std::ostream& out) const {
    using detail::format_double;
    if (kind == LabelKind::kHeadDirection) {
      out << "time_s,true_deg,decoded_deg,error_deg\n";
      for (std::size_t i = 0; i < errors.size(); ++i) {
        out << format_double(times[i]) << ',' << format_double(truth[i][0]) << ','
            << format_double(decoded[i][0]) << ',' << format_double(errors[i]) << '\n';
      }
      out << "# mae_deg=" << format_double(mae_deg) << "\n# aae_deg=" << format_double(aae_deg)
          << "\n# n_bins=" << n_bins() << '\n';
    } else {
      out << "time_s,x_true_cm,y_true_cm,x_decoded_cm,y_decoded_cm,error_cm\n";
      for (std::size_t i = 0; i < errors.size(); ++i) {
        out << format_double(times[i]) << ',' << format_double(truth[i][0]) << ',' << format_double(truth[i][1])
            << ',' << format_double(decoded[i][0]) << ',' << format_double(decoded[i][1]) << ','
            << format_double(errors[i]) << '\n';
      }
      out << "# aed_cm=" << format_double(aed_cm) << "\n# n_bins=" << n_bins() << '\n';
    }
  }
};

inline ErrorReport make_report(LabelKind kind, std::vector<double> times, std::vector<Point2> decoded,
                               std::vector<Point2> truth) {
  ErrorReport r;
  r.kind = kind;
  r.times = std::move(times);
  r.decoded = std::move(decoded);
  r.truth = std::move(truth);
  if (kind == LabelKind::kHeadDirection) {
    std::vector<double> d(r.decoded.size()), t(r.truth.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = r.decoded[i][0];
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = r.truth[i][0];
    r.errors = angular_errors(d, t);
    r.mae_deg = median(r.errors);
    r.aae_deg = mean(r.errors);
  } else {
    r.errors = euclidean_errors(r.decoded, r.truth);
    r.aed_cm = mean(r.errors);
  }
  return r;
}

}  // namespace scrnn
