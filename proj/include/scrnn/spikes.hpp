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

// Spike ingestion, binning, row-wise binarization and label binning.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "scrnn/error.hpp"

namespace scrnn {

enum class LabelKind { kHeadDirection, kPosition };

inline std::string to_string(LabelKind kind) {
  return kind == LabelKind::kHeadDirection ? "hd" : "grid";
}

inline LabelKind parse_label_kind(std::string_view s) {
  if (s == "hd") return LabelKind::kHeadDirection;
  if (s == "grid") return LabelKind::kPosition;
  throw ParseError("unknown data kind '" + std::string(s) + "' (expected hd|grid)");
}

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;

/// Maps any finite angle in degrees onto [0, 360).
inline double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w = 0.0;
  return w;
}

/// Angle of a (cos, sin)-like pair in [0, 360).
inline double angle_of(double c, double s) { return wrap_degrees(std::atan2(s, c) * kDegPerRad); }

/// Spike times per neuron plus a time-stamped behavioral label stream.
/// For head direction a label is one angle (degrees); for position it is
/// (x, y) in centimeters.
struct SpikeDataset {
  LabelKind kind = LabelKind::kHeadDirection;
  std::vector<std::vector<double>> neurons;
  std::vector<double> label_times;
  std::vector<std::array<double, 2>> label_values;
  double t_start = 0.0;
  double t_end = 0.0;

  std::size_t num_neurons() const { return neurons.size(); }
  std::size_t label_width() const { return kind == LabelKind::kHeadDirection ? 1 : 2; }

  void validate() const {
    SCRNN_REQUIRE(t_end > t_start, ValidationError, "t_end must exceed t_start");
    for (std::size_t i = 0; i < neurons.size(); ++i) {
      const auto& s = neurons[i];
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (!(s[j] >= t_start && s[j] <= t_end)) {
          throw ValidationError("neuron " + std::to_string(i) + " spike time " +
                                std::to_string(s[j]) + " outside [t_start, t_end]");
        }
        if (j > 0 && s[j] < s[j - 1]) {
          throw ValidationError("neuron " + std::to_string(i) + " spike times not ascending");
        }
      }
    }
    SCRNN_REQUIRE(label_times.size() == label_values.size(), ValidationError,
                  "label times and values differ in length");
    for (std::size_t j = 1; j < label_times.size(); ++j) {
      SCRNN_REQUIRE(label_times[j] > label_times[j - 1], ValidationError,
                    "label timestamps not strictly ascending");
    }
    if (kind == LabelKind::kHeadDirection) {
      for (const auto& v : label_values) {
        SCRNN_REQUIRE(v[0] >= 0.0 && v[0] < 360.0, ValidationError,
                      "head-direction label outside [0, 360)");
      }
    }
  }
};

/// Neurons x bins spike counts. Column j covers
/// [t_start + j*t_bin, t_start + (j+1)*t_bin).
struct SpikeCountMatrix {
  Eigen::MatrixXi counts;
  double t_start = 0.0;
  double t_bin = 0.0;
  /// Spikes at or after the end of the last whole bin, per neuron.
  std::vector<int> discarded;

  Eigen::Index num_neurons() const { return counts.rows(); }
  Eigen::Index num_bins() const { return counts.cols(); }
  double bin_left(Eigen::Index j) const { return t_start + static_cast<double>(j) * t_bin; }
  double bin_right(Eigen::Index j) const { return bin_left(j + 1); }
};

using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct BinaryMatrix {
  BitMatrix bits;
  double p = 0.3;

  Eigen::Index num_neurons() const { return bits.rows(); }
  Eigen::Index num_bins() const { return bits.cols(); }

  /// Ascending indices of neurons active in column j.
  std::vector<int> active(Eigen::Index j) const {
    std::vector<int> out;
    for (Eigen::Index i = 0; i < bits.rows(); ++i) {
      if (bits(i, j)) out.push_back(static_cast<int>(i));
    }
    return out;
  }
};

/// One label per bin: angles (degrees, one column) or positions (cm, two columns).
struct LabelSeries {
  LabelKind kind = LabelKind::kHeadDirection;
  Eigen::MatrixXd values;

  Eigen::Index size() const { return values.rows(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<long long> to_integer(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct CsvTable {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::map<std::string, std::string> directives;
};

/// Reads comma-separated records. Lines starting with '#' are comments;
/// '# key=value' comments are collected as directives. A first record whose
/// leading field is not numeric is treated as a header and skipped.
inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      auto body = trim(t.substr(1));
      auto eq = body.find('=');
      if (eq != std::string_view::npos) {
        table.directives[std::string(trim(body.substr(0, eq)))] =
            std::string(trim(body.substr(eq + 1)));
      }
      continue;
    }
    auto fields = split(t, ',');
    if (first_record) {
      first_record = false;
      if (!to_double(fields.front())) continue;
    }
    std::vector<std::string> row;
    for (auto f : fields) row.emplace_back(f);
    table.rows.push_back(std::move(row));
    table.line_numbers.push_back(lineno);
  }
  return table;
}

inline double directive_double(const CsvTable& t, const std::string& key, double fallback) {
  auto it = t.directives.find(key);
  if (it == t.directives.end()) return fallback;
  auto v = to_double(it->second);
  if (!v) throw ParseError("bad directive value for " + key + ": " + it->second);
  return *v;
}

}  // namespace detail

/// Reads a spike file (`neuron_id,spike_time_s`) and a label file
/// (`time_s,angle_deg` or `time_s,x_cm,y_cm`).
///
/// Optional spike-file directives: `# n_neurons=N` keeps trailing silent
/// neurons, `# t_start=..` / `# t_end=..` override the recording span, which
/// otherwise defaults to the first and last label timestamps.
inline SpikeDataset load_spike_dataset(const std::filesystem::path& spike_path,
                                       const std::filesystem::path& label_path, LabelKind kind) {
  SpikeDataset d;
  d.kind = kind;

  const auto labels = detail::read_csv(label_path);
  const std::size_t width = d.label_width();
  for (std::size_t r = 0; r < labels.rows.size(); ++r) {
    const auto& row = labels.rows[r];
    const auto where = label_path.string() + ":" + std::to_string(labels.line_numbers[r]);
    if (row.size() != width + 1) {
      throw ParseError(where + ": expected " + std::to_string(width + 1) + " fields");
    }
    auto t = detail::to_double(row[0]);
    auto a = detail::to_double(row[1]);
    auto b = width == 2 ? detail::to_double(row[2]) : std::optional<double>(0.0);
    if (!t || !a || !b) throw ParseError(where + ": malformed number");
    d.label_times.push_back(*t);
    d.label_values.push_back({*a, *b});
  }
  SCRNN_REQUIRE(!d.label_times.empty(), ValidationError, "label stream is empty");

  const auto spikes = detail::read_csv(spike_path);
  std::size_t n_neurons = 0;
  std::vector<std::pair<std::size_t, double>> records;
  for (std::size_t r = 0; r < spikes.rows.size(); ++r) {
    const auto& row = spikes.rows[r];
    const auto where = spike_path.string() + ":" + std::to_string(spikes.line_numbers[r]);
    if (row.size() != 2) throw ParseError(where + ": expected neuron_id,spike_time_s");
    auto id = detail::to_integer(row[0]);
    auto t = detail::to_double(row[1]);
    if (!id || !t || *id < 0) throw ParseError(where + ": malformed record");
    records.emplace_back(static_cast<std::size_t>(*id), *t);
    n_neurons = std::max(n_neurons, static_cast<std::size_t>(*id) + 1);
  }
  n_neurons = std::max(
      n_neurons, static_cast<std::size_t>(detail::directive_double(spikes, "n_neurons", 0.0)));
  d.neurons.assign(n_neurons, {});
  for (const auto& [id, t] : records) d.neurons[id].push_back(t);

  d.t_start = detail::directive_double(spikes, "t_start", d.label_times.front());
  d.t_end = detail::directive_double(spikes, "t_end", d.label_times.back());
  d.validate();
  return d;
}

/// Loads `spikes.csv` and `labels.csv` from a data directory.
inline SpikeDataset load_spike_dataset(const std::filesystem::path& dir, LabelKind kind) {
  return load_spike_dataset(dir / "spikes.csv", dir / "labels.csv", kind);
}

/// Infers hd vs grid from the label file's column count.
inline LabelKind detect_label_kind(const std::filesystem::path& dir) {
  const auto labels = detail::read_csv(dir / "labels.csv");
  SCRNN_REQUIRE(!labels.rows.empty(), ValidationError, "label stream is empty");
  const auto n = labels.rows.front().size();
  if (n == 2) return LabelKind::kHeadDirection;
  if (n == 3) return LabelKind::kPosition;
  throw ParseError("label file must have 2 or 3 columns");
}

inline void write_spike_dataset(const SpikeDataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "spikes.csv");
    out << "# n_neurons=" << d.num_neurons() << "\n";
    out << "# t_start=" << detail::format_double(d.t_start) << "\n";
    out << "# t_end=" << detail::format_double(d.t_end) << "\n";
    out << "neuron_id,spike_time_s\n";
    for (std::size_t i = 0; i < d.neurons.size(); ++i) {
      for (double t : d.neurons[i]) out << i << ',' << detail::format_double(t) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing spikes.csv");
  }
  std::ofstream out(dir / "labels.csv");
  out << (d.kind == LabelKind::kHeadDirection ? "time_s,angle_deg\n" : "time_s,x_cm,y_cm\n");
  for (std::size_t j = 0; j < d.label_times.size(); ++j) {
    out << detail::format_double(d.label_times[j]) << ','
        << detail::format_double(d.label_values[j][0]);
    if (d.kind == LabelKind::kPosition) out << ',' << detail::format_double(d.label_values[j][1]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing labels.csv");
}

namespace detail {

inline Eigen::Index count_bins(double t_start, double t_end, double t_bin) {
  return static_cast<Eigen::Index>(std::floor((t_end - t_start) / t_bin + 1e-9));
}

/// Bin position of t, snapping values within 1e-9 bins of an edge onto it so
/// decimal timestamps like 0.3 land on the edge they name.
inline double bin_coordinate(double t, double t_start, double t_bin) {
  const double q = (t - t_start) / t_bin;
  const double r = std::round(q);
  return std::abs(q - r) < 1e-9 ? r : q;
}

}  // namespace detail

/// Counts spikes per neuron in half-open bins of width t_bin. The trailing
/// partial bin (and any spike exactly at its right edge) is discarded and
/// reported per neuron.
inline SpikeCountMatrix bin_spikes(const SpikeDataset& d, double t_bin) {
  SCRNN_REQUIRE(t_bin > 0.0, std::invalid_argument, "t_bin must be positive");
  SCRNN_REQUIRE(d.t_end - d.t_start >= t_bin * (1.0 - 1e-12), std::invalid_argument,
                "recording shorter than one bin");
  const Eigen::Index n_bins = detail::count_bins(d.t_start, d.t_end, t_bin);
  SpikeCountMatrix m;
  m.t_start = d.t_start;
  m.t_bin = t_bin;
  m.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(d.num_neurons()), n_bins);
  m.discarded.assign(d.num_neurons(), 0);
  for (std::size_t i = 0; i < d.num_neurons(); ++i) {
    for (double t : d.neurons[i]) {
      const double q = detail::bin_coordinate(t, d.t_start, t_bin);
      const auto j = static_cast<Eigen::Index>(std::floor(q));
      if (j < 0 || j >= n_bins) {
        ++m.discarded[i];
      } else {
        ++m.counts(static_cast<Eigen::Index>(i), j);
      }
    }
  }
  return m;
}

/// Number of top-ranked entries needed to hold at least a fraction p of the
/// row's mass. `order` receives the rank order (count descending, then bin
/// index ascending). Zero-mass rows select nothing.
inline std::size_t retained_count(std::span<const int> row, double p, std::vector<std::size_t>& order) {
  order.resize(row.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  long long total = 0;
  for (int v : row) total += v;
  if (total == 0) return 0;
  const double target = p * static_cast<double>(total);
  const double slack = 1e-12 * static_cast<double>(total);
  long long cum = 0;
  for (std::size_t m = 0; m < order.size(); ++m) {
    cum += row[order[m]];
    if (static_cast<double>(cum) + slack >= target) return m + 1;
  }
  return order.size();
}

/// Row-wise thresholding: per neuron, the minimal set of highest-count bins
/// holding a fraction p of that neuron's spikes becomes 1, the rest 0.
inline BinaryMatrix binarize_rows(const SpikeCountMatrix& a, double p) {
  SCRNN_REQUIRE(p > 0.0 && p <= 1.0, std::invalid_argument, "p must lie in (0, 1]");
  BinaryMatrix b;
  b.p = p;
  b.bits = BitMatrix::Zero(a.counts.rows(), a.counts.cols());
  std::vector<int> row(static_cast<std::size_t>(a.counts.cols()));
  std::vector<std::size_t> order;
  for (Eigen::Index i = 0; i < a.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.counts.cols(); ++j) row[static_cast<std::size_t>(j)] = a.counts(i, j);
    const std::size_t m = retained_count(row, p, order);
    for (std::size_t r = 0; r < m; ++r) b.bits(i, static_cast<Eigen::Index>(order[r])) = 1;
  }
  return b;
}

/// Per-bin ground truth. Head direction uses the circular mean of the
/// samples in the bin; position uses the arithmetic mean. Bins without any
/// sample are interpolated at the bin center (shortest arc for angles,
/// linearly for positions) from the nearest samples on either side.
inline LabelSeries bin_labels(const SpikeDataset& d, double t_bin) {
  SCRNN_REQUIRE(!d.label_times.empty(), ValidationError, "label stream is empty");
  SCRNN_REQUIRE(t_bin > 0.0, std::invalid_argument, "t_bin must be positive");
  const Eigen::Index n_bins = detail::count_bins(d.t_start, d.t_end, t_bin);
  const bool hd = d.kind == LabelKind::kHeadDirection;
  LabelSeries out;
  out.kind = d.kind;
  out.values = Eigen::MatrixXd::Zero(n_bins, hd ? 1 : 2);

  std::vector<double> sum_a(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> sum_b(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<int> n(static_cast<std::size_t>(n_bins), 0);
  for (std::size_t s = 0; s < d.label_times.size(); ++s) {
    const auto j = static_cast<Eigen::Index>(
        std::floor(detail::bin_coordinate(d.label_times[s], d.t_start, t_bin)));
    if (j < 0 || j >= n_bins) continue;
    const auto& v = d.label_values[s];
    const auto u = static_cast<std::size_t>(j);
    if (hd) {
      sum_a[u] += std::cos(v[0] / kDegPerRad);
      sum_b[u] += std::sin(v[0] / kDegPerRad);
    } else {
      sum_a[u] += v[0];
      sum_b[u] += v[1];
    }
    ++n[u];
  }

  for (Eigen::Index j = 0; j < n_bins; ++j) {
    const auto u = static_cast<std::size_t>(j);
    if (n[u] > 0) {
      if (hd) {
        out.values(j, 0) = angle_of(sum_a[u], sum_b[u]);
      } else {
        out.values(j, 0) = sum_a[u] / n[u];
        out.values(j, 1) = sum_b[u] / n[u];
      }
      continue;
    }
    const double center = d.t_start + (static_cast<double>(j) + 0.5) * t_bin;
    auto hi = std::upper_bound(d.label_times.begin(), d.label_times.end(), center);
    const auto ih = static_cast<std::size_t>(hi - d.label_times.begin());
    std::size_t i0 = ih == 0 ? 0 : ih - 1;
    std::size_t i1 = ih == d.label_times.size() ? d.label_times.size() - 1 : ih;
    double w = 0.0;
    if (i0 != i1) w = (center - d.label_times[i0]) / (d.label_times[i1] - d.label_times[i0]);
    const auto& a = d.label_values[i0];
    const auto& b = d.label_values[i1];
    if (hd) {
      double delta = std::fmod(b[0] - a[0], 360.0);
      if (delta > 180.0) delta -= 360.0;
      if (delta < -180.0) delta += 360.0;
      out.values(j, 0) = wrap_degrees(a[0] + w * delta);
    } else {
      out.values(j, 0) = a[0] + w * (b[0] - a[0]);
      out.values(j, 1) = a[1] + w * (b[1] - a[1]);
    }
  }
  return out;
}

}  // namespace scrnn
