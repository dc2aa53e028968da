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

// Functional simplicial complexes built from co-firing, with their
// incidence matrices and Hodge Laplacians.
//
// Orientation convention: a simplex is stored with ascending vertices, and
// its j-th face (vertex j deleted) enters the boundary with sign (-1)^j.

#pragma once

#include <Eigen/Dense>
#include "json.hpp"

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "scrnn/error.hpp"
#include "scrnn/sparse.hpp"
#include "scrnn/spikes.hpp"

namespace scrnn {

struct Simplex {
  std::vector<int> vertices;  // strictly ascending

  int dim() const { return static_cast<int>(vertices.size()) - 1; }
  auto operator<=>(const Simplex&) const = default;
  bool operator==(const Simplex&) const = default;
};

/// Calls f(subset) for every size-r subset of `items`, in lexicographic order
/// of positions. `items` ascending gives ascending subsets.
template <typename F>
void for_each_combination(std::span<const int> items, std::size_t r, F&& f) {
  const std::size_t n = items.size();
  if (r > n) return;
  std::vector<std::size_t> idx(r);
  for (std::size_t i = 0; i < r; ++i) idx[i] = i;
  std::vector<int> subset(r);
  while (true) {
    for (std::size_t i = 0; i < r; ++i) subset[i] = items[idx[i]];
    f(std::span<const int>(subset));
    if (r == 0) return;
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct HodgeLaplacian {
  IntSparse lower;  // B_k^T B_k
  IntSparse upper;  // B_{k+1} B_{k+1}^T
  IntSparse total;
};

/// Closed, oriented simplicial complex of dimension at most `max_dim`.
/// Simplex lists are sorted lexicographically per dimension and the
/// structure is immutable once built.
class SimplicialComplex {
 public:
  SimplicialComplex() = default;

  /// Builds from arbitrary generating simplices: each is closed under faces,
  /// duplicates are merged and all `n_vertices` vertices are included.
  SimplicialComplex(int n_vertices, int max_dim, const std::vector<Simplex>& generators)
      : n_vertices_(n_vertices), max_dim_(max_dim) {
    SCRNN_REQUIRE(max_dim >= 1, std::invalid_argument, "maximum dimension must be >= 1");
    std::vector<std::set<std::vector<int>>> levels(static_cast<std::size_t>(max_dim) + 1);
    for (int v = 0; v < n_vertices; ++v) levels[0].insert({v});
    for (const auto& s : generators) {
      SCRNN_REQUIRE(s.dim() >= 0 && s.dim() <= max_dim, std::invalid_argument,
                    "generator dimension outside [0, max_dim]");
      SCRNN_REQUIRE(std::is_sorted(s.vertices.begin(), s.vertices.end()) &&
                        std::adjacent_find(s.vertices.begin(), s.vertices.end()) == s.vertices.end(),
                    std::invalid_argument, "simplex vertices must be strictly ascending");
      SCRNN_REQUIRE(s.vertices.front() >= 0 && s.vertices.back() < n_vertices,
                    std::invalid_argument, "simplex vertex out of range");
      levels[static_cast<std::size_t>(s.dim())].insert(s.vertices);
    }
    for (int k = max_dim; k >= 1; --k) {
      for (const auto& v : levels[static_cast<std::size_t>(k)]) {
        for (std::size_t drop = 0; drop < v.size(); ++drop) {
          std::vector<int> face;
          face.reserve(v.size() - 1);
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (i != drop) face.push_back(v[i]);
          }
          levels[static_cast<std::size_t>(k - 1)].insert(std::move(face));
        }
      }
    }
    simplices_.resize(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) {
      simplices_[k].reserve(levels[k].size());
      for (const auto& v : levels[k]) simplices_[k].push_back(Simplex{v});
    }
    build_operators();
  }

  int max_dim() const { return max_dim_; }
  int num_vertices() const { return n_vertices_; }

  std::size_t count(int k) const {
    return k >= 0 && k <= max_dim_ ? simplices_[static_cast<std::size_t>(k)].size() : 0;
  }
  std::size_t total_count() const {
    std::size_t n = 0;
    for (const auto& s : simplices_) n += s.size();
    return n;
  }

  /// Highest dimension with at least one simplex.
  int top_dim() const {
    int k = max_dim_;
    while (k > 0 && simplices_[static_cast<std::size_t>(k)].empty()) --k;
    return k;
  }

  const std::vector<Simplex>& simplices(int k) const {
    check_dim(k, 0);
    return simplices_[static_cast<std::size_t>(k)];
  }

  std::optional<std::size_t> index_of(std::span<const int> vertices) const {
    const int k = static_cast<int>(vertices.size()) - 1;
    if (k < 0 || k > max_dim_) return std::nullopt;
    const auto& list = simplices_[static_cast<std::size_t>(k)];
    auto it = std::lower_bound(list.begin(), list.end(), vertices, [](const Simplex& s, std::span<const int> v) {
      return std::lexicographical_compare(s.vertices.begin(), s.vertices.end(), v.begin(), v.end());
    });
    if (it == list.end() || !std::equal(it->vertices.begin(), it->vertices.end(), vertices.begin(), vertices.end())) {
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - list.begin());
  }

  /// B_k, shape N_{k-1} x N_k, for 1 <= k <= max_dim; B_0 is the
  /// N_0 x N_0 zero matrix.
  const IntSparse& boundary(int k) const {
    check_dim(k, 0);
    if (k == 0) return zero_boundary_;
    return boundaries_[static_cast<std::size_t>(k) - 1];
  }

  const HodgeLaplacian& laplacian(int k) const {
    check_dim(k, 0);
    return laplacians_[static_cast<std::size_t>(k)];
  }

  bool operator==(const SimplicialComplex& o) const {
    return n_vertices_ == o.n_vertices_ && max_dim_ == o.max_dim_ && simplices_ == o.simplices_;
  }

 private:
  void check_dim(int k, int lo) const {
    if (k < lo || k > max_dim_) {
      throw std::out_of_range("dimension " + std::to_string(k) + " outside [" +
                              std::to_string(lo) + ", " + std::to_string(max_dim_) + "]");
    }
  }

  void build_operators() {
    zero_boundary_ = IntSparse::zero(count(0), count(0));
    boundaries_.clear();
    for (int k = 1; k <= max_dim_; ++k) {
      const auto& cols = simplices_[static_cast<std::size_t>(k)];
      std::vector<Triplet<std::int64_t>> t;
      t.reserve(cols.size() * static_cast<std::size_t>(k + 1));
      std::vector<int> face(static_cast<std::size_t>(k));
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto& v = cols[j].vertices;
        for (std::size_t drop = 0; drop < v.size(); ++drop) {
          std::size_t w = 0;
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (i != drop) face[w++] = v[i];
          }
          const auto row = index_of(face);
          t.push_back({*row, j, drop % 2 == 0 ? 1 : -1});
        }
      }
      boundaries_.push_back(IntSparse::from_triplets(count(k - 1), count(k), std::move(t)));
    }
    laplacians_.clear();
    for (int k = 0; k <= max_dim_; ++k) {
      HodgeLaplacian lap;
      const std::size_t n = count(k);
      if (k == 0) {
        lap.lower = IntSparse::zero(n, n);
      } else {
        const auto& b = boundary(k);
        lap.lower = b.transpose() * b;
      }
      if (k == max_dim_) {
        lap.upper = IntSparse::zero(n, n);
      } else {
        const auto& b = boundary(k + 1);
        lap.upper = b * b.transpose();
      }
      lap.total = lap.lower + lap.upper;
      laplacians_.push_back(std::move(lap));
    }
  }

  int n_vertices_ = 0;
  int max_dim_ = 1;
  std::vector<std::vector<Simplex>> simplices_;
  IntSparse zero_boundary_;
  std::vector<IntSparse> boundaries_;
  std::vector<HodgeLaplacian> laplacians_;
};

/// Half-open range of bins [begin, end).
struct ColumnRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
};

/// Functional complex over the columns in `range`: every column's active
/// neuron set spans one simplex (or, when larger than max_dim + 1 neurons,
/// all its max_dim-dimensional faces). All neurons are vertices.
inline SimplicialComplex build_complex(const BinaryMatrix& b, int max_dim, ColumnRange range) {
  SCRNN_REQUIRE(max_dim >= 1, std::invalid_argument, "maximum dimension must be >= 1");
  SCRNN_REQUIRE(range.begin >= 0 && range.begin <= range.end && range.end <= b.num_bins(),
                std::out_of_range, "column range outside matrix");
  std::set<std::vector<int>> active_sets;
  for (Eigen::Index j = range.begin; j < range.end; ++j) {
    auto act = b.active(j);
    if (!act.empty()) active_sets.insert(std::move(act));
  }
  std::set<std::vector<int>> generators;
  for (const auto& act : active_sets) {
    if (static_cast<int>(act.size()) - 1 <= max_dim) {
      generators.insert(act);
    } else {
      for_each_combination(act, static_cast<std::size_t>(max_dim) + 1,
                           [&](std::span<const int> s) { generators.emplace(s.begin(), s.end()); });
    }
  }
  std::vector<Simplex> gens;
  gens.reserve(generators.size());
  for (const auto& g : generators) gens.push_back(Simplex{g});
  return SimplicialComplex(static_cast<int>(b.num_neurons()), max_dim, gens);
}

inline SimplicialComplex build_complex(const BinaryMatrix& b, int max_dim) {
  return build_complex(b, max_dim, {0, b.num_bins()});
}

inline const IntSparse& incidence_matrix(const SimplicialComplex& s, int k) { return s.boundary(k); }

inline const HodgeLaplacian& hodge_laplacian(const SimplicialComplex& s, int k) { return s.laplacian(k); }

/// Indices (per dimension, ascending) of stored simplices whose vertices are
/// all active in column j.
inline std::vector<std::vector<std::uint32_t>> active_simplices(const SimplicialComplex& s,
                                                                const BinaryMatrix& b, Eigen::Index j) {
  std::vector<std::vector<std::uint32_t>> out(static_cast<std::size_t>(s.max_dim()) + 1);
  const auto act = b.active(j);
  for (int k = 1; k <= s.max_dim(); ++k) {
    for_each_combination(act, static_cast<std::size_t>(k) + 1, [&](std::span<const int> sub) {
      if (auto idx = s.index_of(sub)) out[static_cast<std::size_t>(k)].push_back(static_cast<std::uint32_t>(*idx));
    });
  }
  return out;
}

/// Input cochains of bin j: x_0 holds the raw counts of columns
/// j..j+n_col-1 (N_0 x n_col); for k >= 1, x_k is the co-activity indicator
/// of each k-simplex in column j of the binary matrix.
inline std::vector<Eigen::MatrixXd> cochain_from_bin(const SimplicialComplex& s, const SpikeCountMatrix& a,
                                                     const BinaryMatrix& b, Eigen::Index j, int n_col) {
  SCRNN_REQUIRE(n_col >= 1, std::invalid_argument, "n_col must be >= 1");
  SCRNN_REQUIRE(j >= 0 && j + n_col <= a.num_bins(), std::out_of_range, "bin range exceeds matrix");
  SCRNN_REQUIRE(a.num_neurons() == s.num_vertices() && b.num_neurons() == s.num_vertices(),
                DimensionError, "neuron count differs from complex vertex count");
  std::vector<Eigen::MatrixXd> x(static_cast<std::size_t>(s.max_dim()) + 1);
  x[0] = a.counts.middleCols(j, n_col).cast<double>();
  const auto active = active_simplices(s, b, j);
  for (int k = 1; k <= s.max_dim(); ++k) {
    auto& xk = x[static_cast<std::size_t>(k)];
    xk = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.count(k)), 1);
    for (auto i : active[static_cast<std::size_t>(k)]) xk(i, 0) = 1.0;
  }
  return x;
}

namespace detail {

inline nlohmann::json sparse_to_json(const IntSparse& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& t : m.triplets()) entries.push_back({t.row, t.col, t.value});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

}  // namespace detail

/// Inspection dump: simplex lists per dimension plus incidence matrices and
/// Laplacian parts as (row, col, value) triples.
inline nlohmann::json complex_to_json(const SimplicialComplex& s, bool with_operators = true) {
  nlohmann::json j;
  j["n_vertices"] = s.num_vertices();
  j["max_dim"] = s.max_dim();
  nlohmann::json dims = nlohmann::json::array();
  for (int k = 0; k <= s.max_dim(); ++k) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& sx : s.simplices(k)) list.push_back(sx.vertices);
    dims.push_back(std::move(list));
  }
  j["simplices"] = std::move(dims);
  if (with_operators) {
    nlohmann::json inc = nlohmann::json::array();
    for (int k = 1; k <= s.max_dim(); ++k) {
      auto e = detail::sparse_to_json(s.boundary(k));
      e["k"] = k;
      inc.push_back(std::move(e));
    }
    j["incidence"] = std::move(inc);
    nlohmann::json laps = nlohmann::json::array();
    for (int k = 0; k <= s.max_dim(); ++k) {
      laps.push_back({{"k", k},
                      {"lower", detail::sparse_to_json(s.laplacian(k).lower)},
                      {"upper", detail::sparse_to_json(s.laplacian(k).upper)}});
    }
    j["laplacians"] = std::move(laps);
  }
  return j;
}

inline SimplicialComplex complex_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n_vertices").get<int>();
    const int k_max = j.at("max_dim").get<int>();
    std::vector<Simplex> gens;
    for (const auto& level : j.at("simplices")) {
      for (const auto& v : level) gens.push_back(Simplex{v.get<std::vector<int>>()});
    }
    return SimplicialComplex(n, k_max, gens);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed complex dump: ") + e.what());
  }
}

}  // namespace scrnn
