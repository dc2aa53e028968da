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

// Acceptance run: one PASS/FAIL line per criterion. With arguments, only the
// listed criteria run (10 implies 7 and 8).

#include <Eigen/Eigenvalues>

#include <bit>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "scrnn/scrnn.hpp"

using namespace scrnn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

void report(int n, const Outcome& o, int& failures) {
  std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

BinaryMatrix random_bits(std::mt19937_64& rng, int n, int nb) {
  std::uniform_real_distribution<double> density(0.05, 0.7);
  std::bernoulli_distribution on(density(rng));
  BinaryMatrix b;
  b.bits.resize(n, nb);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < nb; ++j) b.bits(i, j) = on(rng) ? 1 : 0;
  }
  return b;
}

Outcome boundary_algebra() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> n_dist(1, 12), nb_dist(1, 50);
  double min_eig = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = build_complex(random_bits(rng, n_dist(rng), nb_dist(rng)), 2);
    for (int k = 1; k < s.max_dim(); ++k) {
      if (!(incidence_matrix(s, k) * incidence_matrix(s, k + 1)).is_zero()) {
        return {false, "nonzero B_k B_{k+1} in trial " + std::to_string(trial)};
      }
    }
    for (int k = 0; k <= s.max_dim(); ++k) {
      const auto& l = hodge_laplacian(s, k).total;
      if (!l.is_symmetric()) return {false, "asymmetric L_" + std::to_string(k) + " in trial " + std::to_string(trial)};
      if (l.rows() == 0) continue;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l.to_dense(), Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
  }
  const double t = seconds_since(t0);
  std::ostringstream d;
  d << "100 complexes, min eigenvalue " << min_eig << ", " << t << " s";
  return {min_eig >= -1e-9 && t < 30.0, d.str()};
}

Outcome triangle_oracle() {
  const SimplicialComplex s(3, 2, {Simplex{{0, 1, 2}}});
  Eigen::MatrixXd l0(3, 3);
  l0 << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  const bool ok0 = hodge_laplacian(s, 0).total.to_dense() == l0;
  const bool ok1 = hodge_laplacian(s, 1).total.to_dense() == 3.0 * Eigen::MatrixXd::Identity(3, 3);
  return {ok0 && ok1, std::string("L_0 ") + (ok0 ? "exact" : "wrong") + ", L_1 = 3I " + (ok1 ? "exact" : "wrong")};
}

Outcome parameter_count() {
  int cases = 0;
  for (int f = 1; f <= 3; ++f) {
    for (int dg = 1; dg <= 2; ++dg) {
      for (int k = 1; k <= 3; ++k) {
        for (int l = 1; l <= 3; ++l) {
          // Enumerate the weights a stack actually holds.
          ScLayerStack stack(l, f, dg, k);
          long long held = 0;
          for (int layer = 0; layer < l; ++layer) {
            for (int dim = 0; dim <= k; ++dim) held += stack.weights(layer, dim).size();
          }
          const long long formula = static_cast<long long>(f) * (2 * (dg + 1) + (k - 1) * (2 * dg + 1)) * l;
          if (held != formula || stack.parameter_count() != formula) {
            std::ostringstream d;
            d << "(F,D,K,L)=(" << f << ',' << dg << ',' << k << ',' << l << "): held " << held << " vs " << formula;
            return {false, d.str()};
          }
          ++cases;
        }
      }
    }
  }
  ScLayerStack worked(2, 2, 1, 2);
  const bool ok = worked.parameter_count() == 28;
  return {ok, std::to_string(cases) + " cases exact, (2,1,2,2) -> " + std::to_string(worked.parameter_count())};
}

Outcome thresholding_oracle() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(1, 10), count(0, 9);
  int checked = 0;
  std::vector<std::size_t> order;
  for (double p : {0.3, 0.5, 0.8, 1.0}) {
    for (int r = 0; r < 1000; ++r) {
      std::vector<int> row(static_cast<std::size_t>(len(rng)));
      for (auto& v : row) v = count(rng);
      long long total = 0;
      for (int v : row) total += v;
      // Brute force over every subset for the smallest one reaching p * total.
      std::size_t best = total == 0 ? 0 : row.size();
      if (total > 0) {
        for (unsigned mask = 1; mask < (1u << row.size()); ++mask) {
          long long mass = 0;
          for (std::size_t i = 0; i < row.size(); ++i) {
            if (mask & (1u << i)) mass += row[i];
          }
          if (static_cast<double>(mass) >= p * static_cast<double>(total) - 1e-12 * static_cast<double>(total)) {
            best = std::min<std::size_t>(best, static_cast<std::size_t>(std::popcount(mask)));
          }
        }
      }
      const std::size_t m = retained_count(row, p, order);
      long long selected = 0;
      for (std::size_t i = 0; i < m; ++i) selected += row[order[i]];
      if (m != best || static_cast<double>(selected) < p * static_cast<double>(total) - 1e-9) {
        std::ostringstream d;
        d << "p=" << p << " row " << r << ": m=" << m << " vs brute force " << best;
        return {false, d.str()};
      }
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " rows match the brute-force minimum"};
}

Outcome gradient_fidelity() {
  HdSimConfig sim;
  sim.n_neurons = 3;
  sim.kappa = 0.5;
  sim.duration_s = 20.0;
  const auto data = prepare_data(simulate_hd(sim), 0.1, 1.0);
  const auto split = chronological_split(data.num_bins(), 0.25);
  TrainConfig cfg;
  cfg.sc_layers = 2;
  cfg.filters = 2;
  cfg.degree = 1;
  cfg.k_max = 2;
  cfg.seq_len = 3;
  cfg.nn_layers = 1;
  cfg.hidden_size = 3;
  auto m = build_model(cfg, data, split.train);
  const auto enc = TargetEncoder::fit(data, split.train);
  auto ends = window_ends(split.train, cfg.seq_len, 1);
  ends.resize(16);
  const auto g = check_gradients(*m, data, ends, enc.encode(data, ends), 1e-5, 1e-4, 1e-6);
  std::ostringstream d;
  d << g.n_params << " parameters on a " << m->complex()->count(0) << '/' << m->complex()->count(1) << '/'
    << m->complex()->count(2) << " complex, " << g.n_failed << " outside tolerance, max rel error " << g.max_rel_error;
  return {g.n_params <= 200 && m->complex()->count(2) == 1 && g.n_failed == 0, d.str()};
}

Outcome metric_fixtures() {
  const double r = rescale(310.0 - 20.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 360.0);
  std::vector<double> dec(100000), truth(100000);
  for (std::size_t i = 0; i < dec.size(); ++i) dec[i] = u(rng), truth[i] = u(rng);
  const double chance = aae(dec, truth);
  const std::vector<Point2> a{{3.0, 4.0}}, b{{0.0, 0.0}};
  const double e = aed(a, b);
  std::ostringstream d;
  d << "rescale " << r << " deg, uniform AAE " << chance << " deg, AED " << e << " cm";
  return {r == 70.0 && std::abs(chance - 90.0) <= 5.0 && e == 5.0, d.str()};
}

struct DecodingRun {
  double score = 0.0;
  double seconds = 0.0;
  std::string summary;
};

DecodingRun decode(const SpikeDataset& d, const TrainConfig& cfg) {
  const auto t0 = Clock::now();
  const auto x = run_experiment(d, cfg);
  return {x.score(), seconds_since(t0), x.test_report.summary_json().dump()};
}

// Decoder settings live in configs/ so the CLI runs the same models.
TrainConfig load_config(const std::string& name) {
  TrainConfig c;
  c.apply(read_key_values(std::string(SCRNN_CONFIG_DIR) + "/" + name));
  c.validate();
  return c;
}

struct HdResult {
  DecodingRun scrnn, ffnn;
};

HdResult run_hd() {
  const auto d = simulate_hd(HdSimConfig{});
  return {decode(d, load_config("hd_scrnn.conf")), decode(d, load_config("hd_ffnn.conf"))};
}

DecodingRun run_grid() { return decode(simulate_grid(GridSimConfig{}), load_config("grid_scrnn.conf")); }

Outcome hd_ordering(const HdResult& r) {
  const double total = r.scrnn.seconds + r.ffnn.seconds;
  std::ostringstream d;
  d << "SCRNN AAE " << r.scrnn.score << " deg, FFNN AAE " << r.ffnn.score << " deg, " << total << " s";
  const bool ok = r.scrnn.score < 20.0 && r.scrnn.score < r.ffnn.score && r.ffnn.score < 90.0 && total < 900.0;
  return {ok, d.str()};
}

Outcome grid_sanity(const DecodingRun& r) {
  std::ostringstream d;
  d << "SCRNN AED " << r.score << " cm (target < 15), " << r.seconds << " s";
  return {r.score < 15.0 && r.seconds < 1200.0, d.str()};
}

Outcome gnn_equivalence() {
  // Same seed and config; only the model kind differs.
  HdSimConfig sim;
  sim.n_neurons = 10;
  sim.duration_s = 60.0;
  const auto data = prepare_data(simulate_hd(sim), 0.1, 0.3);
  const auto split = chronological_split(data.num_bins(), 0.25);
  TrainConfig cfg;
  cfg.k_max = 1;
  cfg.hidden_size = 16;
  cfg.sc_layers = 2;
  cfg.filters = 3;
  auto scrnn = build_model(cfg, data, split.train);
  auto gnn = build_baseline("gnn", cfg, data, split.train);
  const auto ends = window_ends({0, data.num_bins()}, cfg.seq_len, cfg.n_col);
  const Eigen::MatrixXd a = scrnn->predict(data, ends), b = gnn->predict(data, ends);
  const bool same = a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
  std::ostringstream d;
  d << ends.size() << " windows, predictions " << (same ? "bitwise identical" : "differ") << ", complex dims "
    << scrnn->complex()->max_dim() << '/' << gnn->complex()->max_dim();
  return {same && gnn->complex()->max_dim() == 1, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  auto want = [&](int n) { return wanted.empty() || wanted.count(n) > 0; };
  int failures = 0;
  try {
    if (want(1)) report(1, boundary_algebra(), failures);
    if (want(2)) report(2, triangle_oracle(), failures);
    if (want(3)) report(3, parameter_count(), failures);
    if (want(4)) report(4, thresholding_oracle(), failures);
    if (want(5)) report(5, gradient_fidelity(), failures);
    if (want(6)) report(6, metric_fixtures(), failures);
    std::optional<HdResult> hd;
    std::optional<DecodingRun> grid;
    if (want(7) || want(10)) {
      hd = run_hd();
      report(7, hd_ordering(*hd), failures);
    }
    if (want(8) || want(10)) {
      grid = run_grid();
      report(8, grid_sanity(*grid), failures);
    }
    if (want(9)) report(9, gnn_equivalence(), failures);
    if (want(10)) {
      const auto hd2 = run_hd();
      const auto grid2 = run_grid();
      const bool same = hd2.scrnn.summary == hd->scrnn.summary && hd2.ffnn.summary == hd->ffnn.summary &&
                        grid2.summary == grid->summary;
      report(10, {same, "repeat summaries " + std::string(same ? "identical" : "differ") + ": " + hd2.scrnn.summary +
                            " " + grid2.summary},
             failures);
    }
  } catch (const std::exception& e) {
    std::cout << "error: " << e.what() << std::endl;
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
