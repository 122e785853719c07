// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria are exercised end to end through the public headers.
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lvtopo/grid.hpp"
#include "lvtopo/harness.hpp"
#include "lvtopo/metrics.hpp"
#include "lvtopo/powerflow.hpp"
#include "lvtopo/recovery.hpp"
#include "lvtopo/signals.hpp"
#include "lvtopo/stats.hpp"

using namespace lvtopo;
using grid::GridTopology;
using grid::NodeId;
using grid::NodeKind;

namespace {

int failures = 0;

void report(int criterion, const char* label, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion, label,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

using LeafSets = std::vector<std::set<std::set<NodeId>>>;  // per layer

// expected merge memberships per layer for each fixture at its reference
// sample count
const std::map<std::string, LeafSets>& expected_memberships() {
  static const std::map<std::string, LeafSets> table = {
      {"sys11",
       {{{7, 8, 9}}, {{10, 11}}, {{7, 8, 9, 10, 11}}}},
      {"sys15",
       {{{11, 12}}, {{11, 12, 13}}, {{14, 15}}, {{11, 12, 13, 14, 15}}}},
      {"sys20",
       {{{11, 12, 13}, {14, 15, 16, 17}, {18, 19}},
        {{14, 15, 16, 17, 18, 19}},
        {{14, 15, 16, 17, 18, 19, 20}},
        {{11, 12, 13, 14, 15, 16, 17, 18, 19, 20}}}},
      {"sys25",
       {{{16, 17}, {18, 19, 20}, {22, 23, 24}},
        {{16, 17, 18, 19, 20}},
        {{22, 23, 24, 25}},
        {{16, 17, 18, 19, 20, 21}},
        {{16, 17, 18, 19, 20, 21, 22, 23, 24, 25}}}},
  };
  return table;
}

harness::RunConfig benchmark_config(const std::string& fixture, std::size_t samples,
                                    std::uint64_t seed) {
  harness::RunConfig config;
  config.fixture = fixture;
  config.samples = samples;
  config.seed = seed;
  config.profile.noise_sigma = 0.1;
  config.profile.ar_rho = 0.98;
  config.profile.scale_sigma = 0.15;
  return config;
}

bool step_log_matches(const std::vector<recovery::GroupingStep>& steps,
                      const LeafSets& expected) {
  if (steps.size() != expected.size()) return false;
  double previous_layer_min = 0.0;
  for (std::size_t layer = 0; layer < steps.size(); ++layer) {
    std::set<std::set<NodeId>> merged;
    double layer_min = std::numeric_limits<double>::infinity();
    for (const auto& merge : steps[layer].merges) {
      merged.insert(merge.leaf_set);
      if (!(merge.distance > 0.0)) return false;
      layer_min = std::min(layer_min, merge.distance);
    }
    if (merged != expected[layer]) return false;
    // distances only have to grow layer over layer, not match any reference
    if (!steps[layer].merges.empty()) {
      if (layer_min < previous_layer_min) return false;
      previous_layer_min = layer_min;
    }
  }
  return true;
}

struct SweepResult {
  int structural_passes = 0;  // seeds whose step log matches the reference
  double mean_ratio = 0.0;
};

SweepResult sweep(const std::string& fixture, std::size_t samples,
                  bool check_structure) {
  SweepResult result;
  const int seeds = 5;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    auto point = harness::run_point_detailed(benchmark_config(fixture, samples, seed));
    result.mean_ratio += point.report.recovery_ratio;
    if (check_structure &&
        step_log_matches(point.recovered.steps, expected_memberships().at(fixture)))
      ++result.structural_passes;
  }
  result.mean_ratio /= seeds;
  return result;
}

// --- criterion 5 helpers -------------------------------------------------

GridTopology from_parent_array(const std::vector<int>& parent) {
  // parent[i] is the parent of node i+2; node 1 is the root
  int n = static_cast<int>(parent.size()) + 1;
  GridTopology t;
  std::set<int> internal;
  for (int p : parent) internal.insert(p);
  t.nodes[1] = NodeKind::Root;
  for (int id = 2; id <= n; ++id)
    t.nodes[id] = internal.count(id) ? NodeKind::Hidden : NodeKind::Leaf;
  for (int id = 2; id <= n; ++id)
    t.segments.push_back({parent[static_cast<std::size_t>(id) - 2], id, 1.0, 0.0});
  return t;
}

void enumerate_trees(int max_nodes, std::vector<GridTopology>& out) {
  for (int n = 2; n <= max_nodes; ++n) {
    std::vector<int> parent(static_cast<std::size_t>(n) - 1, 1);
    while (true) {
      out.push_back(from_parent_array(parent));
      // odometer over parent[i] in {1..i+1}
      std::size_t i = 0;
      for (; i < parent.size(); ++i) {
        if (parent[i] < static_cast<int>(i) + 1) {
          ++parent[i];
          for (std::size_t j = 0; j < i; ++j) parent[j] = 1;
          break;
        }
      }
      if (i == parent.size()) break;
    }
  }
}

// --- criterion 6 helpers -------------------------------------------------

signals::MeasurementSet random_measurements(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> k_dist(2, 6);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::size_t k = k_dist(rng);
  std::size_t samples = 40;
  signals::MeasurementSet set;
  for (std::size_t j = 0; j < k; ++j) set.leaf_ids.push_back(static_cast<int>(5 + j));
  set.V = Matrix(samples + 1, k);
  set.I = Matrix(samples + 1, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i <= samples; ++i) {
      set.V(i, j) = 400.0 + dist(rng);
      set.I(i, j) = 10.0 + dist(rng);
    }
  set.dV = Matrix(samples, k);
  set.dI = Matrix(samples, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < samples; ++i) {
      set.dV(i, j) = set.V(i + 1, j) - set.V(i, j);
      set.dI(i, j) = set.I(i + 1, j) - set.I(i, j);
    }
  return set;
}

// --- criteria ------------------------------------------------------------

void criterion_1_and_2() {
  struct Point {
    const char* fixture;
    std::size_t samples;
  };
  const Point reference[] = {
      {"sys11", 1000}, {"sys15", 1000}, {"sys20", 15000}, {"sys25", 5000}};
  const Point reduced[] = {{"sys20", 1500}, {"sys25", 500}};

  bool structure_ok = true;
  bool full_ratio_ok = true;
  std::string detail1, detail2;
  for (const auto& point : reference) {
    auto result = sweep(point.fixture, point.samples, true);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s@%zu: %d/5 structural, mean ratio %.3f; ",
                  point.fixture, point.samples, result.structural_passes,
                  result.mean_ratio);
    detail1 += buf;
    if (result.structural_passes < 4) structure_ok = false;
    if (result.mean_ratio != 1.0) full_ratio_ok = false;
  }
  report(1, "reference step logs reproduced (>=4/5 seeds)", structure_ok, detail1);

  bool reduced_ok = true;
  for (const auto& point : reduced) {
    auto result = sweep(point.fixture, point.samples, false);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s@%zu: mean ratio %.3f; ", point.fixture,
                  point.samples, result.mean_ratio);
    detail2 += buf;
    if (!(result.mean_ratio < 1.0)) reduced_ok = false;
  }
  report(2, "mean ratio 1.0 at reference counts, below 1.0 at tenth counts",
         full_ratio_ok && reduced_ok, detail1 + detail2);
}

void criterion_3() {
  bool ok = true;
  std::string detail;

  GridTopology two_bus;
  two_bus.nodes[1] = NodeKind::Root;
  two_bus.nodes[2] = NodeKind::Leaf;
  two_bus.segments = {{1, 2, 9e-3, 0.0}};
  powerflow::LoadAssignment load;
  load.active_power_w[2] = 4000.0;
  auto sol = powerflow::solve(two_bus, load);
  double analytic = 0.5 * (400.0 + std::sqrt(400.0 * 400.0 - 4.0 * 9e-3 * 4000.0));
  double voltage_error = std::abs(std::abs(sol.node_voltage.at(2)) - analytic);
  if (voltage_error >= 1e-6) ok = false;

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> p_dist(200.0, 6000.0);
  double worst_relative = 0.0;
  int draws = 0;
  while (draws < 100) {
    for (const auto& name : grid::fixture_names()) {
      if (draws == 100) break;
      auto t = grid::build_fixture(name);
      powerflow::LoadAssignment loads;
      double total = 0.0;
      for (auto leaf : t.leaves()) {
        loads.active_power_w[leaf] = p_dist(rng);
        total += loads.active_power_w[leaf];
      }
      auto s = powerflow::solve(t, loads);
      double residual = powerflow::check_power_balance(t, loads, s);
      worst_relative = std::max(worst_relative, residual / total);
      ++draws;
    }
  }
  if (worst_relative >= 1e-4) ok = false;

  char buf[96];
  std::snprintf(buf, sizeof buf, "two-bus error %.2e V, worst balance %.2e rel",
                voltage_error, worst_relative);
  report(3, "power-flow analytic and balance oracles", ok, buf);
}

void criterion_4() {
  bool ok = true;

  stats::CorrelationMatrix two;
  two.sigma = Matrix(2, 2);
  two.sigma(0, 0) = two.sigma(1, 1) = 1.0;
  two.sigma(0, 1) = two.sigma(1, 0) = 0.5;
  auto theta2 = stats::precision(two, 0.0);
  if (std::abs(theta2.theta(0, 0) - 1.0 / 0.75) > 1e-12 ||
      std::abs(theta2.theta(0, 1) + 0.5 / 0.75) > 1e-12)
    ok = false;

  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> k_dist(2, 6);
  double worst_identity = 0.0;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    std::size_t k = k_dist(rng);
    Matrix x(30, k);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < 30; ++i) x(i, j) = dist(rng);
    auto sigma = stats::correlation(signals::standard_scale(x).scaled);
    auto theta = stats::precision(sigma, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < k; ++l)
          acc += theta.theta(i, l) *
                 (sigma.sigma(l, j) + (l == j ? theta.ridge : 0.0));
        worst_identity = std::max(worst_identity, std::abs(acc - (i == j ? 1.0 : 0.0)));
      }
    if (worst_identity >= 1e-6) ok = false;
    auto d = stats::distances(theta);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        if (d.finite(i, j) != d.finite(j, i)) ok = false;
        if (d.finite(i, j) && d.at(i, j) != d.at(j, i)) ok = false;
      }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "worst identity residual %.2e", worst_identity);
  report(4, "precision inverse and distance symmetry", ok, buf);
}

void criterion_5() {
  std::vector<GridTopology> trees;
  enumerate_trees(8, trees);
  std::map<std::set<NodeId>, std::vector<std::size_t>> by_leaf_set;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    auto leaves = trees[i].leaves();
    by_leaf_set[{leaves.begin(), leaves.end()}].push_back(i);
  }
  bool ok = true;
  std::size_t pairs = 0;
  for (const auto& [leaf_set, members] : by_leaf_set) {
    for (std::size_t a : members) {
      for (std::size_t b : members) {
        ++pairs;
        auto rep = metrics::recovery_ratio(trees[a], trees[b]);
        bool iso = metrics::brute_force_equivalence(trees[a], trees[b]);
        if ((rep.recovery_ratio == 1.0) != iso) ok = false;
        double floor = static_cast<double>(leaf_set.size()) /
                       static_cast<double>(std::max(trees[a].segments.size(),
                                                    trees[b].segments.size()));
        if (rep.recovery_ratio < floor - 1e-15 || rep.recovery_ratio > 1.0) ok = false;
      }
      if (!ok) break;
    }
    if (!ok) break;
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "%zu trees, %zu ordered pairs checked", trees.size(),
                pairs);
  report(5, "cluster metric agrees with isomorphism on all trees <= 8 nodes", ok, buf);
}

void criterion_6() {
  bool ok = true;
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> scale_dist(0.1, 50.0);

  // leaf preservation, determinism, scale-invariant grouping
  for (int trial = 0; trial < 200 && ok; ++trial) {
    auto set = random_measurements(rng);
    auto first = recovery::recover(set, 9e-3, 0.2);
    auto second = recovery::recover(set, 9e-3, 0.2);
    if (!(first.tree == second.tree)) ok = false;
    auto leaves = first.tree.leaves();
    if (std::set<int>(leaves.begin(), leaves.end()) !=
        std::set<int>(set.leaf_ids.begin(), set.leaf_ids.end()))
      ok = false;

    auto scaled_set = set;
    double c = scale_dist(rng);
    for (std::size_t j = 0; j < scaled_set.dV.cols(); ++j)
      for (std::size_t i = 0; i < scaled_set.dV.rows(); ++i) {
        scaled_set.dV(i, j) *= c;
        scaled_set.dI(i, j) *= c;
      }
    auto scaled = recovery::recover(scaled_set, 9e-3, 0.2);
    if (scaled.steps.size() != first.steps.size()) ok = false;
    for (std::size_t s = 0; ok && s < first.steps.size(); ++s) {
      if (scaled.steps[s].merges.size() != first.steps[s].merges.size()) ok = false;
      for (std::size_t m = 0; ok && m < first.steps[s].merges.size(); ++m)
        if (scaled.steps[s].merges[m].leaf_set != first.steps[s].merges[m].leaf_set)
          ok = false;
    }
  }

  // first-difference identity and CSV round-trip
  auto dir = std::filesystem::temp_directory_path() / "lvtopo_acceptance";
  std::filesystem::create_directories(dir);
  auto csv = (dir / "roundtrip.csv").string();
  for (int trial = 0; trial < 200 && ok; ++trial) {
    auto set = random_measurements(rng);
    for (std::size_t j = 0; j < set.dV.cols(); ++j)
      for (std::size_t i = 0; i < set.dV.rows(); ++i) {
        if (set.dV(i, j) != set.V(i + 1, j) - set.V(i, j)) ok = false;
        if (set.dI(i, j) != set.I(i + 1, j) - set.I(i, j)) ok = false;
      }
    signals::save_measurements(set, csv);
    auto loaded = signals::load_measurements(csv);
    if (!(loaded.V == set.V && loaded.I == set.I && loaded.dV == set.dV &&
          loaded.dI == set.dI && loaded.leaf_ids == set.leaf_ids))
      ok = false;
  }
  std::filesystem::remove_all(dir);

  report(6, "randomized property suite (200 cases per property)", ok, "");
}

void criterion_7() {
  bool ok = true;

  recovery::FrontierNode a, b;
  a.id = 1;
  a.dv = {0.1};
  a.di = {2.0};
  a.leaf_set = {1};
  b.id = 2;
  b.dv = {0.064};
  b.di = {6.0};
  b.leaf_set = {2};
  auto parent = recovery::diffuse_parent({&a, &b}, 9e-3, 3);
  double expected = 0.5 * ((0.1 + 9e-3 * 2.0) + (0.064 + 9e-3 * 6.0));
  if (std::abs(parent.dv[0] - expected) > 1e-15) ok = false;
  if (parent.di[0] != 8.0) ok = false;

  recovery::FrontierNode solo;
  solo.id = 4;
  solo.dv = {0.25, -0.5};
  solo.di = {0.0, 0.0};
  solo.leaf_set = {4};
  auto chained = recovery::diffuse_parent({&solo}, 9e-3, 5);
  if (chained.dv != solo.dv || chained.di != solo.di) ok = false;

  char buf[64];
  std::snprintf(buf, sizeof buf, "two-child parent dV %.6f V", parent.dv[0]);
  report(7, "diffusion arithmetic on hand-computed vectors", ok, buf);
}

}  // namespace

int main() {
  criterion_1_and_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
