#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lvtopo/grid.hpp"
#include "lvtopo/metrics.hpp"
#include "lvtopo/recovery.hpp"
#include "lvtopo/signals.hpp"

namespace lvtopo::harness {

// Everything a run needs, serialized into every output for reproducibility.
struct RunConfig {
  std::string fixture = "sys11";
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  double theta = 0.2;
  double resistance_ohm = 9e-3;
  double power_factor = 1.0;
  double flow_tol = 1e-8;
  int flow_max_iter = 100;
  signals::ProfileOptions profile;

  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
};

struct BenchmarkRow {
  std::string fixture;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::optional<double> recovery_ratio;  // empty on a failed point
  std::size_t layers = 0;
  double elapsed_ms = 0.0;
  std::string error;
};

// generate + recover + score one grid point
BenchmarkRow run_point(const RunConfig& config);

// Full run for the CLI and acceptance suite; keeps the step log.
struct PointResult {
  recovery::RecoveredTopology recovered;
  metrics::RecoveryReport report;
};
PointResult run_point_detailed(const RunConfig& config);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows,
                          const RunConfig& base_config);

}  // namespace lvtopo::harness
