#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lvtopo/grid.hpp"

namespace lvtopo::powerflow {

struct InvalidLoad : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VoltageCollapse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Constant-power loads on leaf nodes, one shared power factor.
struct LoadAssignment {
  std::map<grid::NodeId, double> active_power_w;
  double power_factor = 1.0;
};

struct FlowSolution {
  std::map<grid::NodeId, std::complex<double>> node_voltage;
  // keyed (parent, child); current flowing parent -> child
  std::map<std::pair<grid::NodeId, grid::NodeId>, std::complex<double>> branch_current;
  int iterations = 0;
  bool converged = false;
  // max |V| change per iteration, for the CLI debug dump
  std::vector<double> iteration_trace;
};

// Backward-forward sweep. Backward: leaf injection conj(S/V) aggregated
// rootward by KCL; forward: V_child = V_parent - Z * I. Converged when the
// max nodal voltage-magnitude change drops below tol. A non-converged run
// is returned with converged = false, not thrown.
FlowSolution solve(const grid::GridTopology& topology, const LoadAssignment& loads,
                   double tol = 1e-8, int max_iter = 100);

// |P_root - sum(P_leaf) - sum(I^2 R)| in watts; conservation oracle.
double check_power_balance(const grid::GridTopology& topology,
                           const LoadAssignment& loads, const FlowSolution& solution);

}  // namespace lvtopo::powerflow
