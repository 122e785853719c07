#include "lvtopo/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lvtopo::powerflow {

using grid::NodeId;
using grid::NodeKind;

FlowSolution solve(const grid::GridTopology& topology, const LoadAssignment& loads,
                   double tol, int max_iter) {
  if (tol <= 0) throw std::invalid_argument("tol must be > 0");
  if (loads.power_factor <= 0 || loads.power_factor > 1)
    throw std::invalid_argument("power factor must be in (0, 1]");

  for (const auto& [id, p] : loads.active_power_w) {
    auto it = topology.nodes.find(id);
    if (it == topology.nodes.end() || it->second != NodeKind::Leaf) {
      std::ostringstream os;
      os << "load assigned to non-leaf node " << id;
      throw InvalidLoad(os.str());
    }
    if (p < 0) throw InvalidLoad("negative active power on node " + std::to_string(id));
  }

  const auto adj = grid::adjacency(topology);
  const double vnom = topology.nominal_voltage_v;
  // tan(phi) from the power factor; Q = P tan(phi)
  const double tan_phi =
      std::sqrt(std::max(0.0, 1.0 - loads.power_factor * loads.power_factor)) /
      loads.power_factor;

  FlowSolution sol;
  for (NodeId n : adj.order) sol.node_voltage[n] = {vnom, 0.0};  // flat start

  for (int iter = 1; iter <= max_iter; ++iter) {
    // backward sweep: aggregate injection currents toward the root
    std::map<NodeId, std::complex<double>> downstream;
    for (auto it = adj.order.rbegin(); it != adj.order.rend(); ++it) {
      NodeId n = *it;
      std::complex<double> current{0.0, 0.0};
      auto load = loads.active_power_w.find(n);
      if (load != loads.active_power_w.end() && load->second > 0) {
        std::complex<double> s{load->second, load->second * tan_phi};
        current += std::conj(s / sol.node_voltage[n]);
      }
      auto kids = adj.children.find(n);
      if (kids != adj.children.end())
        for (NodeId c : kids->second) current += downstream[c];
      downstream[n] = current;
      if (n != adj.root) sol.branch_current[{adj.parent.at(n), n}] = current;
    }

    // forward sweep: propagate voltage drops from the root
    double max_dv = 0.0;
    for (NodeId n : adj.order) {
      if (n == adj.root) continue;
      const grid::LineSegment& seg = *adj.incident.at(n);
      std::complex<double> z{seg.resistance_ohm, seg.reactance_ohm};
      std::complex<double> v =
          sol.node_voltage[seg.parent] - z * sol.branch_current[{seg.parent, n}];
      max_dv = std::max(max_dv, std::abs(std::abs(v) - std::abs(sol.node_voltage[n])));
      sol.node_voltage[n] = v;
      if (std::abs(v) < 0.5 * vnom) {
        std::ostringstream os;
        os << "|V| at node " << n << " fell below half nominal (" << std::abs(v)
           << " V)";
        throw VoltageCollapse(os.str());
      }
    }

    sol.iterations = iter;
    sol.iteration_trace.push_back(max_dv);
    if (max_dv < tol) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

double check_power_balance(const grid::GridTopology& topology,
                           const LoadAssignment& loads, const FlowSolution& solution) {
  const auto adj = grid::adjacency(topology);
  std::complex<double> root_current{0.0, 0.0};
  auto kids = adj.children.find(adj.root);
  if (kids != adj.children.end())
    for (NodeId c : kids->second)
      root_current += solution.branch_current.at({adj.root, c});
  double p_root =
      (solution.node_voltage.at(adj.root) * std::conj(root_current)).real();

  double p_load = 0.0;
  for (const auto& [id, p] : loads.active_power_w) p_load += p;

  double p_loss = 0.0;
  for (const auto& seg : topology.segments) {
    double i = std::abs(solution.branch_current.at({seg.parent, seg.child}));
    p_loss += i * i * seg.resistance_ohm;
  }
  return std::abs(p_root - p_load - p_loss);
}

}  // namespace lvtopo::powerflow
