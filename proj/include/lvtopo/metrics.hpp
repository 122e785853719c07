#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lvtopo/grid.hpp"

namespace lvtopo::metrics {

struct LeafSetMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RecoveryReport {
  double recovery_ratio = 0.0;
  std::size_t matched_clusters = 0;
  std::size_t total_true_edges = 0;
  std::vector<std::set<grid::NodeId>> missing;   // true clusters not recovered
  std::vector<std::set<grid::NodeId>> spurious;  // recovered clusters not in truth

  std::string to_string() const;
};

// Every edge is identified by the leaf-descendant set of its child
// endpoint; matching is on the multiset of those clusters, so chain nodes
// (which repeat their child's cluster) count per occurrence. Hidden node
// ids never enter the comparison. The ratio divides by the larger of the
// two edge counts, so it reaches 1 only on isomorphic trees; it equals
// matched / total_true_edges whenever the recovered tree is no larger.
RecoveryReport recovery_ratio(const grid::GridTopology& truth,
                              const grid::GridTopology& recovered);

// Rooted leaf-labeled tree isomorphism by canonical-form comparison.
// Oracle for the cluster metric; limited to trees of <= 12 nodes.
bool brute_force_equivalence(const grid::GridTopology& a, const grid::GridTopology& b);

}  // namespace lvtopo::metrics
