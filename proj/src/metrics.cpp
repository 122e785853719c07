#include "lvtopo/metrics.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace lvtopo::metrics {

using grid::NodeId;

namespace {

using Cluster = std::set<NodeId>;

std::set<NodeId> collect_descendants(const grid::Adjacency& adj, NodeId node,
                                     std::map<NodeId, Cluster>& memo,
                                     const grid::GridTopology& t) {
  auto it = memo.find(node);
  if (it != memo.end()) return it->second;
  Cluster cluster;
  if (t.nodes.at(node) == grid::NodeKind::Leaf) cluster.insert(node);
  auto kids = adj.children.find(node);
  if (kids != adj.children.end())
    for (NodeId c : kids->second) {
      auto sub = collect_descendants(adj, c, memo, t);
      cluster.insert(sub.begin(), sub.end());
    }
  memo[node] = cluster;
  return cluster;
}

// multiset of leaf-descendant clusters, one per edge (child endpoint)
std::map<Cluster, std::size_t> edge_clusters(const grid::GridTopology& t) {
  auto adj = grid::adjacency(t);
  std::map<NodeId, Cluster> memo;
  collect_descendants(adj, adj.root, memo, t);
  std::map<Cluster, std::size_t> clusters;
  for (const auto& seg : t.segments) ++clusters[memo.at(seg.child)];
  return clusters;
}

std::string render_cluster(const Cluster& c) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (NodeId id : c) {
    if (!first) os << ", ";
    os << id;
    first = false;
  }
  os << "}";
  return os.str();
}

}  // namespace

std::string RecoveryReport::to_string() const {
  std::ostringstream os;
  os << "recovery_ratio " << recovery_ratio << "\n"
     << "matched_clusters " << matched_clusters << "\n"
     << "total_true_edges " << total_true_edges << "\n";
  for (const auto& c : missing) os << "missing " << render_cluster(c) << "\n";
  for (const auto& c : spurious) os << "spurious " << render_cluster(c) << "\n";
  return os.str();
}

RecoveryReport recovery_ratio(const grid::GridTopology& truth,
                              const grid::GridTopology& recovered) {
  auto tl = truth.leaves();
  auto rl = recovered.leaves();
  if (std::set<NodeId>(tl.begin(), tl.end()) != std::set<NodeId>(rl.begin(), rl.end()))
    throw LeafSetMismatch("truth and recovered trees have different leaf sets");

  auto true_clusters = edge_clusters(truth);
  auto rec_clusters = edge_clusters(recovered);

  RecoveryReport report;
  for (const auto& [cluster, count] : true_clusters) {
    report.total_true_edges += count;
    std::size_t rec =
        rec_clusters.count(cluster) ? rec_clusters.at(cluster) : std::size_t{0};
    report.matched_clusters += std::min(count, rec);
    if (rec < count) report.missing.push_back(cluster);
  }
  for (const auto& [cluster, count] : rec_clusters) {
    std::size_t truth_count =
        true_clusters.count(cluster) ? true_clusters.at(cluster) : std::size_t{0};
    if (count > truth_count) report.spurious.push_back(cluster);
  }
  // Denominator covers both trees: an over-split recovered tree (extra chain
  // edges repeating a cluster) must not score 1.0, so ratio = 1 holds exactly
  // when the two cluster multisets coincide, i.e. the trees are isomorphic.
  std::size_t recovered_edges = recovered.segments.size();
  report.recovery_ratio =
      static_cast<double>(report.matched_clusters) /
      static_cast<double>(std::max(report.total_true_edges, recovered_edges));
  return report;
}

namespace {

std::string canonical_form(const grid::Adjacency& adj, const grid::GridTopology& t,
                           NodeId node) {
  if (t.nodes.at(node) == grid::NodeKind::Leaf)
    return "L" + std::to_string(node);
  std::vector<std::string> parts;
  auto kids = adj.children.find(node);
  if (kids != adj.children.end())
    for (NodeId c : kids->second) parts.push_back(canonical_form(adj, t, c));
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (const auto& p : parts) out += p;
  out += ")";
  return out;
}

}  // namespace

bool brute_force_equivalence(const grid::GridTopology& a,
                             const grid::GridTopology& b) {
  if (a.nodes.size() > 12 || b.nodes.size() > 12)
    throw TooLarge("brute_force_equivalence is limited to 12 nodes");
  auto adj_a = grid::adjacency(a);
  auto adj_b = grid::adjacency(b);
  return canonical_form(adj_a, a, adj_a.root) == canonical_form(adj_b, b, adj_b.root);
}

}  // namespace lvtopo::metrics
