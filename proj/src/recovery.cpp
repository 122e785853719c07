#include "lvtopo/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "lvtopo/kernels.hpp"

namespace lvtopo::recovery {

using grid::NodeId;

GroupingStep group_layer(const std::vector<FrontierNode>& frontier,
                         const stats::DistanceMatrix& distances, double theta) {
  const std::size_t n = frontier.size();
  if (n == 0) throw EmptyFrontier("group_layer called with an empty frontier");
  if (n == 1) throw SingletonFrontier("group_layer called with a single node");
  if (distances.size() != n)
    throw std::invalid_argument("distance matrix does not match frontier size");

  // components of the threshold graph
  std::vector<std::size_t> comp(n);
  std::iota(comp.begin(), comp.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    while (comp[a] != a) a = comp[a] = comp[comp[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (distances.within(i, j, theta)) comp[find(i)] = find(j);

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);

  std::vector<std::vector<std::size_t>> merges;
  for (auto& [rep, members] : groups)
    if (members.size() >= 2) merges.push_back(members);

  if (merges.empty()) {
    if (n == 2) {
      merges.push_back({0, 1});
    } else {
      // minimum-distance pair; ties break on the smaller frontier id pair,
      // which is the iteration order here (frontier is id-ascending)
      std::size_t bi = 0, bj = 1;
      bool have = false;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (!have || distances.closer(i, j, bi, bj)) {
            bi = i;
            bj = j;
            have = true;
          }
      merges.push_back({bi, bj});
    }
  }

  GroupingStep step;
  std::vector<bool> in_merge(n, false);
  for (const auto& members : merges) {
    Merge m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        if (distances.finite(members[a], members[b]))
          best = std::min(best, distances.at(members[a], members[b]));
    m.distance = best;
    for (std::size_t idx : members) {
      in_merge[idx] = true;
      m.children.push_back(frontier[idx].id);
      m.leaf_set.insert(frontier[idx].leaf_set.begin(), frontier[idx].leaf_set.end());
    }
    std::sort(m.children.begin(), m.children.end());
    step.merges.push_back(std::move(m));
  }
  std::sort(step.merges.begin(), step.merges.end(),
            [](const Merge& a, const Merge& b) { return a.children < b.children; });

  for (std::size_t i = 0; i < n; ++i)
    if (!in_merge[i])
      step.chain_promotions.push_back({frontier[i].id, frontier[i].leaf_set});
  return step;
}

FrontierNode diffuse_parent(const std::vector<const FrontierNode*>& children,
                            double resistance, int parent_id) {
  if (children.empty()) throw EmptyFrontier("diffuse_parent needs children");
  if (resistance <= 0) throw std::invalid_argument("resistance must be > 0");
  const std::size_t len = children.front()->dv.size();
  for (const FrontierNode* c : children)
    if (c->dv.size() != len || c->di.size() != len)
      throw LengthMismatch("child series lengths differ");

  FrontierNode parent;
  parent.id = parent_id;
  parent.dv.assign(len, 0.0);
  parent.di.assign(len, 0.0);
  int depth = 0;
  for (const FrontierNode* c : children) {
    kernels::add_axpy(parent.dv, c->dv, resistance, c->di);  // dV_c + R dI_c
    kernels::add(parent.di, c->di);                          // KCL
    parent.leaf_set.insert(c->leaf_set.begin(), c->leaf_set.end());
    depth = std::max(depth, c->depth);
  }
  kernels::scale_inplace(parent.dv, 1.0 / static_cast<double>(children.size()));
  parent.depth = depth + 1;
  return parent;
}

namespace {

// Deterministic numbering of the recovered tree: root = 1 and hidden nodes
// numbered in traversal order when they fit below the smallest leaf id,
// otherwise numbered above the largest leaf id.
grid::GridTopology assemble_tree(
    const std::map<int, std::vector<int>>& children_of, int root_internal,
    const std::map<int, std::set<NodeId>>& leaf_sets, double resistance,
    double nominal_voltage) {
  std::vector<int> order{root_internal};
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = children_of.find(order[i]);
    if (it == children_of.end()) continue;
    auto kids = it->second;
    // order children by their smallest descendant leaf
    std::sort(kids.begin(), kids.end(), [&](int a, int b) {
      return *leaf_sets.at(a).begin() < *leaf_sets.at(b).begin();
    });
    order.insert(order.end(), kids.begin(), kids.end());
  }

  std::vector<int> hidden;
  NodeId min_leaf = std::numeric_limits<NodeId>::max();
  NodeId max_leaf = 0;
  for (int internal : order) {
    if (children_of.count(internal)) {
      hidden.push_back(internal);
    } else {
      NodeId leaf = *leaf_sets.at(internal).begin();
      min_leaf = std::min(min_leaf, leaf);
      max_leaf = std::max(max_leaf, leaf);
    }
  }

  NodeId base = static_cast<NodeId>(hidden.size()) < min_leaf ? 1 : max_leaf + 1;
  std::map<int, NodeId> final_id;
  for (std::size_t i = 0; i < hidden.size(); ++i)
    final_id[hidden[i]] = base + static_cast<NodeId>(i);
  for (int internal : order)
    if (!children_of.count(internal))
      final_id[internal] = *leaf_sets.at(internal).begin();

  grid::GridTopology tree;
  tree.nominal_voltage_v = nominal_voltage;
  tree.nodes[final_id.at(root_internal)] = grid::NodeKind::Root;
  for (int internal : order) {
    if (internal != root_internal)
      tree.nodes[final_id.at(internal)] = children_of.count(internal)
                                              ? grid::NodeKind::Hidden
                                              : grid::NodeKind::Leaf;
    auto it = children_of.find(internal);
    if (it == children_of.end()) continue;
    for (int child : it->second)
      tree.segments.push_back(
          {final_id.at(internal), final_id.at(child), resistance, 0.0});
  }
  std::sort(tree.segments.begin(), tree.segments.end(),
            [](const grid::LineSegment& a, const grid::LineSegment& b) {
              return std::tie(a.parent, a.child) < std::tie(b.parent, b.child);
            });
  return tree;
}

}  // namespace

RecoveredTopology recover(const signals::MeasurementSet& measurements,
                          double resistance, double theta,
                          const RecoverOptions& options) {
  const std::size_t k = measurements.leaf_ids.size();
  if (k < 2) throw std::invalid_argument("recover needs at least 2 leaves");
  if (measurements.dV.rows() < 2)
    throw std::invalid_argument("recover needs at least 2 increments");

  std::vector<FrontierNode> frontier;
  int next_id = 0;
  for (std::size_t j = 0; j < k; ++j) {
    FrontierNode node;
    node.id = measurements.leaf_ids[j];
    auto dv = measurements.dV.col(j);
    auto di = measurements.dI.col(j);
    node.dv.assign(dv.begin(), dv.end());
    node.di.assign(di.begin(), di.end());
    node.leaf_set = {measurements.leaf_ids[j]};
    frontier.push_back(std::move(node));
    next_id = std::max(next_id, measurements.leaf_ids[j] + 1);
  }
  std::sort(frontier.begin(), frontier.end(),
            [](const FrontierNode& a, const FrontierNode& b) { return a.id < b.id; });

  RecoveredTopology result;
  std::map<int, std::vector<int>> children_of;
  std::map<int, std::set<NodeId>> leaf_sets;
  for (const auto& node : frontier) leaf_sets[node.id] = node.leaf_set;

  const int layer_limit = static_cast<int>(k) + 16;
  int layer = 0;
  while (frontier.size() > 1) {
    if (++layer > layer_limit)
      throw LayerLimitExceeded("recovery exceeded " + std::to_string(layer_limit) +
                               " layers");

    Matrix dv_matrix(frontier.front().dv.size(), frontier.size());
    for (std::size_t j = 0; j < frontier.size(); ++j)
      std::copy(frontier[j].dv.begin(), frontier[j].dv.end(),
                dv_matrix.col(j).begin());

    auto scaled = signals::standard_scale(dv_matrix);
    auto sigma = stats::correlation(scaled.scaled);
    auto theta_m = stats::precision(sigma, options.ridge_lambda);
    result.max_ridge_used = std::max(result.max_ridge_used, theta_m.ridge);
    auto dist = stats::distances(theta_m);
    if (options.layer_observer) options.layer_observer(layer, sigma, theta_m, dist);

    GroupingStep step = group_layer(frontier, dist, theta);
    step.layer = layer;

    std::map<int, std::size_t> index_of;
    for (std::size_t i = 0; i < frontier.size(); ++i) index_of[frontier[i].id] = i;

    std::vector<FrontierNode> next_frontier;
    for (const Merge& merge : step.merges) {
      std::vector<const FrontierNode*> kids;
      for (int id : merge.children) kids.push_back(&frontier[index_of.at(id)]);
      FrontierNode parent = diffuse_parent(kids, resistance, next_id++);
      children_of[parent.id] = merge.children;
      leaf_sets[parent.id] = parent.leaf_set;
      next_frontier.push_back(std::move(parent));
    }
    for (const ChainPromotion& promo : step.chain_promotions) {
      FrontierNode parent = diffuse_parent({&frontier[index_of.at(promo.child)]},
                                           resistance, next_id++);
      children_of[parent.id] = {promo.child};
      leaf_sets[parent.id] = parent.leaf_set;
      next_frontier.push_back(std::move(parent));
    }

    // id-ascending frontier keeps min-pair tie-breaking lexicographic
    std::sort(next_frontier.begin(), next_frontier.end(),
              [](const FrontierNode& a, const FrontierNode& b) {
                return a.id < b.id;
              });
    frontier = std::move(next_frontier);
    result.steps.push_back(std::move(step));
  }

  result.tree = assemble_tree(children_of, frontier.front().id, leaf_sets, resistance,
                              400.0);
  return result;
}

std::string format_step_log(const std::vector<GroupingStep>& steps) {
  std::ostringstream os;
  for (const auto& step : steps) {
    os << "step " << step.layer << ":\n";
    for (const auto& merge : step.merges) {
      os << "  merge {";
      bool first = true;
      for (NodeId leaf : merge.leaf_set) {
        if (!first) os << ", ";
        os << leaf;
        first = false;
      }
      os << "}";
      if (std::isfinite(merge.distance)) os << " distance " << merge.distance;
      os << "\n";
    }
    for (const auto& promo : step.chain_promotions) {
      os << "  chain {";
      bool first = true;
      for (NodeId leaf : promo.leaf_set) {
        if (!first) os << ", ";
        os << leaf;
        first = false;
      }
      os << "}\n";
    }
  }
  return os.str();
}

}  // namespace lvtopo::recovery
