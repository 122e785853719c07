#pragma once

#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lvtopo/grid.hpp"
#include "lvtopo/signals.hpp"
#include "lvtopo/stats.hpp"

namespace lvtopo::recovery {

struct EmptyFrontier : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingletonFrontier : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LayerLimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A node of the current reconstruction frontier. Series are raw physical
// increments; scaling happens per layer, only for the distance step.
struct FrontierNode {
  int id = 0;
  std::vector<double> dv;
  std::vector<double> di;
  std::set<grid::NodeId> leaf_set;
  int depth = 0;
};

struct Merge {
  std::vector<int> children;  // frontier ids, ascending
  std::set<grid::NodeId> leaf_set;
  double distance = 0.0;  // min pairwise distance inside the merge
};

struct ChainPromotion {
  int child = 0;
  std::set<grid::NodeId> leaf_set;
};

struct GroupingStep {
  int layer = 0;
  std::vector<Merge> merges;
  std::vector<ChainPromotion> chain_promotions;
};

struct RecoveredTopology {
  grid::GridTopology tree;
  std::vector<GroupingStep> steps;
  double max_ridge_used = 0.0;
};

struct RecoverOptions {
  double ridge_lambda = 0.0;
  // called once per layer before grouping, for the matrix dump
  std::function<void(int layer, const stats::CorrelationMatrix&,
                     const stats::PrecisionMatrix&, const stats::DistanceMatrix&)>
      layer_observer;
};

// One grouping pass over the frontier:
//   (a) connected components of the graph with edges D_ij <= theta become
//       merges (size >= 2);
//   (b) with no such component and more than two frontier nodes, the single
//       minimum-distance pair merges;
//   (c) a frontier of exactly two always merges (the root step);
//   (d) everything else is chain-promoted.
// Ties on the minimum distance break on the smaller (id_i, id_j) pair.
GroupingStep group_layer(const std::vector<FrontierNode>& frontier,
                         const stats::DistanceMatrix& distances, double theta);

// parent dV = mean over children of (dV_c + R * dI_c); parent dI = sum of
// child dI (zero injection at the hidden node).
FrontierNode diffuse_parent(const std::vector<const FrontierNode*>& children,
                            double resistance, int parent_id);

// Full reconstruction loop: scale frontier dV, correlation, precision,
// distances, group, diffuse, until one node remains.
RecoveredTopology recover(const signals::MeasurementSet& measurements,
                          double resistance, double theta,
                          const RecoverOptions& options = {});

// Diffable per-layer listing of merged leaf sets and distances.
std::string format_step_log(const std::vector<GroupingStep>& steps);

}  // namespace lvtopo::recovery
