#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lvtopo::grid {

using NodeId = int;

enum class NodeKind { Root, Hidden, Leaf };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view s);

struct LineSegment {
  NodeId parent = 0;
  NodeId child = 0;
  double resistance_ohm = 0.0;
  double reactance_ohm = 0.0;

  bool operator==(const LineSegment&) const = default;
};

// Rooted radial network. Root and hidden nodes are supporting poles with
// zero injection; leaves are metered customers.
struct GridTopology {
  std::map<NodeId, NodeKind> nodes;
  std::vector<LineSegment> segments;
  double nominal_voltage_v = 400.0;

  std::vector<NodeId> leaves() const;
  NodeId root() const;  // throws std::logic_error if there is no unique root

  bool operator==(const GridTopology&) const = default;
};

// Parent/child lookup plus a root-first traversal order. Only valid for
// topologies that pass validate().
struct Adjacency {
  NodeId root = 0;
  std::map<NodeId, NodeId> parent;
  std::map<NodeId, std::vector<NodeId>> children;
  std::map<NodeId, const LineSegment*> incident;  // child id -> segment above it
  std::vector<NodeId> order;                      // root first, parents before children
};

Adjacency adjacency(const GridTopology& topology);

struct ValidationIssue {
  enum class Kind {
    CycleDetected,
    Disconnected,
    MultipleRoots,
    NoRoot,
    LeafWithChildren,
    HiddenWithoutChildren,
    MultipleParents,
    BadSegment,
  };
  Kind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  std::string to_string() const;
  bool has(ValidationIssue::Kind kind) const;
};

ValidationReport validate(const GridTopology& topology);

struct UnknownFixture : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Test systems: sys6, sys11, sys15, sys20, sys25.
GridTopology build_fixture(std::string_view name,
                           double segment_resistance_ohm = 9e-3,
                           double nominal_voltage_v = 400.0);

std::vector<std::string> fixture_names();

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// JSON topology file; decode(encode(t)) == t. Unknown top-level keys
// (e.g. a "meta" block written by the CLI) are ignored on decode.
std::string encode(const GridTopology& topology);
GridTopology decode(std::string_view text);

}  // namespace lvtopo::grid
