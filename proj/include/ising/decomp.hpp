#pragma once

#include <string>
#include <vector>

#include "ising/graph.hpp"

namespace ising {

enum class TriconKind { TriconnectedGraph, Cycle, MultipleBond };

/// One triconnected component. The local graph is a multigraph whose virtual
/// edges are flagged; `edge_map` resolves real edges back to the source graph
/// and `virtual_pair` links each virtual edge to its single peer copy.
struct TriconComponent {
  Graph graph;                  // local vertex ids
  std::vector<int> vertex_map;  // local vertex -> source vertex
  std::vector<int> edge_map;    // local edge -> source edge id, -1 for virtual edges
  std::vector<int> virtual_pair_id;  // local edge -> decomposition-wide pair id, -1 for real edges
  TriconKind kind;
};

/// Split a biconnected normal graph (|V| >= 3) into its unique triconnected
/// components (Hopcroft-Tarjan with the Gutwenger-Mutzel corrections,
/// followed by the cycle/bond mergings).
std::vector<TriconComponent> triconnected_decompose(const Graph& g);

struct TriconTreeEdge {
  int parent, child;            // node ids
  int parent_edge, child_edge;  // local virtual edge ids on each side
};

struct TriconTree {
  std::vector<TriconComponent> nodes;
  std::vector<TriconTreeEdge> edges;  // oriented parent -> child
  int root = -1;
  std::vector<int> parent;              // node -> parent node (-1 for root)
  std::vector<int> parent_edge_local;   // node -> its local virtual edge to the parent (-1 for root)
  std::vector<std::vector<int>> children;  // node -> tree edge indices

  /// Children-first order (every node appears after all of its descendants).
  std::vector<int> postorder() const;
};

enum class RootPolicy { PreferNonBond };

/// Assemble the component tree, rooting it at the lowest-id non-bond node.
TriconTree build_tricon_tree(std::vector<TriconComponent> components,
                             RootPolicy policy = RootPolicy::PreferNonBond);

enum class NodeClass { Planar, SmallNonplanar, MultipleBond };

/// Classify a component for the dynamic program. Nonplanar components larger
/// than `size_bound` vertices raise UnsupportedTopologyError.
NodeClass classify_component(const TriconComponent& c, int size_bound = 5);

/// DOT dump of the tree for debugging (node label = kind + size).
std::string tricon_tree_to_dot(const TriconTree& t);

}  // namespace ising
