#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "ising/errors.hpp"

namespace ising {

struct Edge {
  int id = -1;
  int u = -1;
  int v = -1;
  bool is_virtual = false;

  int other(int w) const { return w == u ? v : u; }
};

/// Undirected graph with stable edge ids. Normal graphs reject parallel
/// edges; multigraphs (split components, bonds) allow them. Self-loops are
/// never allowed.
class Graph {
 public:
  Graph() = default;
  Graph(int num_vertices, const std::vector<std::pair<int, int>>& edge_list);

  static Graph empty(int num_vertices, bool multigraph = false);

  int add_edge(int u, int v, bool is_virtual = false);

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  bool is_multigraph() const { return multi_; }

  const Edge& edge(int id) const { return edges_[id]; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Incident (edge id, neighbor) pairs in edge-insertion order.
  const std::vector<std::pair<int, int>>& adjacency(int v) const { return adj_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }

  bool has_edge(int u, int v) const;
  bool is_connected() const;

 private:
  int n_ = 0;
  bool multi_ = false;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
};

/// Combinatorial embedding: for every vertex, the cyclic order of incident
/// edge ids. No coordinates anywhere; faces are derived by tracing.
struct PlanarEmbedding {
  Graph graph;
  std::vector<std::vector<int>> rotation;
};

/// One face as the cyclic sequence of darts (tail vertex, edge id).
struct Face {
  std::vector<std::pair<int, int>> boundary;
  int size() const { return static_cast<int>(boundary.size()); }
};

struct BiconnectedComponent {
  Graph graph;                  // local indices
  std::vector<int> vertex_map;  // local vertex -> global vertex
  std::vector<int> edge_map;    // local edge -> global edge id
};

struct BiconnectedDecomposition {
  std::vector<BiconnectedComponent> components;
  std::vector<int> articulation_points;
  // Tree over components: (component a, component b, shared articulation vertex).
  std::vector<std::array<int, 3>> tree_edges;
};

BiconnectedDecomposition biconnected_decompose(const Graph& g);

/// Left-right planarity test with embedding extraction. Returns the rotation
/// system of a planar drawing, or nullopt for nonplanar input. Handles
/// disconnected graphs (each component embedded independently).
std::optional<PlanarEmbedding> planar_embed(const Graph& g);

/// Trace all faces of the embedding. Every dart lies on exactly one face;
/// for a connected graph, V - E + F = 2.
std::vector<Face> enumerate_faces(const PlanarEmbedding& emb);

/// Restrict an embedding to the induced subgraph on `vertices`. Vertex and
/// edge ids are relabeled; maps from new to old ids are returned.
struct InducedEmbedding {
  PlanarEmbedding emb;
  std::vector<int> vertex_map;  // new -> old
  std::vector<int> edge_map;    // new -> old
};
InducedEmbedding induced_embedding(const PlanarEmbedding& emb, const std::vector<int>& vertices);

}  // namespace ising
