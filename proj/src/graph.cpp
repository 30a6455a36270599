#include "ising/graph.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace ising {

// ════════════════════════════════════════════════════════════════════
//  Graph
// ════════════════════════════════════════════════════════════════════

Graph::Graph(int num_vertices, const std::vector<std::pair<int, int>>& edge_list) : n_(num_vertices) {
  if (num_vertices < 0) throw InvalidModelError("negative vertex count");
  adj_.resize(n_);
  std::unordered_set<std::int64_t> seen;
  seen.reserve(edge_list.size() * 2);
  for (const auto& [u, v] : edge_list) {
    if (u < 0 || u >= n_ || v < 0 || v >= n_)
      throw InvalidModelError("edge endpoint out of range: (" + std::to_string(u) + "," + std::to_string(v) + ")");
    if (u == v) throw InvalidModelError("self-loop at vertex " + std::to_string(u));
    const std::int64_t key = std::int64_t(std::min(u, v)) * n_ + std::max(u, v);
    if (!seen.insert(key).second)
      throw InvalidModelError("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    add_edge(u, v);
  }
}

Graph Graph::empty(int num_vertices, bool multigraph) {
  Graph g;
  g.n_ = num_vertices;
  g.multi_ = multigraph;
  g.adj_.resize(num_vertices);
  return g;
}

int Graph::add_edge(int u, int v, bool is_virtual) {
  assert(u >= 0 && u < n_ && v >= 0 && v < n_ && u != v);
  const int id = static_cast<int>(edges_.size());
  edges_.push_back(Edge{id, u, v, is_virtual});
  adj_[u].emplace_back(id, v);
  adj_[v].emplace_back(id, u);
  return id;
}

bool Graph::has_edge(int u, int v) const {
  const int a = degree(u) <= degree(v) ? u : v;
  const int b = (a == u) ? v : u;
  for (const auto& [e, w] : adj_[a])
    if (w == b) return true;
  return false;
}

bool Graph::is_connected() const {
  if (n_ == 0) return true;
  std::vector<char> vis(n_, 0);
  std::vector<int> stack{0};
  vis[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& [e, w] : adj_[v]) {
      if (!vis[w]) {
        vis[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n_;
}

// ════════════════════════════════════════════════════════════════════
//  Biconnected components (iterative lowpoint DFS with an edge stack)
// ════════════════════════════════════════════════════════════════════

BiconnectedDecomposition biconnected_decompose(const Graph& g) {
  const int n = g.num_vertices();
  if (!g.is_connected()) throw InvalidModelError("biconnected_decompose requires a connected graph");

  BiconnectedDecomposition out;
  if (n <= 1) return out;

  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<int> parent_edge(n, -1);
  std::vector<char> is_art(n, 0);
  std::vector<int> edge_stack;
  edge_stack.reserve(g.num_edges());

  // Which components each vertex belongs to (for tree assembly).
  std::vector<std::vector<int>> comps_of(n);

  auto pop_component = [&](int until_edge) {
    std::vector<int> comp_edges;
    while (true) {
      const int e = edge_stack.back();
      edge_stack.pop_back();
      comp_edges.push_back(e);
      if (e == until_edge) break;
    }
    std::sort(comp_edges.begin(), comp_edges.end());
    BiconnectedComponent c;
    std::vector<int> vmap;
    std::unordered_map<int, int> local_idx;
    local_idx.reserve(comp_edges.size() * 2);
    auto local = [&](int v) {
      auto it = local_idx.find(v);
      if (it != local_idx.end()) return it->second;
      const int idx = static_cast<int>(vmap.size());
      local_idx.emplace(v, idx);
      vmap.push_back(v);
      return idx;
    };
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(comp_edges.size());
    for (const int e : comp_edges) {
      const Edge& ed = g.edge(e);
      const int a = local(ed.u);
      pairs.emplace_back(a, local(ed.v));
    }
    Graph lg = Graph::empty(static_cast<int>(vmap.size()));
    for (const auto& [a, b] : pairs) lg.add_edge(a, b);
    c.graph = std::move(lg);
    c.vertex_map = std::move(vmap);
    c.edge_map = std::move(comp_edges);
    const int cid = static_cast<int>(out.components.size());
    for (const int v : c.vertex_map) comps_of[v].push_back(cid);
    out.components.push_back(std::move(c));
  };

  // Iterative DFS. Frame: (vertex, adjacency index).
  std::vector<std::pair<int, int>> frames;
  int timer = 0;
  disc[0] = low[0] = timer++;
  frames.emplace_back(0, 0);
  int root_children = 0;

  while (!frames.empty()) {
    auto& [v, idx] = frames.back();
    if (idx < g.degree(v)) {
      const auto [e, w] = g.adjacency(v)[idx];
      ++idx;
      if (e == parent_edge[v]) continue;
      if (disc[w] == -1) {
        parent_edge[w] = e;
        if (v == 0) ++root_children;
        disc[w] = low[w] = timer++;
        edge_stack.push_back(e);
        frames.emplace_back(w, 0);
      } else if (disc[w] < disc[v]) {
        edge_stack.push_back(e);
        low[v] = std::min(low[v], disc[w]);
      }
    } else {
      const int child = v;
      frames.pop_back();
      if (!frames.empty()) {
        const int u = frames.back().first;
        low[u] = std::min(low[u], low[child]);
        if (low[child] >= disc[u]) {
          if (u != 0 || root_children > 1) is_art[u] = 1;
          pop_component(parent_edge[child]);
        }
      }
    }
  }
  assert(edge_stack.empty());
  if (root_children > 1) is_art[0] = 1;

  for (int v = 0; v < n; ++v)
    if (is_art[v]) out.articulation_points.push_back(v);

  // Component tree: per articulation vertex, star from its first component.
  for (const int v : out.articulation_points) {
    const auto& cs = comps_of[v];
    for (std::size_t i = 1; i < cs.size(); ++i)
      out.tree_edges.push_back({cs[0], cs[i], v});
  }
  return out;
}

// ════════════════════════════════════════════════════════════════════
//  Left-right planarity test with embedding extraction
//
//  Follows Brandes' description of the LR algorithm (the same formulation
//  used by the networkx implementation): a first DFS orients the graph and
//  computes lowpoints and nesting depths, a second DFS maintains a stack of
//  conflict pairs of return-edge intervals, and a third DFS assembles the
//  rotation system from the computed edge sides.
// ════════════════════════════════════════════════════════════════════

namespace {

constexpr int kNone = -1;

struct LrInterval {
  int low = kNone;   // oriented edge ids
  int high = kNone;
  bool empty() const { return low == kNone && high == kNone; }
};

struct LrConflictPair {
  LrInterval left, right;
  void swap_sides() { std::swap(left, right); }
};

struct LrState {
  const Graph& g;
  int n, m;
  // Per input edge (at most one orientation is ever created).
  std::vector<int> tail, head;     // oriented endpoints, kNone if unoriented
  std::vector<int> lowpt, lowpt2, nesting;
  std::vector<int> ref;            // edge id or kNone
  std::vector<signed char> side;
  std::vector<int> lowpt_edge;     // edge id
  std::vector<int> stack_bottom;   // stack size snapshot per edge
  std::vector<int> height;         // per vertex, kNone = unvisited
  std::vector<int> parent_edge;    // per vertex, edge id or kNone
  std::vector<std::vector<int>> ordered_adj;  // oriented out-edges per vertex
  std::vector<LrConflictPair> S;
  std::vector<int> roots;

  explicit LrState(const Graph& graph)
      : g(graph),
        n(graph.num_vertices()),
        m(graph.num_edges()),
        tail(m, kNone),
        head(m, kNone),
        lowpt(m, 0),
        lowpt2(m, 0),
        nesting(m, 0),
        ref(m, kNone),
        side(m, 1),
        lowpt_edge(m, kNone),
        stack_bottom(m, 0),
        height(n, kNone),
        parent_edge(n, kNone),
        ordered_adj(n) {}

  bool lowest_eq(const LrConflictPair& p, int h) const {
    int lo;
    if (p.left.empty())
      lo = lowpt[p.right.low];
    else if (p.right.empty())
      lo = lowpt[p.left.low];
    else
      lo = std::min(lowpt[p.left.low], lowpt[p.right.low]);
    return lo == h;
  }

  bool conflicting(const LrInterval& i, int b) const { return !i.empty() && lowpt[i.high] > lowpt[b]; }

  void dfs_orientation(int root);
  bool dfs_testing(int root);
  bool add_constraints(int ei, int e);
  void remove_back_edges(int e);
  signed char resolve_sign(int e);
};

void LrState::dfs_orientation(int root) {
  std::vector<std::pair<int, int>> frames;  // (vertex, adjacency index)
  std::vector<char> resume(m, 0);
  frames.emplace_back(root, 0);
  while (!frames.empty()) {
    auto [v, idx0] = frames.back();
    frames.pop_back();
    const int e = parent_edge[v];
    int idx = idx0;
    bool descended = false;
    for (; idx < g.degree(v); ++idx) {
      const auto [eid, w] = g.adjacency(v)[idx];
      if (!resume[eid]) {
        if (tail[eid] != kNone) continue;  // already oriented from the other side
        tail[eid] = v;
        head[eid] = w;
        lowpt[eid] = height[v];
        lowpt2[eid] = height[v];
        if (height[w] == kNone) {  // tree edge
          parent_edge[w] = eid;
          height[w] = height[v] + 1;
          resume[eid] = 1;
          frames.emplace_back(v, idx);
          frames.emplace_back(w, 0);
          descended = true;
          break;
        }
        lowpt[eid] = height[w];  // back edge
      }
      // Post-processing for eid (runs after subtree return for tree edges).
      nesting[eid] = 2 * lowpt[eid];
      if (lowpt2[eid] < height[v]) ++nesting[eid];  // chordal adjustment
      if (e != kNone) {
        if (lowpt[eid] < lowpt[e]) {
          lowpt2[e] = std::min(lowpt[e], lowpt2[eid]);
          lowpt[e] = lowpt[eid];
        } else if (lowpt[eid] > lowpt[e]) {
          lowpt2[e] = std::min(lowpt2[e], lowpt[eid]);
        } else {
          lowpt2[e] = std::min(lowpt2[e], lowpt2[eid]);
        }
      }
    }
    (void)descended;
  }
}

bool LrState::add_constraints(int ei, int e) {
  LrConflictPair p;
  // Merge return edges of ei into p.right.
  while (true) {
    LrConflictPair q = S.back();
    S.pop_back();
    if (!q.left.empty()) q.swap_sides();
    if (!q.left.empty()) return false;
    if (lowpt[q.right.low] > lowpt[e]) {
      if (p.right.empty())
        p.right.high = q.right.high;
      else
        ref[p.right.low] = q.right.high;
      p.right.low = q.right.low;
    } else {
      ref[q.right.low] = lowpt_edge[e];
    }
    if (static_cast<int>(S.size()) == stack_bottom[ei]) break;
  }
  // Merge conflicting return edges of earlier siblings into p.left.
  while (!S.empty() && (conflicting(S.back().left, ei) || conflicting(S.back().right, ei))) {
    LrConflictPair q = S.back();
    S.pop_back();
    if (conflicting(q.right, ei)) q.swap_sides();
    if (conflicting(q.right, ei)) return false;
    ref[p.right.low] = q.right.high;
    if (q.right.low != kNone) p.right.low = q.right.low;
    if (p.left.empty())
      p.left.high = q.left.high;
    else
      ref[p.left.low] = q.left.high;
    p.left.low = q.left.low;
  }
  if (!(p.left.empty() && p.right.empty())) S.push_back(p);
  return true;
}

void LrState::remove_back_edges(int e) {
  const int u = tail[e];
  // Drop entire conflict pairs returning to u.
  while (!S.empty() && lowest_eq(S.back(), height[u])) {
    LrConflictPair p = S.back();
    S.pop_back();
    if (p.left.low != kNone) side[p.left.low] = -1;
  }
  if (!S.empty()) {  // trim one more conflict pair
    LrConflictPair p = S.back();
    S.pop_back();
    while (p.left.high != kNone && head[p.left.high] == u) p.left.high = ref[p.left.high];
    if (p.left.high == kNone && p.left.low != kNone) {
      ref[p.left.low] = p.right.low;
      side[p.left.low] = -1;
      p.left.low = kNone;
    }
    while (p.right.high != kNone && head[p.right.high] == u) p.right.high = ref[p.right.high];
    if (p.right.high == kNone && p.right.low != kNone) {
      ref[p.right.low] = p.left.low;
      side[p.right.low] = -1;
      p.right.low = kNone;
    }
    S.push_back(p);
  }
  // Side of e follows the side of a highest return edge.
  if (lowpt[e] < height[u]) {
    const int hl = S.back().left.high;
    const int hr = S.back().right.high;
    if (hl != kNone && (hr == kNone || lowpt[hl] > lowpt[hr]))
      ref[e] = hl;
    else
      ref[e] = hr;
  }
}

bool LrState::dfs_testing(int root) {
  std::vector<std::pair<int, int>> frames;
  std::vector<char> resume(m, 0);
  frames.emplace_back(root, 0);
  while (!frames.empty()) {
    auto [v, idx0] = frames.back();
    frames.pop_back();
    const int e = parent_edge[v];
    bool descended = false;
    int idx = idx0;
    const auto& adj = ordered_adj[v];
    for (; idx < static_cast<int>(adj.size()); ++idx) {
      const int ei = adj[idx];
      if (!resume[ei]) {
        stack_bottom[ei] = static_cast<int>(S.size());
        if (ei == parent_edge[head[ei]]) {  // tree edge
          resume[ei] = 1;
          frames.emplace_back(v, idx);
          frames.emplace_back(head[ei], 0);
          descended = true;
          break;
        }
        lowpt_edge[ei] = ei;  // back edge
        S.push_back(LrConflictPair{LrInterval{}, LrInterval{ei, ei}});
      }
      if (lowpt[ei] < height[v]) {  // ei has a return edge
        if (idx == 0) {
          lowpt_edge[e] = lowpt_edge[ei];
        } else if (!add_constraints(ei, e)) {
          return false;
        }
      }
    }
    if (!descended && e != kNone) remove_back_edges(e);
  }
  return true;
}

signed char LrState::resolve_sign(int e) {
  // Follow the ref chain, then fold sides back.
  std::vector<int> chain;
  int cur = e;
  while (cur != kNone && ref[cur] != kNone) {
    chain.push_back(cur);
    cur = ref[cur];
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    side[*it] = static_cast<signed char>(side[*it] * side[ref[*it]]);
    ref[*it] = kNone;
  }
  return side[e];
}

// Circular rotation lists over darts. Dart of edge e at vertex x is
// 2*e + (x == edge.u ? 0 : 1).
struct RotationBuilder {
  const Graph& g;
  std::vector<int> nxt, prv, first;
  explicit RotationBuilder(const Graph& graph)
      : g(graph), nxt(2 * graph.num_edges(), kNone), prv(2 * graph.num_edges(), kNone), first(graph.num_vertices(), kNone) {}

  int dart_at(int e, int v) const { return 2 * e + (g.edge(e).u == v ? 0 : 1); }

  void append(int v, int d) {  // push at end of v's ring
    if (first[v] == kNone) {
      first[v] = d;
      nxt[d] = prv[d] = d;
      return;
    }
    const int f = first[v], last = prv[f];
    nxt[last] = d;
    prv[d] = last;
    nxt[d] = f;
    prv[f] = d;
  }
  void insert_after(int ref_d, int d) {
    const int b = nxt[ref_d];
    nxt[ref_d] = d;
    prv[d] = ref_d;
    nxt[d] = b;
    prv[b] = d;
  }
  void insert_before(int v, int ref_d, int d) {
    insert_after(prv[ref_d], d);
    if (first[v] == ref_d) first[v] = d;
  }
  void insert_first(int v, int d) {
    if (first[v] == kNone) {
      append(v, d);
      return;
    }
    insert_before(v, first[v], d);
  }

  std::vector<std::vector<int>> rotations() const {
    std::vector<std::vector<int>> rot(g.num_vertices());
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (first[v] == kNone) continue;
      int d = first[v];
      do {
        rot[v].push_back(d / 2);
        d = nxt[d];
      } while (d != first[v]);
    }
    return rot;
  }
};

}  // namespace

std::optional<PlanarEmbedding> planar_embed(const Graph& g) {
  const int n = g.num_vertices();
  const int m = g.num_edges();
  {
    std::unordered_set<std::int64_t> seen;
    seen.reserve(m * 2);
    for (const Edge& e : g.edges()) {
      const std::int64_t key = std::int64_t(std::min(e.u, e.v)) * n + std::max(e.u, e.v);
      if (!seen.insert(key).second) throw InvalidModelError("planar_embed requires a normal graph");
    }
  }
  if (n > 2 && m > 3 * n - 6) return std::nullopt;

  LrState st(g);

  for (int v = 0; v < n; ++v) {
    if (st.height[v] == kNone) {
      st.height[v] = 0;
      st.roots.push_back(v);
      st.dfs_orientation(v);
    }
  }

  // Sort adjacency by nesting depth for the testing pass.
  for (int v = 0; v < n; ++v) {
    auto& oa = st.ordered_adj[v];
    oa.clear();
    for (const auto& [e, w] : g.adjacency(v))
      if (st.tail[e] == v) oa.push_back(e);
    std::stable_sort(oa.begin(), oa.end(), [&](int a, int b) { return st.nesting[a] < st.nesting[b]; });
  }
  for (const int r : st.roots)
    if (!st.dfs_testing(r)) return std::nullopt;

  // Embedding phase: apply signs, re-sort, and run the embedding DFS.
  for (int e = 0; e < m; ++e)
    if (st.tail[e] != kNone) st.nesting[e] *= st.resolve_sign(e);
  for (int v = 0; v < n; ++v) {
    auto& oa = st.ordered_adj[v];
    std::stable_sort(oa.begin(), oa.end(), [&](int a, int b) { return st.nesting[a] < st.nesting[b]; });
  }

  RotationBuilder rb(g);
  for (int v = 0; v < n; ++v)
    for (const int e : st.ordered_adj[v]) rb.append(v, rb.dart_at(e, v));

  std::vector<int> left_ref(n, kNone), right_ref(n, kNone);  // dart ids
  std::vector<int> ind(n, 0);
  for (const int r : st.roots) {
    std::vector<int> stack{r};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      bool descended = false;
      while (ind[v] < static_cast<int>(st.ordered_adj[v].size())) {
        const int ei = st.ordered_adj[v][ind[v]++];
        const int w = st.head[ei];
        const int dart_w = rb.dart_at(ei, w);
        if (ei == st.parent_edge[w]) {  // tree edge
          rb.insert_first(w, dart_w);
          left_ref[v] = rb.dart_at(ei, v);
          right_ref[v] = rb.dart_at(ei, v);
          stack.push_back(v);
          stack.push_back(w);
          descended = true;
          break;
        }
        // Back edge: hook into the ancestor's rotation on the proper side.
        if (st.side[ei] == 1) {
          rb.insert_after(right_ref[w], dart_w);
        } else {
          rb.insert_before(w, left_ref[w], dart_w);
          left_ref[w] = dart_w;
        }
      }
      (void)descended;
    }
  }

  PlanarEmbedding emb;
  emb.graph = g;
  emb.rotation = rb.rotations();
  return emb;
}

// ════════════════════════════════════════════════════════════════════
//  Face tracing
// ════════════════════════════════════════════════════════════════════

std::vector<Face> enumerate_faces(const PlanarEmbedding& emb) {
  const Graph& g = emb.graph;
  const int m = g.num_edges();
  // Position of each dart in its vertex rotation, and the rotation successor.
  std::vector<int> succ(2 * m, -1);
  for (int v = 0; v < g.num_vertices(); ++v) {
    const auto& rot = emb.rotation[v];
    const int k = static_cast<int>(rot.size());
    if (k != g.degree(v)) throw InvalidModelError("rotation size mismatch at vertex " + std::to_string(v));
    for (int i = 0; i < k; ++i) {
      const int e = rot[i];
      const int d = 2 * e + (g.edge(e).u == v ? 0 : 1);
      const int e2 = rot[(i + 1) % k];
      const int d2 = 2 * e2 + (g.edge(e2).u == v ? 0 : 1);
      if (succ[d] != -1) throw InvalidModelError("edge repeated in rotation at vertex " + std::to_string(v));
      succ[d] = d2;
    }
  }
  std::vector<Face> faces;
  std::vector<char> used(2 * m, 0);
  for (int d0 = 0; d0 < 2 * m; ++d0) {
    if (used[d0]) continue;
    if (succ[d0 ^ 1] == -1) throw InvalidModelError("incomplete rotation system");
    Face f;
    int d = d0;
    do {
      used[d] = 1;
      const int e = d / 2;
      const int tail_v = (d % 2 == 0) ? g.edge(e).u : g.edge(e).v;
      f.boundary.emplace_back(tail_v, e);
      d = succ[d ^ 1];  // next dart in the face: rotation successor of the twin
    } while (d != d0);
    faces.push_back(std::move(f));
  }
  return faces;
}

InducedEmbedding induced_embedding(const PlanarEmbedding& emb, const std::vector<int>& vertices) {
  const Graph& g = emb.graph;
  std::vector<int> local(g.num_vertices(), -1);
  for (std::size_t i = 0; i < vertices.size(); ++i) local[vertices[i]] = static_cast<int>(i);

  InducedEmbedding out;
  out.vertex_map = vertices;
  Graph sub = Graph::empty(static_cast<int>(vertices.size()), g.is_multigraph());
  std::vector<int> edge_local(g.num_edges(), -1);
  for (const Edge& e : g.edges()) {
    if (local[e.u] >= 0 && local[e.v] >= 0) {
      edge_local[e.id] = sub.add_edge(local[e.u], local[e.v], e.is_virtual);
      out.edge_map.push_back(e.id);
    }
  }
  out.emb.rotation.resize(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (const int e : emb.rotation[vertices[i]])
      if (edge_local[e] >= 0) out.emb.rotation[i].push_back(edge_local[e]);
  }
  out.emb.graph = std::move(sub);
  return out;
}

}  // namespace ising
