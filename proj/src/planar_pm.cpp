#include "ising/planar_pm.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <queue>
#include <string>

#include "rotation_edit.hpp"

namespace ising {

namespace detail {

void triangulate_all_faces(RotationEditor& ed, PairSet& pairs) {
  std::vector<std::vector<int>> work = ed.faces();
  bool zig = true;
  while (!work.empty()) {
    std::vector<int> f = std::move(work.back());
    work.pop_back();
    while (f.size() > 3) {
      const int k = static_cast<int>(f.size());
      auto vert = [&](int i) { return ed.tail(f[i]); };
      auto ok = [&](int i, int j) { return vert(i) != vert(j) && !pairs.has(vert(i), vert(j)); };

      int ci = -1, cj = -1;
      // Zig-zag: clip an ear at the front (chord 0-2) or at the back
      // (chord 0-(k-2)), alternating which end is tried first.
      const std::pair<int, int> cand[2] = {{0, 2}, {0, k - 2}};
      for (int t = 0; t < 2 && ci < 0; ++t) {
        const auto [a, b] = cand[zig ? t : 1 - t];
        if (ok(a, b)) {
          ci = a;
          cj = b;
        }
      }
      if (ci < 0) {
        // Both candidates duplicate existing edges; split across any
        // non-adjacent pair (one always exists in a simple graph).
        for (int i = 0; i < k && ci < 0; ++i)
          for (int j = i + 2; j < k; ++j) {
            if (i == 0 && j == k - 1) continue;  // cyclically adjacent
            if (ok(i, j)) {
              ci = i;
              cj = j;
              break;
            }
          }
        if (ci < 0) throw InternalError("face admits no chord; input not simple?");
      }
      zig = !zig;
      const int e = ed.add_chord(f[ci], f[cj]);
      pairs.insert(vert(ci), vert(cj));
      // Face A: darts ci..cj-1 plus the chord dart at vert(cj);
      // face B: chord dart at vert(ci) plus darts cj..ci-1 (cyclic).
      std::vector<int> fa(f.begin() + ci, f.begin() + cj);
      fa.push_back(ed.dart(e, vert(cj)));
      std::vector<int> fb;
      fb.push_back(ed.dart(e, vert(ci)));
      fb.insert(fb.end(), f.begin() + cj, f.end());
      fb.insert(fb.end(), f.begin(), f.begin() + ci);
      if (fa.size() > fb.size()) std::swap(fa, fb);
      if (fa.size() > 3) work.push_back(std::move(fa));
      f = std::move(fb);
    }
  }
}

}  // namespace detail

// ════════════════════════════════════════════════════════════════════
//  Triangulation
// ════════════════════════════════════════════════════════════════════

EmbeddedModel triangulate(const EmbeddedModel& m) {
  const Graph& g = m.emb.graph;
  if (g.num_vertices() < 3) throw InvalidModelError("triangulate requires at least 3 vertices");
  {
    const auto faces = enumerate_faces(m.emb);
    for (const auto& f : faces)
      if (f.size() < 3) throw InvalidModelError("malformed embedding: face of length < 3");
  }
  detail::RotationEditor ed(m.emb);
  detail::PairSet pairs(g);
  detail::triangulate_all_faces(ed, pairs);

  EmbeddedModel out;
  out.emb = ed.finish();
  out.model.graph = out.emb.graph;
  out.model.coupling = m.model.coupling;
  out.model.coupling.resize(out.emb.graph.num_edges(), 0.0);  // chords carry J = 0
  return out;
}

// ════════════════════════════════════════════════════════════════════
//  Expanded dual graph (Fisher cities)
// ════════════════════════════════════════════════════════════════════

ExpandedDual build_expanded_dual(const EmbeddedModel& tri) {
  const Graph& g = tri.emb.graph;
  const auto faces = enumerate_faces(tri.emb);
  const int F = static_cast<int>(faces.size());
  const int E = g.num_edges();
  for (const auto& f : faces)
    if (f.size() != 3) throw InvalidModelError("build_expanded_dual requires a triangulated model");

  // Slot of each primal dart: dual vertex 3*f + slot.
  std::vector<int> dart_face(2 * E, -1), dart_slot(2 * E, -1);
  for (int f = 0; f < F; ++f) {
    for (int i = 0; i < 3; ++i) {
      const auto [tail_v, e] = faces[f].boundary[i];
      const int d = 2 * e + (g.edge(e).u == tail_v ? 0 : 1);
      dart_face[d] = f;
      dart_slot[d] = i;
    }
  }

  ExpandedDual d;
  Graph dual = Graph::empty(3 * F);
  d.weight.clear();
  d.dual_edge.assign(E, -1);

  // Intercity edges first (dual edge id order follows primal edge id).
  for (int e = 0; e < E; ++e) {
    const int v1 = 3 * dart_face[2 * e] + dart_slot[2 * e];
    const int v2 = 3 * dart_face[2 * e + 1] + dart_slot[2 * e + 1];
    const int id = dual.add_edge(v1, v2);
    d.dual_edge[e] = id;
    d.primal_edge.push_back(e);
    d.is_intercity.push_back(1);
    d.weight.push_back(std::exp(2.0 * tri.model.coupling[e]));
  }
  d.face_primal_edges.resize(F);
  d.face_city_edges.resize(F);
  d.face_vertices.resize(F);
  for (int f = 0; f < F; ++f) {
    for (int i = 0; i < 3; ++i) {
      d.face_primal_edges[f][i] = faces[f].boundary[i].second;
      d.face_vertices[f][i] = faces[f].boundary[i].first;
      const int id = dual.add_edge(3 * f + i, 3 * f + (i + 1) % 3);
      d.face_city_edges[f][i] = id;
      d.primal_edge.push_back(-1);
      d.is_intercity.push_back(0);
      d.weight.push_back(1.0);
    }
  }

  // Rotations: at city vertex (f, i): intercity, edge to slot i+1, edge to slot i-1.
  d.emb.rotation.resize(3 * F);
  for (int f = 0; f < F; ++f) {
    for (int i = 0; i < 3; ++i) {
      auto& rot = d.emb.rotation[3 * f + i];
      rot.push_back(d.dual_edge[d.face_primal_edges[f][i]]);
      rot.push_back(d.face_city_edges[f][i]);           // to slot i+1
      rot.push_back(d.face_city_edges[f][(i + 2) % 3]); // to slot i-1
    }
  }
  d.emb.graph = std::move(dual);
  return d;
}

// ════════════════════════════════════════════════════════════════════
//  The M mapping and its inverse
// ════════════════════════════════════════════════════════════════════

PerfectMatching spins_to_pm(const ExpandedDual& d, const SpinConfiguration& x) {
  PerfectMatching pm;
  const int E = static_cast<int>(d.dual_edge.size());
  std::vector<char> agree(E, 0);
  for (int f = 0; f < d.num_faces(); ++f) {
    int agree_slot = -1, agree_count = 0;
    for (int i = 0; i < 3; ++i) {
      const int vt = d.face_vertices[f][i];
      const int vh = d.face_vertices[f][(i + 1) % 3];
      if (x[vt] == x[vh]) {
        agree[d.face_primal_edges[f][i]] = 1;
        agree_slot = i;
        ++agree_count;
      }
    }
    if (agree_count == 1) pm.edges.push_back(d.face_city_edges[f][(agree_slot + 1) % 3]);
    // agree_count is 1 or 3 for spin assignments; 3 needs no city edge.
  }
  for (int e = 0; e < E; ++e)
    if (agree[e]) pm.edges.push_back(d.dual_edge[e]);
  std::sort(pm.edges.begin(), pm.edges.end());
  return pm;
}

SpinConfiguration pm_to_spins(const ExpandedDual& d, const PerfectMatching& pm) {
  const Graph& dual = d.emb.graph;
  // Validate the perfect matching.
  std::vector<char> in_pm(dual.num_edges(), 0);
  std::vector<char> covered(dual.num_vertices(), 0);
  for (const int e : pm.edges) {
    if (e < 0 || e >= dual.num_edges()) throw InvalidModelError("matching edge out of range");
    in_pm[e] = 1;
    for (const int v : {dual.edge(e).u, dual.edge(e).v}) {
      if (covered[v]) throw InvalidModelError("not a matching: vertex covered twice");
      covered[v] = 1;
    }
  }
  for (int v = 0; v < dual.num_vertices(); ++v)
    if (!covered[v]) throw InvalidModelError("not a perfect matching: uncovered vertex");

  // Rebuild the primal adjacency from face bookkeeping.
  int n = 0;
  for (int f = 0; f < d.num_faces(); ++f)
    for (int i = 0; i < 3; ++i) n = std::max(n, d.face_vertices[f][i] + 1);
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (primal edge, neighbor)
  const int E = static_cast<int>(d.dual_edge.size());
  std::vector<std::array<int, 2>> ends(E, {-1, -1});
  for (int f = 0; f < d.num_faces(); ++f)
    for (int i = 0; i < 3; ++i)
      ends[d.face_primal_edges[f][i]] = {d.face_vertices[f][i], d.face_vertices[f][(i + 1) % 3]};
  for (int e = 0; e < E; ++e) {
    adj[ends[e][0]].emplace_back(e, ends[e][1]);
    adj[ends[e][1]].emplace_back(e, ends[e][0]);
  }

  SpinConfiguration x(n, 0);
  x[0] = +1;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& [e, w] : adj[v]) {
      const std::int8_t xw = in_pm[d.dual_edge[e]] ? x[v] : static_cast<std::int8_t>(-x[v]);
      if (x[w] == 0) {
        x[w] = xw;
        stack.push_back(w);
      } else if (x[w] != xw) {
        throw InvalidModelError("parity inconsistency: matching is not in M's image");
      }
    }
  }
  return x;
}

// ════════════════════════════════════════════════════════════════════
//  Pfaffian orientation
// ════════════════════════════════════════════════════════════════════

std::vector<std::int8_t> pfaffian_orient(const PlanarEmbedding& emb) {
  const Graph& g = emb.graph;
  const int n = g.num_vertices();
  const int m = g.num_edges();
  std::vector<std::int8_t> orient(m, 1);
  if (m == 0) return orient;
  if (!g.is_connected()) throw InvalidModelError("pfaffian_orient requires a connected graph");

  // BFS spanning tree; tree edges keep their stored direction.
  std::vector<char> tree_edge(m, 0);
  {
    std::vector<char> vis(n, 0);
    std::queue<int> q;
    q.push(0);
    vis[0] = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (const auto& [e, w] : g.adjacency(v)) {
        if (!vis[w]) {
          vis[w] = 1;
          tree_edge[e] = 1;
          q.push(w);
        }
      }
    }
  }

  const auto faces = enumerate_faces(emb);
  const int F = static_cast<int>(faces.size());
  std::vector<int> face_of(2 * m, -1);
  for (int f = 0; f < F; ++f)
    for (const auto& [tail_v, e] : faces[f].boundary)
      face_of[2 * e + (g.edge(e).u == tail_v ? 0 : 1)] = f;

  // Dual spanning tree over non-tree edges (interdigitating trees).
  std::vector<std::vector<std::pair<int, int>>> fadj(F);  // (edge, other face)
  for (int e = 0; e < m; ++e) {
    if (tree_edge[e]) continue;
    const int f1 = face_of[2 * e], f2 = face_of[2 * e + 1];
    fadj[f1].emplace_back(e, f2);
    fadj[f2].emplace_back(e, f1);
  }
  std::vector<int> parent_link(F, -1), bfs_order;
  std::vector<char> fvis(F, 0);
  std::queue<int> fq;
  fq.push(0);
  fvis[0] = 1;
  while (!fq.empty()) {
    const int f = fq.front();
    fq.pop();
    bfs_order.push_back(f);
    for (const auto& [e, f2] : fadj[f]) {
      if (!fvis[f2]) {
        fvis[f2] = 1;
        parent_link[f2] = e;
        fq.push(f2);
      }
    }
  }
  if (static_cast<int>(bfs_order.size()) != F)
    throw InternalError("face graph not connected; invalid embedding");

  // Children-first: each face fixes its parent link to make itself odd.
  for (auto it = bfs_order.rbegin(); it != bfs_order.rend(); ++it) {
    const int f = *it;
    const int ep = parent_link[f];
    if (ep == -1) continue;  // root face stays unconstrained
    int parity = 0;
    int dart_p = -1;
    for (const auto& [tail_v, e] : faces[f].boundary) {
      const bool along = (g.edge(e).u == tail_v);
      if (e == ep) {
        dart_p = along ? 1 : 0;  // 1 when the face traverses e in stored direction
        continue;
      }
      const bool co = along == (orient[e] == 1);
      parity ^= co ? 1 : 0;
    }
    // Choose orient[ep] so its dart in this face is co-directed iff parity even.
    const bool want_co = (parity == 0);
    orient[ep] = static_cast<std::int8_t>((dart_p == 1) == want_co ? 1 : -1);
  }
  return orient;
}

}  // namespace ising
