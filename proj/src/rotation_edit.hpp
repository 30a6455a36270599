#pragma once

// Editable rotation system over darts. Dart 2e+0 points edge(e).u -> .v,
// dart 2e+1 the reverse. Each vertex owns a circular doubly-linked ring of
// darts with that vertex as tail. Face tracing rule: the dart after d in its
// face is ring_next[rev(d)].

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "ising/graph.hpp"

namespace ising::detail {

class RotationEditor {
 public:
  explicit RotationEditor(const PlanarEmbedding& emb) : g_(emb.graph) {
    const int m = g_.num_edges();
    nxt_.assign(2 * m, -1);
    prv_.assign(2 * m, -1);
    entry_.assign(g_.num_vertices(), -1);
    alive_.assign(m, 1);
    for (int v = 0; v < g_.num_vertices(); ++v) {
      int prev = -1;
      for (const int e : emb.rotation[v]) {
        const int d = dart(e, v);
        if (entry_[v] == -1) {
          entry_[v] = d;
          nxt_[d] = prv_[d] = d;
        } else {
          link_after(prev, d);
        }
        prev = d;
      }
    }
  }

  const Graph& graph() const { return g_; }
  int dart(int e, int tail_vertex) const { return 2 * e + (g_.edge(e).u == tail_vertex ? 0 : 1); }
  static int rev(int d) { return d ^ 1; }
  int tail(int d) const { return d % 2 == 0 ? g_.edge(d / 2).u : g_.edge(d / 2).v; }
  int head(int d) const { return d % 2 == 0 ? g_.edge(d / 2).v : g_.edge(d / 2).u; }
  int face_next(int d) const { return nxt_[rev(d)]; }
  bool alive(int e) const { return alive_[e] != 0; }

  /// Insert a chord between tail(d_i) and tail(d_j), where d_i and d_j are
  /// darts of one face walk (d_j reached from d_i along the face, cyclic
  /// distance >= 2). Splits that face into (d_i .. pred(d_j), chord) and
  /// (chord', d_j .. pred(d_i)). Returns the new edge id.
  int add_chord(int d_i, int d_j, bool is_virtual = false) {
    const int a = tail(d_i);
    const int b = tail(d_j);
    const int e = g_.add_edge(a, b, is_virtual);
    nxt_.resize(2 * e + 2);
    prv_.resize(2 * e + 2);
    alive_.push_back(1);
    const int c_ab = dart(e, a);
    const int c_ba = rev(c_ab);
    // At a: insert before d_i. At b: insert after rev(prev face dart of d_j),
    // i.e. after rev(d) where face_next(d) == d_j; that dart is prv_[d_j]'s...
    // The dart arriving at b in the face is the one whose face_next is d_j:
    // face_next(x) = nxt_[rev(x)] = d_j  =>  rev(x) = prv_[d_j].
    link_before(d_i, c_ab);
    link_after(prv_from_face(d_j), c_ba);
    return e;
  }

  /// Remove an edge from the graph (rings unlinked, edge marked dead).
  void remove_edge(int e) {
    for (const int d : {2 * e, 2 * e + 1}) {
      const int t = tail(d);
      if (nxt_[d] == d) {
        entry_[t] = -1;
      } else {
        nxt_[prv_[d]] = nxt_[d];
        prv_[nxt_[d]] = prv_[d];
        if (entry_[t] == d) entry_[t] = nxt_[d];
      }
      nxt_[d] = prv_[d] = -1;
    }
    alive_[e] = 0;
  }

  /// All faces as dart cycles (only alive edges).
  std::vector<std::vector<int>> faces() const {
    std::vector<std::vector<int>> out;
    std::vector<char> used(nxt_.size(), 0);
    for (int d0 = 0; d0 < static_cast<int>(nxt_.size()); ++d0) {
      if (used[d0] || !alive_[d0 / 2]) continue;
      std::vector<int> f;
      int d = d0;
      do {
        used[d] = 1;
        f.push_back(d);
        d = face_next(d);
      } while (d != d0);
      out.push_back(std::move(f));
    }
    return out;
  }

  /// Produce a clean embedding. If edges were removed, ids are compacted;
  /// `edge_map_out` (new -> old) reports the renumbering when requested.
  PlanarEmbedding finish(std::vector<int>* edge_map_out = nullptr) const {
    std::vector<int> new_id(g_.num_edges(), -1);
    Graph out = Graph::empty(g_.num_vertices(), g_.is_multigraph());
    for (const Edge& e : g_.edges()) {
      if (!alive_[e.id]) continue;
      new_id[e.id] = out.add_edge(e.u, e.v, e.is_virtual);
      if (edge_map_out) edge_map_out->push_back(e.id);
    }
    PlanarEmbedding emb;
    emb.rotation.resize(g_.num_vertices());
    for (int v = 0; v < g_.num_vertices(); ++v) {
      const int d0 = entry_[v];
      if (d0 == -1) continue;
      int d = d0;
      do {
        emb.rotation[v].push_back(new_id[d / 2]);
        d = nxt_[d];
      } while (d != d0);
    }
    emb.graph = std::move(out);
    return emb;
  }

 private:
  int prv_from_face(int d_j) const { return prv_[d_j]; }

  void link_after(int ref, int d) {
    const int b = nxt_[ref];
    nxt_[ref] = d;
    prv_[d] = ref;
    nxt_[d] = b;
    prv_[b] = d;
  }
  void link_before(int ref, int d) { link_after(prv_[ref], d); }

  Graph g_;
  std::vector<int> nxt_, prv_, entry_;
  std::vector<std::int8_t> alive_;
};

/// Pair-set helper for chord-existence checks.
class PairSet {
 public:
  explicit PairSet(const Graph& g) : n_(g.num_vertices()) {
    set_.reserve(g.num_edges() * 2);
    for (const Edge& e : g.edges()) insert(e.u, e.v);
  }
  bool has(int a, int b) const { return set_.count(key(a, b)) != 0; }
  void insert(int a, int b) { set_.insert(key(a, b)); }

 private:
  std::int64_t key(int a, int b) const {
    return a < b ? std::int64_t(a) * n_ + b : std::int64_t(b) * n_ + a;
  }
  std::int64_t n_;
  std::unordered_set<std::int64_t> set_;
};

/// Triangulate every face of a simple connected embedded graph (n >= 3)
/// without ever creating parallel edges. Ear candidates are proposed in an
/// alternating (zig-zag) order; when both current candidates already exist
/// as edges the face is split across any non-adjacent vertex pair, which
/// always exists for simple inputs.
void triangulate_all_faces(RotationEditor& ed, PairSet& pairs);

}  // namespace ising::detail
