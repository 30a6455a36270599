#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <queue>

#include "ising/planar_pm.hpp"
#include "rotation_edit.hpp"

namespace ising {

namespace {

constexpr double kTwoThirds = 2.0 / 3.0;

// Greedy descending-size packing of pieces into two bins. With every piece
// at most 2n/3 and total at most n, both bins end up at most 2n/3.
void pack_pieces(std::vector<std::vector<int>>& pieces, std::vector<int>& p1, std::vector<int>& p2) {
  std::sort(pieces.begin(), pieces.end(),
            [](const auto& a, const auto& b) { return a.size() > b.size(); });
  std::size_t s1 = 0, s2 = 0;
  for (auto& piece : pieces) {
    auto& target = (s1 <= s2) ? p1 : p2;
    auto& size = (s1 <= s2) ? s1 : s2;
    size += piece.size();
    target.insert(target.end(), piece.begin(), piece.end());
  }
}

std::vector<std::vector<int>> connected_components(const Graph& g) {
  std::vector<std::vector<int>> comps;
  std::vector<char> vis(g.num_vertices(), 0);
  for (int s = 0; s < g.num_vertices(); ++s) {
    if (vis[s]) continue;
    comps.emplace_back();
    std::vector<int> stack{s};
    vis[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      comps.back().push_back(v);
      for (const auto& [e, w] : g.adjacency(v))
        if (!vis[w]) {
          vis[w] = 1;
          stack.push_back(w);
        }
    }
  }
  return comps;
}

Separation separate_connected(const PlanarEmbedding& emb);

Separation separate_any(const PlanarEmbedding& emb) {
  const Graph& g = emb.graph;
  const int n = g.num_vertices();
  Separation out;
  if (n == 0) return out;

  auto comps = connected_components(g);
  if (comps.size() == 1) return separate_connected(emb);

  std::size_t largest = 0, li = 0;
  for (std::size_t i = 0; i < comps.size(); ++i)
    if (comps[i].size() > largest) {
      largest = comps[i].size();
      li = i;
    }
  std::vector<std::vector<int>> pieces;
  if (static_cast<double>(largest) > kTwoThirds * n) {
    // Separate the big component, keep its separator, pool the rest.
    auto ind = induced_embedding(emb, comps[li]);
    Separation inner = separate_connected(ind.emb);
    for (const int v : inner.separator) out.separator.push_back(ind.vertex_map[v]);
    std::vector<int> a, b;
    for (const int v : inner.part1) a.push_back(ind.vertex_map[v]);
    for (const int v : inner.part2) b.push_back(ind.vertex_map[v]);
    pieces.push_back(std::move(a));
    pieces.push_back(std::move(b));
  }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (static_cast<double>(largest) > kTwoThirds * n && i == li) continue;
    pieces.push_back(std::move(comps[i]));
  }
  pack_pieces(pieces, out.part1, out.part2);
  return out;
}

// ── Lipton-Tarjan on a connected embedded graph ─────────────────────

struct LevelData {
  std::vector<int> level_of;
  std::vector<std::vector<int>> levels;
};

LevelData bfs_levels(const Graph& g, int root) {
  LevelData ld;
  ld.level_of.assign(g.num_vertices(), -1);
  std::queue<int> q;
  q.push(root);
  ld.level_of[root] = 0;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    if (static_cast<int>(ld.levels.size()) <= ld.level_of[v]) ld.levels.resize(ld.level_of[v] + 1);
    ld.levels[ld.level_of[v]].push_back(v);
    for (const auto& [e, w] : g.adjacency(v)) {
      if (ld.level_of[w] == -1) {
        ld.level_of[w] = ld.level_of[v] + 1;
        q.push(w);
      }
    }
  }
  return ld;
}

// Fundamental-cycle separator of a triangulated connected embedded graph.
// Vertex 0 carries weight zero (it is the contracted super-root); all other
// vertices weigh one. Returns the best cycle as a vertex list.
std::vector<int> fundamental_cycle(const PlanarEmbedding& embT, std::vector<char>& inside_out,
                                   int band_weight) {
  const Graph& g = embT.graph;
  const int n = g.num_vertices();
  const int m = g.num_edges();

  // BFS tree from the super-root.
  std::vector<int> parent(n, -1), depth(n, -1), parent_edge(n, -1);
  {
    std::queue<int> q;
    q.push(0);
    depth[0] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (const auto& [e, w] : g.adjacency(v)) {
        if (depth[w] == -1) {
          depth[w] = depth[v] + 1;
          parent[w] = v;
          parent_edge[w] = e;
          q.push(w);
        }
      }
    }
  }
  std::vector<char> is_tree(m, 0);
  for (int v = 1; v < n; ++v) is_tree[parent_edge[v]] = 1;

  // Binary lifting for LCA.
  int logn = 1;
  while ((1 << logn) < n) ++logn;
  std::vector<std::vector<int>> up(logn + 1, std::vector<int>(n, 0));
  up[0] = parent;
  up[0][0] = 0;
  for (int k = 1; k <= logn; ++k)
    for (int v = 0; v < n; ++v) up[k][v] = up[k - 1][up[k - 1][v]];
  auto lca = [&](int a, int b) {
    if (depth[a] < depth[b]) std::swap(a, b);
    int diff = depth[a] - depth[b];
    for (int k = 0; diff; ++k, diff >>= 1)
      if (diff & 1) a = up[k][a];
    if (a == b) return a;
    for (int k = logn; k >= 0; --k)
      if (up[k][a] != up[k][b]) {
        a = up[k][a];
        b = up[k][b];
      }
    return parent[a];
  };

  // Faces and the dual tree over non-tree edges.
  const auto faces = enumerate_faces(embT);
  const int F = static_cast<int>(faces.size());
  std::vector<int> face_of(2 * m, -1);
  for (int f = 0; f < F; ++f)
    for (const auto& [tail_v, e] : faces[f].boundary)
      face_of[2 * e + (g.edge(e).u == tail_v ? 0 : 1)] = f;

  std::vector<std::vector<std::pair<int, int>>> fadj(F);
  for (int e = 0; e < m; ++e) {
    if (is_tree[e]) continue;
    fadj[face_of[2 * e]].emplace_back(e, face_of[2 * e + 1]);
    fadj[face_of[2 * e + 1]].emplace_back(e, face_of[2 * e]);
  }
  // Rooted dual tree: Euler-tour intervals and subtree face counts.
  std::vector<int> tin(F, -1), tout(F, -1), subtree_faces(F, 1), child_face(m, -1);
  {
    int timer = 0;
    std::vector<char> fvis(F, 0);
    fvis[0] = 1;
    std::vector<std::pair<int, std::size_t>> frames{{0, 0}};
    while (!frames.empty()) {
      auto& [f, idx] = frames.back();
      if (idx == 0) tin[f] = timer++;
      if (idx < fadj[f].size()) {
        const auto [e, f2] = fadj[f][idx++];
        if (!fvis[f2]) {
          fvis[f2] = 1;
          child_face[e] = f2;
          frames.emplace_back(f2, 0);
        }
      } else {
        const int fdone = f;
        frames.pop_back();
        tout[fdone] = timer;
        if (!frames.empty()) subtree_faces[frames.back().first] += subtree_faces[fdone];
      }
    }
    for (int f = 0; f < F; ++f)
      if (!fvis[f]) throw InternalError("dual tree disconnected");
  }
  auto face_inside = [&](int cf, int f) { return tin[cf] <= tin[f] && tin[f] < tout[cf]; };

  // A face incident to the super-root, for locating it relative to cycles.
  int root_face = -1;
  if (g.degree(0) > 0) {
    const int e0 = g.adjacency(0)[0].first;
    root_face = face_of[2 * e0 + (g.edge(e0).u == 0 ? 0 : 1)];
  }

  // Scan all non-tree edges for the fundamental cycle minimizing the larger
  // open side (weights exclude the super-root).
  int best_edge = -1;
  long long best_score = -1;
  for (int e = 0; e < m; ++e) {
    if (is_tree[e] || child_face[e] == -1) continue;
    const int x = g.edge(e).u, y = g.edge(e).v;
    const int l = lca(x, y);
    const long long cyc_len = depth[x] + depth[y] - 2 * depth[l] + 1;
    const long long f_in = subtree_faces[child_face[e]];
    const long long twice_int = f_in - cyc_len + 2;
    assert(twice_int % 2 == 0 && twice_int >= 0);
    const long long interior = twice_int / 2;
    const bool s_on_cycle = (l == 0);
    const bool s_inside = !s_on_cycle && root_face != -1 && face_inside(child_face[e], root_face);
    const long long w_in = interior - (s_inside ? 1 : 0);
    const long long w_cyc = cyc_len - (s_on_cycle ? 1 : 0);
    const long long w_out = band_weight - w_in - w_cyc;
    const long long score = std::max(w_in, w_out);
    if (best_edge == -1 || score < best_score) {
      best_edge = e;
      best_score = score;
    }
  }
  if (best_edge == -1) throw InternalError("no non-tree edge in triangulated graph");
  if (static_cast<double>(best_score) > kTwoThirds * band_weight + 1e-9)
    throw InternalError("fundamental-cycle balance guarantee violated");

  // Materialize the cycle and classify remaining vertices by side.
  std::vector<int> cycle;
  {
    const int x = g.edge(best_edge).u, y = g.edge(best_edge).v;
    const int l = lca(x, y);
    for (int v = x; v != l; v = parent[v]) cycle.push_back(v);
    cycle.push_back(l);
    std::vector<int> tailcy;
    for (int v = y; v != l; v = parent[v]) tailcy.push_back(v);
    cycle.insert(cycle.end(), tailcy.rbegin(), tailcy.rend());
  }
  std::vector<char> on_cycle(n, 0);
  for (const int v : cycle) on_cycle[v] = 1;

  inside_out.assign(n, 0);  // 1 = inside, 0 = outside (cycle vertices unused)
  std::vector<char> vis(n, 0);
  for (int s = 0; s < n; ++s) {
    if (vis[s] || on_cycle[s]) continue;
    std::vector<int> comp{s};
    vis[s] = 1;
    std::vector<int> stack{s};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [e, w] : g.adjacency(v))
        if (!vis[w] && !on_cycle[w]) {
          vis[w] = 1;
          comp.push_back(w);
          stack.push_back(w);
        }
    }
    // Classify via any incident face of the representative.
    const int e0 = g.adjacency(s)[0].first;
    const int f0 = face_of[2 * e0 + (g.edge(e0).u == s ? 0 : 1)];
    const char side = face_inside(child_face[best_edge], f0) ? 1 : 0;
    for (const int v : comp) inside_out[v] = side;
  }
  return cycle;
}

Separation separate_connected(const PlanarEmbedding& emb) {
  const Graph& g = emb.graph;
  const int n = g.num_vertices();
  Separation out;
  if (n <= 8) {  // 2^{3/2} sqrt(n) >= n here; the trivial separation is valid
    out.separator.resize(n);
    std::iota(out.separator.begin(), out.separator.end(), 0);
    return out;
  }

  const LevelData ld = bfs_levels(g, 0);
  const int nlev = static_cast<int>(ld.levels.size());
  std::vector<long long> cum(nlev + 1, 0);
  for (int l = 0; l < nlev; ++l) cum[l + 1] = cum[l] + static_cast<long long>(ld.levels[l].size());

  int l1 = 0;
  while (2 * cum[l1 + 1] < n) ++l1;
  const long long k = cum[l1 + 1];

  int l0 = -1;
  for (int l = l1; l >= 0; --l) {
    if (static_cast<double>(ld.levels[l].size()) + 2.0 * (l1 - l) <= 2.0 * std::sqrt((double)k)) {
      l0 = l;
      break;
    }
  }
  int l2 = nlev;
  for (int l = l1 + 1; l < nlev; ++l) {
    if (static_cast<double>(ld.levels[l].size()) + 2.0 * (l - l1 - 1) <= 2.0 * std::sqrt((double)(n - k))) {
      l2 = l;
      break;
    }
  }
  if (l0 == -1) throw InternalError("no admissible l0 level");

  std::vector<int> top, band, bottom;
  for (int l = 0; l < l0; ++l) top.insert(top.end(), ld.levels[l].begin(), ld.levels[l].end());
  for (int l = l0 + 1; l < std::min(l2, nlev); ++l)
    band.insert(band.end(), ld.levels[l].begin(), ld.levels[l].end());
  for (int l = l2 + 1; l < nlev; ++l)
    bottom.insert(bottom.end(), ld.levels[l].begin(), ld.levels[l].end());

  out.separator = ld.levels[l0];
  if (l2 < nlev)
    out.separator.insert(out.separator.end(), ld.levels[l2].begin(), ld.levels[l2].end());

  std::vector<std::vector<int>> pieces;
  if (static_cast<double>(band.size()) <= kTwoThirds * n) {
    pieces.push_back(std::move(top));
    pieces.push_back(std::move(band));
    pieces.push_back(std::move(bottom));
    pack_pieces(pieces, out.part1, out.part2);
    return out;
  }

  // Middle band too heavy: contract the top into a super-root, triangulate,
  // and add a fundamental-cycle separator.
  const int b = static_cast<int>(band.size());
  std::vector<int> h_of(n, -1);
  Graph h = Graph::empty(1 + b);
  for (int i = 0; i < b; ++i) h_of[band[i]] = 1 + i;
  {
    std::vector<char> s_linked(1 + b, 0);
    detail::PairSet dedupe(h);
    for (const int v : band) {
      for (const auto& [e, w] : g.adjacency(v)) {
        if (ld.level_of[w] <= l0) {
          if (!s_linked[h_of[v]]) {
            s_linked[h_of[v]] = 1;
            h.add_edge(0, h_of[v]);
          }
        } else if (h_of[w] != -1 && v < w && !dedupe.has(h_of[v], h_of[w])) {
          dedupe.insert(h_of[v], h_of[w]);
          h.add_edge(h_of[v], h_of[w]);
        }
      }
    }
  }
  auto embH = planar_embed(h);
  if (!embH) throw InternalError("shrunken band graph not planar");
  detail::RotationEditor ed(*embH);
  detail::PairSet pairs(h);
  detail::triangulate_all_faces(ed, pairs);
  const PlanarEmbedding embT = ed.finish();

  std::vector<char> inside;
  const std::vector<int> cycle = fundamental_cycle(embT, inside, b);

  std::vector<int> band_in, band_out;
  std::vector<char> cyc_mark(1 + b, 0);
  for (const int v : cycle) cyc_mark[v] = 1;
  for (int i = 0; i < b; ++i) {
    if (cyc_mark[1 + i]) continue;
    (inside[1 + i] ? band_in : band_out).push_back(band[i]);
  }
  for (const int v : cycle)
    if (v != 0) out.separator.push_back(band[v - 1]);

  pieces.push_back(std::move(top));
  pieces.push_back(std::move(bottom));
  pieces.push_back(std::move(band_in));
  pieces.push_back(std::move(band_out));
  pack_pieces(pieces, out.part1, out.part2);
  return out;
}

}  // namespace

namespace {

// Move separator vertices that do not actually separate into a part,
// keeping the balance bound intact. Runs to a fixpoint.
void prune_separator(const Graph& g, Separation& s) {
  const int n = g.num_vertices();
  if (n == 0) return;
  std::vector<signed char> where(n, 0);  // 0 = separator, 1 = part1, 2 = part2
  for (const int v : s.part1) where[v] = 1;
  for (const int v : s.part2) where[v] = 2;
  std::size_t n1 = s.part1.size(), n2 = s.part2.size();
  const double cap = kTwoThirds * n + 1e-9;
  bool changed = true;
  while (changed) {
    changed = false;
    // Vertices touching no part go to the smaller side first; vertices
    // touching one side may then turn out to separate after all.
    for (const int phase : {0, 1}) {
      for (const int v : s.separator) {
        if (where[v] != 0) continue;
        bool t1 = false, t2 = false;
        for (const auto& [e, w] : g.adjacency(v)) {
          if (where[w] == 1) t1 = true;
          if (where[w] == 2) t2 = true;
        }
        if (t1 && t2) continue;
        if (phase == 0 && (t1 || t2)) continue;
        int target;
        if (t1)
          target = 1;
        else if (t2)
          target = 2;
        else
          target = (n1 <= n2) ? 1 : 2;
        auto& size = (target == 1) ? n1 : n2;
        if (static_cast<double>(size) + 1.0 > cap) continue;
        where[v] = static_cast<signed char>(target);
        ++size;
        changed = true;
      }
    }
  }
  s.part1.clear();
  s.part2.clear();
  std::vector<int> sep;
  for (const int v : s.separator)
    if (where[v] == 0) sep.push_back(v);
  for (int v = 0; v < n; ++v) {
    if (where[v] == 1)
      s.part1.push_back(v);
    else if (where[v] == 2)
      s.part2.push_back(v);
  }
  s.separator = std::move(sep);
}

}  // namespace

Separation planar_separator(const PlanarEmbedding& emb) {
  Separation s = separate_any(emb);
  prune_separator(emb.graph, s);
  const int n = emb.graph.num_vertices();
  if (n > 0) {
    const double limit = 2.0 * std::sqrt(2.0) * std::sqrt(static_cast<double>(n)) + 1e-9;
    if (static_cast<double>(s.separator.size()) > limit)
      throw InternalError("separator size bound violated");
    if (static_cast<double>(std::max(s.part1.size(), s.part2.size())) > kTwoThirds * n + 1e-9)
      throw InternalError("separator balance bound violated");
    assert(s.part1.size() + s.part2.size() + s.separator.size() == static_cast<std::size_t>(n));
  }
  return s;
}

// ════════════════════════════════════════════════════════════════════
//  Nested dissection ordering
// ════════════════════════════════════════════════════════════════════

namespace {

void nd_recurse(const PlanarEmbedding& emb, const std::vector<int>& global_ids,
                std::vector<int>& out) {
  const int n = emb.graph.num_vertices();
  if (n <= 2) {
    for (int v = 0; v < n; ++v) out.push_back(global_ids[v]);
    return;
  }
  const Separation sep = planar_separator(emb);
  for (const auto* part : {&sep.part1, &sep.part2}) {
    if (part->empty()) continue;
    auto ind = induced_embedding(emb, *part);
    std::vector<int> sub_ids(part->size());
    for (std::size_t i = 0; i < part->size(); ++i) sub_ids[i] = global_ids[ind.vertex_map[i]];
    nd_recurse(ind.emb, sub_ids, out);
  }
  for (const int v : sep.separator) out.push_back(global_ids[v]);
}

}  // namespace

std::vector<int> nested_dissection_order(const Graph& contracted, const std::vector<int>* forced_top) {
  const int n = contracted.num_vertices();
  auto emb = planar_embed(contracted);
  if (!emb) throw InvalidModelError("nested dissection requires a planar graph");

  std::vector<int> order;
  order.reserve(n);
  if (forced_top) {
    if (static_cast<double>(forced_top->size()) > 12.0 * std::sqrt(static_cast<double>(n)) + 1e-9)
      throw OversizedSeparatorError("forced top-level separator exceeds the 12 sqrt(n) bound");
    std::vector<char> in_sep(n, 0);
    for (const int v : *forced_top) in_sep[v] = 1;
    std::vector<int> rest;
    for (int v = 0; v < n; ++v)
      if (!in_sep[v]) rest.push_back(v);
    auto ind = induced_embedding(*emb, rest);
    nd_recurse(ind.emb, ind.vertex_map, order);
    order.insert(order.end(), forced_top->begin(), forced_top->end());
  } else {
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    nd_recurse(*emb, ids, order);
  }
  return order;
}

}  // namespace ising
