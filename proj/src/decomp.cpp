#include "ising/decomp.hpp"

#include <algorithm>
#include <cassert>
#include <list>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace ising {

// ════════════════════════════════════════════════════════════════════
//  Hopcroft-Tarjan split search (with the Gutwenger-Mutzel corrections),
//  followed by the cycle/bond mergings that yield the unique triconnected
//  components.
// ════════════════════════════════════════════════════════════════════

namespace {

enum class EType : std::int8_t { Unseen, Tree, Frond, Removed };
enum class CompType : std::int8_t { Bond, Polygon, Triconnected };

struct HtState {
  int n = 0;
  // Working multigraph; edges get appended as splits introduce virtual edges.
  std::vector<int> esrc, etgt, eorig;  // eorig = -1 for virtual edges
  std::vector<EType> etype;

  std::vector<std::list<int>> adj;                     // acceptable adjacency lists
  std::vector<std::list<int>::iterator> in_adj;        // per edge
  std::vector<char> in_adj_valid;

  std::vector<int> num, newnum, nodeat;  // 1-based numberings
  std::vector<int> lowpt1, lowpt2;       // per vertex, remapped to newnum later
  std::vector<int> nd, father, degree, tree_arc;
  std::vector<char> start_path;

  std::vector<std::list<int>> highpt;             // per vertex, newnum values
  std::vector<std::list<int>::iterator> in_high;  // per edge
  std::vector<char> in_high_valid;

  // TSTACK / ESTACK
  std::vector<int> th, ta, tb;
  int ttop = 0;
  std::vector<int> estack;

  struct Comp {
    std::list<int> edges;
    CompType type = CompType::Triconnected;
  };
  std::vector<Comp> comps;

  int start = 0;

  int other(int e, int v) const { return esrc[e] == v ? etgt[e] : esrc[e]; }

  int new_edge(int s, int t, EType ty) {
    const int id = static_cast<int>(esrc.size());
    esrc.push_back(s);
    etgt.push_back(t);
    eorig.push_back(-1);
    etype.push_back(ty);
    in_adj.emplace_back();
    in_adj_valid.push_back(0);
    in_high.emplace_back();
    in_high_valid.push_back(0);
    start_path.push_back(0);
    return id;
  }

  int new_comp(CompType t) {
    comps.push_back(Comp{{}, t});
    return static_cast<int>(comps.size()) - 1;
  }

  int high(int v) const { return highpt[v].empty() ? 0 : highpt[v].front(); }
  void del_high(int e) {
    if (in_high_valid[e]) {
      highpt[etgt[e]].erase(in_high[e]);
      in_high_valid[e] = 0;
    }
  }

  void tpush(int h, int a, int b) {
    ++ttop;
    th.resize(ttop + 1);
    ta.resize(ttop + 1);
    tb.resize(ttop + 1);
    th[ttop] = h;
    ta[ttop] = a;
    tb[ttop] = b;
  }
  void tpush_eos() { tpush(-1, -1, -1); }
  bool t_not_eos() const { return ta[ttop] != -1; }

  void dfs1();
  void build_acceptable_adj();
  void path_finder();
  void path_search();
  void finish_tric_or_poly(int comp, int evirt) {
    comps[comp].edges.push_back(evirt);
    comps[comp].type = comps[comp].edges.size() == 3 ? CompType::Polygon : CompType::Triconnected;
  }
};

void HtState::dfs1() {
  num.assign(n + 1, 0);
  lowpt1.assign(n + 1, 0);
  lowpt2.assign(n + 1, 0);
  nd.assign(n + 1, 0);
  father.assign(n + 1, -1);
  degree.assign(n + 1, 0);
  tree_arc.assign(n + 1, -1);

  // Raw incidence for the first pass.
  std::vector<std::vector<int>> raw(n);
  for (int e = 0; e < static_cast<int>(esrc.size()); ++e) {
    raw[esrc[e]].push_back(e);
    raw[etgt[e]].push_back(e);
    ++degree[esrc[e]];
    ++degree[etgt[e]];
  }

  int counter = 0;
  struct Frame {
    int v;
    std::size_t idx;
  };
  std::vector<Frame> frames;
  num[start] = ++counter;
  lowpt1[start] = lowpt2[start] = num[start];
  nd[start] = 1;
  frames.push_back({start, 0});
  while (!frames.empty()) {
    auto& fr = frames.back();
    const int v = fr.v;
    if (fr.idx < raw[v].size()) {
      const int e = raw[v][fr.idx++];
      if (etype[e] != EType::Unseen) continue;
      const int w = other(e, v);
      if (num[w] == 0) {
        etype[e] = EType::Tree;
        esrc[e] = v;
        etgt[e] = w;
        tree_arc[w] = e;
        father[w] = v;
        num[w] = ++counter;
        lowpt1[w] = lowpt2[w] = num[w];
        nd[w] = 1;
        frames.push_back({w, 0});
      } else {
        etype[e] = EType::Frond;
        esrc[e] = v;
        etgt[e] = w;
        if (num[w] < lowpt1[v]) {
          lowpt2[v] = lowpt1[v];
          lowpt1[v] = num[w];
        } else if (num[w] > lowpt1[v]) {
          lowpt2[v] = std::min(lowpt2[v], num[w]);
        }
      }
    } else {
      frames.pop_back();
      if (!frames.empty()) {
        const int u = frames.back().v;
        if (lowpt1[v] < lowpt1[u]) {
          lowpt2[u] = std::min(lowpt1[u], lowpt2[v]);
          lowpt1[u] = lowpt1[v];
        } else if (lowpt1[v] == lowpt1[u]) {
          lowpt2[u] = std::min(lowpt2[u], lowpt2[v]);
        } else {
          lowpt2[u] = std::min(lowpt2[u], lowpt1[v]);
        }
        nd[u] += nd[v];
      }
    }
  }
  if (counter != n) throw InvalidModelError("triconnected_decompose: graph not connected");
}

void HtState::build_acceptable_adj() {
  const int maxphi = 3 * n + 2;
  std::vector<std::vector<int>> bucket(maxphi + 1);
  for (int e = 0; e < static_cast<int>(esrc.size()); ++e) {
    if (etype[e] == EType::Removed) continue;
    const int w = etgt[e];
    int phi;
    if (etype[e] == EType::Frond)
      phi = 3 * num[w] + 1;
    else
      phi = (lowpt2[w] < num[esrc[e]]) ? 3 * lowpt1[w] : 3 * lowpt1[w] + 2;
    bucket[phi].push_back(e);
  }
  adj.assign(n, {});
  for (int phi = 1; phi <= maxphi; ++phi) {
    for (const int e : bucket[phi]) {
      adj[esrc[e]].push_back(e);
      in_adj[e] = std::prev(adj[esrc[e]].end());
      in_adj_valid[e] = 1;
    }
  }
}

void HtState::path_finder() {
  newnum.assign(n + 1, 0);
  nodeat.assign(n + 1, -1);
  highpt.assign(n, {});

  int counter = n;
  bool new_path = true;
  struct Frame {
    int v;
    std::list<int>::iterator it;
  };
  std::vector<Frame> frames;
  newnum[start] = counter - nd[start] + 1;
  frames.push_back({start, adj[start].begin()});
  while (!frames.empty()) {
    auto& fr = frames.back();
    const int v = fr.v;
    if (fr.it != adj[v].end()) {
      const int e = *fr.it;
      ++fr.it;
      if (new_path) {
        new_path = false;
        start_path[e] = 1;
      }
      if (etype[e] == EType::Tree) {
        const int w = etgt[e];
        newnum[w] = counter - nd[w] + 1;
        frames.push_back({w, adj[w].begin()});
      } else {
        highpt[etgt[e]].push_back(newnum[v]);
        in_high[e] = std::prev(highpt[etgt[e]].end());
        in_high_valid[e] = 1;
        new_path = true;
      }
    } else {
      frames.pop_back();
      if (!frames.empty()) --counter;  // returning along a tree edge
    }
  }

  std::vector<int> old2new(n + 1, 0);
  for (int v = 0; v < n; ++v) old2new[num[v]] = newnum[v];
  for (int v = 0; v < n; ++v) {
    nodeat[newnum[v]] = v;
    lowpt1[v] = old2new[lowpt1[v]];
    lowpt2[v] = old2new[lowpt2[v]];
  }
}

void HtState::path_search() {
  // Iterative recursion over the acceptable adjacency structure.
  struct Frame {
    int v;
    std::list<int>::iterator it, it_next;
    int e = -1;  // tree edge being expanded (original value)
    int outv = 0;
    bool resume = false;
  };
  std::vector<Frame> frames;
  {
    Frame f;
    f.v = start;
    f.it = adj[start].begin();
    f.outv = static_cast<int>(adj[start].size());
    frames.push_back(f);
  }

  while (!frames.empty()) {
    Frame& fr = frames.back();
    const int v = fr.v;
    const int vnum = newnum[v];

    if (!fr.resume) {
      if (fr.it == adj[v].end()) {
        frames.pop_back();
        continue;
      }
      fr.it_next = std::next(fr.it);
      const int e = *fr.it;
      fr.e = e;
      int w = etgt[e];
      const int wnum = newnum[w];

      if (etype[e] == EType::Tree) {
        if (start_path[e]) {
          int y = 0;
          if (ta[ttop] > lowpt1[w]) {
            int b = 0;
            do {
              y = std::max(y, th[ttop]);
              b = tb[ttop--];
            } while (ta[ttop] > lowpt1[w]);
            tpush(y, lowpt1[w], b);
          } else {
            tpush(wnum + nd[w] - 1, lowpt1[w], vnum);
          }
          tpush_eos();
        }
        // Recurse into w; resume handled below.
        fr.resume = true;
        Frame child;
        child.v = w;
        child.it = adj[w].begin();
        child.outv = static_cast<int>(adj[w].size());
        frames.push_back(child);
        continue;
      }

      // Frond.
      if (start_path[e]) {
        int y = 0;
        if (ta[ttop] > wnum) {
          int b = 0;
          do {
            y = std::max(y, th[ttop]);
            b = tb[ttop--];
          } while (ta[ttop] > wnum);
          tpush(y, wnum, b);
        } else {
          tpush(vnum, wnum, vnum);
        }
      }
      estack.push_back(e);
      fr.it = fr.it_next;
      continue;
    }

    // Resume after a tree-edge recursion (fr.e).
    fr.resume = false;
    const int e = fr.e;
    int w = etgt[e];
    int wnum = newnum[w];

    estack.push_back(tree_arc[w]);  // may differ from e after splits below it

    // Type-2 separation pairs.
    while (vnum != 1 &&
           ((ta[ttop] == vnum) ||
            (degree[w] == 2 && !adj[w].empty() && newnum[etgt[adj[w].front()]] > wnum))) {
      const int a = ta[ttop];
      const int b = tb[ttop];
      if (a == vnum && father[nodeat[b]] == nodeat[a]) {
        --ttop;
        continue;
      }
      int e_ab = -1;
      int x = -1;
      int evirt;
      if (degree[w] == 2 && !adj[w].empty() && newnum[etgt[adj[w].front()]] > wnum) {
        // Degree-2 chain: {(v,w), (w,x)} plus a virtual (v,x).
        const int e1 = estack.back();
        estack.pop_back();
        const int e2 = estack.back();
        estack.pop_back();
        adj[w].erase(in_adj[e2]);
        in_adj_valid[e2] = 0;
        x = etgt[e2];
        evirt = new_edge(v, x, EType::Tree);
        --degree[x];
        --degree[v];
        const int c = new_comp(CompType::Polygon);
        comps[c].edges = {e1, e2, evirt};
        if (!estack.empty()) {
          const int e1b = estack.back();
          if (esrc[e1b] == x && etgt[e1b] == v) {
            e_ab = e1b;
            estack.pop_back();
            adj[x].erase(in_adj[e_ab]);
            in_adj_valid[e_ab] = 0;
            del_high(e_ab);
          }
        }
      } else {
        // TSTACK pair (a, b).
        const int h = th[ttop--];
        const int c = new_comp(CompType::Triconnected);
        while (true) {
          if (estack.empty()) break;
          const int exy = estack.back();
          const int xs = newnum[esrc[exy]], ys = newnum[etgt[exy]];
          if (!(a <= xs && xs <= h && a <= ys && ys <= h)) break;
          if ((xs == a && ys == b) || (ys == a && xs == b)) {
            e_ab = exy;
            estack.pop_back();
            if (in_adj_valid[e_ab] && in_adj[e_ab] != fr.it) {
              adj[esrc[e_ab]].erase(in_adj[e_ab]);
            }
            in_adj_valid[e_ab] = 0;
            del_high(e_ab);
          } else {
            estack.pop_back();
            if (in_adj_valid[exy] && in_adj[exy] != fr.it) {
              adj[esrc[exy]].erase(in_adj[exy]);
              in_adj_valid[exy] = 0;
            }
            comps[c].edges.push_back(exy);
            del_high(exy);
            --degree[esrc[exy]];
            --degree[etgt[exy]];
          }
        }
        evirt = new_edge(nodeat[a], nodeat[b], EType::Tree);
        finish_tric_or_poly(c, evirt);
        x = nodeat[b];
      }

      if (e_ab != -1) {
        const int c = new_comp(CompType::Bond);
        comps[c].edges = {e_ab, evirt};
        evirt = new_edge(v, x, EType::Tree);
        comps[c].edges.push_back(evirt);
        --degree[x];
        --degree[v];
      }

      estack.push_back(evirt);
      *fr.it = evirt;
      in_adj[evirt] = fr.it;
      in_adj_valid[evirt] = 1;
      ++degree[x];
      ++degree[v];
      father[x] = v;
      tree_arc[x] = evirt;
      etype[evirt] = EType::Tree;

      w = x;
      wnum = newnum[w];
    }

    // Type-1 separation pair (lowpt1(w), v).
    if (lowpt2[w] >= vnum && lowpt1[w] < vnum && (father[v] != start || fr.outv >= 2)) {
      const int c = new_comp(CompType::Triconnected);
      int xs = -1, ys = -1;
      while (!estack.empty()) {
        const int exy = estack.back();
        xs = newnum[esrc[exy]];
        ys = newnum[etgt[exy]];
        if (!((wnum <= xs && xs < wnum + nd[w]) || (wnum <= ys && ys < wnum + nd[w]))) break;
        estack.pop_back();
        comps[c].edges.push_back(exy);
        del_high(exy);
        --degree[esrc[exy]];
        --degree[etgt[exy]];
      }
      int evirt = new_edge(v, nodeat[lowpt1[w]], EType::Frond);
      finish_tric_or_poly(c, evirt);

      if ((xs == vnum && ys == lowpt1[w]) || (ys == vnum && xs == lowpt1[w])) {
        const int cb = new_comp(CompType::Bond);
        const int eh = estack.back();
        estack.pop_back();
        if (in_adj_valid[eh] && in_adj[eh] != fr.it) {
          adj[esrc[eh]].erase(in_adj[eh]);
          in_adj_valid[eh] = 0;
        }
        comps[cb].edges = {eh, evirt};
        evirt = new_edge(v, nodeat[lowpt1[w]], EType::Frond);
        comps[cb].edges.push_back(evirt);
        in_high[evirt] = in_high[eh];
        in_high_valid[evirt] = in_high_valid[eh];
        in_high_valid[eh] = 0;
        --degree[v];
        --degree[nodeat[lowpt1[w]]];
      }

      if (nodeat[lowpt1[w]] != father[v]) {
        estack.push_back(evirt);
        *fr.it = evirt;
        in_adj[evirt] = fr.it;
        in_adj_valid[evirt] = 1;
        if (!in_high_valid[evirt] && high(nodeat[lowpt1[w]]) < vnum) {
          highpt[nodeat[lowpt1[w]]].push_front(vnum);
          in_high[evirt] = highpt[nodeat[lowpt1[w]]].begin();
          in_high_valid[evirt] = 1;
        }
        ++degree[v];
        ++degree[nodeat[lowpt1[w]]];
      } else {
        adj[v].erase(fr.it);
        const int cb = new_comp(CompType::Bond);
        comps[cb].edges.push_back(evirt);
        const int evirt2 = new_edge(nodeat[lowpt1[w]], v, EType::Tree);
        comps[cb].edges.push_back(evirt2);
        const int old_arc = tree_arc[v];
        comps[cb].edges.push_back(old_arc);
        tree_arc[v] = evirt2;
        if (in_adj_valid[old_arc]) {
          in_adj[evirt2] = in_adj[old_arc];
          *in_adj[evirt2] = evirt2;
          in_adj_valid[evirt2] = 1;
          in_adj_valid[old_arc] = 0;
        }
      }
    }

    if (start_path[e]) {
      while (t_not_eos()) --ttop;
      --ttop;
    }
    while (t_not_eos() && tb[ttop] != vnum && high(v) > th[ttop]) --ttop;

    --fr.outv;
    fr.it = fr.it_next;
  }
}

}  // namespace

std::vector<TriconComponent> triconnected_decompose(const Graph& g) {
  const int n = g.num_vertices();
  if (n < 3) throw InvalidModelError("triconnected_decompose requires |V| >= 3");
  {
    std::unordered_set<std::int64_t> seen;
    for (const Edge& e : g.edges()) {
      const std::int64_t key = std::int64_t(std::min(e.u, e.v)) * n + std::max(e.u, e.v);
      if (!seen.insert(key).second)
        throw InvalidModelError("triconnected_decompose requires a normal graph");
    }
    const auto bic = biconnected_decompose(g);
    if (bic.components.size() != 1)
      throw InvalidModelError("triconnected_decompose requires a biconnected graph");
  }

  HtState st;
  st.n = n;
  const int m0 = g.num_edges();
  st.esrc.reserve(3 * m0);
  for (const Edge& e : g.edges()) {
    st.esrc.push_back(e.u);
    st.etgt.push_back(e.v);
    st.eorig.push_back(e.id);
    st.etype.push_back(EType::Unseen);
  }
  st.in_adj.resize(m0);
  st.in_adj_valid.assign(m0, 0);
  st.in_high.resize(m0);
  st.in_high_valid.assign(m0, 0);
  st.start_path.assign(m0, 0);
  st.start = 0;

  st.dfs1();
  st.build_acceptable_adj();
  st.path_finder();
  st.th.assign(1, -1);
  st.ta.assign(1, -1);
  st.tb.assign(1, -1);
  st.ttop = 0;
  st.path_search();

  // Remaining edges form the last component.
  {
    const int c = st.new_comp(CompType::Triconnected);
    for (const int e : st.estack) st.comps[c].edges.push_back(e);
    st.estack.clear();
    st.comps[c].type =
        st.comps[c].edges.size() > 4 ? CompType::Triconnected : CompType::Polygon;
  }

  // Merge polygons with polygons and bonds with bonds along shared virtual
  // edges (this is what makes the decomposition unique).
  const int ne = static_cast<int>(st.esrc.size());
  std::vector<int> comp_a(ne, -1), comp_b(ne, -1);
  std::vector<std::list<int>::iterator> item_a(ne), item_b(ne);
  for (std::size_t ci = 0; ci < st.comps.size(); ++ci) {
    auto& lst = st.comps[ci].edges;
    for (auto it = lst.begin(); it != lst.end(); ++it) {
      if (comp_a[*it] == -1) {
        comp_a[*it] = static_cast<int>(ci);
        item_a[*it] = it;
      } else {
        comp_b[*it] = static_cast<int>(ci);
        item_b[*it] = it;
      }
    }
  }
  std::vector<char> visited(st.comps.size(), 0);
  std::vector<char> edge_gone(ne, 0);
  for (std::size_t ci = 0; ci < st.comps.size(); ++ci) {
    auto& c1 = st.comps[ci];
    visited[ci] = 1;
    if (c1.edges.empty()) continue;
    if (c1.type != CompType::Polygon && c1.type != CompType::Bond) continue;
    for (auto it = c1.edges.begin(); it != c1.edges.end();) {
      auto it_next = std::next(it);
      const int e = *it;
      if (st.eorig[e] == -1 && !edge_gone[e]) {
        int j = comp_a[e];
        std::list<int>::iterator it2 = item_a[e];
        if (visited[j]) {
          j = comp_b[e];
          it2 = item_b[e];
        }
        if (j >= 0 && !visited[j] && st.comps[j].type == c1.type) {
          visited[j] = 1;
          auto& l2 = st.comps[j].edges;
          l2.erase(it2);
          const bool at_end = (it_next == c1.edges.end());
          c1.edges.splice(c1.edges.end(), l2);
          if (at_end) it_next = std::next(it);
          c1.edges.erase(it);
          edge_gone[e] = 1;
        }
      }
      it = it_next;
    }
  }

  // Convert to the public representation.
  std::vector<TriconComponent> out;
  for (auto& c : st.comps) {
    if (c.edges.empty()) continue;
    TriconComponent tc;
    std::vector<int> local_of(n, -1);
    auto local = [&](int v) {
      if (local_of[v] == -1) {
        local_of[v] = static_cast<int>(tc.vertex_map.size());
        tc.vertex_map.push_back(v);
      }
      return local_of[v];
    };
    std::vector<int> edges_sorted(c.edges.begin(), c.edges.end());
    std::sort(edges_sorted.begin(), edges_sorted.end());
    Graph lg = Graph::empty(0, true);
    std::vector<std::pair<int, int>> pairs;
    for (const int e : edges_sorted) {
      pairs.emplace_back(local(st.esrc[e]), local(st.etgt[e]));
      tc.edge_map.push_back(st.eorig[e]);
      tc.virtual_pair_id.push_back(st.eorig[e] == -1 ? e : -1);
    }
    lg = Graph::empty(static_cast<int>(tc.vertex_map.size()), true);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      lg.add_edge(pairs[i].first, pairs[i].second, tc.edge_map[i] == -1);
    tc.graph = std::move(lg);
    switch (c.type) {
      case CompType::Bond:
        tc.kind = TriconKind::MultipleBond;
        break;
      case CompType::Polygon:
        tc.kind = TriconKind::Cycle;
        break;
      default:
        tc.kind = TriconKind::TriconnectedGraph;
    }
    out.push_back(std::move(tc));
  }
  return out;
}

// ════════════════════════════════════════════════════════════════════
//  Tree assembly, classification, DOT dump
// ════════════════════════════════════════════════════════════════════

std::vector<int> TriconTree::postorder() const {
  std::vector<int> order;
  std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [v, idx] = stack.back();
    if (idx < children[v].size()) {
      const int te = children[v][idx++];
      stack.emplace_back(edges[te].child, 0);
    } else {
      order.push_back(v);
      stack.pop_back();
    }
  }
  return order;
}

TriconTree build_tricon_tree(std::vector<TriconComponent> components, RootPolicy) {
  TriconTree t;
  t.nodes = std::move(components);
  const int k = static_cast<int>(t.nodes.size());

  // Match virtual edge copies across components.
  std::unordered_map<int, std::pair<int, int>> first_seen;  // pair id -> (node, local edge)
  struct Link {
    int na, ea, nb, eb;
  };
  std::vector<Link> links;
  for (int ni = 0; ni < k; ++ni) {
    const auto& c = t.nodes[ni];
    for (int le = 0; le < c.graph.num_edges(); ++le) {
      const int pid = c.virtual_pair_id[le];
      if (pid < 0) continue;
      auto it = first_seen.find(pid);
      if (it == first_seen.end()) {
        first_seen.emplace(pid, std::make_pair(ni, le));
      } else {
        links.push_back({it->second.first, it->second.second, ni, le});
        first_seen.erase(it);
      }
    }
  }
  if (!first_seen.empty()) throw InvalidModelError("virtual edge without a peer copy");
  if (static_cast<int>(links.size()) != k - 1)
    throw InvalidModelError("virtual-edge links do not form a tree");

  int root = -1;
  for (int ni = 0; ni < k; ++ni)
    if (t.nodes[ni].kind != TriconKind::MultipleBond) {
      root = ni;
      break;
    }
  if (root == -1) root = 0;
  t.root = root;

  std::vector<std::vector<std::pair<int, int>>> adj(k);  // (link id, other node)
  for (std::size_t li = 0; li < links.size(); ++li) {
    adj[links[li].na].emplace_back(static_cast<int>(li), links[li].nb);
    adj[links[li].nb].emplace_back(static_cast<int>(li), links[li].na);
  }
  t.parent.assign(k, -1);
  t.parent_edge_local.assign(k, -1);
  t.children.assign(k, {});
  std::vector<char> vis(k, 0);
  std::queue<int> q;
  q.push(root);
  vis[root] = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (const auto& [li, w] : adj[v]) {
      if (vis[w]) continue;
      vis[w] = 1;
      const Link& l = links[li];
      TriconTreeEdge te;
      te.parent = v;
      te.child = w;
      te.parent_edge = (l.na == v) ? l.ea : l.eb;
      te.child_edge = (l.na == v) ? l.eb : l.ea;
      t.parent[w] = v;
      t.parent_edge_local[w] = te.child_edge;
      t.children[v].push_back(static_cast<int>(t.edges.size()));
      t.edges.push_back(te);
      q.push(w);
    }
  }
  for (int ni = 0; ni < k; ++ni)
    if (!vis[ni]) throw InvalidModelError("component tree is disconnected");
  return t;
}

NodeClass classify_component(const TriconComponent& c, int size_bound) {
  if (c.kind == TriconKind::MultipleBond) return NodeClass::MultipleBond;
  if (planar_embed(c.graph).has_value()) return NodeClass::Planar;
  if (c.graph.num_vertices() <= size_bound) return NodeClass::SmallNonplanar;
  throw UnsupportedTopologyError("nonplanar triconnected component with " +
                                 std::to_string(c.graph.num_vertices()) +
                                 " vertices exceeds the enumeration bound " +
                                 std::to_string(size_bound));
}

std::string tricon_tree_to_dot(const TriconTree& t) {
  std::ostringstream os;
  os << "graph tricon_tree {\n";
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const char* kind = t.nodes[i].kind == TriconKind::MultipleBond
                           ? "bond"
                           : (t.nodes[i].kind == TriconKind::Cycle ? "cycle" : "tricon");
    os << "  n" << i << " [label=\"" << kind << " n=" << t.nodes[i].graph.num_vertices()
       << " m=" << t.nodes[i].graph.num_edges() << (static_cast<int>(i) == t.root ? " root" : "")
       << "\"];\n";
  }
  for (const auto& e : t.edges) os << "  n" << e.parent << " -- n" << e.child << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace ising
