#include "ising/testkit.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "rotation_edit.hpp"

namespace ising::testkit {

namespace {

// Streaming log-sum-exp accumulator.
struct LogSum {
  double mx = -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  void add(double lw) {
    if (lw <= mx) {
      acc += std::exp(lw - mx);
    } else {
      acc = acc * std::exp(mx - lw) + 1.0;
      mx = lw;
    }
  }
  double value() const { return mx + std::log(acc); }
  bool empty() const { return acc == 0.0; }
};

}  // namespace

double brute_log_z(const IsingModel& m) {
  m.validate();
  const int n = m.graph.num_vertices();
  if (n > 25) throw InvalidModelError("brute_log_z limited to N <= 25");
  if (n == 0) return 0.0;

  std::vector<std::int8_t> x(n, -1);
  double energy = 0.0;
  for (const Edge& e : m.graph.edges()) energy += m.coupling[e.id];  // all spins equal

  LogSum ls;
  ls.add(energy);
  // Gray-code walk: step i flips spin ctz(i).
  const std::uint64_t total = 1ull << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int v = __builtin_ctzll(i);
    double field = 0.0;
    for (const auto& [e, w] : m.graph.adjacency(v)) field += m.coupling[e] * x[w];
    energy -= 2.0 * x[v] * field;
    x[v] = static_cast<std::int8_t>(-x[v]);
    ls.add(energy);
  }
  return ls.value();
}

std::optional<double> brute_pm_partition(const Graph& host, const std::vector<double>& weights) {
  const int n = host.num_vertices();
  if (n > 24) throw InvalidModelError("brute_pm_partition limited to |V| <= 24");
  if (n % 2 != 0) return std::nullopt;
  if (n == 0) return 0.0;

  LogSum ls;
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self, int v, double logw) -> void {
    while (v < n && used[v]) ++v;
    if (v == n) {
      ls.add(logw);
      return;
    }
    used[v] = 1;
    for (const auto& [e, w] : host.adjacency(v)) {
      if (used[w]) continue;
      used[w] = 1;
      self(self, v + 1, logw + std::log(weights[e]));
      used[w] = 0;
    }
    used[v] = 0;
  };
  rec(rec, 0, 0.0);
  if (ls.empty()) return std::nullopt;
  return ls.value();
}

PiTable brute_pi(const IsingModel& node_model, int p, int t) {
  node_model.validate();
  const int n = node_model.graph.num_vertices();
  if (n > 20) throw InvalidModelError("brute_pi limited to N <= 20");
  LogSum eq, uneq;
  std::vector<std::int8_t> x(n);
  const std::uint64_t total = 1ull << n;
  for (std::uint64_t c = 0; c < total; ++c) {
    if ((c >> p & 1) != 1ull) continue;  // pin x_p = +1
    for (int v = 0; v < n; ++v) x[v] = (c >> v & 1) ? 1 : -1;
    double en = 0.0;
    for (const Edge& e : node_model.graph.edges()) en += node_model.coupling[e.id] * x[e.u] * x[e.v];
    (x[t] == 1 ? eq : uneq).add(en);
  }
  PiTable pi;
  pi.log_pi_equal = eq.value();
  pi.log_pi_unequal = uneq.value();
  return pi;
}

// ════════════════════════════════════════════════════════════════════
//  Generators
// ════════════════════════════════════════════════════════════════════

PlanarEmbedding gen_random_planar(int target_size, Rng& rng) {
  if (target_size < 3) throw InvalidModelError("planar generator needs size >= 3");
  const int n = target_size;

  // Random embedded tree, one leaf at a time; the new edge lands at a random
  // slot of the parent's rotation.
  Graph g = Graph::empty(n);
  std::vector<std::vector<int>> rot(n);
  for (int v = 1; v < n; ++v) {
    const int parent = static_cast<int>(rng.uniform_below(v));
    const int e = g.add_edge(parent, v);
    auto& r = rot[parent];
    r.insert(r.begin() + static_cast<long>(rng.uniform_below(r.size() + 1)), e);
    rot[v].push_back(e);
  }
  PlanarEmbedding emb{std::move(g), std::move(rot)};

  detail::RotationEditor ed(emb);
  detail::PairSet pairs(emb.graph);
  detail::triangulate_all_faces(ed, pairs);
  return ed.finish();
}

PlanarEmbedding gen_random_planar(const GeneratorConfig& cfg) {
  Rng rng(cfg.seed);
  return gen_random_planar(cfg.target_size, rng);
}

IsingModel with_random_couplings(Graph g, double stddev, Rng& rng) {
  IsingModel m;
  m.coupling.resize(g.num_edges());
  for (auto& j : m.coupling) j = stddev * rng.normal();
  m.graph = std::move(g);
  return m;
}

IsingModel gen_random_k33free(const GeneratorConfig& cfg) {
  if (cfg.target_size < 5) throw InvalidModelError("K33-free generator needs size >= 5");
  Rng rng(cfg.seed);
  const int target = cfg.target_size;

  struct Slot {
    int u, v;
  };
  struct NodeRec {
    std::vector<Slot> free_edges;
  };
  std::vector<NodeRec> nodes;
  std::vector<std::pair<int, int>> edges;
  int nv = 5;

  // K5 root.
  {
    NodeRec root;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) {
        edges.emplace_back(i, j);
        root.free_edges.push_back({i, j});
      }
    nodes.push_back(std::move(root));
  }

  while (nv < target) {
    const int room = target - nv;
    const bool pick_k5 = room >= 3 && rng.coin();

    // Host slot: a random free edge of a random node.
    int host_node;
    do {
      host_node = static_cast<int>(rng.uniform_below(nodes.size()));
    } while (nodes[host_node].free_edges.empty());
    auto& fe = nodes[host_node].free_edges;
    const std::size_t slot_idx = rng.uniform_below(fe.size());
    const Slot slot = fe[slot_idx];
    fe.erase(fe.begin() + static_cast<long>(slot_idx));

    NodeRec child;
    if (pick_k5) {
      // Shared edge = (slot.u, slot.v); three fresh vertices.
      std::vector<int> ids{slot.u, slot.v, nv, nv + 1, nv + 2};
      nv += 3;
      for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) {
          if (i == 0 && j == 1) continue;  // the shared edge stays the host's
          edges.emplace_back(ids[i], ids[j]);
          child.free_edges.push_back({ids[i], ids[j]});
        }
    } else {
      const int s = 3 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(room)));
      const PlanarEmbedding pe = gen_random_planar(s, rng);
      const int shared = static_cast<int>(rng.uniform_below(pe.graph.num_edges()));
      const auto& se = pe.graph.edge(shared);
      std::vector<int> ids(s, -1);
      ids[se.u] = slot.u;
      ids[se.v] = slot.v;
      for (int v = 0; v < s; ++v)
        if (ids[v] == -1) ids[v] = nv++;
      for (const Edge& e : pe.graph.edges()) {
        if (e.id == shared) continue;
        edges.emplace_back(ids[e.u], ids[e.v]);
        child.free_edges.push_back({ids[e.u], ids[e.v]});
      }
    }
    nodes.push_back(std::move(child));
  }
  assert(nv == target);
  return with_random_couplings(Graph(nv, edges), cfg.coupling_stddev, rng);
}

Graph gen_k5_necklace(int n) {
  if (n < 1) throw InvalidModelError("necklace needs n >= 1");
  std::vector<std::pair<int, int>> edges;
  if (n == 1) {
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) edges.emplace_back(i, j);
    return Graph(5, edges);
  }
  const int cyc = 2 * n;
  for (int i = 0; i < cyc; ++i) edges.emplace_back(i, (i + 1) % cyc);
  int fresh = cyc;
  for (int i = 0; i < n; ++i) {
    const int a = 2 * i, b = 2 * i + 1;
    const int c0 = fresh, c1 = fresh + 1, c2 = fresh + 2;
    fresh += 3;
    for (const int x : {c0, c1, c2}) {
      edges.emplace_back(a, x);
      edges.emplace_back(b, x);
    }
    edges.emplace_back(c0, c1);
    edges.emplace_back(c1, c2);
    edges.emplace_back(c0, c2);
  }
  return Graph(fresh, edges);
}

double kl_divergence_empirical(const IsingModel& model, const std::vector<SpinConfiguration>& samples,
                               EngineOptions opts) {
  model.validate();
  const int n = model.graph.num_vertices();
  if (n > 20) throw InvalidModelError("kl_divergence_empirical limited to N <= 20");
  if (samples.empty()) throw InvalidModelError("no samples");
  const double log_z = infer_log_z(model, opts);

  std::unordered_map<std::uint32_t, long> counts;
  counts.reserve(samples.size() * 2);
  for (const auto& x : samples) {
    std::uint32_t key = 0;
    for (int v = 0; v < n; ++v)
      if (x[v] > 0) key |= 1u << v;
    ++counts[key];
  }
  const double m = static_cast<double>(samples.size());
  double kl = 0.0;
  for (const auto& [key, cnt] : counts) {
    double en = 0.0;
    for (const Edge& e : model.graph.edges()) {
      const int xu = (key >> e.u & 1) ? 1 : -1;
      const int xv = (key >> e.v & 1) ? 1 : -1;
      en += model.coupling[e.id] * xu * xv;
    }
    const double log_p = en - log_z;
    const double f = cnt / m;
    kl += f * (std::log(f) - log_p);
  }
  return kl;
}

}  // namespace ising::testkit
