#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "ising/planar_pm.hpp"
#include "ising/rng.hpp"
#include "support/oracles.hpp"

using namespace ising;

namespace {

IsingModel cycle_model(int n, double j) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return IsingModel{Graph(n, edges), std::vector<double>(n, j)};
}

IsingModel complete_model(int n, double j) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) edges.emplace_back(i, k);
  return IsingModel{Graph(n, edges), std::vector<double>(edges.size(), j)};
}

// 2^N enumeration of the Ising partition function.
double brute_ising_log_z(const IsingModel& m) {
  const int n = m.graph.num_vertices();
  double mx = -1e300, acc = 0;
  for (std::uint32_t c = 0; c < (1u << n); ++c) {
    double en = 0;
    for (const Edge& e : m.graph.edges()) {
      const int xu = (c >> e.u & 1) ? 1 : -1;
      const int xv = (c >> e.v & 1) ? 1 : -1;
      en += m.coupling[e.id] * xu * xv;
    }
    if (en > mx) {
      acc = acc * std::exp(mx - en) + 1.0;
      mx = en;
    } else {
      acc += std::exp(en - mx);
    }
  }
  return mx + std::log(acc);
}

double brute_pm_log_sum(const Graph& g, const std::vector<double>& w) {
  double mx = -1e300, acc = 0;
  bool any = false;
  testsupport::for_each_perfect_matching(g, [&](const std::vector<int>& pm) {
    double lw = 0;
    for (const int e : pm) lw += std::log(w[e]);
    any = true;
    if (lw > mx) {
      acc = acc * std::exp(mx - lw) + 1.0;
      mx = lw;
    } else {
      acc += std::exp(lw - mx);
    }
  });
  REQUIRE(any);
  return mx + std::log(acc);
}

// Random connected planar model: random planar graph by edge filtering.
IsingModel random_planar_model(int n, Rng& rng) {
  while (true) {
    std::vector<std::pair<int, int>> all;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) all.emplace_back(i, j);
    for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[rng.uniform_below(i)]);
    Graph g = Graph::empty(n);
    int added = 0;
    for (const auto& [u, v] : all) {
      Graph trial = g;
      trial.add_edge(u, v);
      if (planar_embed(trial)) {
        g = std::move(trial);
        ++added;
      }
      if (added >= 2 * n) break;
    }
    if (!g.is_connected()) continue;
    std::vector<double> j(g.num_edges());
    for (auto& x : j) x = 0.4 * rng.normal();
    return IsingModel{std::move(g), std::move(j)};
  }
}

void check_pfaffian_property(const Graph& host, const std::vector<std::int8_t>& orient) {
  // Every even cycle whose vertex complement has a perfect matching must be
  // odd-oriented.
  const int n = host.num_vertices();
  std::vector<std::vector<int>> cycles;
  std::vector<int> path;
  std::vector<char> on_path(n, 0);
  auto dfs = [&](auto&& self, int start, int v) -> void {
    for (const auto& [e, w] : host.adjacency(v)) {
      if (w == start && path.size() >= 3) {
        if (path[1] < path.back()) cycles.push_back(path);  // one direction only
      } else if (w > start && !on_path[w]) {
        path.push_back(w);
        on_path[w] = 1;
        self(self, start, w);
        on_path[w] = 0;
        path.pop_back();
      }
    }
  };
  for (int s = 0; s < n; ++s) {
    path = {s};
    on_path.assign(n, 0);
    on_path[s] = 1;
    dfs(dfs, s, s);
  }
  int checked = 0;
  for (const auto& cyc : cycles) {
    if (cyc.size() % 2 != 0) continue;
    std::vector<char> removed(n, 0);
    for (const int v : cyc) removed[v] = 1;
    std::vector<int> rest;
    for (int v = 0; v < n; ++v)
      if (!removed[v]) rest.push_back(v);
    // Perfect matching on the complement?
    std::vector<int> local(n, -1);
    for (std::size_t i = 0; i < rest.size(); ++i) local[rest[i]] = static_cast<int>(i);
    Graph sub = Graph::empty(static_cast<int>(rest.size()));
    for (const Edge& e : host.edges())
      if (local[e.u] >= 0 && local[e.v] >= 0) sub.add_edge(local[e.u], local[e.v]);
    bool has_pm = false;
    testsupport::for_each_perfect_matching(sub, [&](const std::vector<int>&) { has_pm = true; });
    if (!has_pm) continue;
    int along = 0;
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      const int a = cyc[i], b = cyc[(i + 1) % cyc.size()];
      for (const auto& [e, w] : host.adjacency(a))
        if (w == b) {
          const bool co = (host.edge(e).u == a) == (orient[e] == 1);
          along += co ? 1 : 0;
          break;
        }
    }
    ++checked;
    CHECK(along % 2 == 1);
  }
  CHECK(checked > 0);
}

}  // namespace

TEST_CASE("triangulate: K3 unchanged, cycles get zero-coupling chords") {
  auto k3 = complete_model(3, 1.0);
  auto e3 = planar_embed(k3.graph);
  auto t3 = triangulate(EmbeddedModel{k3, *e3});
  CHECK(t3.model.graph.num_edges() == 3);

  // Every face, the unbounded one included, must become a triangle, so the
  // result is maximal planar with 3N - 6 edges.
  auto c4 = cycle_model(4, 0.7);
  auto t4 = triangulate(EmbeddedModel{c4, *planar_embed(c4.graph)});
  CHECK(t4.model.graph.num_edges() == 6);
  CHECK(t4.model.coupling[4] == 0.0);
  CHECK(t4.model.coupling[5] == 0.0);

  auto c6 = cycle_model(6, 0.2);
  auto t6 = triangulate(EmbeddedModel{c6, *planar_embed(c6.graph)});
  CHECK(t6.model.graph.num_edges() == 12);
  for (int e = 6; e < 12; ++e) CHECK(t6.model.coupling[e] == 0.0);
  for (const auto& f : enumerate_faces(t6.emb)) CHECK(f.size() == 3);
  // Still simple.
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : t6.model.graph.edges()) {
    auto pr = std::minmax(e.u, e.v);
    CHECK(seen.insert({pr.first, pr.second}).second);
  }
}

TEST_CASE("triangulate: random planar models end up all-triangle and simple") {
  Rng rng(99);
  for (int t = 0; t < 12; ++t) {
    auto m = random_planar_model(5 + static_cast<int>(rng.uniform_below(9)), rng);
    if (biconnected_decompose(m.graph).components.size() != 1) continue;
    auto tri = triangulate(EmbeddedModel{m, *planar_embed(m.graph)});
    for (const auto& f : enumerate_faces(tri.emb)) CHECK(f.size() == 3);
    CHECK(tri.model.graph.num_edges() == 3 * tri.model.graph.num_vertices() - 6);
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : tri.model.graph.edges()) {
      auto pr = std::minmax(e.u, e.v);
      CHECK(seen.insert({pr.first, pr.second}).second);
    }
  }
}

TEST_CASE("expanded dual: counting identities and degree") {
  auto k3 = complete_model(3, 0.5);
  auto d3 = build_expanded_dual(triangulate(EmbeddedModel{k3, *planar_embed(k3.graph)}));
  CHECK(d3.emb.graph.num_vertices() == 6);
  CHECK(d3.emb.graph.num_edges() == 9);

  auto k4 = complete_model(4, 0.5);
  auto d4 = build_expanded_dual(triangulate(EmbeddedModel{k4, *planar_embed(k4.graph)}));
  CHECK(d4.emb.graph.num_vertices() == 12);
  int intercity = 0;
  for (const auto f : d4.is_intercity) intercity += f;
  CHECK(intercity == 6);
  CHECK(d4.emb.graph.num_edges() - intercity == 12);

  Rng rng(5);
  auto m = random_planar_model(6, rng);
  if (biconnected_decompose(m.graph).components.size() == 1) {
    auto tri = triangulate(EmbeddedModel{m, *planar_embed(m.graph)});
    auto d = build_expanded_dual(tri);
    const Graph& dg = d.emb.graph;
    CHECK(dg.num_vertices() == 2 * tri.model.graph.num_edges());
    for (int v = 0; v < dg.num_vertices(); ++v) CHECK(dg.degree(v) == 3);
    // The dual embedding is a valid planar embedding.
    const auto faces = enumerate_faces(d.emb);
    CHECK(dg.num_vertices() - dg.num_edges() + static_cast<int>(faces.size()) == 2);
    // E*_I is a perfect matching of G*.
    std::vector<char> cov(dg.num_vertices(), 0);
    for (int e = 0; e < dg.num_edges(); ++e)
      if (d.is_intercity[e]) {
        CHECK(!cov[dg.edge(e).u]);
        CHECK(!cov[dg.edge(e).v]);
        cov[dg.edge(e).u] = cov[dg.edge(e).v] = 1;
      }
    for (int v = 0; v < dg.num_vertices(); ++v) CHECK(cov[v] == 1);
  }
}

TEST_CASE("M mapping: fixtures and round trips") {
  auto k3 = complete_model(3, 1.0);
  auto tri = triangulate(EmbeddedModel{k3, *planar_embed(k3.graph)});
  auto d = build_expanded_dual(tri);

  const SpinConfiguration ones(3, +1);
  auto pm1 = spins_to_pm(d, ones);
  CHECK(pm1.edges.size() == 3);  // |V*|/2
  for (const int e : pm1.edges) CHECK(d.is_intercity[e] == 1);

  SpinConfiguration x{+1, +1, -1};
  auto pmx = spins_to_pm(d, x);
  int inter = 0;
  for (const int e : pmx.edges)
    if (d.is_intercity[e]) {
      ++inter;
      CHECK(d.primal_edge[e] == 0);  // the {0,1} edge of K3
    }
  CHECK(inter == 1);

  SpinConfiguration xn{-1, -1, +1};
  CHECK(spins_to_pm(d, xn).edges == pmx.edges);

  CHECK(pm_to_spins(d, pm1) == ones);
  // Round-trip over all of C+.
  for (int c = 0; c < 4; ++c) {
    SpinConfiguration s{+1, static_cast<std::int8_t>(c & 1 ? 1 : -1),
                        static_cast<std::int8_t>(c & 2 ? 1 : -1)};
    auto pm = spins_to_pm(d, s);
    CHECK(pm_to_spins(d, pm) == s);
  }

  Rng rng(31);
  auto m = random_planar_model(10, rng);
  auto embm = planar_embed(m.graph);
  auto trim = triangulate(EmbeddedModel{m, *embm});
  auto dm = build_expanded_dual(trim);
  for (int t = 0; t < 50; ++t) {
    SpinConfiguration s(10);
    s[0] = +1;
    for (int v = 1; v < 10; ++v) s[v] = rng.coin() ? 1 : -1;
    CHECK(pm_to_spins(dm, spins_to_pm(dm, s)) == s);
  }
}

TEST_CASE("pfaffian orientation: small hosts and expanded duals") {
  // 4-cycle.
  Graph c4(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto e4 = planar_embed(c4);
  auto o4 = pfaffian_orient(*e4);
  check_pfaffian_property(c4, o4);

  auto k4 = complete_model(4, 0.3);
  auto d4 = build_expanded_dual(triangulate(EmbeddedModel{k4, *planar_embed(k4.graph)}));
  check_pfaffian_property(d4.emb.graph, pfaffian_orient(d4.emb));

  Rng rng(8);
  auto m = random_planar_model(5, rng);
  if (biconnected_decompose(m.graph).components.size() == 1) {
    auto d = build_expanded_dual(triangulate(EmbeddedModel{m, *planar_embed(m.graph)}));
    check_pfaffian_property(d.emb.graph, pfaffian_orient(d.emb));
  }
}

TEST_CASE("kasteleyn: single edge, 4-cycle, skew symmetry") {
  Graph g2(2, {{0, 1}});
  const double c = 3.7;
  KasteleynSystem ks2(g2, {c}, {1}, PerfectMatching{{0}});
  auto r2 = log_pm_partition(ks2);
  CHECK(r2.log_z == doctest::Approx(std::log(c)).epsilon(1e-12));

  Graph c4(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto e4 = planar_embed(c4);
  auto o4 = pfaffian_orient(*e4);
  KasteleynSystem ks4(c4, {1, 1, 1, 1}, o4, PerfectMatching{{0, 2}});
  auto r4 = log_pm_partition(ks4);
  CHECK(r4.log_z == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // K + K^T = 0 (recover K from K-bar by undoing the column swap).
  auto kb = ks4.dense_kbar();
  Eigen::MatrixXd k(4, 4);
  k.setZero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) k(i, j) = kb(i, j ^ 1);
  CHECK((k + k.transpose()).norm() == 0.0);
}

TEST_CASE("PM partition identity: determinant vs brute enumeration") {
  Rng rng(2024);
  int done = 0;
  while (done < 8) {
    auto m = random_planar_model(4 + static_cast<int>(rng.uniform_below(3)), rng);
    if (biconnected_decompose(m.graph).components.size() != 1) continue;
    auto tri = triangulate(EmbeddedModel{m, *planar_embed(m.graph)});
    auto d = build_expanded_dual(tri);
    auto orient = pfaffian_orient(d.emb);
    const SpinConfiguration ones(tri.model.graph.num_vertices(), +1);
    KasteleynSystem ks(d.emb.graph, d.weight, orient, spins_to_pm(d, ones));
    const double lz = log_pm_partition(ks).log_z;
    const double brute = brute_pm_log_sum(d.emb.graph, d.weight);
    CHECK(lz == doctest::Approx(brute).epsilon(1e-10));
    ++done;
  }
}

TEST_CASE("log_partition_planar_ising: closed forms and brute oracle") {
  IsingModel edge{Graph(2, {{0, 1}}), {0.5}};
  CHECK(log_partition_planar_ising(edge) ==
        doctest::Approx(std::log(4.0 * std::cosh(0.5))).epsilon(1e-12));

  auto tri = complete_model(3, 1.0);
  CHECK(log_partition_planar_ising(tri) ==
        doctest::Approx(std::log(2.0 * std::exp(3.0) + 6.0 * std::exp(-1.0))).epsilon(1e-12));

  Rng rng(77);
  for (int t = 0; t < 6; ++t) {
    auto m = random_planar_model(8 + static_cast<int>(rng.uniform_below(5)), rng);
    const double got = log_partition_planar_ising(m);
    const double want = brute_ising_log_z(m);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("weight locality: one coupling bump moves one intercity weight") {
  Rng rng(11);
  auto m = random_planar_model(9, rng);
  const double base = log_partition_planar_ising(m);
  IsingModel m2 = m;
  m2.coupling[2] += 0.37;
  CHECK(log_partition_planar_ising(m2) == doctest::Approx(brute_ising_log_z(m2)).epsilon(1e-9));
  CHECK(std::abs(base - log_partition_planar_ising(m)) < 1e-12);
}

TEST_CASE("planar separator: fixtures and bounds") {
  Graph path3(3, {{0, 1}, {1, 2}});
  auto sep = planar_separator(*planar_embed(path3));
  REQUIRE(sep.separator.size() == 1);
  CHECK(sep.separator[0] == 1);

  // 10x10 grid.
  std::vector<std::pair<int, int>> edges;
  auto id = [](int r, int c) { return r * 10 + c; };
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) {
      if (c + 1 < 10) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < 10) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  Graph grid(100, edges);
  auto s = planar_separator(*planar_embed(grid));
  CHECK(s.separator.size() <= 28);
  CHECK(std::max(s.part1.size(), s.part2.size()) <= 67);
  // No edge joins the two parts.
  std::vector<int> where(100, 0);
  for (const int v : s.part1) where[v] = 1;
  for (const int v : s.part2) where[v] = 2;
  for (const Edge& e : grid.edges()) CHECK(where[e.u] * where[e.v] != 2);
}

TEST_CASE("nested dissection: path, grid fill bound, forced separator") {
  Graph path3(3, {{0, 1}, {1, 2}});
  auto ord = nested_dissection_order(path3);
  CHECK(ord.back() == 1);

  std::vector<std::pair<int, int>> edges;
  auto id = [](int r, int c) { return r * 12 + c; };
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c) {
      if (c + 1 < 12) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < 12) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  Graph grid(144, edges);
  auto nd = nested_dissection_order(grid);
  REQUIRE(nd.size() == 144);
  std::vector<char> seen(144, 0);
  for (const int v : nd) {
    CHECK(!seen[v]);
    seen[v] = 1;
  }
  // Fill-in under this order stays within the nested-dissection budget.
  {
    std::vector<std::set<int>> nz(144);
    std::vector<int> pos(144);
    for (int i = 0; i < 144; ++i) pos[nd[i]] = i;
    for (const Edge& e : grid.edges()) {
      nz[std::min(pos[e.u], pos[e.v])].insert(std::max(pos[e.u], pos[e.v]));
    }
    long long fill = 0;
    for (int k = 0; k < 144; ++k) {
      fill += static_cast<long long>(nz[k].size());
      std::vector<int> col(nz[k].begin(), nz[k].end());
      for (std::size_t a = 0; a < col.size(); ++a)
        for (std::size_t b = a + 1; b < col.size(); ++b) nz[col[a]].insert(col[b]);
    }
    // c * n log2 n with a generous constant.
    CHECK(fill < 8.0 * 144.0 * std::log2(144.0));
  }

  std::vector<int> forced{5, 17, 29};
  auto ordf = nested_dissection_order(grid, &forced);
  CHECK(ordf[141] == 5);
  CHECK(ordf[142] == 17);
  CHECK(ordf[143] == 29);

  // The 12 sqrt(n) bound can only bite for n > 144; build a 20x20 grid.
  {
    std::vector<std::pair<int, int>> e2;
    auto id2 = [](int r, int c) { return r * 20 + c; };
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 20; ++c) {
        if (c + 1 < 20) e2.emplace_back(id2(r, c), id2(r, c + 1));
        if (r + 1 < 20) e2.emplace_back(id2(r, c), id2(r + 1, c));
      }
    Graph big(400, e2);
    std::vector<int> huge;
    for (int i = 0; i < 300; ++i) huge.push_back(i);
    CHECK_THROWS_AS(nested_dissection_order(big, &huge), OversizedSeparatorError);
  }
}
