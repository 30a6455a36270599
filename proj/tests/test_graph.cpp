#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "ising/graph.hpp"
#include "ising/rng.hpp"
#include "support/oracles.hpp"

using namespace ising;

namespace {

Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, edges);
}

Graph k33() {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 3; ++i)
    for (int j = 3; j < 6; ++j) edges.emplace_back(i, j);
  return Graph(6, edges);
}

Graph cycle_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, edges);
}

Graph grid_graph(int rows, int cols) {
  std::vector<std::pair<int, int>> edges;
  auto id = [&](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  return Graph(rows * cols, edges);
}

void check_euler(const Graph& g, const PlanarEmbedding& emb) {
  const auto faces = enumerate_faces(emb);
  const int comps = testsupport::count_components(g);
  int isolated = 0;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (g.degree(v) == 0) ++isolated;
  // Each edge-bearing component satisfies V - E + F = 2 with its own outer
  // face; an isolated vertex has no darts and hence no traced face.
  CHECK(g.num_vertices() - g.num_edges() + static_cast<int>(faces.size()) == 2 * (comps - isolated) + isolated);
  std::size_t darts = 0;
  for (const auto& f : faces) darts += f.boundary.size();
  CHECK(darts == 2u * g.num_edges());
}

Graph random_graph(int n, int m, Rng& rng) {
  std::vector<std::pair<int, int>> all;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) all.emplace_back(i, j);
  for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[rng.uniform_below(i)]);
  all.resize(std::min<std::size_t>(m, all.size()));
  return Graph(n, all);
}

}  // namespace

TEST_CASE("build_graph basics and validation") {
  Graph g(2, {{0, 1}});
  CHECK(g.num_vertices() == 2);
  CHECK(g.num_edges() == 1);
  CHECK(g.edge(0).other(0) == 1);

  Graph k3 = complete_graph(3);
  CHECK(k3.num_edges() == 3);
  Graph k5 = complete_graph(5);
  CHECK(k5.num_edges() == 10);

  CHECK_THROWS_AS(Graph(2, {{0, 2}}), InvalidModelError);
  CHECK_THROWS_AS(Graph(2, {{1, 1}}), InvalidModelError);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), InvalidModelError);
}

TEST_CASE("biconnected decomposition: bowtie, cycle, path") {
  // Two triangles sharing vertex 0.
  Graph bowtie(5, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 4}, {4, 0}});
  auto d = biconnected_decompose(bowtie);
  CHECK(d.components.size() == 2);
  REQUIRE(d.articulation_points.size() == 1);
  CHECK(d.articulation_points[0] == 0);
  CHECK(d.tree_edges.size() == 1);

  auto dc = biconnected_decompose(cycle_graph(6));
  CHECK(dc.components.size() == 1);
  CHECK(dc.articulation_points.empty());

  Graph path(4, {{0, 1}, {1, 2}, {2, 3}});
  auto dp = biconnected_decompose(path);
  CHECK(dp.components.size() == 3);
  CHECK(dp.articulation_points.size() == 2);
}

TEST_CASE("biconnected decomposition: random graphs vs brute-force articulation") {
  Rng rng(12345);
  for (int t = 0; t < 60; ++t) {
    const int n = 3 + static_cast<int>(rng.uniform_below(20));
    Graph g = random_graph(n, n + static_cast<int>(rng.uniform_below(2 * n)), rng);
    if (!g.is_connected()) continue;
    auto d = biconnected_decompose(g);

    // Edge partition.
    std::vector<int> owner(g.num_edges(), -1);
    for (std::size_t c = 0; c < d.components.size(); ++c)
      for (int ge : d.components[c].edge_map) {
        CHECK(owner[ge] == -1);
        owner[ge] = static_cast<int>(c);
      }
    for (int e = 0; e < g.num_edges(); ++e) CHECK(owner[e] != -1);

    // Articulation points against brute removal.
    std::set<int> arts(d.articulation_points.begin(), d.articulation_points.end());
    for (int v = 0; v < n; ++v) {
      std::vector<char> removed(n, 0);
      removed[v] = 1;
      const int c = testsupport::count_components(g, &removed);
      const bool brute_art = (n > 2) && c > 1;
      CHECK(arts.count(v) == static_cast<std::size_t>(brute_art));
    }

    // Component adjacency is a tree.
    if (!d.components.empty())
      CHECK(d.tree_edges.size() + 1 == d.components.size());
  }
}

TEST_CASE("planar_embed fixtures") {
  auto e4 = planar_embed(complete_graph(4));
  REQUIRE(e4.has_value());
  CHECK(enumerate_faces(*e4).size() == 4);

  CHECK(!planar_embed(complete_graph(5)).has_value());
  CHECK(!planar_embed(k33()).has_value());

  auto et = planar_embed(complete_graph(3));
  REQUIRE(et.has_value());
  auto tf = enumerate_faces(*et);
  REQUIRE(tf.size() == 2);
  CHECK(tf[0].size() == 3);
  CHECK(tf[1].size() == 3);

  auto ec = planar_embed(cycle_graph(4));
  REQUIRE(ec.has_value());
  auto cf = enumerate_faces(*ec);
  REQUIRE(cf.size() == 2);
  CHECK(cf[0].size() == 4);
  CHECK(cf[1].size() == 4);
}

TEST_CASE("planar_embed satisfies Euler's formula on assorted graphs") {
  std::vector<Graph> graphs;
  graphs.push_back(grid_graph(5, 7));
  graphs.push_back(grid_graph(2, 9));
  graphs.push_back(cycle_graph(17));
  graphs.push_back(complete_graph(4));
  // Wheel.
  {
    std::vector<std::pair<int, int>> edges;
    for (int i = 1; i <= 8; ++i) {
      edges.emplace_back(0, i);
      edges.emplace_back(i, i == 8 ? 1 : i + 1);
    }
    graphs.push_back(Graph(9, edges));
  }
  Rng rng(777);
  for (int t = 0; t < 80; ++t) {
    Graph g = random_graph(4 + rng.uniform_below(8), 4 + rng.uniform_below(12), rng);
    if (auto e = planar_embed(g)) check_euler(g, *e);
  }
  for (const auto& g : graphs) {
    auto e = planar_embed(g);
    REQUIRE(e.has_value());
    check_euler(g, *e);
  }
}

TEST_CASE("planar_embed agrees with brute-force Kuratowski search") {
  Rng rng(424242);
  int nonplanar_seen = 0;
  for (int t = 0; t < 140; ++t) {
    const int n = 5 + static_cast<int>(rng.uniform_below(5));  // 5..9
    const int maxm = std::min(16, n * (n - 1) / 2);
    const int m = 8 + static_cast<int>(rng.uniform_below(maxm - 7));
    Graph g = random_graph(n, m, rng);
    const bool brute = testsupport::planar_by_kuratowski(g);
    auto emb = planar_embed(g);
    CHECK(emb.has_value() == brute);
    if (emb) check_euler(g, *emb);
    if (!brute) ++nonplanar_seen;
  }
  CHECK(nonplanar_seen > 10);  // the sample actually exercises both verdicts
}

TEST_CASE("induced embedding restricts rotations") {
  Graph g = grid_graph(4, 4);
  auto emb = planar_embed(g);
  REQUIRE(emb.has_value());
  std::vector<int> keep;
  for (int v = 0; v < 8; ++v) keep.push_back(v);
  auto ind = induced_embedding(*emb, keep);
  CHECK(ind.emb.graph.num_vertices() == 8);
  check_euler(ind.emb.graph, ind.emb);
}
