#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "ising/testkit.hpp"
#include "ising/wilson.hpp"
#include "support/oracles.hpp"

using namespace ising;

namespace {

IsingModel complete_model(int n, double j) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) edges.emplace_back(i, k);
  return IsingModel{Graph(n, edges), std::vector<double>(edges.size(), j)};
}

}  // namespace

TEST_CASE("single edge host") {
  Graph g(2, {{0, 1}});
  auto emb = planar_embed(g);
  Rng rng(1);
  for (int t = 0; t < 5; ++t) {
    auto pm = sample_pm(*emb, {2.5}, rng);
    REQUIRE(pm.edges.size() == 1);
    CHECK(pm.edges[0] == 0);
  }
}

TEST_CASE("4-cycle two-outcome frequencies") {
  Graph g(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto emb = planar_embed(g);
  const double a = 2.0, b = 0.5;
  const std::vector<double> w{a, b, a, b};
  const double p_aa = a * a / (a * a + b * b);
  Rng rng(42);
  const int m = 40000;
  int count_aa = 0;
  for (int t = 0; t < m; ++t) {
    auto pm = sample_pm(*emb, w, rng);
    REQUIRE(pm.edges.size() == 2);
    if (pm.edges[0] == 0) ++count_aa;  // matching {0, 2} carries the a-weights
  }
  const double freq = static_cast<double>(count_aa) / m;
  const double sigma = std::sqrt(p_aa * (1 - p_aa) / m);
  CHECK(std::abs(freq - p_aa) < 4 * sigma);
}

TEST_CASE("corner inverse equals dense inverse blocks") {
  // 2-vertex host: D is the whole inverse.
  {
    Graph g(2, {{0, 1}});
    KasteleynSystem ks(g, {3.0}, {1}, PerfectMatching{{0}});
    auto d = corner_inverse(ks, 2);
    KasteleynSystem ks2(g, {3.0}, {1}, PerfectMatching{{0}});
    Eigen::MatrixXd kb = ks2.dense_kbar();
    CHECK((d - kb.inverse()).norm() < 1e-12);
  }
  // 4-cycle: trailing blocks of the inverse for each feasible t.
  Graph g(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  auto emb = planar_embed(g);
  auto o = pfaffian_orient(*emb);
  for (const int t : {2, 4}) {
    KasteleynSystem ks(g, {1.3, 0.7, 0.9, 1.1}, o, PerfectMatching{{0, 2}});
    auto d = corner_inverse(ks, t);
    KasteleynSystem ks2(g, {1.3, 0.7, 0.9, 1.1}, o, PerfectMatching{{0, 2}});
    Eigen::MatrixXd full = ks2.dense_kbar().inverse();
    CHECK((d - full.bottomRightCorner(t, t)).norm() < 1e-10);
  }
}

TEST_CASE("matching distribution is exact on an enumerable dual host") {
  auto m = complete_model(4, 0.25);
  m.coupling = {0.3, -0.2, 0.45, 0.1, -0.35, 0.2};
  auto emb = planar_embed(m.graph);
  auto tri = triangulate(EmbeddedModel{m, *emb});
  auto dual = build_expanded_dual(tri);
  auto orient = pfaffian_orient(dual.emb);

  // Exact probabilities by enumeration.
  std::map<std::vector<int>, double> exact;
  double zhat = 0;
  testsupport::for_each_perfect_matching(dual.emb.graph, [&](const std::vector<int>& pm) {
    double wprod = 1;
    for (const int e : pm) wprod *= dual.weight[e];
    std::vector<int> key = pm;
    std::sort(key.begin(), key.end());
    exact[key] = wprod;
    zhat += wprod;
  });
  REQUIRE(exact.size() == 8u);  // 2^{N-1} matchings for N = 4

  DualPmSampler sampler(dual, orient);
  Rng rng(777);
  const int m_draws = 100000;
  std::map<std::vector<int>, int> counts;
  for (int t = 0; t < m_draws; ++t) ++counts[sampler.sample(DualPmSampler::Mode::Full, rng).edges];

  for (const auto& [key, wprod] : exact) {
    const double p = wprod / zhat;
    const double freq = counts.count(key) ? static_cast<double>(counts.at(key)) / m_draws : 0.0;
    const double sigma = std::sqrt(p * (1 - p) / m_draws);
    CHECK(std::abs(freq - p) < 4.5 * sigma);
  }
}

TEST_CASE("conditional hosts draw from the right families") {
  auto m = complete_model(4, 0.3);
  auto tri = triangulate(EmbeddedModel{m, *planar_embed(m.graph)});
  auto dual = build_expanded_dual(tri);
  auto orient = pfaffian_orient(dual.emb);
  const int evirt = dual.dual_edge[0];  // primal edge (0,1)
  DualPmSampler sampler(dual, orient, evirt);
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    auto pm_with = sampler.sample(DualPmSampler::Mode::WithoutVertices, rng);
    CHECK(std::binary_search(pm_with.edges.begin(), pm_with.edges.end(), evirt));
    auto x = pm_to_spins(dual, pm_with);
    CHECK(x[0] == x[1]);
    auto pm_without = sampler.sample(DualPmSampler::Mode::WithoutEdge, rng);
    CHECK(!std::binary_search(pm_without.edges.begin(), pm_without.edges.end(), evirt));
    auto y = pm_to_spins(dual, pm_without);
    CHECK(y[0] != y[1]);
  }
}

TEST_CASE("triangle conditional probabilities") {
  // Triangle with J02 = J12 = 1 and J01 = 0 (the virtual pair).
  IsingModel m{Graph(3, {{0, 1}, {0, 2}, {1, 2}}), {0.0, 1.0, 1.0}};
  auto tri = triangulate(EmbeddedModel{m, *planar_embed(m.graph)});
  auto dual = build_expanded_dual(tri);
  auto orient = pfaffian_orient(dual.emb);
  DualPmSampler sampler(dual, orient, dual.dual_edge[0]);
  Rng rng(99);
  const int n_draws = 40000;
  int eq_aligned = 0, uneq_plus = 0;
  for (int t = 0; t < n_draws; ++t) {
    auto xe = pm_to_spins(dual, sampler.sample(DualPmSampler::Mode::WithoutVertices, rng));
    // Condition on x0 = x1 = +1 (flip so x0 is +1).
    if (xe[0] < 0)
      for (auto& s : xe) s = -s;
    if (xe[2] == 1) ++eq_aligned;
    auto xu = pm_to_spins(dual, sampler.sample(DualPmSampler::Mode::WithoutEdge, rng));
    if (xu[0] < 0)
      for (auto& s : xu) s = -s;
    if (xu[2] == 1) ++uneq_plus;
  }
  const double p_eq = std::exp(2.0) / (std::exp(2.0) + std::exp(-2.0));  // 0.98201
  double freq = static_cast<double>(eq_aligned) / n_draws;
  CHECK(std::abs(freq - p_eq) < 4 * std::sqrt(p_eq * (1 - p_eq) / n_draws));
  freq = static_cast<double>(uneq_plus) / n_draws;  // x2 uniform when x0 != x1
  CHECK(std::abs(freq - 0.5) < 4 * std::sqrt(0.25 / n_draws));
}

TEST_CASE("per-edge inclusion marginals match determinant ratios") {
  Rng gen_rng(12);
  auto pe = testkit::gen_random_planar(6, gen_rng);
  auto m = testkit::with_random_couplings(pe.graph, 0.3, gen_rng);
  auto tri = triangulate(EmbeddedModel{m, *planar_embed(m.graph)});
  auto dual = build_expanded_dual(tri);
  auto orient = pfaffian_orient(dual.emb);
  const Graph& host = dual.emb.graph;

  // Exact marginals c_e * Zhat_{\e} / Zhat via determinant ratios.
  PerfectMatching base = spins_to_pm(dual, SpinConfiguration(6, +1));
  KasteleynSystem ks(host, dual.weight, orient, base);
  const double log_zhat = log_pm_partition(ks).log_z;
  std::vector<double> marginal(host.num_edges(), 0.0);
  for (int e = 0; e < host.num_edges(); ++e) {
    const auto& ed = host.edge(e);
    std::vector<int> keep;
    for (int v = 0; v < host.num_vertices(); ++v)
      if (v != ed.u && v != ed.v) keep.push_back(v);
    auto ind = induced_embedding(dual.emb, keep);
    std::vector<double> w2(ind.edge_map.size());
    for (std::size_t i = 0; i < ind.edge_map.size(); ++i) w2[i] = dual.weight[ind.edge_map[i]];
    auto lz = testkit::brute_pm_partition(ind.emb.graph, w2);
    marginal[e] = lz ? dual.weight[e] * std::exp(*lz - log_zhat) : 0.0;
  }

  DualPmSampler sampler(dual, orient);
  Rng rng(2718);
  const int m_draws = 50000;
  std::vector<int> incl(host.num_edges(), 0);
  for (int t = 0; t < m_draws; ++t)
    for (const int e : sampler.sample(DualPmSampler::Mode::Full, rng).edges) ++incl[e];
  int checked = 0;
  for (int e = 0; e < host.num_edges(); ++e) {
    const double p = marginal[e];
    const double freq = static_cast<double>(incl[e]) / m_draws;
    const double sigma = std::sqrt(std::max(p * (1 - p), 1e-12) / m_draws);
    CHECK(std::abs(freq - p) < 4.5 * sigma + 1e-9);
    ++checked;
  }
  CHECK(checked == host.num_edges());
}

TEST_CASE("telescoping draw probability equals prod c / Zhat") {
  // The product of conditional edge probabilities over a full draw must be
  // the model probability of the drawn matching.
  Rng gen_rng(64);
  for (int t = 0; t < 4; ++t) {
    Graph host(0, {});
    std::vector<double> w;
    if (t % 2 == 0) {
      host = Graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
      w = {1.4, 0.6, 0.8, 1.7};
    } else {
      // Expanded dual of a small model (12 vertices, degree 3).
      auto pe = testkit::gen_random_planar(3 + t, gen_rng);
      auto m = testkit::with_random_couplings(pe.graph, 0.4, gen_rng);
      auto tri = triangulate(EmbeddedModel{m, *planar_embed(m.graph)});
      auto d = build_expanded_dual(tri);
      host = d.emb.graph;
      w = d.weight;
    }
    auto emb = planar_embed(host);
    auto orient = pfaffian_orient(*emb);
    const double log_zhat = *testkit::brute_pm_partition(host, w);

    WilsonHost wh;
    wh.emb = &*emb;
    wh.weights = &w;
    wh.orient = &orient;
    wh.active.resize(host.num_vertices());
    for (int v = 0; v < host.num_vertices(); ++v) wh.active[v] = v;
    wh.base_pm = [&](const std::vector<int>& active, const std::vector<int>&) {
      std::vector<char> in(host.num_vertices(), 0);
      for (const int v : active) in[v] = 1;
      PerfectMatching pm;
      testsupport::for_each_perfect_matching(host, [&](const std::vector<int>& cand) {
        if (!pm.edges.empty()) return;
        for (const int e : cand)
          if (!in[host.edge(e).u] || !in[host.edge(e).v]) return;
        pm.edges = cand;
      });
      // Restricted matchings of the active set: filter instead when the
      // active set is a strict subset.
      if (pm.edges.empty()) {
        std::vector<int> chosen;
        std::vector<char> used(host.num_vertices(), 0);
        auto rec = [&](auto&& self, std::size_t idx) -> bool {
          while (idx < active.size() && used[active[idx]]) ++idx;
          if (idx == active.size()) return true;
          const int v = active[idx];
          used[v] = 1;
          for (const auto& [e, ww] : host.adjacency(v)) {
            if (!in[ww] || used[ww]) continue;
            used[ww] = 1;
            chosen.push_back(e);
            if (self(self, idx + 1)) return true;
            chosen.pop_back();
            used[ww] = 0;
          }
          used[v] = 0;
          return false;
        };
        REQUIRE(rec(rec, 0));
        pm.edges = chosen;
      }
      std::sort(pm.edges.begin(), pm.edges.end());
      return pm;
    };

    Rng rng(1000 + t);
    WilsonStats stats;
    for (int rep = 0; rep < 25; ++rep) {
      const auto pm = sample_pm_host(wh, rng, &stats);
      double logc = 0;
      for (const int e : pm.edges) logc += std::log(w[e]);
      CHECK(stats.last_log_prob == doctest::Approx(logc - log_zhat).epsilon(1e-8));
    }
  }
}

TEST_CASE("spin sampler: strong coupling and uniform laws") {
  Rng rng(31337);
  {
    IsingModel m{Graph(2, {{0, 1}}), {10.0}};
    int aligned = 0;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) {
      auto x = sample_planar_ising_spins(m, rng);
      if (x[0] == x[1]) ++aligned;
    }
    CHECK(static_cast<double>(aligned) / draws >= 0.999);
  }
  {
    auto m = complete_model(4, 0.0);
    const int draws = 100000;
    std::vector<int> counts(16, 0);
    for (int t = 0; t < draws; ++t) {
      auto x = sample_planar_ising_spins(m, rng);
      int key = 0;
      for (int v = 0; v < 4; ++v)
        if (x[v] > 0) key |= 1 << v;
      ++counts[key];
    }
    double chi2 = 0;
    const double expect = draws / 16.0;
    for (const int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < 37.7);  // chi-square(15) at the 99.9th percentile
  }
}

TEST_CASE("determinism under seed") {
  auto m = complete_model(4, 0.2);
  Rng r1(123), r2(123);
  for (int t = 0; t < 20; ++t) {
    CHECK(sample_planar_ising_spins(m, r1) == sample_planar_ising_spins(m, r2));
  }
}
