#include <algorithm>
#include <cassert>
#include <cmath>
#include <unordered_map>

#include "ising/planar_pm.hpp"

namespace ising {

namespace {

struct Mat2 {
  double a = 0, b = 0, c = 0, d = 0;  // [[a, b], [c, d]]

  double det() const { return a * d - b * c; }
  double max_abs() const {
    return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
  }
  Mat2 inverse() const {
    const double dt = det();
    return Mat2{d / dt, -b / dt, -c / dt, a / dt};
  }
  Mat2 operator*(const Mat2& o) const {
    return Mat2{a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  void sub_product(const Mat2& l, const Mat2& r) {
    a -= l.a * r.a + l.b * r.c;
    b -= l.a * r.b + l.b * r.d;
    c -= l.c * r.a + l.d * r.c;
    d -= l.c * r.b + l.d * r.d;
  }
  double& cell(int i, int j) { return i == 0 ? (j == 0 ? a : b) : (j == 0 ? c : d); }
};

struct PivotBreakdown {};

}  // namespace

KasteleynSystem::KasteleynSystem(const Graph& host, const std::vector<double>& weights,
                                 const std::vector<std::int8_t>& orientation,
                                 const PerfectMatching& base,
                                 const std::vector<int>* forced_top_pairs) {
  const int n = host.num_vertices();
  if (n % 2 != 0) throw InvalidModelError("host has odd vertex count");
  npairs_ = n / 2;
  if (static_cast<int>(base.edges.size()) != npairs_)
    throw InvalidModelError("base matching is not perfect");

  std::vector<int> pair_of(n, -1);
  for (int i = 0; i < npairs_; ++i) {
    const Edge& e = host.edge(base.edges[i]);
    if (pair_of[e.u] != -1 || pair_of[e.v] != -1)
      throw InvalidModelError("base matching is not a matching");
    pair_of[e.u] = i;
    pair_of[e.v] = i;
  }
  for (int v = 0; v < n; ++v)
    if (pair_of[v] == -1) throw InvalidModelError("base matching leaves a vertex uncovered");

  // Contracted graph G**: one vertex per base pair.
  Graph contracted = Graph::empty(npairs_);
  {
    std::unordered_map<std::int64_t, char> seen;
    seen.reserve(host.num_edges() * 2);
    for (const Edge& e : host.edges()) {
      const int p = pair_of[e.u], q = pair_of[e.v];
      if (p == q) continue;
      const std::int64_t key = std::int64_t(std::min(p, q)) * npairs_ + std::max(p, q);
      if (seen.emplace(key, 1).second) contracted.add_edge(p, q);
    }
  }
  const std::vector<int> nd = nested_dissection_order(contracted, forced_top_pairs);

  order_.resize(n);
  pos_.assign(n, -1);
  for (int t = 0; t < npairs_; ++t) {
    const Edge& e = host.edge(base.edges[nd[t]]);
    order_[2 * t] = e.u;
    order_[2 * t + 1] = e.v;
    pos_[e.u] = 2 * t;
    pos_[e.v] = 2 * t + 1;
  }

  // K-bar entries: K[i][j] = +c when v_i -> v_j; columns then swapped in pairs.
  entries_.reserve(2 * host.num_edges());
  for (const Edge& e : host.edges()) {
    const double c = weights[e.id];
    const int pu = pos_[e.u], pv = pos_[e.v];
    const double sgn = orientation[e.id] == 1 ? 1.0 : -1.0;
    entries_.push_back({pu, pv ^ 1, sgn * c});
    entries_.push_back({pv, pu ^ 1, -sgn * c});
  }
}

Eigen::MatrixXd KasteleynSystem::dense_kbar() const {
  const int n = 2 * npairs_;
  Eigen::MatrixXd kb = Eigen::MatrixXd::Zero(n, n);
  for (const Entry& en : entries_) kb(en.r, en.c) += en.v;
  return kb;
}

KasteleynSystem::ElimResult KasteleynSystem::eliminate(int trailing_pairs, Eigen::MatrixXd* schur) {
  const int np = npairs_;
  const int mlead = np - trailing_pairs;
  if (trailing_pairs > 0 && schur == nullptr) throw InternalError("trailing block requested without output");

  ElimResult res;
  auto run_sparse = [&]() {
    std::vector<std::unordered_map<int, Mat2>> rows(np);
    std::vector<std::vector<int>> cols(mlead);
    if (schur) schur->setZero(2 * trailing_pairs, 2 * trailing_pairs);
    auto touch = [&](int i, int j) -> Mat2& {
      auto [it, fresh] = rows[i].try_emplace(j);
      if (fresh && j < mlead && i > j) cols[j].push_back(i);
      return it->second;
    };
    for (const Entry& en : entries_) {
      const int i = en.r / 2, j = en.c / 2;
      if (schur && i >= mlead && j >= mlead) {
        (*schur)(en.r - 2 * mlead, en.c - 2 * mlead) += en.v;
      } else {
        touch(i, j).cell(en.r % 2, en.c % 2) += en.v;
      }
    }

    for (int k = 0; k < mlead; ++k) {
      auto& rk = rows[k];
      const auto pit = rk.find(k);
      if (pit == rk.end()) throw PivotBreakdown{};
      const Mat2 pivot = pit->second;
      double row_scale = 0;
      for (const auto& [j, m] : rk) row_scale = std::max(row_scale, m.max_abs());
      const double dt = pivot.det();
      if (std::abs(dt) < 1e-12 * row_scale * row_scale || dt == 0.0) throw PivotBreakdown{};
      res.log_abs_det += std::log(std::abs(dt));
      if (dt < 0) res.sign = -res.sign;
      const Mat2 invp = pivot.inverse();

      for (const int i : cols[k]) {
        const auto lit = rows[i].find(k);
        if (lit == rows[i].end()) continue;
        const Mat2 lik = lit->second * invp;
        for (const auto& [j, ukj] : rk) {
          if (j <= k) continue;
          if (schur && i >= mlead && j >= mlead) {
            const int bi = 2 * (i - mlead), bj = 2 * (j - mlead);
            (*schur)(bi, bj) -= lik.a * ukj.a + lik.b * ukj.c;
            (*schur)(bi, bj + 1) -= lik.a * ukj.b + lik.b * ukj.d;
            (*schur)(bi + 1, bj) -= lik.c * ukj.a + lik.d * ukj.c;
            (*schur)(bi + 1, bj + 1) -= lik.c * ukj.b + lik.d * ukj.d;
          } else {
            touch(i, j).sub_product(lik, ukj);
          }
        }
      }
    }
  };

  try {
    run_sparse();
    return res;
  } catch (const PivotBreakdown&) {
    // Near-singular pivot block: redo densely with partial pivoting.
  }

  res = ElimResult{};
  res.dense_fallback = true;
  const int nn = 2 * np;
  if (nn > 20000) throw InternalError("dense fallback too large");
  Eigen::MatrixXd kb = dense_kbar();
  if (trailing_pairs == 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kb);
    const auto& diag = lu.matrixLU().diagonal();
    for (int i = 0; i < nn; ++i) {
      res.log_abs_det += std::log(std::abs(diag(i)));
      if (diag(i) < 0) res.sign = -res.sign;
    }
    if (lu.permutationP().determinant() < 0) res.sign = -res.sign;
  } else {
    const int t = 2 * trailing_pairs;
    const int ml = nn - t;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kb.topLeftCorner(ml, ml));
    *schur = kb.bottomRightCorner(t, t) -
             kb.bottomLeftCorner(t, ml) * lu.solve(kb.topRightCorner(ml, t));
    const auto& diag = lu.matrixLU().diagonal();
    for (int i = 0; i < ml; ++i) {
      res.log_abs_det += std::log(std::abs(diag(i)));
      if (diag(i) < 0) res.sign = -res.sign;
    }
    if (lu.permutationP().determinant() < 0) res.sign = -res.sign;
  }
  return res;
}

PmPartitionResult log_pm_partition(KasteleynSystem& ks) {
  auto res = ks.eliminate(0, nullptr);
  // det K = det K-bar * (-1)^{pairs}; the PM partition function is sqrt(det K).
  const int det_k_sign = res.sign * (ks.num_pairs() % 2 == 1 ? -1 : 1);
  if (det_k_sign <= 0) throw InternalError("Kasteleyn determinant not positive");
  return PmPartitionResult{0.5 * res.log_abs_det, res.dense_fallback};
}

// ════════════════════════════════════════════════════════════════════
//  Per-component pipeline and the planar partition function
// ════════════════════════════════════════════════════════════════════

PlanarPipeline PlanarPipeline::build(const IsingModel& m) {
  PlanarPipeline p;
  auto emb = planar_embed(m.graph);
  if (!emb) throw InvalidModelError("model graph is not planar");
  p.tri = triangulate(EmbeddedModel{m, *emb});
  p.dual = build_expanded_dual(p.tri);
  p.orient = pfaffian_orient(p.dual.emb);
  const SpinConfiguration ones(p.tri.model.graph.num_vertices(), +1);
  p.base = spins_to_pm(p.dual, ones);
  return p;
}

double PlanarPipeline::log_zstar() {
  KasteleynSystem ks(dual.emb.graph, dual.weight, orient, base);
  const auto r = log_pm_partition(ks);
  dense_fallback = dense_fallback || r.dense_fallback;
  return r.log_z;
}

double PlanarPipeline::log_zstar_without(int dual_edge) {
  const Graph& dg = dual.emb.graph;
  const int du = dg.edge(dual_edge).u, dv = dg.edge(dual_edge).v;
  std::vector<int> keep;
  keep.reserve(dg.num_vertices() - 2);
  for (int v = 0; v < dg.num_vertices(); ++v)
    if (v != du && v != dv) keep.push_back(v);
  auto ind = induced_embedding(dual.emb, keep);

  std::vector<double> w(ind.edge_map.size());
  std::vector<std::int8_t> o(ind.edge_map.size());
  for (std::size_t i = 0; i < ind.edge_map.size(); ++i) {
    w[i] = dual.weight[ind.edge_map[i]];
    o[i] = orient[ind.edge_map[i]];
  }
  // Base matching: all-(+1) maps to E*_I which contains every intercity edge,
  // in particular `dual_edge`; dropping its endpoints keeps the rest perfect.
  std::vector<int> inv_edge(dg.num_edges(), -1);
  for (std::size_t i = 0; i < ind.edge_map.size(); ++i) inv_edge[ind.edge_map[i]] = static_cast<int>(i);
  PerfectMatching sub_base;
  for (const int e : base.edges)
    if (e != dual_edge) {
      if (inv_edge[e] < 0) throw InternalError("base matching edge lost in restriction");
      sub_base.edges.push_back(inv_edge[e]);
    }
  KasteleynSystem ks(ind.emb.graph, w, o, sub_base);
  const auto r = log_pm_partition(ks);
  dense_fallback = dense_fallback || r.dense_fallback;
  return r.log_z;
}

double PlanarPipeline::log_z() {
  double sum_j = 0;
  for (const double j : tri.model.coupling) sum_j += j;
  return std::log(2.0) + log_zstar() - sum_j;
}

double log_partition_planar_ising(const IsingModel& m) {
  m.validate();
  const Graph& g = m.graph;
  if (!g.is_connected()) throw InvalidModelError("model must be connected");
  const int n = g.num_vertices();
  if (n == 0) return 0.0;
  if (n == 1) return std::log(2.0);
  if (n == 2) return std::log(4.0 * std::cosh(m.coupling[0]));

  const auto dec = biconnected_decompose(g);
  double log_z = 0.0;
  std::vector<int> comp_count(n, 0);
  for (const auto& c : dec.components) {
    for (const int v : c.vertex_map) ++comp_count[v];
    if (c.graph.num_vertices() == 2) {
      log_z += std::log(4.0 * std::cosh(m.coupling[c.edge_map[0]]));
      continue;
    }
    IsingModel local;
    local.graph = c.graph;
    local.coupling.reserve(c.edge_map.size());
    for (const int ge : c.edge_map) local.coupling.push_back(m.coupling[ge]);
    PlanarPipeline p = PlanarPipeline::build(local);
    log_z += p.log_z();
  }
  for (int v = 0; v < n; ++v)
    if (comp_count[v] > 1) log_z -= (comp_count[v] - 1) * std::log(2.0);
  return log_z;
}

}  // namespace ising
