#include "ising/wilson.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <queue>

#include "rotation_edit.hpp"

namespace ising {

namespace {

struct NormalizationBreakdown {};

// ── Incremental block factors over the corner inverse ───────────────
//
// A_k = [K^{-1}] restricted to the drawn positions; rows carry the pair-swap
// (alpha) so A(r, c) = D(jloc[r] ^ 1, jloc[c]). L is unit lower triangular,
// U block upper with skew 2x2 pivots z_i; drawing edge e extends both by two
// rows/columns and costs O(k^2).
struct DrawState {
  const Eigen::MatrixXd* D = nullptr;
  Eigen::MatrixXd L, U;
  std::vector<Eigen::Matrix2d> zinv;
  std::vector<int> jloc;
  int k2 = 0;

  void init(const Eigen::MatrixXd* d, int max_draws) {
    D = d;
    const int cap = 2 * max_draws;
    L.setZero(cap, cap);
    U.setZero(cap, cap);
    zinv.clear();
    jloc.clear();
    k2 = 0;
  }

  struct Candidate {
    Eigen::MatrixXd R, Y;
    Eigen::Matrix2d z;
    double sqrt_abs_u = 0;
  };

  Candidate evaluate(int jv, int jw) const {
    Candidate c;
    const int nj[2] = {jv, jw};
    Eigen::MatrixXd y(k2, 2), r2(2, k2);
    for (int r = 0; r < k2; ++r)
      for (int t = 0; t < 2; ++t) y(r, t) = (*D)(jloc[r] ^ 1, nj[t]);
    for (int t = 0; t < 2; ++t)
      for (int col = 0; col < k2; ++col) r2(t, col) = (*D)(nj[t] ^ 1, jloc[col]);
    Eigen::Matrix2d d2;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) d2(a, b) = (*D)(nj[a] ^ 1, nj[b]);

    if (k2 > 0) {
      c.Y = L.topLeftCorner(k2, k2).triangularView<Eigen::UnitLower>().solve(y);
      c.R.resize(2, k2);
      for (int j = 0; j * 2 < k2; ++j) {
        Eigen::Matrix2d t = r2.block(0, 2 * j, 2, 2);
        if (j > 0) t -= c.R.leftCols(2 * j) * U.block(0, 2 * j, 2 * j, 2);
        c.R.block(0, 2 * j, 2, 2) = t * zinv[j];
      }
      c.z = d2 - c.R * c.Y;
    } else {
      c.Y.resize(0, 2);
      c.R.resize(2, 0);
      c.z = d2;
    }
    const double u = c.z.determinant();
    c.sqrt_abs_u = std::sqrt(std::abs(u));
    return c;
  }

  void accept(const Candidate& c, int jv, int jw) {
    L.block(k2, 0, 2, k2) = c.R;
    L(k2, k2) = 1.0;
    L(k2 + 1, k2 + 1) = 1.0;
    L(k2 + 1, k2) = 0.0;
    U.block(0, k2, k2, 2) = c.Y;
    U.block(k2, k2, 2, 2) = c.z;
    zinv.push_back(c.z.inverse());
    jloc.push_back(jv);
    jloc.push_back(jw);
    k2 += 2;
  }
};

struct LevelArtifacts {
  InducedEmbedding ind;
  std::vector<double> w_local;
  std::vector<std::int8_t> o_local;
  std::unique_ptr<KasteleynSystem> ks;
  Eigen::MatrixXd D;
  int tpairs = 0;
  bool draw_all = false;
  Separation sep;               // valid when !draw_all
  std::vector<int> base_local;  // base matching in local edge ids
};

constexpr int kDrawAllCutoff = 64;

void build_level(const WilsonHost& host, const std::vector<int>& active,
                 const std::vector<int>& drawn, bool force_draw_all, LevelArtifacts& out,
                 WilsonStats* stats) {
  out.ind = induced_embedding(*host.emb, active);
  const Graph& lg = out.ind.emb.graph;
  const int n = lg.num_vertices();
  out.w_local.resize(lg.num_edges());
  out.o_local.resize(lg.num_edges());
  for (int e = 0; e < lg.num_edges(); ++e) {
    out.w_local[e] = (*host.weights)[out.ind.edge_map[e]];
    out.o_local[e] = (*host.orient)[out.ind.edge_map[e]];
  }
  const PerfectMatching base = host.base_pm(active, drawn);
  std::vector<int> inv_edge(host.emb->graph.num_edges(), -1);
  for (int e = 0; e < lg.num_edges(); ++e) inv_edge[out.ind.edge_map[e]] = e;
  out.base_local.clear();
  for (const int ge : base.edges) {
    if (ge < 0 || ge >= static_cast<int>(inv_edge.size()) || inv_edge[ge] < 0)
      throw InternalError("base matching outside the active host");
    out.base_local.push_back(inv_edge[ge]);
  }
  if (static_cast<int>(out.base_local.size()) * 2 != n)
    throw InternalError("base matching is not perfect on the active host");

  out.draw_all = force_draw_all || n <= kDrawAllCutoff;
  PerfectMatching pm_base{out.base_local};
  if (!out.draw_all) {
    out.sep = planar_separator(out.ind.emb);
    if (out.sep.separator.empty()) return;  // disconnected split; no draws here
    // T**: base pairs touching the separator or its neighborhood.
    std::vector<char> in_t(n, 0);
    for (const int v : out.sep.separator) {
      in_t[v] = 1;
      for (const auto& [e, w] : lg.adjacency(v)) in_t[w] = 1;
    }
    std::vector<int> pair_of(n, -1);
    for (std::size_t p = 0; p < out.base_local.size(); ++p) {
      const auto& ed = lg.edge(out.base_local[p]);
      pair_of[ed.u] = static_cast<int>(p);
      pair_of[ed.v] = static_cast<int>(p);
    }
    std::vector<char> pair_in(out.base_local.size(), 0);
    std::vector<int> forced;
    for (int v = 0; v < n; ++v)
      if (in_t[v] && !pair_in[pair_of[v]]) {
        pair_in[pair_of[v]] = 1;
        forced.push_back(pair_of[v]);
      }
    std::sort(forced.begin(), forced.end());
    try {
      out.ks = std::make_unique<KasteleynSystem>(lg, out.w_local, out.o_local, pm_base, &forced);
      out.tpairs = static_cast<int>(forced.size());
    } catch (const OversizedSeparatorError&) {
      if (stats) ++stats->dense_fallbacks;
      out.draw_all = true;
    }
  }
  if (out.draw_all) {
    if (n > 2000) throw InternalError("draw-all fallback too large");
    out.ks = std::make_unique<KasteleynSystem>(lg, out.w_local, out.o_local, pm_base);
    out.tpairs = n / 2;
  }

  Eigen::MatrixXd schur;
  auto elim = out.ks->eliminate(out.tpairs, &schur);
  if (elim.dense_fallback && stats) ++stats->dense_fallbacks;
  out.D = schur.partialPivLu().inverse();
}

void draw_level(const WilsonHost& host, const LevelArtifacts& lvl, const std::vector<int>& targets,
                std::vector<char>& saturated_local, std::vector<int>& drawn, Rng& rng,
                double* log_prob) {
  const Graph& lg = lvl.ind.emb.graph;
  const int offset = 2 * (lvl.ks->num_pairs() - lvl.tpairs);
  const auto& pos = lvl.ks->position_of();

  DrawState st;
  const int max_draws =
      std::min<int>(static_cast<int>(targets.size()), lg.num_vertices() / 2) + 1;
  st.init(&lvl.D, max_draws);

  for (const int v : targets) {
    if (saturated_local[v]) continue;
    const int jv = pos[v] - offset;
    if (jv < 0) throw InternalError("separator vertex outside the trailing block");

    struct Option {
      int edge, w, jw;
      DrawState::Candidate cand;
      double p;
    };
    std::vector<Option> opts;
    double total = 0;
    for (const auto& [e, w] : lg.adjacency(v)) {
      if (saturated_local[w]) continue;
      const int jw = pos[w] - offset;
      if (jw < 0) throw InternalError("candidate vertex outside the trailing block");
      Option o;
      o.edge = e;
      o.w = w;
      o.jw = jw;
      o.cand = st.evaluate(jv, jw);
      o.p = lvl.w_local[e] * o.cand.sqrt_abs_u;
      total += o.p;
      opts.push_back(std::move(o));
    }
    if (opts.empty() || std::abs(total - 1.0) > 1e-6 || !std::isfinite(total))
      throw NormalizationBreakdown{};

    const double u01 = rng.uniform01() * total;
    double acc = 0;
    std::size_t pick = opts.size() - 1;
    for (std::size_t i = 0; i < opts.size(); ++i) {
      acc += opts[i].p;
      if (u01 < acc) {
        pick = i;
        break;
      }
    }
    const Option& o = opts[pick];
    if (log_prob) *log_prob += std::log(o.p);
    st.accept(o.cand, jv, o.jw);
    saturated_local[v] = 1;
    saturated_local[o.w] = 1;
    drawn.push_back(lvl.ind.edge_map[o.edge]);
  }
}

void sample_rec(const WilsonHost& host, const std::vector<int>& active, std::vector<int>& drawn,
                Rng& rng, WilsonStats* stats, const LevelArtifacts* cached_top,
                double* log_prob) {
  if (active.empty()) return;
  if (active.size() % 2 != 0) throw InternalError("odd active set in PM sampling");

  LevelArtifacts local;
  const LevelArtifacts* lvl = cached_top;
  if (lvl == nullptr) {
    build_level(host, active, drawn, false, local, stats);
    lvl = &local;
  }

  const Graph& lg = lvl->ind.emb.graph;
  const int n = lg.num_vertices();
  std::vector<char> sat(n, 0);
  std::vector<int> targets;
  if (lvl->draw_all) {
    targets.resize(n);
    for (int i = 0; i < n; ++i) targets[i] = i;
  } else {
    targets = lvl->sep.separator;
  }
  // Deterministic order by host vertex id.
  std::sort(targets.begin(), targets.end(),
            [&](int a, int b) { return lvl->ind.vertex_map[a] < lvl->ind.vertex_map[b]; });

  const std::size_t drawn_before = drawn.size();
  const double log_prob_before = log_prob ? *log_prob : 0.0;
  try {
    if (lvl->ks) draw_level(host, *lvl, targets, sat, drawn, rng, log_prob);
  } catch (const NormalizationBreakdown&) {
    // Retry this whole subproblem with a dense draw-all pass.
    drawn.resize(drawn_before);
    if (log_prob) *log_prob = log_prob_before;
    if (lvl->draw_all) throw InternalError("PM sampling failed in dense mode");
    if (stats) ++stats->dense_fallbacks;
    LevelArtifacts retry;
    build_level(host, active, drawn, true, retry, stats);
    std::vector<char> sat2(retry.ind.emb.graph.num_vertices(), 0);
    std::vector<int> all(retry.ind.emb.graph.num_vertices());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    std::sort(all.begin(), all.end(),
              [&](int a, int b) { return retry.ind.vertex_map[a] < retry.ind.vertex_map[b]; });
    draw_level(host, retry, all, sat2, drawn, rng, log_prob);
    return;
  }

  if (lvl->draw_all) return;
  for (const auto* part : {&lvl->sep.part1, &lvl->sep.part2}) {
    std::vector<int> sub;
    for (const int v : *part)
      if (!sat[v]) sub.push_back(lvl->ind.vertex_map[v]);
    sample_rec(host, sub, drawn, rng, stats, nullptr, log_prob);
  }
}

}  // namespace

Eigen::MatrixXd corner_inverse(KasteleynSystem& ks, int t, bool* dense_fallback) {
  if (t % 2 != 0 || t <= 0 || t > 2 * ks.num_pairs())
    throw InvalidModelError("corner block size must be even and within range");
  Eigen::MatrixXd schur;
  auto elim = ks.eliminate(t / 2, &schur);
  if (dense_fallback) *dense_fallback = elim.dense_fallback;
  return schur.partialPivLu().inverse();
}

PerfectMatching sample_pm_host(const WilsonHost& host, Rng& rng, WilsonStats* stats) {
  for (const int v : host.active)
    if (host.emb->graph.degree(v) > 3)
      throw InvalidModelError("PM sampling requires maximum degree 3");
  std::vector<int> drawn;
  double log_prob = 0.0;
  sample_rec(host, host.active, drawn, rng, stats, nullptr, &log_prob);
  if (stats) stats->last_log_prob = log_prob;
  std::sort(drawn.begin(), drawn.end());
  return PerfectMatching{std::move(drawn)};
}

namespace {

// Backtracking base matchings for standalone hosts.
PerfectMatching backtrack_base(const PlanarEmbedding& emb, const std::vector<int>& active) {
  const Graph& g = emb.graph;
  std::vector<char> in(g.num_vertices(), 0), used(g.num_vertices(), 0);
  for (const int v : active) in[v] = 1;
  std::vector<int> chosen;
  auto rec = [&](auto&& self, std::size_t idx) -> bool {
    while (idx < active.size() && used[active[idx]]) ++idx;
    if (idx == active.size()) return true;
    const int v = active[idx];
    used[v] = 1;
    for (const auto& [e, w] : g.adjacency(v)) {
      if (!in[w] || used[w]) continue;
      used[w] = 1;
      chosen.push_back(e);
      if (self(self, idx + 1)) return true;
      chosen.pop_back();
      used[w] = 0;
    }
    used[v] = 0;
    return false;
  };
  if (!rec(rec, 0)) throw InvalidModelError("host has no perfect matching");
  std::sort(chosen.begin(), chosen.end());
  return PerfectMatching{std::move(chosen)};
}

}  // namespace

PerfectMatching sample_pm(const PlanarEmbedding& emb, const std::vector<double>& weights, Rng& rng) {
  for (const double w : weights)
    if (!(w > 0)) throw InvalidModelError("PM sampling requires positive weights");
  WilsonHost host;
  host.emb = &emb;
  host.weights = &weights;
  const auto orient = pfaffian_orient(emb);
  host.orient = &orient;
  host.active.resize(emb.graph.num_vertices());
  for (int v = 0; v < emb.graph.num_vertices(); ++v) host.active[v] = v;
  host.base_pm = [&emb](const std::vector<int>& active, const std::vector<int>&) {
    return backtrack_base(emb, active);
  };
  return sample_pm_host(host, rng, nullptr);
}

// ════════════════════════════════════════════════════════════════════
//  Expanded-dual sampler with M-mapping base matchings
// ════════════════════════════════════════════════════════════════════

namespace {

// Base matching of the active induced subhost via spins: constraints from
// the drawn edges (and the virtual-edge mode) are propagated over the primal
// graph; the induced M image then matches every active vertex inside the
// active set.
PerfectMatching dual_base_pm(const ExpandedDual& d, DualPmSampler::Mode mode, int evirt,
                             const std::vector<int>& active, const std::vector<int>& drawn) {
  const int E = static_cast<int>(d.dual_edge.size());
  const int F = d.num_faces();
  int np = 0;
  for (int f = 0; f < F; ++f)
    for (int i = 0; i < 3; ++i) np = std::max(np, d.face_vertices[f][i] + 1);

  // Constraints: (primal edge, must_agree).
  std::vector<std::pair<int, char>> cons;
  if (mode == DualPmSampler::Mode::WithoutVertices) cons.push_back({d.primal_edge[evirt], 1});
  if (mode == DualPmSampler::Mode::WithoutEdge) cons.push_back({d.primal_edge[evirt], 0});
  for (const int q : drawn) {
    if (d.is_intercity[q]) {
      cons.push_back({d.primal_edge[q], 1});
    } else {
      const int f = (q - E) / 3, i = (q - E) % 3;
      cons.push_back({d.face_primal_edges[f][(i + 2) % 3], 1});
      cons.push_back({d.face_primal_edges[f][i], 0});
      cons.push_back({d.face_primal_edges[f][(i + 1) % 3], 0});
    }
  }

  // Parity BFS over the constraint graph.
  std::vector<std::array<int, 2>> ends(E, {-1, -1});
  for (int f = 0; f < F; ++f)
    for (int i = 0; i < 3; ++i)
      ends[d.face_primal_edges[f][i]] = {d.face_vertices[f][i], d.face_vertices[f][(i + 1) % 3]};
  std::vector<std::vector<std::pair<int, char>>> cadj(np);
  for (const auto& [pe, agree] : cons) {
    cadj[ends[pe][0]].push_back({ends[pe][1], agree});
    cadj[ends[pe][1]].push_back({ends[pe][0], agree});
  }
  std::vector<std::int8_t> x(np, 0);
  for (int s = 0; s < np; ++s) {
    if (x[s] != 0 || cadj[s].empty()) continue;
    x[s] = 1;
    std::vector<int> stack{s};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [w, agree] : cadj[v]) {
        const std::int8_t want = agree ? x[v] : static_cast<std::int8_t>(-x[v]);
        if (x[w] == 0) {
          x[w] = want;
          stack.push_back(w);
        } else if (x[w] != want) {
          throw InternalError("inconsistent matching constraints");
        }
      }
    }
  }
  for (int v = 0; v < np; ++v)
    if (x[v] == 0) x[v] = 1;

  // Match every active vertex via its face pattern.
  std::vector<char> is_active(3 * F, 0);
  for (const int u : active) is_active[u] = 1;
  std::vector<int> out;
  for (const int u : active) {
    const int f = u / 3, s = u % 3;
    const int pe = d.face_primal_edges[f][s];
    int match_edge;
    if (x[ends[pe][0]] == x[ends[pe][1]]) {
      match_edge = d.dual_edge[pe];
    } else {
      // Single agreeing slot p; u lies on the city edge joining p+1, p+2.
      int p = -1;
      for (int i = 0; i < 3; ++i) {
        const int e2 = d.face_primal_edges[f][i];
        if (x[ends[e2][0]] == x[ends[e2][1]]) p = i;
      }
      if (p < 0) throw InternalError("face without an agreeing edge");
      match_edge = d.face_city_edges[f][(p + 1) % 3];
    }
    const auto& me = d.emb.graph.edge(match_edge);
    const int partner = me.other(u);
    if (!is_active[partner]) throw InternalError("base matching escapes the active set");
    if (u < partner) out.push_back(match_edge);
  }
  if (out.size() * 2 != active.size()) throw InternalError("base matching not perfect");
  std::sort(out.begin(), out.end());
  return PerfectMatching{std::move(out)};
}

}  // namespace

struct DualPmSampler::ModeCache {
  // Host view for this mode.
  PlanarEmbedding emb;                // own copy (edge-deleted for WithoutEdge)
  std::vector<double> w;
  std::vector<std::int8_t> o;
  std::vector<int> host2dual;         // edge map (identity except WithoutEdge)
  std::vector<int> active0;
  WilsonHost host;                    // points into this struct
  LevelArtifacts top;                 // cached level-0 factorization
  bool top_ready = false;
};

DualPmSampler::DualPmSampler(const ExpandedDual& dual, std::vector<std::int8_t> orientation,
                             int evirt_dual_edge)
    : dual_(dual), orient_(std::move(orientation)), evirt_(evirt_dual_edge) {}

DualPmSampler::~DualPmSampler() = default;

PerfectMatching DualPmSampler::sample(Mode mode, Rng& rng) {
  const int mi = static_cast<int>(mode);
  if (!cache_[mi]) {
    auto c = std::make_shared<ModeCache>();
    const Graph& dg = dual_.emb.graph;
    if (mode == Mode::WithoutEdge) {
      detail::RotationEditor ed(dual_.emb);
      ed.remove_edge(evirt_);
      std::vector<int> emap;
      c->emb = ed.finish(&emap);
      c->host2dual = std::move(emap);
    } else {
      c->emb = dual_.emb;
      c->host2dual.resize(dg.num_edges());
      for (int e = 0; e < dg.num_edges(); ++e) c->host2dual[e] = e;
    }
    c->w.resize(c->emb.graph.num_edges());
    c->o.resize(c->emb.graph.num_edges());
    for (int e = 0; e < c->emb.graph.num_edges(); ++e) {
      c->w[e] = dual_.weight[c->host2dual[e]];
      c->o[e] = orient_[c->host2dual[e]];
    }
    for (int v = 0; v < c->emb.graph.num_vertices(); ++v) {
      if (mode == Mode::WithoutVertices &&
          (v == dg.edge(evirt_).u || v == dg.edge(evirt_).v))
        continue;
      c->active0.push_back(v);
    }
    c->host.emb = &c->emb;
    c->host.weights = &c->w;
    c->host.orient = &c->o;
    c->host.active = c->active0;
    const auto* self_dual = &dual_;
    const int ev = evirt_;
    const auto* h2d = &c->host2dual;
    const bool identity_map = (mode != Mode::WithoutEdge);
    c->host.base_pm = [self_dual, mode, ev, h2d, identity_map](const std::vector<int>& active,
                                                               const std::vector<int>& drawn) {
      // Translate drawn host edges to dual ids before constraint propagation.
      std::vector<int> drawn_dual;
      drawn_dual.reserve(drawn.size());
      for (const int e : drawn) drawn_dual.push_back((*h2d)[e]);
      PerfectMatching pm = dual_base_pm(*self_dual, mode, ev, active, drawn_dual);
      if (!identity_map) {
        std::vector<int> d2h(self_dual->emb.graph.num_edges(), -1);
        for (std::size_t i = 0; i < h2d->size(); ++i) d2h[(*h2d)[i]] = static_cast<int>(i);
        for (int& e : pm.edges) {
          e = d2h[e];
          if (e < 0) throw InternalError("base matching uses a removed edge");
        }
        std::sort(pm.edges.begin(), pm.edges.end());
      }
      return pm;
    };
    cache_[mi] = std::move(c);
  }

  ModeCache& c = *cache_[mi];
  if (!c.top_ready) {
    build_level(c.host, c.active0, {}, false, c.top, &stats_);
    c.top_ready = true;
  }

  std::vector<int> drawn;
  double log_prob = 0.0;
  sample_rec(c.host, c.active0, drawn, rng, &stats_, &c.top, &log_prob);
  stats_.last_log_prob = log_prob;

  // Map to dual edge ids; re-add the virtual edge in vertex-deleted mode.
  for (int& e : drawn) e = c.host2dual[e];
  if (mode == Mode::WithoutVertices) drawn.push_back(evirt_);
  std::sort(drawn.begin(), drawn.end());
  return PerfectMatching{std::move(drawn)};
}

SpinConfiguration sample_planar_ising_spins(const IsingModel& m, Rng& rng) {
  m.validate();
  const int n = m.graph.num_vertices();
  if (n == 1) return SpinConfiguration{rng.coin() ? std::int8_t(1) : std::int8_t(-1)};
  if (n == 2) {
    const std::int8_t xu = rng.coin() ? 1 : -1;
    const double p_eq = 1.0 / (1.0 + std::exp(-2.0 * m.coupling[0]));
    const std::int8_t xv = (rng.uniform01() < p_eq) ? xu : static_cast<std::int8_t>(-xu);
    return SpinConfiguration{xu, xv};
  }
  PlanarPipeline pipe = PlanarPipeline::build(m);
  DualPmSampler sampler(pipe.dual, pipe.orient);
  const PerfectMatching pm = sampler.sample(DualPmSampler::Mode::Full, rng);
  SpinConfiguration x = pm_to_spins(pipe.dual, pm);
  if (rng.coin())
    for (auto& s : x) s = -s;
  return x;
}

}  // namespace ising
