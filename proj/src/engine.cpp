#include "ising/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <queue>

#include "ising/planar_pm.hpp"
#include "ising/wilson.hpp"

namespace ising {

namespace {

constexpr double kLog2 = 0.69314718055994530941723212145818;

/// log(1 - e^x) for x <= 0, floored at -745 in natural-log units.
double log1mexp(double x) {
  if (x > -1e-17) return -745.0;
  if (x > -kLog2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

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
};

struct NodeCtx {
  NodeClass cls = NodeClass::Planar;
  IsingModel local;  // child couplings folded in as B_i, parent pair at 0
  std::vector<int> vmap;  // local -> block vertex
  int parent_edge_local = -1;
  int p_local = -1, t_local = -1;
  PiTable pi{};
  double sum_child_a = 0.0;
  // Planar node cache (inference artifacts reused by the backward pass).
  std::unique_ptr<PlanarPipeline> pipe;
  std::unique_ptr<DualPmSampler> sampler;
  int evirt_dual = -1;
};

struct Block {
  std::vector<int> vmap;  // block vertex -> component vertex
  std::vector<int> emap;  // block edge -> component edge
  IsingModel local;
  bool tiny = false;  // |V| == 2: closed form
  TriconTree tree;
  std::vector<NodeCtx> nodes;
  double log_z = 0.0;
};

struct CComp {
  std::vector<int> vmap;  // component vertex -> model vertex
  IsingModel local;
  std::vector<Block> blocks;
  std::vector<std::array<int, 3>> block_tree;  // (block a, block b, shared vertex)
  double log_z = 0.0;
};

double node_coupling_sum(const IsingModel& m) {
  double s = 0;
  for (const double j : m.coupling) s += j;
  return s;
}

// Enumerate spin assignments of a small model with some spins pinned;
// feeds log-weights to the callback.
template <typename Cb>
void enumerate_small(const IsingModel& m, const std::vector<std::pair<int, std::int8_t>>& pinned,
                     Cb&& cb) {
  const int n = m.graph.num_vertices();
  std::vector<int> free_v;
  std::vector<std::int8_t> x(n, 0);
  for (const auto& [v, s] : pinned) x[v] = s;
  for (int v = 0; v < n; ++v)
    if (x[v] == 0) free_v.push_back(v);
  const std::uint64_t total = 1ull << free_v.size();
  for (std::uint64_t c = 0; c < total; ++c) {
    for (std::size_t i = 0; i < free_v.size(); ++i)
      x[free_v[i]] = (c >> i & 1) ? 1 : -1;
    double en = 0;
    for (const Edge& e : m.graph.edges()) en += m.coupling[e.id] * x[e.u] * x[e.v];
    cb(en, x);
  }
}

}  // namespace

struct IsingEngine::Impl {
  std::vector<CComp> comps;
  std::vector<int> isolated;  // global ids of degree-0 single-vertex components

  EngineOptions opts;
  RunStats stats;

  void forward(const IsingModel& model);
  void process_block(Block& b);
  PiTable process_node(Block& b, int node_id, bool is_root, double* root_log_z);
  SpinConfiguration sample(const IsingModel& model, Rng& rng);
  void sample_block(Block& b, std::vector<std::int8_t>& comp_spins, Rng& rng);
  long sampler_fallbacks() const;
};

// ════════════════════════════════════════════════════════════════════
//  Forward pass
// ════════════════════════════════════════════════════════════════════

void IsingEngine::Impl::forward(const IsingModel& model) {
  const Graph& g = model.graph;
  const int n = g.num_vertices();

  std::vector<int> comp_of(n, -1);
  int ncomp = 0;
  for (int s = 0; s < n; ++s) {
    if (comp_of[s] != -1) continue;
    std::vector<int> stack{s};
    comp_of[s] = ncomp;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const auto& [e, w] : g.adjacency(v))
        if (comp_of[w] == -1) {
          comp_of[w] = ncomp;
          stack.push_back(w);
        }
    }
    ++ncomp;
  }
  stats.connected_components = ncomp;

  std::vector<std::vector<int>> members(ncomp);
  for (int v = 0; v < n; ++v) members[comp_of[v]].push_back(v);

  for (int ci = 0; ci < ncomp; ++ci) {
    if (members[ci].size() == 1 && g.degree(members[ci][0]) == 0) {
      isolated.push_back(members[ci][0]);
      continue;
    }
    CComp cc;
    cc.vmap = members[ci];
    std::vector<int> local_of(n, -1);
    for (std::size_t i = 0; i < cc.vmap.size(); ++i) local_of[cc.vmap[i]] = static_cast<int>(i);
    Graph lg = Graph::empty(static_cast<int>(cc.vmap.size()));
    std::vector<double> lj;
    for (const Edge& e : g.edges()) {
      if (comp_of[e.u] != ci) continue;
      lg.add_edge(local_of[e.u], local_of[e.v]);
      lj.push_back(model.coupling[e.id]);
    }
    cc.local = IsingModel{std::move(lg), std::move(lj)};

    const auto bic = biconnected_decompose(cc.local.graph);
    stats.biconnected_components += static_cast<int>(bic.components.size());
    for (const auto& te : bic.tree_edges) cc.block_tree.push_back(te);

    double log_z = 0.0;
    std::vector<int> cnt(cc.local.graph.num_vertices(), 0);
    for (const auto& bcomp : bic.components) {
      Block b;
      b.vmap = bcomp.vertex_map;
      b.emap = bcomp.edge_map;
      for (const int v : b.vmap) ++cnt[v];
      b.local.graph = bcomp.graph;
      for (const int ce : b.emap) b.local.coupling.push_back(cc.local.coupling[ce]);
      if (b.local.graph.num_vertices() == 2) {
        b.tiny = true;
        b.log_z = std::log(4.0 * std::cosh(b.local.coupling[0]));
      } else {
        process_block(b);
      }
      log_z += b.log_z;
      cc.blocks.push_back(std::move(b));
    }
    for (const int c : cnt)
      if (c > 1) log_z -= (c - 1) * kLog2;
    cc.log_z = log_z;
    comps.push_back(std::move(cc));
  }
}

void IsingEngine::Impl::process_block(Block& b) {
  b.tree = build_tricon_tree(triconnected_decompose(b.local.graph));
  b.nodes.resize(b.tree.nodes.size());
  for (const int a : b.tree.postorder()) {
    const bool is_root = (a == b.tree.root);
    double root_log_z = 0;
    b.nodes[a].pi = process_node(b, a, is_root, is_root ? &root_log_z : nullptr);
    if (is_root) b.log_z = root_log_z;
  }
}

PiTable IsingEngine::Impl::process_node(Block& b, int node_id, bool is_root, double* root_log_z) {
  const TriconComponent& tc = b.tree.nodes[node_id];
  NodeCtx& ctx = b.nodes[node_id];
  ctx.vmap = tc.vertex_map;
  ctx.parent_edge_local = b.tree.parent_edge_local[node_id];

  // Local model: real couplings from the block, child pairs at B_i,
  // the parent pair at zero.
  ctx.local.graph = tc.graph;
  ctx.local.coupling.assign(tc.graph.num_edges(), 0.0);
  ctx.sum_child_a = 0.0;
  for (int le = 0; le < tc.graph.num_edges(); ++le)
    if (tc.edge_map[le] >= 0) ctx.local.coupling[le] = b.local.coupling[tc.edge_map[le]];
  for (const int te : b.tree.children[node_id]) {
    const auto& edge = b.tree.edges[te];
    const PiTable& child_pi = b.nodes[edge.child].pi;
    ctx.local.coupling[edge.parent_edge] = child_pi.b();
    ctx.sum_child_a += child_pi.a();
  }
  if (!is_root) {
    const Edge& pe = ctx.local.graph.edge(ctx.parent_edge_local);
    ctx.p_local = pe.u;
    ctx.t_local = pe.v;
  }

  ctx.cls = classify_component(tc, opts.nonplanar_size_bound);
  switch (ctx.cls) {
    case NodeClass::MultipleBond:
      ++stats.bond_nodes;
      break;
    case NodeClass::SmallNonplanar:
      ++stats.nonplanar_nodes;
      break;
    case NodeClass::Planar:
      ++stats.planar_nodes;
      break;
  }

  PiTable pi;
  if (ctx.cls == NodeClass::MultipleBond) {
    if (is_root) throw InternalError("bond root in a normal graph");
    const double s = node_coupling_sum(ctx.local);  // parent pair contributes 0
    pi.log_pi_equal = ctx.sum_child_a + s;
    pi.log_pi_unequal = ctx.sum_child_a - s;
    return pi;
  }

  if (ctx.cls == NodeClass::SmallNonplanar) {
    if (is_root) {
      LogSum z;
      enumerate_small(ctx.local, {}, [&](double en, const SpinConfiguration&) { z.add(en); });
      *root_log_z = ctx.sum_child_a + z.value();
      return pi;
    }
    LogSum eq, uneq;
    enumerate_small(ctx.local, {{ctx.p_local, 1}}, [&](double en, const SpinConfiguration& x) {
      (x[ctx.t_local] == 1 ? eq : uneq).add(en);
    });
    pi.log_pi_equal = ctx.sum_child_a + eq.value();
    pi.log_pi_unequal = ctx.sum_child_a + uneq.value();
    return pi;
  }

  // Planar node: dual pipeline. Z_a comes from Z* via the PF identity; the
  // equal-spin probability is c_{e*_V} Z*_V / Z*.
  ctx.pipe = std::make_unique<PlanarPipeline>(PlanarPipeline::build(ctx.local));
  const double log_zstar = ctx.pipe->log_zstar();
  const double log_za = kLog2 + log_zstar - node_coupling_sum(ctx.pipe->tri.model);
  if (ctx.pipe->dense_fallback) ++stats.dense_fallbacks;
  if (is_root) {
    *root_log_z = ctx.sum_child_a + log_za;
    return pi;
  }
  ctx.evirt_dual = ctx.pipe->dual.dual_edge[ctx.parent_edge_local];
  const double log_zstar_v = ctx.pipe->log_zstar_without(ctx.evirt_dual);
  double log_p_eq = std::log(ctx.pipe->dual.weight[ctx.evirt_dual]) + log_zstar_v - log_zstar;
  if (log_p_eq > 0) {
    if (log_p_eq > 1e-6) throw InternalError("equal-spin probability above 1 beyond tolerance");
    log_p_eq = 0.0;
  }
  pi.log_pi_equal = ctx.sum_child_a + log_za - kLog2 + log_p_eq;
  pi.log_pi_unequal = ctx.sum_child_a + log_za - kLog2 + log1mexp(log_p_eq);
  return pi;
}

// ════════════════════════════════════════════════════════════════════
//  Backward pass
// ════════════════════════════════════════════════════════════════════

namespace {

// Draw a full assignment of a small model (optionally with pins) with
// probability proportional to exp(sum J x x).
SpinConfiguration draw_small(const IsingModel& m,
                             const std::vector<std::pair<int, std::int8_t>>& pinned, Rng& rng) {
  std::vector<double> logw;
  std::vector<SpinConfiguration> states;
  enumerate_small(m, pinned, [&](double en, const SpinConfiguration& x) {
    logw.push_back(en);
    states.push_back(x);
  });
  const double mx = *std::max_element(logw.begin(), logw.end());
  double total = 0;
  for (const double lw : logw) total += std::exp(lw - mx);
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    u -= std::exp(logw[i] - mx);
    if (u < 0) return states[i];
  }
  return states.back();
}

}  // namespace

void IsingEngine::Impl::sample_block(Block& b, std::vector<std::int8_t>& comp_spins, Rng& rng) {
  std::vector<std::int8_t> bs(b.local.graph.num_vertices(), 0);
  if (b.tiny) {
    const std::int8_t xu = rng.coin() ? 1 : -1;
    const double p_eq = 1.0 / (1.0 + std::exp(-2.0 * b.local.coupling[0]));
    bs[0] = xu;
    bs[1] = (rng.uniform01() < p_eq) ? xu : static_cast<std::int8_t>(-xu);
  } else {
    // Root first, then children conditioned on their virtual-edge spins.
    std::queue<int> order;
    order.push(b.tree.root);
    while (!order.empty()) {
      const int a = order.front();
      order.pop();
      NodeCtx& ctx = b.nodes[a];
      const bool is_root = (a == b.tree.root);

      SpinConfiguration xl;
      if (ctx.cls == NodeClass::MultipleBond) {
        // Both vertices were drawn by the parent.
        xl.assign(ctx.local.graph.num_vertices(), 0);
        for (int v = 0; v < 2; ++v) xl[v] = bs[ctx.vmap[v]];
        if (xl[0] == 0 || xl[1] == 0) throw InternalError("bond sampled before its parent");
      } else if (is_root) {
        if (ctx.cls == NodeClass::SmallNonplanar) {
          xl = draw_small(ctx.local, {}, rng);
        } else {
          if (!ctx.sampler)
            ctx.sampler = std::make_unique<DualPmSampler>(ctx.pipe->dual, ctx.pipe->orient,
                                                          ctx.evirt_dual);
          const PerfectMatching pm = ctx.sampler->sample(DualPmSampler::Mode::Full, rng);
          xl = pm_to_spins(ctx.pipe->dual, pm);
          if (rng.coin())
            for (auto& s : xl) s = -s;
        }
      } else {
        const std::int8_t xp = bs[ctx.vmap[ctx.p_local]];
        const std::int8_t xt = bs[ctx.vmap[ctx.t_local]];
        if (xp == 0 || xt == 0) throw InternalError("child sampled before its parent");
        if (ctx.cls == NodeClass::SmallNonplanar) {
          xl = draw_small(ctx.local, {{ctx.p_local, xp}, {ctx.t_local, xt}}, rng);
        } else {
          if (!ctx.sampler)
            ctx.sampler = std::make_unique<DualPmSampler>(ctx.pipe->dual, ctx.pipe->orient,
                                                          ctx.evirt_dual);
          const auto mode = (xp == xt) ? DualPmSampler::Mode::WithoutVertices
                                       : DualPmSampler::Mode::WithoutEdge;
          const PerfectMatching pm = ctx.sampler->sample(mode, rng);
          xl = pm_to_spins(ctx.pipe->dual, pm);
          if (xl[ctx.p_local] != xp)
            for (auto& s : xl) s = -s;
          if (xl[ctx.p_local] != xp || xl[ctx.t_local] != xt)
            throw InternalError("conditional sample violates the virtual-edge spins");
        }
      }

      for (std::size_t lv = 0; lv < ctx.vmap.size(); ++lv) {
        auto& cell = bs[ctx.vmap[lv]];
        if (cell == 0)
          cell = xl[lv];
        else if (cell != xl[lv])
          throw InternalError("inconsistent spins at a separation pair");
      }
      for (const int te : b.tree.children[a]) order.push(b.tree.edges[te].child);
    }
  }
  for (std::size_t v = 0; v < bs.size(); ++v) {
    if (bs[v] == 0) throw InternalError("unsampled block vertex");
    comp_spins[b.vmap[v]] = bs[v];
  }
}

SpinConfiguration IsingEngine::Impl::sample(const IsingModel& model, Rng& rng) {
  SpinConfiguration x(model.graph.num_vertices(), 0);
  for (const int v : isolated) x[v] = rng.coin() ? 1 : -1;

  for (auto& cc : comps) {
    const int nb = static_cast<int>(cc.blocks.size());
    std::vector<std::vector<std::int8_t>> block_spins(nb);
    for (int bi = 0; bi < nb; ++bi) {
      std::vector<std::int8_t> comp_view(cc.local.graph.num_vertices(), 0);
      sample_block(cc.blocks[bi], comp_view, rng);
      block_spins[bi].resize(cc.blocks[bi].vmap.size());
      for (std::size_t lv = 0; lv < cc.blocks[bi].vmap.size(); ++lv)
        block_spins[bi][lv] = comp_view[cc.blocks[bi].vmap[lv]];
    }
    // Align shared articulation spins by whole-block flips (root block first).
    std::vector<std::vector<std::pair<int, int>>> badj(nb);  // (other block, shared comp vertex)
    for (const auto& [a, b2, v] : cc.block_tree) {
      badj[a].emplace_back(b2, v);
      badj[b2].emplace_back(a, v);
    }
    std::vector<char> done(nb, 0);
    std::queue<int> q;
    if (nb > 0) {
      q.push(0);
      done[0] = 1;
    }
    std::vector<std::int8_t> comp_spins(cc.local.graph.num_vertices(), 0);
    auto write_block = [&](int bi) {
      const auto& blk = cc.blocks[bi];
      for (std::size_t lv = 0; lv < blk.vmap.size(); ++lv) comp_spins[blk.vmap[lv]] = block_spins[bi][lv];
    };
    write_block(0);
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      for (const auto& [b2, v] : badj[a]) {
        if (done[b2]) continue;
        done[b2] = 1;
        // Locate v inside block b2.
        const auto& blk = cc.blocks[b2];
        std::int8_t at_child = 0;
        for (std::size_t lv = 0; lv < blk.vmap.size(); ++lv)
          if (blk.vmap[lv] == v) at_child = block_spins[b2][lv];
        if (at_child == 0) throw InternalError("articulation vertex missing from block");
        if (at_child != comp_spins[v])
          for (auto& s : block_spins[b2]) s = -s;
        write_block(b2);
        q.push(b2);
      }
    }
    for (std::size_t lv = 0; lv < cc.vmap.size(); ++lv) {
      if (comp_spins[lv] == 0) throw InternalError("unsampled component vertex");
      x[cc.vmap[lv]] = comp_spins[lv];
    }
  }
  return x;
}

long IsingEngine::Impl::sampler_fallbacks() const {
  long total = 0;
  for (const auto& cc : comps)
    for (const auto& b : cc.blocks)
      for (const auto& nc : b.nodes)
        if (nc.sampler) total += nc.sampler->stats().dense_fallbacks;
  return total;
}

// ════════════════════════════════════════════════════════════════════
//  Public surface
// ════════════════════════════════════════════════════════════════════

IsingEngine::IsingEngine(IsingModel model, EngineOptions opts)
    : model_(std::move(model)), opts_(opts), impl_(std::make_unique<Impl>()) {
  model_.validate();
  impl_->opts = opts_;
  impl_->forward(model_);
  stats_ = impl_->stats;
  double lz = impl_->isolated.size() * kLog2;
  for (const auto& cc : impl_->comps) lz += cc.log_z;
  log_z_ = lz;
}

IsingEngine::~IsingEngine() = default;
IsingEngine::IsingEngine(IsingEngine&&) noexcept = default;

SpinConfiguration IsingEngine::sample(Rng& rng) {
  auto x = impl_->sample(model_, rng);
  stats_ = impl_->stats;
  stats_.dense_fallbacks += impl_->sampler_fallbacks();
  return x;
}

std::vector<IsingEngine::NodeView> IsingEngine::node_views() const {
  std::vector<NodeView> out;
  for (const auto& cc : impl_->comps) {
    for (const auto& b : cc.blocks) {
      if (b.tiny) continue;
      for (std::size_t a = 0; a < b.nodes.size(); ++a) {
        const NodeCtx& ctx = b.nodes[a];
        NodeView nv;
        nv.cls = ctx.cls;
        nv.local = ctx.local;
        nv.is_root = (static_cast<int>(a) == b.tree.root);
        nv.p_local = ctx.p_local;
        nv.t_local = ctx.t_local;
        nv.pi = ctx.pi;
        for (const int bv : ctx.vmap) nv.vmap_global.push_back(cc.vmap[b.vmap[bv]]);
        out.push_back(std::move(nv));
      }
    }
  }
  return out;
}

double infer_log_z(const IsingModel& m, EngineOptions opts) { return IsingEngine(m, opts).log_z(); }

SpinConfiguration sample_spins(const IsingModel& m, Rng& rng, EngineOptions opts) {
  IsingEngine engine(m, opts);
  return engine.sample(rng);
}

}  // namespace ising
