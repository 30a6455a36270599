#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "ising/planar_pm.hpp"
#include "ising/rng.hpp"

namespace ising {

struct WilsonStats {
  long dense_fallbacks = 0;
  // Cumulative log of the conditional probabilities of the last drawn
  // matching; telescopes to log(prod c_e / Z-hat) for the full draw.
  double last_log_prob = 0.0;
};

/// Lower-right t x t block of K-bar's inverse, obtained by inverting the
/// trailing Schur complement (identical to solving the 2t triangular systems
/// of the trailing factors). t counts scalar indices and must be even.
Eigen::MatrixXd corner_inverse(KasteleynSystem& ks, int t, bool* dense_fallback = nullptr);

/// A sampling host: a planar degree-<=3 embedded graph with positive edge
/// weights, an active vertex subset, and a base-matching callback. The
/// callback must return a perfect matching of the active induced subgraph
/// consistent with `drawn` (the edges drawn so far in this sampling run).
struct WilsonHost {
  const PlanarEmbedding* emb = nullptr;
  const std::vector<double>* weights = nullptr;
  const std::vector<std::int8_t>* orient = nullptr;
  std::vector<int> active;
  std::function<PerfectMatching(const std::vector<int>& active, const std::vector<int>& drawn)>
      base_pm;
};

/// Exact sample from P(M) proportional to the product of edge weights over
/// perfect matchings of the active induced subgraph.
PerfectMatching sample_pm_host(const WilsonHost& host, Rng& rng, WilsonStats* stats = nullptr);

/// Convenience surface for standalone hosts: Pfaffian-orients the embedding
/// and finds base matchings by backtracking (suitable for small hosts).
PerfectMatching sample_pm(const PlanarEmbedding& emb, const std::vector<double>& weights, Rng& rng);

/// Sampler over one expanded dual: the full host G*, the vertex-deleted host
/// used when the virtual-edge spins agree, and the edge-deleted host used
/// when they disagree. Base matchings come from spin configurations through
/// the M mapping; per-mode top-level factorizations are cached across draws.
class DualPmSampler {
 public:
  enum class Mode { Full, WithoutVertices, WithoutEdge };

  DualPmSampler(const ExpandedDual& dual, std::vector<std::int8_t> orientation,
                int evirt_dual_edge = -1);

  /// Sample a PM of G* (Mode::WithoutVertices re-adds the virtual dual edge,
  /// so the result always extends to a perfect matching of the full dual).
  PerfectMatching sample(Mode mode, Rng& rng);

  const WilsonStats& stats() const { return stats_; }

 private:
  struct ModeCache;
  PerfectMatching sample_impl(Mode mode, Rng& rng);

  const ExpandedDual& dual_;
  std::vector<std::int8_t> orient_;
  int evirt_;
  WilsonStats stats_;
  std::shared_ptr<ModeCache> cache_[3];

 public:
  ~DualPmSampler();
};

/// Exact spin sample of a connected planar zero-field model via the dual PM
/// pipeline (builds everything internally; for repeated sampling prefer the
/// engine, which caches per-node artifacts).
SpinConfiguration sample_planar_ising_spins(const IsingModel& m, Rng& rng);

}  // namespace ising
