#pragma once

#include <memory>
#include <vector>

#include "ising/decomp.hpp"
#include "ising/model.hpp"
#include "ising/rng.hpp"

namespace ising {

/// Subtree summary of one component-tree node: pi(x', x'') depends only on
/// the product x'x'', so log pi = A + B x'x'' exactly.
struct PiTable {
  double log_pi_equal = 0.0;    // log pi(+1, +1)
  double log_pi_unequal = 0.0;  // log pi(+1, -1)
  double a() const { return 0.5 * (log_pi_equal + log_pi_unequal); }
  double b() const { return 0.5 * (log_pi_equal - log_pi_unequal); }
};

struct EngineOptions {
  // Size bound C for brute-forced nonplanar components; K5 needs 5. Each such
  // node costs O(2^C) during inference and sampling.
  int nonplanar_size_bound = 5;
};

struct RunStats {
  long planar_nodes = 0;
  long nonplanar_nodes = 0;
  long bond_nodes = 0;
  long dense_fallbacks = 0;
  int biconnected_components = 0;
  int connected_components = 0;
};

/// Exact inference and sampling for zero-field models whose triconnected
/// components are planar or small. The constructor runs the forward (pi)
/// pass; sample() runs backward passes against the cached artifacts.
class IsingEngine {
 public:
  explicit IsingEngine(IsingModel model, EngineOptions opts = {});
  ~IsingEngine();
  IsingEngine(IsingEngine&&) noexcept;

  double log_z() const { return log_z_; }
  SpinConfiguration sample(Rng& rng);
  const RunStats& stats() const { return stats_; }

  // Introspection for tests: per-node data of every triconnected-tree node.
  struct NodeView {
    NodeClass cls;
    IsingModel local;              // child couplings folded in as B_i
    std::vector<int> vmap_global;  // local vertex -> model vertex
    int p_local = -1, t_local = -1;
    bool is_root = false;
    PiTable pi;  // meaningful for non-root nodes
  };
  std::vector<NodeView> node_views() const;
  const IsingModel& model() const { return model_; }

 private:
  struct Impl;
  IsingModel model_;
  EngineOptions opts_;
  double log_z_ = 0.0;
  RunStats stats_;
  std::unique_ptr<Impl> impl_;
};

/// One-shot conveniences.
double infer_log_z(const IsingModel& m, EngineOptions opts = {});
SpinConfiguration sample_spins(const IsingModel& m, Rng& rng, EngineOptions opts = {});

}  // namespace ising
