#pragma once

#include <optional>
#include <vector>

#include "ising/engine.hpp"
#include "ising/graph.hpp"
#include "ising/model.hpp"
#include "ising/rng.hpp"

namespace ising::testkit {

struct GeneratorConfig {
  int target_size = 10;
  double coupling_stddev = 0.1;
  std::uint64_t seed = 0;
};

/// 2^N enumeration of log Z with a streaming log-sum-exp (N <= 25).
double brute_log_z(const IsingModel& m);

/// log of the weighted perfect-matching sum by backtracking enumeration;
/// nullopt when the host has no perfect matching (|V| <= 24).
std::optional<double> brute_pm_partition(const Graph& host, const std::vector<double>& weights);

/// Direct enumeration of the pi sums of a node model with pinned (p, t).
PiTable brute_pi(const IsingModel& node_model, int p, int t);

/// Random embedded tree grown one leaf at a time, then triangulated to the
/// biconnected all-triangle form (no parallel edges arise, so the result is
/// already normal).
PlanarEmbedding gen_random_planar(const GeneratorConfig& cfg);
PlanarEmbedding gen_random_planar(int target_size, Rng& rng);

/// K33-free generator: a K5 root plus coin-flipped K5 / random-planar nodes
/// attached to free edges until |V| hits the target; couplings are i.i.d.
/// normal with the configured stddev.
IsingModel gen_random_k33free(const GeneratorConfig& cfg);

/// 2n-cycle with a K5 glued on each odd edge (5n vertices). n = 1 degenerates
/// to a bare K5 (the 2-cycle would not be a normal graph).
Graph gen_k5_necklace(int n);

/// Couplings drawn i.i.d. from N(0, stddev^2).
IsingModel with_random_couplings(Graph g, double stddev, Rng& rng);

/// KL(empirical || model) over the observed configurations (N <= 20).
double kl_divergence_empirical(const IsingModel& model, const std::vector<SpinConfiguration>& samples,
                               EngineOptions opts = {});

}  // namespace ising::testkit
