#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ising/errors.hpp"
#include "ising/graph.hpp"

namespace ising {

/// Zero-field pairwise model: a normal graph plus one coupling per edge.
/// There are no vertex potentials anywhere in the engine.
struct IsingModel {
  Graph graph;
  std::vector<double> coupling;  // indexed by edge id

  void validate() const {
    if (static_cast<int>(coupling.size()) != graph.num_edges())
      throw InvalidModelError("coupling count does not match edge count");
    for (const double j : coupling)
      if (!std::isfinite(j)) throw InvalidModelError("non-finite coupling");
  }
};

/// Per-vertex spin in {-1, +1}.
using SpinConfiguration = std::vector<std::int8_t>;

struct PerfectMatching {
  std::vector<int> edges;  // sorted edge ids
};

}  // namespace ising
