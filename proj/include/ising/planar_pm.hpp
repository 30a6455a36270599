#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "ising/graph.hpp"
#include "ising/model.hpp"

namespace ising {

struct EmbeddedModel {
  IsingModel model;
  PlanarEmbedding emb;
};

/// Add zero-coupling chords until every face is a triangle. The graph stays
/// simple; existing edge ids are preserved and chords get fresh ids.
EmbeddedModel triangulate(const EmbeddedModel& m);

/// Expanded dual graph G*: each face of the triangulated primal becomes a
/// K3 "city"; city vertices carry one intercity edge each, crossing the
/// corresponding primal edge. E*_I is a perfect matching of G*.
struct ExpandedDual {
  PlanarEmbedding emb;                     // G* with rotations
  std::vector<std::int8_t> is_intercity;   // per dual edge
  std::vector<int> primal_edge;            // dual edge -> primal edge id (-1 for city edges)
  std::vector<int> dual_edge;              // primal edge -> intercity dual edge id (the map g)
  std::vector<double> weight;              // c_e: exp(2 J) intercity, 1 city
  // City bookkeeping: dual vertex 3*f + i sits on face f at boundary slot i.
  std::vector<std::array<int, 3>> face_primal_edges;  // per face: primal edge at each slot
  std::vector<std::array<int, 3>> face_city_edges;    // per face: city edge joining slots (i, i+1)
  std::vector<std::array<int, 3>> face_vertices;      // per face: primal vertices (slot i = tail of dart i)

  int num_faces() const { return static_cast<int>(face_primal_edges.size()); }
};

ExpandedDual build_expanded_dual(const EmbeddedModel& tri);

/// M mapping: intercity edge is matched iff the endpoints of its primal edge
/// agree; each city is then completed in the unique way.
PerfectMatching spins_to_pm(const ExpandedDual& d, const SpinConfiguration& x);

/// Inverse of M on the x_0 = +1 half-space.
SpinConfiguration pm_to_spins(const ExpandedDual& d, const PerfectMatching& pm);

/// Pfaffian orientation: +1 keeps the stored (u, v) direction, -1 flips it.
/// Every face except one has an odd number of co-directed boundary darts.
std::vector<std::int8_t> pfaffian_orient(const PlanarEmbedding& emb);

struct Separation {
  std::vector<int> part1, part2, separator;
};

/// Lipton-Tarjan separator: max(|P1|,|P2|) <= 2n/3 and |P3| <= 2^{3/2} sqrt(n).
Separation planar_separator(const PlanarEmbedding& emb);

class OversizedSeparatorError : public InvalidModelError {
 public:
  using InvalidModelError::InvalidModelError;
};

/// Nested dissection ordering of a planar graph: parts are ordered before
/// their separator at every recursion level. When `forced_top` is given those
/// vertices occupy the final positions (size checked against 12 sqrt(n)).
std::vector<int> nested_dissection_order(const Graph& contracted,
                                         const std::vector<int>* forced_top = nullptr);

/// Skew-symmetric Kasteleyn matrix of an oriented weighted host, reordered so
/// that the base matching pairs consecutive vertices, with the column-swapped
/// variant eliminated in 2x2 pivot blocks under a nested dissection order of
/// the pair-contracted graph.
class KasteleynSystem {
 public:
  KasteleynSystem(const Graph& host, const std::vector<double>& weights,
                  const std::vector<std::int8_t>& orientation, const PerfectMatching& base,
                  const std::vector<int>* forced_top_pairs = nullptr);

  int num_vertices() const { return 2 * npairs_; }
  int num_pairs() const { return npairs_; }
  const std::vector<int>& vertex_order() const { return order_; }     // position -> host vertex
  const std::vector<int>& position_of() const { return pos_; }        // host vertex -> position
  int pair_of_position(int p) const { return p / 2; }

  struct ElimResult {
    double log_abs_det = 0.0;  // of K-bar restricted to the eliminated pivots
    int sign = 1;
    bool dense_fallback = false;
  };

  /// Eliminate the leading (npairs - trailing_pairs) pivot blocks. With
  /// trailing_pairs = 0 this is the full factorization; otherwise `schur`
  /// receives the trailing Schur complement (dense, size 2t x 2t).
  ElimResult eliminate(int trailing_pairs, Eigen::MatrixXd* schur);

  /// Dense K-bar (for fallbacks and small tests).
  Eigen::MatrixXd dense_kbar() const;

 private:
  int npairs_ = 0;
  std::vector<int> order_, pos_;
  // K-bar entries: (row position, col position, value).
  struct Entry {
    int r, c;
    double v;
  };
  std::vector<Entry> entries_;
};

struct PmPartitionResult {
  double log_z;
  bool dense_fallback;
};

/// log of the PM-model partition function via 0.5 * log det K. Asserts the
/// tracked determinant sign is positive.
PmPartitionResult log_pm_partition(KasteleynSystem& ks);

/// Cached per-component pipeline: triangulation, dual, orientation, base
/// matching. Built once, queried for Z* and the vertex-deleted variant.
struct PlanarPipeline {
  EmbeddedModel tri;
  ExpandedDual dual;
  std::vector<std::int8_t> orient;
  PerfectMatching base;
  bool dense_fallback = false;

  static PlanarPipeline build(const IsingModel& biconnected_model);

  double log_zstar();                      // full G*
  double log_zstar_without(int dual_edge); // G*_V: e*_V endpoints deleted
  /// log Z of the Ising model itself (log 2 + log Z* - sum of couplings).
  double log_z();
};

/// log Z of a connected planar zero-field model (any connectivity structure
/// inside: composes biconnected pieces).
double log_partition_planar_ising(const IsingModel& m);

}  // namespace ising
