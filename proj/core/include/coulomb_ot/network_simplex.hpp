#pragma once

#include "coulomb_ot/cost.hpp"

#include <vector>

namespace coulomb_ot {

struct TransportEntry {
  int i = 0;
  int j = 0;
  double mass = 0.0;
};

struct NetworkSimplexOptions {
  long max_iterations = 200'000'000;
  /// Flows at or below this are dropped from the returned support.
  double mass_floor = 1e-15;
};

struct NetworkSimplexResult {
  std::vector<TransportEntry> flows;  // sorted by (i, j)
  Vector source_potential;            // u_i, with u_i + v_j <= C_ij
  Vector target_potential;            // v_j
  double primal_cost = 0.0;
  double dual_cost = 0.0;
  long iterations = 0;
};

/// Exact balanced transportation problem min <C, P> subject to row sums
/// `supply` and column sums `demand`, solved by the primal network simplex
/// with block-search pricing on a strongly feasible spanning tree.
/// Entries of C equal to +inf are excluded arcs. Throws InfeasibleError when
/// no finite-cost coupling exists.
NetworkSimplexResult solve_transport(const RowMatrix& cost, const Vector& supply, const Vector& demand,
                                     const NetworkSimplexOptions& options = {});

}  // namespace coulomb_ot
