#pragma once

#include "coulomb_ot/solver.hpp"

#include <utility>
#include <vector>

namespace coulomb_ot {

struct PotentialPair {
  Vector psi;  // on source atoms
  Vector phi;  // on target atoms
  double K = 0.0;  // semiconcavity constant of the cost (inf for Coulomb)
  std::pair<int, int> base{-1, -1};  // support entry (i0, j0) with psi(i0) = 0
  int chain_rounds = 0;  // relaxation rounds until the chain infimum settled
};

/// Potentials from the chain formula over the plan support: phi is the
/// infimum over support chains, relaxed round by round (round k covers
/// chains of k links), then psi is its c-transform. `max_chain <= 0` runs
/// until the fixed point and throws NegativeCycleError if none exists
/// within #support + 1 rounds; a positive value truncates the chains.
PotentialPair ruschendorf_potentials(const Plan& plan, const CostModel& c, int max_chain = 0);

/// g(to_k) = min_l [c(to_k, from_l) - f(from_l)]. Points are dim x n.
Vector c_transform(const Vector& f, const CostModel& c, const Matrix& from_points, const Matrix& to_points);

struct SemiconcavityReport {
  long checked = 0;
  long violations = 0;
  double max_second_difference = 0.0;  // of psi - K/2 |x|^2, unscaled
  double tolerance = 0.0;
  int worst_index = -1;
  bool passed() const { return violations == 0; }
};

/// Axis second differences of psi - (K/2)|x|^2 at interior grid atoms must
/// stay below tol_rel * max(1, max |psi - (K/2)|x|^2|). Throws DomainError
/// when the atoms carry no grid.
SemiconcavityReport semiconcavity_probe(const Vector& psi, const DiscreteMeasure& sources, double K,
                                        double tol_rel = 1e-8);

struct MapTable {
  Matrix gradient;   // d x n, finite-difference grad psi
  Matrix predicted;  // d x n, x + p / |p|^{3/2}; NaN where undefined
  Matrix assigned;   // d x n, barycentric plan targets
  Vector residual;   // |predicted - assigned|
  std::vector<bool> interior;  // central differences on every axis
  std::vector<bool> flagged;   // zero gradient or residual above threshold
  double threshold = 0.0;
};

/// Monge map recovered from psi via the c-exponential, compared with the
/// plan. Central differences inside the grid, one-sided at its boundary.
/// `threshold <= 0` uses two grid spacings.
MapTable map_from_potential(const Vector& psi, const DiscreteMeasure& sources, const Plan& plan,
                            double threshold = 0.0);

/// max over all (i, j) of psi_i + phi_j - c(x_i, y_j), and max over the
/// support of |psi_i + phi_j - c(x_i, y_j)|.
std::pair<double, double> dual_residuals(const PotentialPair& pot, const Plan& plan, const CostModel& c);

}  // namespace coulomb_ot
