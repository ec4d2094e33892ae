#pragma once

#include "coulomb_ot/solver.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace coulomb_ot {

/// x + L/2 on [0, L/2], x - L/2 on (L/2, L]. Throws DomainError outside [0, L].
double uniform_1d_map(double L, double x);

/// Exhaustive minimum over all n! assignments of equal-weight atoms
/// (n <= 8 per side). Assignments through an infinite cost are skipped;
/// throws InfeasibleError if every assignment is infinite. The first
/// minimizer in lexicographic permutation order wins.
std::pair<Plan, double> brute_force_assignment(std::shared_ptr<const DiscreteMeasure> mu,
                                               std::shared_ptr<const DiscreteMeasure> nu, const CostModel& c);

enum class RadialPairing { kAntipodal, kSameRay, kBest };

struct RadialOracle {
  std::vector<double> radii;   // shell radii, ascending
  std::vector<double> masses;  // shell masses, sum 1
  std::vector<TransportEntry> plan;  // shell-to-shell coupling
  Vector image_radius;  // mass-weighted mean image radius per shell
  double r_star = 0.0;  // where image_radius - r changes sign
  double cost = 0.0;
  RadialPairing pairing = RadialPairing::kAntipodal;
};

/// Reduced problem on radial shells. Radius r paired with s costs
/// 1/(r + s) on opposite rays and 1/|r - s| on the same ray (infinite for
/// r = s). kBest solves both and keeps the cheaper. Throws
/// std::invalid_argument on an empty, unsorted or unnormalized table.
RadialOracle radial_reduction_oracle(const std::vector<double>& radii, const std::vector<double>& masses,
                                     RadialPairing pairing = RadialPairing::kBest);

/// Shell table of a measure around `center`: atoms binned into shells of
/// width `shell_width`, each shell at the mass-weighted mean radius.
std::pair<std::vector<double>, std::vector<double>> radial_mass_table(const DiscreteMeasure& m, const Vector& center,
                                                                      double shell_width);

}  // namespace coulomb_ot
