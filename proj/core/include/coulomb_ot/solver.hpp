#pragma once

#include "coulomb_ot/cost.hpp"
#include "coulomb_ot/network_simplex.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace coulomb_ot {

/// Sparse coupling between two discrete measures.
struct Plan {
  std::vector<TransportEntry> entries;  // sorted by (i, j), all masses > 0
  double cost_value = 0.0;
  std::shared_ptr<const DiscreteMeasure> source;
  std::shared_ptr<const DiscreteMeasure> target;

  Vector row_sums() const;
  Vector column_sums() const;
  /// Mass-weighted mean target of every source atom (NaN for empty rows).
  Matrix barycentric_targets() const;
  /// Target index carrying the most mass from each source atom (-1 if none).
  std::vector<int> dominant_targets() const;
  double recompute_cost(const CostModel& c) const;
};

enum class SolveMethod { kLp, kEntropic };

struct SolveReport {
  double primal_cost = 0.0;
  double dual_cost = 0.0;
  double dual_gap = 0.0;
  long iterations = 0;
  SolveMethod method = SolveMethod::kLp;
  double eta = 0.0;  // entropic only
  double marginal_error = 0.0;
  bool symmetrized = false;
  Vector source_potential;
  Vector target_potential;
};

struct LpOptions {
  int max_size = 4096;
  /// Average the plan with its transpose when mu and nu coincide.
  bool symmetrize = true;
  NetworkSimplexOptions simplex;
};

std::pair<Plan, SolveReport> solve_lp(std::shared_ptr<const DiscreteMeasure> mu,
                                      std::shared_ptr<const DiscreteMeasure> nu, const CostModel& c,
                                      const LpOptions& options = {});

struct EntropicOptions {
  long max_iterations = 100'000;
  double mass_floor = 1e-14;
};

/// Log-domain Sinkhorn scaling on the kernel exp(-eta c) with infinite-cost
/// arcs removed. Throws ConvergenceError when the row marginal error stays
/// above `tol`.
std::pair<Plan, SolveReport> solve_entropic(std::shared_ptr<const DiscreteMeasure> mu,
                                            std::shared_ptr<const DiscreteMeasure> nu, const CostModel& c,
                                            double eta, double tol, const EntropicOptions& options = {});

struct MonotonicityReport {
  long pairs_checked = 0;
  long violations = 0;
  double worst_excess = 0.0;  // max of c(x,y)+c(x',y') - c(x,y') - c(x',y)
  std::pair<int, int> witness{-1, -1};  // entry indices of the worst pair
};

/// Pairwise c-monotonicity of the support with slack 1e-9. `samples <= 0`
/// or a budget at least the number of pairs checks every pair.
MonotonicityReport verify_c_monotonicity(const Plan& plan, const CostModel& c, long samples,
                                         std::uint64_t seed = 0);

std::string to_string(SolveMethod method);

}  // namespace coulomb_ot
