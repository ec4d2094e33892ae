#include "coulomb_ot/reference.hpp"

#include "coulomb_ot/errors.hpp"
#include "coulomb_ot/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace coulomb_ot {

double uniform_1d_map(double L, double x) {
  if (!(L > 0.0)) throw std::invalid_argument("interval length must be positive");
  if (x < 0.0 || x > L) throw DomainError("point outside [0, L]");
  return x <= 0.5 * L ? x + 0.5 * L : x - 0.5 * L;
}

std::pair<Plan, double> brute_force_assignment(std::shared_ptr<const DiscreteMeasure> mu,
                                               std::shared_ptr<const DiscreteMeasure> nu, const CostModel& c) {
  const int n = mu->size();
  if (nu->size() != n) throw std::invalid_argument("assignment needs equal atom counts");
  if (n > 8) throw std::invalid_argument("brute force is limited to 8 atoms");
  for (int k = 0; k < n; ++k) {
    if (std::abs(mu->weight(k) - 1.0 / n) > 1e-12 || std::abs(nu->weight(k) - 1.0 / n) > 1e-12) {
      throw std::invalid_argument("brute force needs equal weights");
    }
  }
  const RowMatrix cost = cost_matrix(c, *mu, *nu);
  std::vector<int> perm(n), best;
  std::iota(perm.begin(), perm.end(), 0);
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int k = 0; k < n && std::isfinite(s); ++k) s += cost(k, perm[k]);
    if (std::isfinite(s) && s < best_cost) {
      best_cost = s;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (best.empty()) throw InfeasibleError("every assignment has infinite cost");

  Plan plan;
  plan.source = mu;
  plan.target = nu;
  for (int k = 0; k < n; ++k) plan.entries.push_back({k, best[k], 1.0 / n});
  plan.cost_value = best_cost / n;
  const double value = plan.cost_value;
  return {std::move(plan), value};
}

namespace {

RadialOracle solve_shells(const std::vector<double>& r, const std::vector<double>& m, RadialPairing pairing) {
  const auto n = static_cast<int>(r.size());
  RowMatrix cost(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      cost(a, b) = pairing == RadialPairing::kAntipodal ? 1.0 / (r[a] + r[b])
                   : a == b                           ? std::numeric_limits<double>::infinity()
                                                      : 1.0 / std::abs(r[a] - r[b]);
    }
  }
  const Vector w = Eigen::Map<const Vector>(m.data(), n);
  auto res = solve_transport(cost, w, w);
  RadialOracle out;
  out.radii = r;
  out.masses = m;
  out.pairing = pairing;
  out.cost = res.primal_cost;
  out.plan = std::move(res.flows);
  out.image_radius = Vector::Zero(n);
  for (const auto& e : out.plan) out.image_radius[e.i] += e.mass * r[e.j];
  for (int a = 0; a < n; ++a) out.image_radius[a] /= m[a];
  // First sign change of s(r) - r from positive to nonpositive.
  out.r_star = r.back();
  for (int a = 0; a < n; ++a) {
    const double fa = out.image_radius[a] - r[a];
    if (fa <= 0.0) {
      if (a == 0) {
        out.r_star = r[0];
      } else {
        const double fp = out.image_radius[a - 1] - r[a - 1];
        out.r_star = r[a - 1] + (r[a] - r[a - 1]) * fp / (fp - fa);
      }
      break;
    }
  }
  return out;
}

}  // namespace

RadialOracle radial_reduction_oracle(const std::vector<double>& radii, const std::vector<double>& masses,
                                     RadialPairing pairing) {
  if (radii.empty() || radii.size() != masses.size()) throw std::invalid_argument("degenerate shell table");
  double total = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || !(masses[k] > 0.0)) throw std::invalid_argument("shells need positive radius and mass");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw std::invalid_argument("shell radii must increase");
    total += masses[k];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("shell masses must sum to one");
  if (pairing != RadialPairing::kBest) return solve_shells(radii, masses, pairing);
  RadialOracle anti = solve_shells(radii, masses, RadialPairing::kAntipodal);
  if (radii.size() < 2) return anti;
  try {
    RadialOracle same = solve_shells(radii, masses, RadialPairing::kSameRay);
    if (same.cost < anti.cost) return same;
  } catch (const InfeasibleError&) {
    // a dominant shell cannot avoid itself on the same ray
  }
  return anti;
}

std::pair<std::vector<double>, std::vector<double>> radial_mass_table(const DiscreteMeasure& m, const Vector& center,
                                                                      double shell_width) {
  if (!(shell_width > 0.0)) throw std::invalid_argument("shell width must be positive");
  std::vector<double> rsum, msum;
  for (int i = 0; i < m.size(); ++i) {
    const double r = (m.point(i) - center).norm();
    const auto k = static_cast<std::size_t>(r / shell_width);
    if (k >= msum.size()) {
      msum.resize(k + 1, 0.0);
      rsum.resize(k + 1, 0.0);
    }
    msum[k] += m.weight(i);
    rsum[k] += m.weight(i) * r;
  }
  std::vector<double> radii, masses;
  double total = 0.0;
  for (std::size_t k = 0; k < msum.size(); ++k) {
    if (msum[k] <= 0.0) continue;
    const double r = rsum[k] / msum[k];
    radii.push_back(r > 0.0 ? r : 0.5 * shell_width);
    masses.push_back(msum[k]);
    total += msum[k];
  }
  for (auto& w : masses) w /= total;
  return {radii, masses};
}

}  // namespace coulomb_ot
