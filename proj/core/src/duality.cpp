#include "coulomb_ot/duality.hpp"

#include "coulomb_ot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coulomb_ot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Strict decrease beyond rounding noise; ties along zero-length cycles of a
// degenerate plan must not keep the relaxation alive.
bool improves(double candidate, double current) {
  return candidate < current - 1e-13 * (1.0 + std::abs(current));
}

}  // namespace

PotentialPair ruschendorf_potentials(const Plan& plan, const CostModel& c, int max_chain) {
  if (plan.entries.empty()) throw std::invalid_argument("plan has no support");
  const auto& src = *plan.source;
  const auto& tgt = *plan.target;
  const int m = src.size(), n = tgt.size();
  const auto k = static_cast<int>(plan.entries.size());
  const RowMatrix cost = cost_matrix(c, src, tgt);

  std::vector<std::vector<int>> by_source(m);
  for (int s = 0; s < k; ++s) by_source[plan.entries[s].i].push_back(s);

  // psi_i: infimum over chains ending at x_i, starting anywhere (value 0 at
  // the start). a_j = min over support entries (i, j) of psi_i - c(x_i, y_j).
  Vector psi = Vector::Constant(m, kInf);
  Vector a = Vector::Constant(n, kInf);
  std::vector<int> pred_entry(n, -1);  // entry that set a_j
  std::vector<int> pred_target(m, -1);  // target that lowered psi_i
  std::vector<char> active_target(n, 0);
  for (int s = 0; s < k; ++s) psi[plan.entries[s].i] = 0.0;
  for (int s = 0; s < k; ++s) {
    const auto& e = plan.entries[s];
    const double v = psi[e.i] - cost(e.i, e.j);
    if (v < a[e.j]) {
      a[e.j] = v;
      pred_entry[e.j] = s;
      active_target[e.j] = 1;
    }
  }

  const int limit = max_chain > 0 ? max_chain : k + 1;
  int round = 0;
  int last_changed = -1;
  bool changed = true;
  while (changed && round < limit) {
    changed = false;
    ++round;
    std::vector<char> active_source(m, 0);
    for (int j = 0; j < n; ++j) {
      if (!active_target[j]) continue;
      active_target[j] = 0;
      for (int i = 0; i < m; ++i) {
        if (std::isinf(psi[i])) continue;  // atom outside the support projection
        const double v = a[j] + cost(i, j);
        if (improves(v, psi[i])) {
          psi[i] = v;
          pred_target[i] = j;
          active_source[i] = 1;
        }
      }
    }
    for (int i = 0; i < m; ++i) {
      if (!active_source[i]) continue;
      for (int s : by_source[i]) {
        const auto& e = plan.entries[s];
        const double v = psi[i] - cost(i, e.j);
        if (improves(v, a[e.j])) {
          a[e.j] = v;
          pred_entry[e.j] = s;
          active_target[e.j] = 1;
          changed = true;
          last_changed = e.j;
        }
      }
    }
  }
  if (changed && max_chain <= 0) {
    // Walk predecessors far enough to land on the cycle, then collect it.
    int j = last_changed;
    for (int step = 0; step < k + 1; ++step) j = pred_target[plan.entries[pred_entry[j]].i];
    std::vector<int> cycle;
    const int start = j;
    do {
      const int s = pred_entry[j];
      cycle.push_back(s);
      j = pred_target[plan.entries[s].i];
    } while (j != start && static_cast<int>(cycle.size()) <= k);
    std::reverse(cycle.begin(), cycle.end());
    throw NegativeCycleError("plan support is not c-monotone: negative chain cycle", std::move(cycle));
  }

  Vector phi = -a;
  // Targets off the support projection get the c-transform of psi.
  bool any_missing = false;
  for (int j = 0; j < n; ++j) any_missing |= std::isinf(a[j]);
  if (any_missing) {
    Vector psi_fin = psi.unaryExpr([](double v) { return std::isinf(v) ? -kInf : v; });
    const Vector fill = c_transform(psi_fin, c, src.points(), tgt.points());
    for (int j = 0; j < n; ++j) {
      if (std::isinf(a[j])) phi[j] = fill[j];
    }
  }
  psi = c_transform(phi, c, tgt.points(), src.points());

  PotentialPair out;
  const auto& b = plan.entries.front();
  const double shift = psi[b.i];
  out.psi = psi.array() - shift;
  out.phi = phi.array() + shift;
  out.base = {b.i, b.j};
  out.chain_rounds = round;
  out.K = c.is_modified() ? estimate_semiconcavity_constant(c) : kInf;
  return out;
}

Vector c_transform(const Vector& f, const CostModel& c, const Matrix& from_points, const Matrix& to_points) {
  if (f.size() != from_points.cols()) throw std::invalid_argument("values do not match the point count");
  Vector g(to_points.cols());
  for (Eigen::Index k = 0; k < to_points.cols(); ++k) {
    double best = kInf;
    for (Eigen::Index l = 0; l < from_points.cols(); ++l) {
      if (std::isinf(f[l]) && f[l] < 0) continue;
      best = std::min(best, eval(c, to_points.col(k), from_points.col(l)) - f[l]);
    }
    g[k] = best;
  }
  return g;
}

SemiconcavityReport semiconcavity_probe(const Vector& psi, const DiscreteMeasure& sources, double K,
                                        double tol_rel) {
  if (!sources.grid()) throw DomainError("semiconcavity probe needs grid atoms");
  if (psi.size() != sources.size()) throw std::invalid_argument("psi does not match the atoms");
  const auto& grid = *sources.grid();
  const int n = sources.size();
  Vector g(n);
  for (int i = 0; i < n; ++i) g[i] = psi[i] - 0.5 * K * sources.point(i).squaredNorm();
  SemiconcavityReport rep;
  rep.tolerance = tol_rel * std::max(1.0, g.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    for (int ax = 0; ax < grid.dim(); ++ax) {
      const int lo = grid.neighbor(i, ax, -1), hi = grid.neighbor(i, ax, +1);
      if (lo < 0 || hi < 0) continue;
      // Nonuniform three-point second difference, scaled back to unit spacing.
      const double hl = (sources.point(i) - sources.point(lo)).norm();
      const double hr = (sources.point(hi) - sources.point(i)).norm();
      const double d2 = 2.0 * ((g[hi] - g[i]) / hr - (g[i] - g[lo]) / hl) / (hl + hr) * hl * hr;
      ++rep.checked;
      if (d2 > rep.max_second_difference || rep.worst_index < 0) {
        rep.max_second_difference = std::max(rep.max_second_difference, d2);
        rep.worst_index = i;
      }
      if (d2 > rep.tolerance) ++rep.violations;
    }
  }
  return rep;
}

MapTable map_from_potential(const Vector& psi, const DiscreteMeasure& sources, const Plan& plan,
                            double threshold) {
  if (!sources.grid()) throw DomainError("map recovery needs grid atoms");
  const auto& grid = *sources.grid();
  const int n = sources.size(), d = sources.dim();
  MapTable t;
  t.threshold = threshold > 0.0 ? threshold : 2.0 * grid.max_spacing();
  t.gradient = Matrix::Zero(d, n);
  t.predicted = Matrix::Constant(d, n, std::numeric_limits<double>::quiet_NaN());
  t.assigned = plan.barycentric_targets();
  t.residual = Vector::Constant(n, kInf);
  t.interior.assign(n, true);
  t.flagged.assign(n, false);
  for (int i = 0; i < n; ++i) {
    for (int ax = 0; ax < d; ++ax) {
      int lo = grid.neighbor(i, ax, -1), hi = grid.neighbor(i, ax, +1);
      if (lo < 0 || hi < 0) t.interior[i] = false;
      if (lo < 0) lo = i;
      if (hi < 0) hi = i;
      if (lo == hi) continue;
      t.gradient(ax, i) = (psi[hi] - psi[lo]) / (sources.point(hi)[ax] - sources.point(lo)[ax]);
    }
    const Vector p = t.gradient.col(i);
    if (p.norm() <= 1e-12 * (1.0 + psi.cwiseAbs().maxCoeff())) {
      t.flagged[i] = true;
      continue;
    }
    t.predicted.col(i) = c_exponential(sources.point(i), p);
    if (t.assigned.col(i).allFinite()) t.residual[i] = (t.predicted.col(i) - t.assigned.col(i)).norm();
    t.flagged[i] = !(t.residual[i] <= t.threshold);
  }
  return t;
}

std::pair<double, double> dual_residuals(const PotentialPair& pot, const Plan& plan, const CostModel& c) {
  const RowMatrix cost = cost_matrix(c, *plan.source, *plan.target);
  double feas = -kInf;
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      if (std::isinf(cost(i, j))) continue;
      feas = std::max(feas, pot.psi[i] + pot.phi[j] - cost(i, j));
    }
  }
  double slack = 0.0;
  for (const auto& e : plan.entries) {
    slack = std::max(slack, std::abs(pot.psi[e.i] + pot.phi[e.j] - cost(e.i, e.j)));
  }
  return {feas, slack};
}

}  // namespace coulomb_ot
