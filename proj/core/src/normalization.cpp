#include "coulomb_ot/diagnostics.hpp"

#include "coulomb_ot/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>

namespace coulomb_ot {

namespace {

// Second-derivative matrix of psi at atom i from neighbors `step` cells away.
// Coordinates come from the atoms, so quantile grids work too.
std::optional<Matrix> grid_hessian(const Vector& psi, const DiscreteMeasure& m, int i, int step) {
  const auto& grid = *m.grid();
  const int d = grid.dim();
  Matrix H(d, d);
  auto nb = [&](int from, int axis, int s) { return from < 0 ? -1 : grid.neighbor(from, axis, s); };
  for (int k = 0; k < d; ++k) {
    const int lo = nb(i, k, -step), hi = nb(i, k, step);
    if (lo < 0 || hi < 0) return std::nullopt;
    const double hl = m.point(i)[k] - m.point(lo)[k];
    const double hr = m.point(hi)[k] - m.point(i)[k];
    H(k, k) = 2.0 * ((psi[hi] - psi[i]) / hr - (psi[i] - psi[lo]) / hl) / (hl + hr);
    for (int l = 0; l < k; ++l) {
      const int pp = nb(nb(i, k, step), l, step), pm = nb(nb(i, k, step), l, -step);
      const int mp = nb(nb(i, k, -step), l, step), mm = nb(nb(i, k, -step), l, -step);
      if (pp < 0 || pm < 0 || mp < 0 || mm < 0) return std::nullopt;
      const int lo_l = nb(i, l, -step), hi_l = nb(i, l, step);
      const double wk = m.point(hi)[k] - m.point(lo)[k];
      const double wl = m.point(hi_l)[l] - m.point(lo_l)[l];
      H(k, l) = H(l, k) = (psi[pp] - psi[pm] - psi[mp] + psi[mm]) / (wk * wl);
    }
  }
  return H;
}

}  // namespace

Normalization build_normalization(const Plan& plan, const PotentialPair& potentials, const CostModel& c,
                                  int source_index) {
  const auto& src = *plan.source;
  const auto& tgt = *plan.target;
  if (source_index < 0 || source_index >= src.size()) throw std::out_of_range("source index");
  if (!src.grid()) throw DomainError("normalization needs grid atoms");
  Normalization n;
  n.source_index = source_index;
  n.target_index = plan.dominant_targets()[source_index];
  n.x0 = src.point(source_index);
  if (n.target_index < 0) {
    n.reason = "no support at this atom";
    return n;
  }
  n.y0 = tgt.point(n.target_index);
  const int d = src.dim();

  const auto blocks = hessian_blocks(c, n.x0, n.y0);
  n.M = blocks.yx;

  auto fine = grid_hessian(potentials.psi, src, source_index, 1);
  auto coarse = grid_hessian(potentials.psi, src, source_index, 2);
  if (!fine || !coarse) {
    n.reason = "too close to the grid boundary";
    return n;
  }
  n.hessian_fine = *fine;
  n.hessian_coarse = *coarse;
  n.hessian_psi = (4.0 * n.hessian_fine - n.hessian_coarse) / 3.0;
  const double scale = std::max(n.hessian_psi.norm(), blocks.xx.norm());
  n.hessian_change = (n.hessian_fine - n.hessian_coarse).norm() / scale;
  n.stable = n.hessian_change <= 0.1;

  Matrix A = n.hessian_psi - blocks.xx;
  A = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  Vector lambda = eig.eigenvalues();
  n.max_eigenvalue = lambda.maxCoeff();
  const double a_scale = std::max(A.norm(), 1e-300);
  if (n.max_eigenvalue > 1e-8 * a_scale) {
    n.projected = true;
    lambda = lambda.cwiseMin(0.0);
  }
  const Matrix& V = eig.eigenvectors();
  n.A = V * lambda.asDiagonal() * V.transpose();
  n.degenerate = (-lambda.maxCoeff()) <= 1e-8 * a_scale;
  if (n.degenerate) {
    n.reason = "A is singular";
    return n;
  }
  const Vector root = (-lambda).cwiseSqrt();
  n.S = V * root.asDiagonal() * V.transpose();
  n.S_inv = V * root.cwiseInverse().asDiagonal() * V.transpose();
  n.Ty = -n.S_inv * n.M.transpose();
  n.Ty_inv = n.Ty.inverse();
  n.mass_scale = std::abs(n.S.determinant()) / src.density(source_index);

  const Matrix F = n.Ty_inv.transpose() * blocks.yx * n.S_inv;
  n.base_error = (F + Matrix::Identity(d, d)).cwiseAbs().maxCoeff();

  if (!n.stable) {
    n.reason = "second differences of psi are not stable";
  } else if (n.projected) {
    n.reason = "A had a positive eigenvalue";
  } else if (n.base_error > 1e-6) {
    n.reason = "base-point mixed Hessian is not -I";
  }
  n.accepted = n.reason.empty();
  return n;
}

LocalFrame LocalFrame::none(const Vector& x0, const Vector& y0) {
  LocalFrame f;
  const auto d = x0.size();
  f.x0 = x0;
  f.y0 = y0;
  f.Sx = f.Sy = f.Sx_inv = f.Sy_inv = Matrix::Identity(d, d);
  f.y_hat0 = y0 - x0;
  return f;
}

LocalFrame LocalFrame::affine(const Normalization& n) {
  if (n.S.size() == 0) throw DomainError("normalization was not built");
  LocalFrame f;
  f.x0 = n.x0;
  f.y0 = n.y0;
  f.Sx = n.S;
  f.Sx_inv = n.S_inv;
  f.Sy = n.Ty;
  f.Sy_inv = n.Ty_inv;
  f.y_hat0 = Vector::Zero(n.x0.size());
  f.mass_scale = n.mass_scale;
  f.density_source = std::abs(n.S.determinant());
  f.density_target = std::abs(n.Ty.determinant());
  return f;
}

LocalFrame LocalFrame::best_fit(const Plan& plan, const Vector& x0, const Vector& y0, double R) {
  LocalFrame f = none(x0, y0);
  Vector shift = Vector::Zero(x0.size());
  double mass = 0.0;
  for (const auto& e : plan.entries) {
    const auto x = plan.source->point(e.i);
    if ((x - x0).norm() >= R) continue;
    shift += e.mass * (plan.target->point(e.j) - x);
    mass += e.mass;
  }
  if (mass > 0.0) f.y_hat0 -= shift / mass;
  return f;
}

}  // namespace coulomb_ot
