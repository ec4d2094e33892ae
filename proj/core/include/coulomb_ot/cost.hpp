#pragma once

#include "coulomb_ot/measures.hpp"

#include <optional>
#include <string>

namespace coulomb_ot {

/// Radial cost c(x, y) = h(|x - y|). Coulomb uses h(r) = 1/r; the modified
/// cost replaces h on [0, delta] by the cubic r^3/delta^4 - 2r^2/delta^3 + 2/delta,
/// which matches 1/r to second order at r = delta.
struct CostModel {
  enum class Kind { kCoulomb, kModified };

  Kind kind = Kind::kCoulomb;
  double delta = 0.0;
  int dim = 1;

  static CostModel coulomb(int dim);
  static CostModel modified(int dim, double delta);
  /// "coulomb" or "modified:delta=0.1".
  static CostModel parse(const std::string& text, int dim);

  bool is_modified() const { return kind == Kind::kModified; }
  std::string describe() const;

  /// Radial profile h and its first two derivatives. h(0) = +inf for Coulomb.
  double h(double r) const;
  double dh(double r) const;
  double d2h(double r) const;
};

struct HessianBlocks {
  Matrix xx, xy, yx, yy;
};

double eval(const CostModel& c, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);
Vector grad_x(const CostModel& c, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);
Vector grad_y(const CostModel& c, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);
HessianBlocks hessian_blocks(const CostModel& c, const Eigen::Ref<const Vector>& x,
                             const Eigen::Ref<const Vector>& y);

/// det D_xy c(x, y); -2/|y-x|^{3d} wherever c coincides with Coulomb.
double det_mixed_hessian(const CostModel& c, const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& y);

/// y = x + p / |p|^{3/2}, the unique y with grad_x c0(x, y) = p.
/// With `delta_guard` set, results with |y - x| <= delta throw DomainError:
/// the map is only meaningful where the modified cost equals Coulomb.
Vector c_exponential(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& p,
                     std::optional<double> delta_guard = std::nullopt);

/// Closed-form inverse of D_yx c(x, y). Throws SingularityError at
/// |x - y| = 2/3 delta and DomainError at x = y.
Matrix inverse_mixed_hessian(const CostModel& c, const Eigen::Ref<const Vector>& x,
                             const Eigen::Ref<const Vector>& y);

/// sup ||D_xx c|| sampled on a log grid of radii in [1e-6 delta, 1e3 delta]
/// (plus the r -> 0 limit), inflated by 1e-3. Coulomb throws: unbounded.
double estimate_semiconcavity_constant(const CostModel& c);

/// Dense cost matrix C(i, j) = c(x_i, y_j), +inf where c is infinite.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
RowMatrix cost_matrix(const CostModel& c, const DiscreteMeasure& sources, const DiscreteMeasure& targets);

}  // namespace coulomb_ot
