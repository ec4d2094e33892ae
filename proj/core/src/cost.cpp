#include "coulomb_ot/cost.hpp"

#include "coulomb_ot/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace coulomb_ot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dims(const CostModel& c, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  if (x.size() != c.dim || y.size() != c.dim) {
    throw std::invalid_argument("point dimension does not match cost dimension");
  }
}

}  // namespace

CostModel CostModel::coulomb(int dim) {
  if (dim < 1) throw std::invalid_argument("cost dimension must be positive");
  return CostModel{Kind::kCoulomb, 0.0, dim};
}

CostModel CostModel::modified(int dim, double delta) {
  if (dim < 1) throw std::invalid_argument("cost dimension must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
  return CostModel{Kind::kModified, delta, dim};
}

CostModel CostModel::parse(const std::string& text, int dim) {
  if (text == "coulomb") return coulomb(dim);
  const std::string prefix = "modified:delta=";
  if (text.rfind(prefix, 0) == 0) return modified(dim, std::stod(text.substr(prefix.size())));
  throw std::invalid_argument("unknown cost '" + text + "'");
}

std::string CostModel::describe() const {
  if (!is_modified()) return "coulomb";
  char buf[64];
  std::snprintf(buf, sizeof buf, "modified:delta=%.17g", delta);
  return buf;
}

double CostModel::h(double r) const {
  if (is_modified() && r <= delta) {
    const double d3 = delta * delta * delta;
    return r * r * r / (d3 * delta) - 2.0 * r * r / d3 + 2.0 / delta;
  }
  return r > 0.0 ? 1.0 / r : kInf;
}

double CostModel::dh(double r) const {
  if (is_modified() && r <= delta) {
    const double d3 = delta * delta * delta;
    return 3.0 * r * r / (d3 * delta) - 4.0 * r / d3;
  }
  return -1.0 / (r * r);
}

double CostModel::d2h(double r) const {
  if (is_modified() && r <= delta) {
    const double d3 = delta * delta * delta;
    return 6.0 * r / (d3 * delta) - 4.0 / d3;
  }
  return 2.0 / (r * r * r);
}

double eval(const CostModel& c, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  check_dims(c, x, y);
  return c.h((x - y).norm());
}

Vector grad_x(const CostModel& c, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  check_dims(c, x, y);
  const Vector diff = x - y;
  const double r = diff.norm();
  if (r == 0.0) {
    if (!c.is_modified()) throw DomainError("Coulomb gradient is undefined on the diagonal");
    return Vector::Zero(c.dim);
  }
  return (c.dh(r) / r) * diff;
}

Vector grad_y(const CostModel& c, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  return -grad_x(c, x, y);
}

HessianBlocks hessian_blocks(const CostModel& c, const Eigen::Ref<const Vector>& x,
                             const Eigen::Ref<const Vector>& y) {
  check_dims(c, x, y);
  const Vector diff = x - y;
  const double r = diff.norm();
  Matrix xx;
  if (r == 0.0) {
    if (!c.is_modified()) throw DomainError("Coulomb Hessian is undefined on the diagonal");
    const double d3 = c.delta * c.delta * c.delta;
    xx = Matrix::Identity(c.dim, c.dim) * (-4.0 / d3);
  } else {
    const Vector e = diff / r;
    const double radial = c.dh(r) / r;
    xx = radial * Matrix::Identity(c.dim, c.dim) + (c.d2h(r) - radial) * (e * e.transpose());
  }
  HessianBlocks blocks;
  blocks.xx = xx;
  blocks.yy = xx;
  blocks.xy = -xx;
  blocks.yx = -xx;
  return blocks;
}

double det_mixed_hessian(const CostModel& c, const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& y) {
  check_dims(c, x, y);
  const double r = (x - y).norm();
  if (r == 0.0) throw DomainError("mixed Hessian determinant requested on the diagonal");
  // D_xy = -(h'/r) on the orthogonal complement of e and -h'' along e.
  return std::pow(-c.dh(r) / r, c.dim - 1) * (-c.d2h(r));
}

Vector c_exponential(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& p,
                     std::optional<double> delta_guard) {
  if (x.size() != p.size()) throw std::invalid_argument("point and momentum dimensions differ");
  const double norm = p.norm();
  if (norm == 0.0) throw DomainError("c-exponential is undefined for zero momentum");
  Vector y = x + p / std::pow(norm, 1.5);
  if (delta_guard && (y - x).norm() <= *delta_guard) {
    throw DomainError("c-exponential lands inside the fattened diagonal");
  }
  return y;
}

Matrix inverse_mixed_hessian(const CostModel& c, const Eigen::Ref<const Vector>& x,
                             const Eigen::Ref<const Vector>& y) {
  check_dims(c, x, y);
  const Vector diff = x - y;
  const double r = diff.norm();
  if (r == 0.0) throw DomainError("inverse mixed Hessian requested on the diagonal");
  if (c.is_modified() && std::abs(r - 2.0 * c.delta / 3.0) <= 1e-10 * c.delta) {
    throw SingularityError("D_yx c_delta is singular at |x - y| = 2/3 delta");
  }
  const double d1 = c.dh(r), d2 = c.d2h(r);
  const Vector e = diff / r;
  const double coeff = (d2 * r - d1) / (d2 * r);
  return -(r / d1) * (Matrix::Identity(c.dim, c.dim) - coeff * (e * e.transpose()));
}

double estimate_semiconcavity_constant(const CostModel& c) {
  if (!c.is_modified()) throw DomainError("the Coulomb Hessian is unbounded near the diagonal");
  const double d3 = c.delta * c.delta * c.delta;
  double sup = 4.0 / d3;  // r -> 0 limit of both |h'/r| and |h''|
  constexpr int kSamples = 4000;
  const double lo = std::log(1e-6 * c.delta), hi = std::log(1e3 * c.delta);
  for (int k = 0; k <= kSamples; ++k) {
    const double r = std::exp(lo + (hi - lo) * k / kSamples);
    sup = std::max({sup, std::abs(c.dh(r) / r), std::abs(c.d2h(r))});
  }
  return sup * (1.0 + 1e-3);
}

RowMatrix cost_matrix(const CostModel& c, const DiscreteMeasure& sources, const DiscreteMeasure& targets) {
  if (sources.dim() != c.dim || targets.dim() != c.dim) {
    throw std::invalid_argument("measure dimension does not match cost dimension");
  }
  RowMatrix m(sources.size(), targets.size());
  for (int i = 0; i < sources.size(); ++i) {
    for (int j = 0; j < targets.size(); ++j) {
      m(i, j) = c.h((sources.point(i) - targets.point(j)).norm());
    }
  }
  return m;
}

}  // namespace coulomb_ot
