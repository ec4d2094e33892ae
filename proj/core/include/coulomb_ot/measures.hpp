#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace coulomb_ot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned regular grid of cells. Linear index runs with axis 0 fastest.
struct GridInfo {
  std::vector<int> shape;
  Vector lower;    // lower corner of the box
  Vector spacing;  // cell side per axis

  int dim() const { return static_cast<int>(shape.size()); }
  int size() const;
  int linear_index(const std::vector<int>& multi) const;
  std::vector<int> multi_index(int linear) const;
  /// Neighbor along `axis` at offset `step`, or -1 when it falls off the grid.
  int neighbor(int linear, int axis, int step) const;
  double max_spacing() const { return spacing.maxCoeff(); }
};

/// Weighted point cloud. Atoms stand for cells of Lebesgue volume
/// `cell_volume[i]`; the piecewise-constant density is weight / cell_volume.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  /// `points` is dim x n. Throws std::invalid_argument when invariants fail.
  DiscreteMeasure(Matrix points, Vector weights, Vector cell_volume,
                  std::optional<GridInfo> grid = std::nullopt);

  int dim() const { return static_cast<int>(points_.rows()); }
  int size() const { return static_cast<int>(points_.cols()); }
  const Matrix& points() const { return points_; }
  auto point(int i) const { return points_.col(i); }
  const Vector& weights() const { return weights_; }
  double weight(int i) const { return weights_[i]; }
  const Vector& cell_volume() const { return cell_volume_; }
  double density(int i) const { return weights_[i] / cell_volume_[i]; }
  const std::optional<GridInfo>& grid() const { return grid_; }

  /// Smallest cell side, cell_volume^(1/d) minimized over atoms.
  double min_cell_side() const;
  /// Diagonal of the bounding box of the cells.
  double diameter() const;
  /// Total weight of atoms whose points lie in the open ball B_R(center).
  double mass_in_ball(const Eigen::Ref<const Vector>& center, double radius) const;

  bool same_as(const DiscreteMeasure& other, double tol = 0.0) const;

 private:
  Matrix points_;
  Vector weights_;
  Vector cell_volume_;
  std::optional<GridInfo> grid_;
};

enum class DensityKind { kUniformInterval, kUniformBox, kRadialProfile, kCustomGrid };

/// Radial density profile: linear interpolation of `values` at `radii`,
/// zero beyond the last radius.
struct RadialTable {
  std::vector<double> radii;
  std::vector<double> values;
  double operator()(double r) const;
};

struct DensitySpec {
  DensityKind kind = DensityKind::kUniformInterval;
  int dim = 1;
  Vector lower;  // bounding box of the discretization
  Vector upper;
  RadialTable radial;  // kRadialProfile
  std::function<double(const Eigen::Ref<const Vector>&)> density;  // kCustomGrid
  double holder_alpha = 1.0;
  double density_upper_bound = 1.0;
  double density_lower_bound = 1.0;
  std::string label;

  /// Throws std::invalid_argument on broken metadata.
  void validate() const;
  /// Unnormalized density value.
  double operator()(const Eigen::Ref<const Vector>& x) const;

  static DensitySpec uniform_interval(double length);
  static DensitySpec uniform_box(const Vector& lower, const Vector& upper);
  static DensitySpec radial_profile(int dim, RadialTable table);
  /// exp(-r^2 / (2 sigma^2)) truncated to the box [-half_width, half_width]^d.
  static DensitySpec gaussian(int dim, double sigma, double half_width);
  static DensitySpec custom(int dim, const Vector& lower, const Vector& upper,
                            std::function<double(const Eigen::Ref<const Vector>&)> fn,
                            double holder_alpha, double lower_bound, double upper_bound);
  /// 1 + slope * x on [-1/2, 1/2]: a Lipschitz probability density equal to 1 at 0.
  static DensitySpec linear_ramp(double slope);
  /// Random alpha-Holder density on [0,1]^d, bounded in [0.5, 1.5] before
  /// normalization. Deterministic in `seed`.
  static DensitySpec random_holder(int dim, double alpha, std::uint64_t seed);
};

/// Midpoint-rule discretization with `resolution` cells per axis.
DiscreteMeasure discretize(const DensitySpec& spec, int resolution);

/// One-dimensional equal-weight discretization: atom k sits at the
/// quantile (k + 1/2) / n and owns the cell between quantiles k/n and (k+1)/n.
/// Quantiles are computed on a fine midpoint grid of `refinement` cells.
/// The attached grid carries neighbor topology only; use the points for positions.
DiscreteMeasure discretize_quantiles(const DensitySpec& spec, int n, int refinement = 1 << 16);

/// Parses CLI measure strings such as "uniform:L=1:n=200",
/// "box:d=2:L=1:n=16", "gaussian:d=2:sigma=1:L=3:n=48", "ramp:beta=1:n=64",
/// "holder:d=1:alpha=0.5:seed=3:n=128".
DiscreteMeasure measure_from_string(const std::string& text);

/// Largest mass carried by cells of total volume <= budget (greedy fill by
/// decreasing density, fractional last cell).
double modulus_abs_continuity(const DiscreteMeasure& m, double volume_budget);

/// Volume of the Euclidean ball of radius r in dimension d.
double ball_volume(int dim, double r);

/// Largest r on a 40-step bisection of [grid spacing, diameter] with
/// omega_mu(|B_r|) + omega_nu(|B_r|) <= 1 - eps. Throws ConcentrationError
/// when even the grid spacing violates the bound.
double nonconcentration_radius(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps);

}  // namespace coulomb_ot
