#include "coulomb_ot/measures.hpp"

#include "coulomb_ot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace coulomb_ot {

// ---------------------------------------------------------------------------
// GridInfo

int GridInfo::size() const {
  int n = 1;
  for (int s : shape) n *= s;
  return n;
}

int GridInfo::linear_index(const std::vector<int>& multi) const {
  int idx = 0;
  for (int a = dim() - 1; a >= 0; --a) idx = idx * shape[a] + multi[a];
  return idx;
}

std::vector<int> GridInfo::multi_index(int linear) const {
  std::vector<int> multi(shape.size());
  for (int a = 0; a < dim(); ++a) {
    multi[a] = linear % shape[a];
    linear /= shape[a];
  }
  return multi;
}

int GridInfo::neighbor(int linear, int axis, int step) const {
  auto multi = multi_index(linear);
  const int k = multi[axis] + step;
  if (k < 0 || k >= shape[axis]) return -1;
  multi[axis] = k;
  return linear_index(multi);
}

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights, Vector cell_volume,
                                 std::optional<GridInfo> grid)
    : points_(std::move(points)),
      weights_(std::move(weights)),
      cell_volume_(std::move(cell_volume)),
      grid_(std::move(grid)) {
  const auto n = points_.cols();
  if (points_.rows() < 1) throw std::invalid_argument("measure dimension must be positive");
  if (n < 1) throw std::invalid_argument("measure must have at least one atom");
  if (weights_.size() != n || cell_volume_.size() != n) {
    throw std::invalid_argument("points, weights and cell volumes disagree in length");
  }
  if ((weights_.array() < 0.0).any() || !weights_.allFinite()) {
    throw std::invalid_argument("weights must be finite and nonnegative");
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("weights must sum to 1 within 1e-12");
  }
  if ((cell_volume_.array() <= 0.0).any()) {
    throw std::invalid_argument("cell volumes must be positive");
  }
  if (grid_ && grid_->size() != n) throw std::invalid_argument("grid shape does not match atom count");
  // Pairwise distinctness: sort lexicographically and compare neighbors.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [this](int a, int b) {
    for (int k = 0; k < points_.rows(); ++k) {
      if (points_(k, a) != points_(k, b)) return points_(k, a) < points_(k, b);
    }
    return false;
  });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if ((points_.col(order[k]) - points_.col(order[k - 1])).squaredNorm() == 0.0) {
      throw std::invalid_argument("measure points must be pairwise distinct");
    }
  }
}

double DiscreteMeasure::min_cell_side() const {
  return std::pow(cell_volume_.minCoeff(), 1.0 / dim());
}

double DiscreteMeasure::diameter() const {
  const Vector half_side = (cell_volume_.array().pow(1.0 / dim()) * 0.5).matrix();
  Vector lo = points_.col(0), hi = points_.col(0);
  for (int i = 0; i < size(); ++i) {
    lo = lo.cwiseMin((points_.col(i).array() - half_side[i]).matrix());
    hi = hi.cwiseMax((points_.col(i).array() + half_side[i]).matrix());
  }
  return (hi - lo).norm();
}

double DiscreteMeasure::mass_in_ball(const Eigen::Ref<const Vector>& center, double radius) const {
  double mass = 0.0;
  const double r2 = radius * radius;
  for (int i = 0; i < size(); ++i) {
    if ((points_.col(i) - center).squaredNorm() < r2) mass += weights_[i];
  }
  return mass;
}

bool DiscreteMeasure::same_as(const DiscreteMeasure& other, double tol) const {
  if (dim() != other.dim() || size() != other.size()) return false;
  return ((points_ - other.points_).cwiseAbs().maxCoeff() <= tol) &&
         ((weights_ - other.weights_).cwiseAbs().maxCoeff() <= tol);
}

// ---------------------------------------------------------------------------
// DensitySpec

double RadialTable::operator()(double r) const {
  if (radii.empty()) return 0.0;
  if (r <= radii.front()) return values.front();
  if (r > radii.back()) return 0.0;
  const auto it = std::upper_bound(radii.begin(), radii.end(), r);
  const auto k = static_cast<std::size_t>(it - radii.begin());
  if (k >= radii.size()) return values.back();
  const double t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
  return (1.0 - t) * values[k - 1] + t * values[k];
}

void DensitySpec::validate() const {
  if (dim < 1) throw std::invalid_argument("density dimension must be positive");
  if (!(holder_alpha > 0.0 && holder_alpha <= 1.0)) {
    throw std::invalid_argument("holder_alpha must lie in (0, 1]");
  }
  if (!(density_lower_bound > 0.0 && density_lower_bound <= density_upper_bound &&
        std::isfinite(density_upper_bound))) {
    throw std::invalid_argument("density bounds must satisfy 0 < lower <= upper < inf");
  }
  if (lower.size() != dim || upper.size() != dim || !(upper.array() > lower.array()).all()) {
    throw std::invalid_argument("density bounding box is empty or has the wrong dimension");
  }
  if (kind == DensityKind::kRadialProfile &&
      (radial.radii.size() < 2 || radial.radii.size() != radial.values.size())) {
    throw std::invalid_argument("radial profile needs at least two (radius, value) rows");
  }
  if (kind == DensityKind::kCustomGrid && !density) {
    throw std::invalid_argument("custom density has no evaluator");
  }
}

double DensitySpec::operator()(const Eigen::Ref<const Vector>& x) const {
  switch (kind) {
    case DensityKind::kUniformInterval:
    case DensityKind::kUniformBox:
      return 1.0;
    case DensityKind::kRadialProfile:
      return radial(x.norm());
    case DensityKind::kCustomGrid:
      return density(x);
  }
  return 0.0;
}

DensitySpec DensitySpec::uniform_interval(double length) {
  if (!(length > 0.0)) throw std::invalid_argument("interval length must be positive");
  DensitySpec s;
  s.kind = DensityKind::kUniformInterval;
  s.dim = 1;
  s.lower = Vector::Zero(1);
  s.upper = Vector::Constant(1, length);
  s.density_lower_bound = s.density_upper_bound = 1.0 / length;
  s.label = "uniform-interval";
  return s;
}

DensitySpec DensitySpec::uniform_box(const Vector& lower, const Vector& upper) {
  DensitySpec s;
  s.kind = DensityKind::kUniformBox;
  s.dim = static_cast<int>(lower.size());
  s.lower = lower;
  s.upper = upper;
  const double vol = (upper - lower).prod();
  s.density_lower_bound = s.density_upper_bound = 1.0 / vol;
  s.label = "uniform-box";
  return s;
}

DensitySpec DensitySpec::radial_profile(int dim, RadialTable table) {
  DensitySpec s;
  s.kind = DensityKind::kRadialProfile;
  s.dim = dim;
  const double r_max = table.radii.back();
  s.lower = Vector::Constant(dim, -r_max);
  s.upper = Vector::Constant(dim, r_max);
  const auto [lo, hi] = std::minmax_element(table.values.begin(), table.values.end());
  s.density_lower_bound = std::max(*lo, 1e-300);
  s.density_upper_bound = *hi;
  s.radial = std::move(table);
  s.label = "radial-profile";
  return s;
}

DensitySpec DensitySpec::gaussian(int dim, double sigma, double half_width) {
  if (!(sigma > 0.0 && half_width > 0.0)) {
    throw std::invalid_argument("gaussian needs positive sigma and half width");
  }
  auto fn = [sigma](const Eigen::Ref<const Vector>& x) {
    return std::exp(-x.squaredNorm() / (2.0 * sigma * sigma));
  };
  const double corner = std::sqrt(static_cast<double>(dim)) * half_width;
  DensitySpec s = custom(dim, Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width),
                         fn, 1.0, std::exp(-corner * corner / (2.0 * sigma * sigma)), 1.0);
  s.label = "gaussian";
  return s;
}

DensitySpec DensitySpec::custom(int dim, const Vector& lower, const Vector& upper,
                                std::function<double(const Eigen::Ref<const Vector>&)> fn,
                                double holder_alpha, double lower_bound, double upper_bound) {
  DensitySpec s;
  s.kind = DensityKind::kCustomGrid;
  s.dim = dim;
  s.lower = lower;
  s.upper = upper;
  s.density = std::move(fn);
  s.holder_alpha = holder_alpha;
  s.density_lower_bound = lower_bound;
  s.density_upper_bound = upper_bound;
  s.label = "custom";
  return s;
}

DensitySpec DensitySpec::linear_ramp(double slope) {
  if (std::abs(slope) >= 2.0) throw std::invalid_argument("ramp slope must satisfy |slope| < 2");
  auto fn = [slope](const Eigen::Ref<const Vector>& x) { return 1.0 + slope * x[0]; };
  DensitySpec s = custom(1, Vector::Constant(1, -0.5), Vector::Constant(1, 0.5), fn, 1.0,
                         1.0 - 0.5 * std::abs(slope), 1.0 + 0.5 * std::abs(slope));
  s.label = "ramp";
  return s;
}

DensitySpec DensitySpec::random_holder(int dim, double alpha, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kModes = 3;
  struct Mode {
    Vector direction;
    double frequency;
    double phase;
    double amplitude;
  };
  std::vector<Mode> modes;
  double total = 0.0;
  for (int k = 0; k < kModes; ++k) {
    Mode mode;
    mode.direction = Vector(dim);
    for (int a = 0; a < dim; ++a) mode.direction[a] = unit(rng) - 0.5;
    if (mode.direction.norm() < 1e-3) mode.direction[0] = 1.0;
    mode.direction.normalize();
    mode.frequency = 1.0 + 2.0 * unit(rng);
    mode.phase = unit(rng) * std::numbers::pi;
    mode.amplitude = 0.2 + unit(rng);
    total += mode.amplitude;
    modes.push_back(std::move(mode));
  }
  for (auto& mode : modes) mode.amplitude /= total;
  // Each mode term lies in [-1/2, 1/2]; amplitudes sum to 1.
  auto fn = [modes, alpha](const Eigen::Ref<const Vector>& x) {
    double v = 1.0;
    for (const auto& mode : modes) {
      const double s = std::sin(std::numbers::pi * mode.frequency * mode.direction.dot(x) + mode.phase);
      v += mode.amplitude * (std::pow(std::abs(s), alpha) - 0.5);
    }
    return v;
  };
  DensitySpec s = custom(dim, Vector::Zero(dim), Vector::Ones(dim), fn, alpha, 0.5, 1.5);
  s.label = "holder";
  return s;
}

// ---------------------------------------------------------------------------
// Discretization

DiscreteMeasure discretize(const DensitySpec& spec, int resolution) {
  spec.validate();
  if (resolution < 2) throw std::invalid_argument("resolution must be at least 2");
  GridInfo grid;
  grid.shape.assign(static_cast<std::size_t>(spec.dim), resolution);
  grid.lower = spec.lower;
  grid.spacing = (spec.upper - spec.lower) / static_cast<double>(resolution);
  const int n = grid.size();
  const double cell = grid.spacing.prod();

  Matrix points(spec.dim, n);
  Vector weights(n);
  for (int i = 0; i < n; ++i) {
    const auto multi = grid.multi_index(i);
    for (int a = 0; a < spec.dim; ++a) {
      points(a, i) = grid.lower[a] + (multi[a] + 0.5) * grid.spacing[a];
    }
    const double rho = spec(points.col(i));
    if (!std::isfinite(rho) || rho < 0.0) {
      throw IntegrabilityError("density is negative or not finite at a cell center");
    }
    weights[i] = rho * cell;
  }
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw IntegrabilityError("density has zero total mass");
  weights /= total;
  return DiscreteMeasure(std::move(points), std::move(weights), Vector::Constant(n, cell), std::move(grid));
}

DiscreteMeasure discretize_quantiles(const DensitySpec& spec, int n, int refinement) {
  spec.validate();
  if (spec.dim != 1) throw std::invalid_argument("quantile discretization is one-dimensional");
  if (n < 2) throw std::invalid_argument("resolution must be at least 2");
  const double a = spec.lower[0], b = spec.upper[0];
  const double h = (b - a) / refinement;
  // Piecewise-constant density on the fine grid; the CDF is piecewise linear.
  std::vector<double> cdf(static_cast<std::size_t>(refinement) + 1, 0.0);
  std::vector<double> rho(static_cast<std::size_t>(refinement));
  Vector x(1);
  for (int k = 0; k < refinement; ++k) {
    x[0] = a + (k + 0.5) * h;
    rho[k] = spec(x);
    if (!std::isfinite(rho[k]) || rho[k] < 0.0) {
      throw IntegrabilityError("density is negative or not finite at a cell center");
    }
    cdf[k + 1] = cdf[k] + rho[k] * h;
  }
  const double total = cdf.back();
  if (!(total > 0.0)) throw IntegrabilityError("density has zero total mass");
  auto quantile = [&](double t) {
    const double target = t * total;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cdf.begin(), 1)) - 1;
    k = std::min<std::size_t>(k, rho.size() - 1);
    if (rho[k] <= 0.0) return a + k * h;
    return a + k * h + (target - cdf[k]) / (rho[k]);
  };
  Matrix points(1, n);
  Vector weights = Vector::Constant(n, 1.0 / n);
  Vector volume(n);
  for (int k = 0; k < n; ++k) {
    points(0, k) = quantile((k + 0.5) / n);
    volume[k] = quantile((k + 1.0) / n) - quantile(static_cast<double>(k) / n);
  }
  // Grid topology only: neighbors follow quantile order, spacing is nominal.
  GridInfo grid{{n}, Vector::Constant(1, a), Vector::Constant(1, (b - a) / n)};
  return DiscreteMeasure(std::move(points), std::move(weights), std::move(volume), std::move(grid));
}

namespace {

std::map<std::string, std::string> parse_fields(const std::string& text, std::string& head) {
  std::map<std::string, std::string> fields;
  std::stringstream ss(text);
  std::string token;
  std::getline(ss, head, ':');
  while (std::getline(ss, token, ':')) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed measure field '" + token + "'");
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return fields;
}

double field(const std::map<std::string, std::string>& f, const std::string& key, double fallback) {
  const auto it = f.find(key);
  return it == f.end() ? fallback : std::stod(it->second);
}

}  // namespace

DiscreteMeasure measure_from_string(const std::string& text) {
  std::string head;
  const auto f = parse_fields(text, head);
  const int n = static_cast<int>(field(f, "n", 100));
  const int d = static_cast<int>(field(f, "d", 1));
  if (head == "uniform") return discretize(DensitySpec::uniform_interval(field(f, "L", 1.0)), n);
  if (head == "box") {
    const double length = field(f, "L", 1.0);
    return discretize(DensitySpec::uniform_box(Vector::Zero(d), Vector::Constant(d, length)), n);
  }
  if (head == "gaussian") {
    return discretize(DensitySpec::gaussian(d, field(f, "sigma", 1.0), field(f, "L", 3.0)), n);
  }
  if (head == "ramp") return discretize(DensitySpec::linear_ramp(field(f, "beta", 1.0)), n);
  if (head == "holder") {
    return discretize(DensitySpec::random_holder(d, field(f, "alpha", 0.5),
                                                 static_cast<std::uint64_t>(field(f, "seed", 1))),
                      n);
  }
  throw std::invalid_argument("unknown measure kind '" + head + "'");
}

// ---------------------------------------------------------------------------
// Non-concentration

double modulus_abs_continuity(const DiscreteMeasure& m, double volume_budget) {
  if (!(volume_budget > 0.0)) throw std::invalid_argument("volume budget must be positive");
  std::vector<int> order(static_cast<std::size_t>(m.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&m](int a, int b) { return m.density(a) > m.density(b); });
  double mass = 0.0, remaining = volume_budget;
  for (int i : order) {
    const double vol = m.cell_volume()[i];
    if (vol <= remaining) {
      mass += m.weight(i);
      remaining -= vol;
    } else {
      mass += m.density(i) * remaining;
      break;
    }
  }
  return std::min(mass, 1.0);
}

double ball_volume(int dim, double r) {
  const double d = dim;
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0) * std::pow(r, d);
}

double nonconcentration_radius(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (mu.dim() != nu.dim()) throw std::invalid_argument("measures live in different dimensions");
  const int d = mu.dim();
  const double bound = 1.0 - eps;
  auto excess = [&](double r) {
    const double vol = ball_volume(d, r);
    return modulus_abs_continuity(mu, vol) + modulus_abs_continuity(nu, vol);
  };
  double lo = std::min(mu.min_cell_side(), nu.min_cell_side());
  double hi = std::max(mu.diameter(), nu.diameter());
  if (excess(lo) > bound) {
    throw ConcentrationError("no radius above the grid spacing satisfies the non-concentration bound");
  }
  if (excess(hi) <= bound) return hi;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) <= bound) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace coulomb_ot
