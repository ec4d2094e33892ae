#pragma once

#include "coulomb_ot/duality.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coulomb_ot {

/// Minimal |x_i - y_j| over the plan support. Throws on an empty plan.
double support_gap(const Plan& plan);

/// Affine normalization at a support point (x0, y0):
///   A = D^2 psi(x0) - D_xx c(x0, y0),  M = D_yx c(x0, y0),
///   x~ = S (x - x0) with S = (-A)^{1/2},  y~ = -S^{-1} M (y - y0),
/// so that D_{y~x~} c~ = -I at the base point and the linearized map is the
/// identity. Masses are rescaled so the source density at x0 becomes 1.
struct Normalization {
  int source_index = -1;
  int target_index = -1;
  Vector x0, y0;
  Matrix hessian_psi;  // Richardson combination of two stencils
  Matrix hessian_fine, hessian_coarse;
  Matrix A, M;
  Matrix S, S_inv;
  Matrix Ty, Ty_inv;
  double mass_scale = 1.0;
  double max_eigenvalue = 0.0;  // of A before projection
  double hessian_change = 0.0;  // |H_h - H_2h| / max(|H|, |D_xx c|)
  double base_error = 0.0;      // max-entry norm of D_{y~x~} c~ + I at the base
  bool projected = false;
  bool stable = false;
  bool degenerate = false;
  bool accepted = false;
  std::string reason;  // empty when accepted
};

/// Needs a grid with two neighbors on each side of x0 along every axis;
/// otherwise the result is returned unaccepted with a reason.
Normalization build_normalization(const Plan& plan, const PotentialPair& potentials, const CostModel& c,
                                  int source_index);

enum class Recentering { kAffine, kBestFit, kNone };

/// Local coordinates x^ = Sx (x - x0), y^ = Sy (y - y0) + y^0 and mass
/// scale. Balls around x0 and y0 become B_R(0) and B_R(y^0).
struct LocalFrame {
  Vector x0, y0;
  Matrix Sx, Sy, Sx_inv, Sy_inv;
  Vector y_hat0;
  double mass_scale = 1.0;
  double density_source = 1.0;  // mass scale applied to cell volumes (|det Sx|)
  double density_target = 1.0;  // |det Sy|

  Vector x_hat(const Eigen::Ref<const Vector>& x) const { return Sx * (x - x0); }
  Vector y_hat(const Eigen::Ref<const Vector>& y) const { return Sy * (y - y0) + y_hat0; }

  /// Raw coordinates, both shifted by x0: |y^ - x^| = |y - x|.
  static LocalFrame none(const Vector& x0, const Vector& y0);
  static LocalFrame affine(const Normalization& n);
  /// Translation by the mass-weighted mean displacement over B_R(x0).
  static LocalFrame best_fit(const Plan& plan, const Vector& x0, const Vector& y0, double R);
};

struct LocalEnergy {
  double value = 0.0;
  double mass = 0.0;  // scaled mass that entered the sum
  bool empty = true;
};

/// (1/R^{d+2}) sum over support entries with x^ in B_R of mass |y^ - x^|^2.
LocalEnergy local_energy_plus(const Plan& plan, const LocalFrame& frame, double R);
LocalEnergy local_energy_plus(const Plan& plan, int source_index, double R, Recentering mode,
                              const Normalization* normalization = nullptr);

/// Same sum over the infinite cross (B_R(0) x R^d) u (R^d x B_R(y^0)).
LocalEnergy local_energy_two_sided(const Plan& plan, const LocalFrame& frame, double R);

struct DataTerm {
  double value = 0.0;
  double source_w2 = 0.0, source_ratio = 0.0;
  double target_w2 = 0.0, target_ratio = 0.0;
};

/// Distance of both marginals near (x0, y0) to unit-density Lebesgue
/// measure. In 1D the W2 part is exact between the cellwise-constant density
/// clipped to the ball and the uniform measure of equal mass; in higher
/// dimension it is an exact LP against a lattice sample of the ball with at
/// most `max_atoms` points. Throws DomainError on an empty ball.
DataTerm data_term(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const LocalFrame& frame, double R,
                   int max_atoms = 512);
DataTerm data_term(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Vector& x0, const Vector& y0,
                   double R, int max_atoms = 512);

/// Transformed mixed Hessian D_{y^x^} c at local coordinates.
Matrix local_mixed_hessian(const LocalFrame& frame, const CostModel& c, const Eigen::Ref<const Vector>& x_hat,
                           const Eigen::Ref<const Vector>& y_hat);

struct HolderReport {
  double seminorm = 0.0;      // sampled [D_{y^x^} c]_alpha on B_aR x B_aR
  double K_aR = 0.0;          // (aR)^{2 alpha} seminorm^2
  double c0_norm_sq = 0.0;    // sup over B_R x B_aR of |F - F(base)|^2
  double c0_bound = 0.0;      // ((1 + a^alpha) / a^alpha)^2 K_aR
  bool bound_ok = false;
};

/// Sampled Holder quantities on lattice points of the balls (center
/// included, nested sample sets). K_R itself is `K_aR` with a = 1.
HolderReport holder_quantities(const LocalFrame& frame, const CostModel& c, double R, double alpha, double a = 2.0);

/// sup over sampled B_Rx(0) x B_Ry(y^0) of |D_{y^x^} c + I| (operator norm).
double mixed_hessian_deviation(const LocalFrame& frame, const CostModel& c, double Rx, double Ry);

struct QualitativeDisplacement {
  bool ok = false;
  double lambda_min = 0.0;  // smallest Lambda with the inclusion
  int entries = 0;
};

/// Support entries with x^ in B_5R must satisfy |y^ - y^0| <= Lambda0 R.
QualitativeDisplacement displacement_check_qualitative(const Plan& plan, const LocalFrame& frame, double R,
                                                       double Lambda0);

struct QuantitativeDisplacement {
  bool ok = false;
  double M_min = 0.0;  // smallest constant passing
  double smallness = 0.0;  // E+_6R + D_6R
  double hessian_deviation = 0.0;  // |D_{y^x^} c + I| on B_5R x B_{Lambda R}
  bool hypotheses_ok = false;
  bool inverse_inclusion_ok = false;
  int witness = -1;  // entry index of the worst ratio
};

/// |x^ - y^ + y^0| <= M R (E+_6R + D_6R)^{1/(d+2)} for entries with x^ in
/// B_4R, plus the inverse inclusion (R^d x B_2R(y^0)) n supp in B_4R x B_2R.
QuantitativeDisplacement displacement_check_quantitative(const Plan& plan, const LocalFrame& frame,
                                                         const CostModel& c, double R, double eps,
                                                         double M_const, double Lambda, double energy_6R,
                                                         double data_6R);

/// A support entry (x', y') with R/2 <= |x' - x| <= R, angle to e at most
/// pi/4 and |y' - y0| < 7R, in raw coordinates. Nearest to x wins ties.
std::optional<int> cone_search(const Plan& plan, const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& e, double R, const Eigen::Ref<const Vector>& y0);

struct GradientBound {
  bool ok = false;
  double lambda_min = 0.0;
  int entries = 0;
};

/// |Sx^{-T} (grad_x c(x, y) - grad_x c(x, y0))| <= lambda R over entries
/// with x^ in B_5R.
GradientBound gradient_boundedness_check(const Plan& plan, const LocalFrame& frame, const CostModel& c, double R,
                                         double lambda_const);

struct MinimalityDefect {
  double delta_R = 0.0;
  double energy_2R = 0.0;
  double hessian_deviation = 0.0;  // on B_2R x B_2R
  double quadratic_cost = 0.0;     // of the plan restricted to the 2R cross
  double rematch_cost = 0.0;       // quadratic optimum between its marginals
  bool direct_ok = false;
  int entries = 0;
};

/// Delta_R = C |D_{y^x^} c + I|_{C0(B_2R x B_2R)} E_2R^{1/2} and the direct
/// comparison of the restricted plan against the exact quadratic rematch.
/// Throws DomainError when the restriction is empty.
MinimalityDefect almost_minimality_defect(const Plan& plan, const LocalFrame& frame, const CostModel& c, double R,
                                          double C = 1.0, double slack = 1e-9);

/// |det DT(x_i) - rho0(x_i) / rho1(T(x_i))| with DT from central
/// differences of the barycentric targets on the grid. NaN at the boundary.
double monge_ampere_residual(const Plan& plan, int source_index);

struct DiagnosticsConfig {
  double eps_nonconc = 0.5;
  std::optional<double> delta;  // default 0.9 r0 / 2
  std::vector<double> radii;    // local radii; default {2, 4, 8} local spacings
  double jump_theta = 5.0;
  double eps0 = 0.5;
  double eps_quant = 0.5;
  double Lambda0 = 20.0;
  double Lambda = 20.0;
  double M_const = 20.0;
  double lambda_const = 50.0;
  double delta_constant = 1.0;
  double holder_alpha = 1.0;
  double holder_a = 2.0;
  std::vector<int> points;  // source atoms to examine; default evenly spaced
  int max_points = 16;
  int data_atoms = 512;
  bool flag_failed_checks = false;  // add normalization/displacement failures to the singular set
};

struct RadiusRecord {
  double R = 0.0;
  double energy_plus = 0.0;
  double energy_two_sided = 0.0;
  double data = 0.0;
  double K_R = 0.0;
  double delta_R = 0.0;
  bool near_optimal = false;
  double energy_two_sided_2R = 0.0;
  double energy_plus_6R = 0.0;
  double data_6R = 0.0;
  bool cross_inequality_ok = false;
  double c0_norm_sq = 0.0;
  double c0_bound = 0.0;
  bool c0_bound_ok = false;
  QualitativeDisplacement qualitative;
  QuantitativeDisplacement quantitative;
  GradientBound gradient;
  bool cone_found = false;
};

struct PointRecord {
  int source_index = -1;
  int target_index = -1;
  Vector x0, y0;
  Normalization normalization;
  double monge_ampere = 0.0;
  std::vector<RadiusRecord> radii;
  bool checks_ok = false;
};

struct SingularFlag {
  int index = -1;
  std::string reason;
};

struct DiagnosticsReport {
  int schema_version = 1;
  double support_gap = 0.0;
  double r0 = 0.0;
  double delta = 0.0;
  double K = 0.0;
  bool support_gap_ok = false;
  std::vector<PointRecord> points;
  std::vector<SingularFlag> singular;
  std::vector<SingularFlag> check_failures;
};

/// Flags source atoms whose assigned target jumps by more than
/// theta * median neighbor increment across an adjacent grid cell.
std::vector<SingularFlag> detect_singular_set(const Plan& plan, double theta);

/// Everything above at the configured points and radii. Potentials are
/// recovered for the modified cost with the configured delta.
DiagnosticsReport run_diagnostics(const Plan& plan, const DiagnosticsConfig& config = {});

}  // namespace coulomb_ot
