#include "coulomb_ot/diagnostics.hpp"

#include "coulomb_ot/errors.hpp"
#include "coulomb_ot/network_simplex.hpp"
#include "coulomb_ot/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace coulomb_ot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double op_norm(const Matrix& m) {
  if (m.rows() == 1) return std::abs(m(0, 0));
  return Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
}

// Lattice points of the closed ball B_r(center), `k` steps per half-axis.
std::vector<Vector> ball_lattice(const Vector& center, double r, int k) {
  const auto d = static_cast<int>(center.size());
  std::vector<Vector> out;
  std::vector<int> idx(d, -k);
  while (true) {
    Vector p(d);
    for (int a = 0; a < d; ++a) p[a] = static_cast<double>(idx[a]) / k;
    if (p.squaredNorm() <= 1.0 + 1e-12) out.push_back(center + r * p);
    int a = 0;
    while (a < d && ++idx[a] > k) idx[a++] = -k;
    if (a == d) break;
  }
  return out;
}

int lattice_steps(int d) { return d == 1 ? 4 : 2; }

double power(double R, int d) { return std::pow(R, d + 2); }

// One marginal in local coordinates: positions, scaled masses, cell volumes.
struct LocalAtoms {
  std::vector<Vector> points;
  std::vector<double> mass;
  std::vector<double> half_width;  // 1D cells only
};

// Exact W2^2 between a 1D cellwise-constant density (cells clipped to
// (c - R, c + R)) and the uniform measure of equal mass on that interval.
// Returns {w2, mass}.
std::pair<double, double> w2_cells_1d(const LocalAtoms& atoms, double center, double R) {
  struct Piece {
    double lo, hi, mass;
  };
  std::vector<Piece> pieces;
  for (std::size_t k = 0; k < atoms.points.size(); ++k) {
    const double mid = atoms.points[k][0];
    const double hw = atoms.half_width[k];
    const double lo = std::max(mid - hw, center - R);
    const double hi = std::min(mid + hw, center + R);
    if (hi <= lo) continue;
    pieces.push_back({lo, hi, atoms.mass[k] * (hi - lo) / (2.0 * hw)});
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  double total = 0.0;
  for (const auto& p : pieces) total += p.mass;
  if (!(total > 0.0)) return {0.0, 0.0};
  const double rate = 2.0 * R / total;  // uniform quantile slope
  double t = 0.0, w2 = 0.0;
  for (const auto& p : pieces) {
    if (p.mass <= 0.0) continue;
    // Both quantile functions are affine on [t, t + mass].
    const double da = p.lo - (center - R + rate * t);
    const double db = p.hi - (center - R + rate * (t + p.mass));
    w2 += p.mass * (da * da + da * db + db * db) / 3.0;
    t += p.mass;
  }
  return {w2, total};
}

std::pair<double, double> w2_lattice(const LocalAtoms& atoms, const Vector& center, double R, int max_atoms) {
  const auto d = static_cast<int>(center.size());
  std::vector<int> inside;
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.points.size(); ++k) {
    if ((atoms.points[k] - center).norm() < R) {
      inside.push_back(static_cast<int>(k));
      total += atoms.mass[k];
    }
  }
  if (!(total > 0.0)) return {0.0, 0.0};
  // Quasi-uniform sample: square lattice inside the ball, at most max_atoms.
  double s = R * std::pow(ball_volume(d, 1.0) / max_atoms, 1.0 / d);
  std::vector<Vector> sample;
  for (int attempt = 0; attempt < 200; ++attempt) {
    sample.clear();
    const int k = static_cast<int>(std::floor(R / s));
    std::vector<int> idx(d, -k);
    while (true) {
      Vector p(d);
      for (int a = 0; a < d; ++a) p[a] = idx[a] * s;
      if (p.norm() < R) sample.push_back(center + p);
      int a = 0;
      while (a < d && ++idx[a] > k) idx[a++] = -k;
      if (a == d) break;
    }
    if (static_cast<int>(sample.size()) <= max_atoms) break;
    s *= 1.05;
  }
  RowMatrix cost(inside.size(), sample.size());
  for (std::size_t a = 0; a < inside.size(); ++a) {
    for (std::size_t b = 0; b < sample.size(); ++b) {
      cost(a, b) = (atoms.points[inside[a]] - sample[b]).squaredNorm();
    }
  }
  Vector supply(inside.size());
  for (std::size_t a = 0; a < inside.size(); ++a) supply[a] = atoms.mass[inside[a]];
  Vector demand = Vector::Constant(sample.size(), total / sample.size());
  const auto res = solve_transport(cost, supply, demand);
  return {res.primal_cost, total};
}

LocalAtoms source_atoms(const DiscreteMeasure& mu, const LocalFrame& f) {
  LocalAtoms a;
  for (int i = 0; i < mu.size(); ++i) {
    a.points.push_back(f.x_hat(mu.point(i)));
    a.mass.push_back(mu.weight(i) * f.mass_scale);
    a.half_width.push_back(0.5 * mu.cell_volume()[i] * f.density_source);
  }
  return a;
}

LocalAtoms target_atoms(const DiscreteMeasure& nu, const LocalFrame& f) {
  LocalAtoms a;
  for (int j = 0; j < nu.size(); ++j) {
    a.points.push_back(f.y_hat(nu.point(j)));
    a.mass.push_back(nu.weight(j) * f.mass_scale);
    a.half_width.push_back(0.5 * nu.cell_volume()[j] * f.density_target);
  }
  return a;
}

std::pair<double, double> local_w2(const LocalAtoms& atoms, const Vector& center, double R, int max_atoms) {
  if (center.size() == 1) return w2_cells_1d(atoms, center[0], R);
  return w2_lattice(atoms, center, R, max_atoms);
}

int dominant_target(const Plan& plan, int i) {
  int best = -1;
  double mass = 0.0;
  for (const auto& e : plan.entries) {
    if (e.i == i && e.mass > mass) {
      mass = e.mass;
      best = e.j;
    }
  }
  return best;
}

}  // namespace

double support_gap(const Plan& plan) {
  if (plan.entries.empty()) throw std::invalid_argument("plan has no support");
  double gap = kInf;
  for (const auto& e : plan.entries) {
    gap = std::min(gap, (plan.source->point(e.i) - plan.target->point(e.j)).norm());
  }
  return gap;
}

LocalEnergy local_energy_plus(const Plan& plan, const LocalFrame& frame, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("radius must be positive");
  LocalEnergy out;
  double sum = 0.0;
  for (const auto& e : plan.entries) {
    const Vector xh = frame.x_hat(plan.source->point(e.i));
    if (xh.norm() >= R) continue;
    const Vector yh = frame.y_hat(plan.target->point(e.j));
    const double m = e.mass * frame.mass_scale;
    sum += m * (yh - xh).squaredNorm();
    out.mass += m;
    out.empty = false;
  }
  out.value = sum / power(R, plan.source->dim());
  return out;
}

LocalEnergy local_energy_plus(const Plan& plan, int source_index, double R, Recentering mode,
                              const Normalization* normalization) {
  const Vector x0 = plan.source->point(source_index);
  const int j0 = dominant_target(plan, source_index);
  if (j0 < 0) throw DomainError("atom carries no plan mass");
  const Vector y0 = plan.target->point(j0);
  switch (mode) {
    case Recentering::kAffine:
      if (!normalization) throw std::invalid_argument("affine recentering needs a normalization");
      return local_energy_plus(plan, LocalFrame::affine(*normalization), R);
    case Recentering::kBestFit:
      return local_energy_plus(plan, LocalFrame::best_fit(plan, x0, y0, R), R);
    case Recentering::kNone:
      break;
  }
  return local_energy_plus(plan, LocalFrame::none(x0, y0), R);
}

LocalEnergy local_energy_two_sided(const Plan& plan, const LocalFrame& frame, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("radius must be positive");
  LocalEnergy out;
  double sum = 0.0;
  for (const auto& e : plan.entries) {
    const Vector xh = frame.x_hat(plan.source->point(e.i));
    const Vector yh = frame.y_hat(plan.target->point(e.j));
    if (xh.norm() >= R && (yh - frame.y_hat0).norm() >= R) continue;
    const double m = e.mass * frame.mass_scale;
    sum += m * (yh - xh).squaredNorm();
    out.mass += m;
    out.empty = false;
  }
  out.value = sum / power(R, plan.source->dim());
  return out;
}

DataTerm data_term(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const LocalFrame& frame, double R,
                   int max_atoms) {
  if (!(R > 0.0)) throw std::invalid_argument("radius must be positive");
  const int d = mu.dim();
  const double vol = ball_volume(d, R);
  DataTerm out;
  const auto [w2s, ms] = local_w2(source_atoms(mu, frame), Vector::Zero(d), R, max_atoms);
  const auto [w2t, mt] = local_w2(target_atoms(nu, frame), frame.y_hat0, R, max_atoms);
  if (!(ms > 0.0) || !(mt > 0.0)) throw DomainError("empty ball in the data term");
  out.source_w2 = w2s / power(R, d);
  out.target_w2 = w2t / power(R, d);
  out.source_ratio = std::pow(ms / vol - 1.0, 2);
  out.target_ratio = std::pow(mt / vol - 1.0, 2);
  out.value = out.source_w2 + out.source_ratio + out.target_w2 + out.target_ratio;
  return out;
}

DataTerm data_term(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Vector& x0, const Vector& y0,
                   double R, int max_atoms) {
  LocalFrame f = LocalFrame::none(x0, y0);
  f.y_hat0.setZero();  // center each marginal on its own point
  return data_term(mu, nu, f, R, max_atoms);
}

Matrix local_mixed_hessian(const LocalFrame& frame, const CostModel& c, const Eigen::Ref<const Vector>& x_hat,
                           const Eigen::Ref<const Vector>& y_hat) {
  const Vector x = frame.x0 + frame.Sx_inv * x_hat;
  const Vector y = frame.y0 + frame.Sy_inv * (y_hat - frame.y_hat0);
  return frame.Sy_inv.transpose() * hessian_blocks(c, x, y).yx * frame.Sx_inv;
}

HolderReport holder_quantities(const LocalFrame& frame, const CostModel& c, double R, double alpha, double a) {
  if (!(R > 0.0) || !(a >= 1.0)) throw std::invalid_argument("need R > 0 and a >= 1");
  const auto d = static_cast<int>(frame.x0.size());
  const auto xs = ball_lattice(Vector::Zero(d), a * R, lattice_steps(d));
  const auto ys = ball_lattice(frame.y_hat0, a * R, lattice_steps(d));
  struct Sample {
    const Vector* x;
    const Vector* y;
    Matrix F;
  };
  std::vector<Sample> z;
  z.reserve(xs.size() * ys.size());
  for (const auto& x : xs) {
    for (const auto& y : ys) z.push_back({&x, &y, local_mixed_hessian(frame, c, x, y)});
  }
  const Matrix F0 = local_mixed_hessian(frame, c, Vector::Zero(d), frame.y_hat0);
  HolderReport h;
  for (std::size_t p = 0; p < z.size(); ++p) {
    for (std::size_t q = p + 1; q < z.size(); ++q) {
      const double den = std::pow((*z[p].x - *z[q].x).norm(), alpha) + std::pow((*z[p].y - *z[q].y).norm(), alpha);
      if (den <= 0.0) continue;
      h.seminorm = std::max(h.seminorm, op_norm(z[p].F - z[q].F) / den);
    }
    if (z[p].x->norm() <= R * (1.0 + 1e-12)) {
      h.c0_norm_sq = std::max(h.c0_norm_sq, std::pow(op_norm(z[p].F - F0), 2));
    }
  }
  h.K_aR = std::pow(a * R, 2.0 * alpha) * h.seminorm * h.seminorm;
  const double aa = std::pow(a, alpha);
  h.c0_bound = std::pow((1.0 + aa) / aa, 2) * h.K_aR;
  h.bound_ok = h.c0_norm_sq <= h.c0_bound * (1.0 + 1e-9) + 1e-300;
  return h;
}

double mixed_hessian_deviation(const LocalFrame& frame, const CostModel& c, double Rx, double Ry) {
  const auto d = static_cast<int>(frame.x0.size());
  const Matrix I = Matrix::Identity(d, d);
  double worst = 0.0;
  for (const auto& x : ball_lattice(Vector::Zero(d), Rx, lattice_steps(d))) {
    for (const auto& y : ball_lattice(frame.y_hat0, Ry, lattice_steps(d))) {
      try {
        worst = std::max(worst, op_norm(local_mixed_hessian(frame, c, x, y) + I));
      } catch (const DomainError&) {
        return kInf;
      }
    }
  }
  return worst;
}

QualitativeDisplacement displacement_check_qualitative(const Plan& plan, const LocalFrame& frame, double R,
                                                       double Lambda0) {
  QualitativeDisplacement q;
  for (const auto& e : plan.entries) {
    if (frame.x_hat(plan.source->point(e.i)).norm() >= 5.0 * R) continue;
    ++q.entries;
    q.lambda_min = std::max(q.lambda_min, (frame.y_hat(plan.target->point(e.j)) - frame.y_hat0).norm() / R);
  }
  q.ok = q.lambda_min <= Lambda0;
  return q;
}

QuantitativeDisplacement displacement_check_quantitative(const Plan& plan, const LocalFrame& frame,
                                                         const CostModel& c, double R, double eps,
                                                         double M_const, double Lambda, double energy_6R,
                                                         double data_6R) {
  QuantitativeDisplacement q;
  const int d = plan.source->dim();
  q.smallness = energy_6R + data_6R;
  q.hessian_deviation = mixed_hessian_deviation(frame, c, 5.0 * R, Lambda * R);
  const bool inclusion = displacement_check_qualitative(plan, frame, R, Lambda).ok;
  q.hypotheses_ok = inclusion && q.smallness <= eps && q.hessian_deviation <= eps;
  const double scale = R * std::pow(q.smallness, 1.0 / (d + 2));
  q.inverse_inclusion_ok = true;
  for (std::size_t s = 0; s < plan.entries.size(); ++s) {
    const auto& e = plan.entries[s];
    const Vector xh = frame.x_hat(plan.source->point(e.i));
    const Vector yh = frame.y_hat(plan.target->point(e.j)) - frame.y_hat0;
    if (yh.norm() < 2.0 * R && xh.norm() >= 4.0 * R) q.inverse_inclusion_ok = false;
    if (xh.norm() >= 4.0 * R) continue;
    const double lhs = (xh - yh).norm();
    double ratio = 0.0;
    if (lhs > 0.0) ratio = scale > 0.0 ? lhs / scale : kInf;
    if (ratio > q.M_min || q.witness < 0) {
      q.M_min = std::max(q.M_min, ratio);
      q.witness = static_cast<int>(s);
    }
  }
  q.ok = q.M_min <= M_const;
  return q;
}

std::optional<int> cone_search(const Plan& plan, const Eigen::Ref<const Vector>& x,
                               const Eigen::Ref<const Vector>& e, double R, const Eigen::Ref<const Vector>& y0) {
  if (std::abs(e.norm() - 1.0) > 1e-9) throw std::invalid_argument("direction must be a unit vector");
  const double cos_open = std::cos(M_PI / 4.0);
  std::optional<int> best;
  double best_dist = kInf;
  for (std::size_t s = 0; s < plan.entries.size(); ++s) {
    const auto& en = plan.entries[s];
    const Vector v = plan.source->point(en.i) - x;
    const double r = v.norm();
    if (r < 0.5 * R || r > R) continue;
    if (e.dot(v) < cos_open * r) continue;
    if ((plan.target->point(en.j) - y0).norm() >= 7.0 * R) continue;
    if (r < best_dist) {
      best_dist = r;
      best = static_cast<int>(s);
    }
  }
  return best;
}

GradientBound gradient_boundedness_check(const Plan& plan, const LocalFrame& frame, const CostModel& c, double R,
                                         double lambda_const) {
  GradientBound g;
  for (const auto& e : plan.entries) {
    const auto x = plan.source->point(e.i);
    if (frame.x_hat(x).norm() >= 5.0 * R) continue;
    const Vector diff = grad_x(c, x, plan.target->point(e.j)) - grad_x(c, x, frame.y0);
    g.lambda_min = std::max(g.lambda_min, (frame.Sx_inv.transpose() * diff).norm() / R);
    ++g.entries;
  }
  g.ok = g.lambda_min <= lambda_const;
  return g;
}

MinimalityDefect almost_minimality_defect(const Plan& plan, const LocalFrame& frame, const CostModel& c, double R,
                                          double C, double slack) {
  MinimalityDefect out;
  const int d = plan.source->dim();
  std::map<int, int> src_id, tgt_id;
  std::vector<TransportEntry> kept;
  for (const auto& e : plan.entries) {
    const Vector xh = frame.x_hat(plan.source->point(e.i));
    const Vector yh = frame.y_hat(plan.target->point(e.j));
    if (xh.norm() >= 2.0 * R && (yh - frame.y_hat0).norm() >= 2.0 * R) continue;
    kept.push_back(e);
    src_id.emplace(e.i, 0);
    tgt_id.emplace(e.j, 0);
  }
  if (kept.empty()) throw DomainError("plan restricted to the cross is empty");
  out.entries = static_cast<int>(kept.size());
  int k = 0;
  for (auto& [i, id] : src_id) id = k++;
  k = 0;
  for (auto& [j, id] : tgt_id) id = k++;

  std::vector<Vector> xs(src_id.size()), ys(tgt_id.size());
  for (const auto& [i, id] : src_id) xs[id] = frame.x_hat(plan.source->point(i));
  for (const auto& [j, id] : tgt_id) ys[id] = frame.y_hat(plan.target->point(j));
  Vector supply = Vector::Zero(xs.size()), demand = Vector::Zero(ys.size());
  for (const auto& e : kept) {
    const double m = e.mass * frame.mass_scale;
    const int a = src_id[e.i], b = tgt_id[e.j];
    supply[a] += m;
    demand[b] += m;
    out.quadratic_cost += 0.5 * m * (ys[b] - xs[a]).squaredNorm();
  }
  RowMatrix cost(xs.size(), ys.size());
  for (std::size_t a = 0; a < xs.size(); ++a) {
    for (std::size_t b = 0; b < ys.size(); ++b) cost(a, b) = 0.5 * (ys[b] - xs[a]).squaredNorm();
  }
  // Rebalance the rounding drift between the two sums.
  demand *= supply.sum() / demand.sum();
  out.rematch_cost = solve_transport(cost, supply, demand).primal_cost;

  out.energy_2R = local_energy_two_sided(plan, frame, 2.0 * R).value;
  out.hessian_deviation = mixed_hessian_deviation(frame, c, 2.0 * R, 2.0 * R);
  out.delta_R = C * out.hessian_deviation * std::sqrt(out.energy_2R);
  const double allowance = power(R, d) * out.delta_R * (1.0 + slack);
  out.direct_ok = out.quadratic_cost <= out.rematch_cost + allowance + 1e-12 * std::max(1.0, out.quadratic_cost);
  return out;
}

double monge_ampere_residual(const Plan& plan, int source_index) {
  const auto& src = *plan.source;
  if (!src.grid()) throw DomainError("Monge-Ampere residual needs grid atoms");
  const auto& grid = *src.grid();
  const int d = src.dim();
  const Matrix T = plan.barycentric_targets();
  Matrix DT(d, d);
  for (int k = 0; k < d; ++k) {
    const int lo = grid.neighbor(source_index, k, -1), hi = grid.neighbor(source_index, k, +1);
    if (lo < 0 || hi < 0) return kNaN;
    DT.col(k) = (T.col(hi) - T.col(lo)) / (src.point(hi)[k] - src.point(lo)[k]);
  }
  const int j = dominant_target(plan, source_index);
  if (j < 0) return kNaN;
  return std::abs(std::abs(DT.determinant()) - src.density(source_index) / plan.target->density(j));
}

std::vector<SingularFlag> detect_singular_set(const Plan& plan, double theta) {
  const auto& src = *plan.source;
  if (!src.grid()) throw DomainError("singular-set detection needs grid atoms");
  const auto& grid = *src.grid();
  const Matrix T = plan.barycentric_targets();
  struct Edge {
    int a, b;
    double jump;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < src.size(); ++i) {
    if (!T.col(i).allFinite()) continue;
    for (int k = 0; k < grid.dim(); ++k) {
      const int nb = grid.neighbor(i, k, +1);
      if (nb < 0 || !T.col(nb).allFinite()) continue;
      edges.push_back({i, nb, (T.col(i) - T.col(nb)).norm()});
    }
  }
  std::vector<SingularFlag> out;
  if (edges.empty()) return out;
  std::vector<double> jumps;
  jumps.reserve(edges.size());
  for (const auto& e : edges) jumps.push_back(e.jump);
  std::nth_element(jumps.begin(), jumps.begin() + jumps.size() / 2, jumps.end());
  const double median = jumps[jumps.size() / 2];
  const double floor = 1e-12 * std::max(1.0, T.cwiseAbs().maxCoeff());
  std::vector<char> flagged(src.size(), 0);
  for (const auto& e : edges) {
    if (e.jump > theta * median && e.jump > floor) flagged[e.a] = flagged[e.b] = 1;
  }
  for (int i = 0; i < src.size(); ++i) {
    if (flagged[i]) out.push_back({i, "assignment jump"});
  }
  return out;
}

DiagnosticsReport run_diagnostics(const Plan& plan, const DiagnosticsConfig& config) {
  const auto& src = *plan.source;
  const auto& tgt = *plan.target;
  if (!src.grid()) throw DomainError("diagnostics need grid source atoms");
  const int d = src.dim();
  DiagnosticsReport rep;
  rep.support_gap = support_gap(plan);
  rep.r0 = nonconcentration_radius(src, tgt, config.eps_nonconc);
  rep.delta = config.delta.value_or(0.9 * rep.r0 / 2.0);
  if (!(rep.delta > 0.0) || rep.delta >= rep.r0 / 2.0) {
    throw std::invalid_argument("delta must lie in (0, r0/2)");
  }
  rep.support_gap_ok = rep.support_gap > rep.delta;
  const CostModel cost = CostModel::modified(d, rep.delta);
  const PotentialPair pot = ruschendorf_potentials(plan, cost);
  rep.K = pot.K;
  rep.singular = detect_singular_set(plan, config.jump_theta);

  std::vector<int> points = config.points;
  if (points.empty()) {
    const auto& grid = *src.grid();
    std::vector<int> interior;
    for (int i = 0; i < src.size(); ++i) {
      bool ok = true;
      for (int k = 0; k < d && ok; ++k) ok = grid.neighbor(i, k, -2) >= 0 && grid.neighbor(i, k, 2) >= 0;
      if (ok) interior.push_back(i);
    }
    const int take = std::min<int>(config.max_points, static_cast<int>(interior.size()));
    for (int k = 0; k < take; ++k) {
      points.push_back(interior[(2 * k + 1) * interior.size() / (2 * take)]);
    }
  }

  rep.points.resize(points.size());
  parallel_for(static_cast<int>(points.size()), [&](int p) {
    PointRecord& rec = rep.points[p];
    rec.source_index = points[p];
    rec.normalization = build_normalization(plan, pot, cost, points[p]);
    const auto& n = rec.normalization;
    rec.target_index = n.target_index;
    rec.x0 = n.x0;
    rec.y0 = n.y0;
    rec.monge_ampere = monge_ampere_residual(plan, points[p]);
    if (n.S.size() == 0) return;
    const LocalFrame frame = LocalFrame::affine(n);
    std::vector<double> radii = config.radii;
    if (radii.empty()) {
      const double h = src.grid()->max_spacing() * op_norm(n.S);
      radii = {2.0 * h, 4.0 * h, 8.0 * h};
    }
    auto data_at = [&](double R) {
      try {
        return data_term(src, tgt, frame, R, config.data_atoms).value;
      } catch (const DomainError&) {
        return kNaN;
      }
    };
    rec.checks_ok = n.accepted;
    for (double R : radii) {
      RadiusRecord r;
      r.R = R;
      r.energy_plus = local_energy_plus(plan, frame, R).value;
      r.energy_two_sided = local_energy_two_sided(plan, frame, R).value;
      r.data = data_at(R);
      r.K_R = holder_quantities(frame, cost, R, config.holder_alpha, 1.0).K_aR;
      const auto hq = holder_quantities(frame, cost, R, config.holder_alpha, config.holder_a);
      r.c0_norm_sq = hq.c0_norm_sq;
      r.c0_bound = hq.c0_bound;
      r.c0_bound_ok = hq.bound_ok;
      try {
        const auto md = almost_minimality_defect(plan, frame, cost, R, config.delta_constant);
        r.delta_R = md.delta_R;
        r.near_optimal = md.direct_ok;
      } catch (const DomainError&) {
        r.delta_R = kNaN;
      }
      r.energy_two_sided_2R = local_energy_two_sided(plan, frame, 2.0 * R).value;
      r.energy_plus_6R = local_energy_plus(plan, frame, 6.0 * R).value;
      r.data_6R = data_at(6.0 * R);
      const double bound = 2.0 * std::pow(3.0, d + 2) * r.energy_plus_6R;
      r.cross_inequality_ok = r.energy_two_sided_2R <= bound * (1.0 + 1e-12) + 1e-300;
      r.qualitative = displacement_check_qualitative(plan, frame, R, config.Lambda0);
      r.quantitative = displacement_check_quantitative(plan, frame, cost, R, config.eps_quant, config.M_const,
                                                       config.Lambda, r.energy_plus_6R,
                                                       std::isnan(r.data_6R) ? 0.0 : r.data_6R);
      r.gradient = gradient_boundedness_check(plan, frame, cost, R, config.lambda_const);
      Vector e = Vector::Zero(d);
      e[0] = 1.0;
      r.cone_found = cone_search(plan, n.x0, e, R * op_norm(n.S_inv), n.y0).has_value();
      rec.checks_ok = rec.checks_ok && r.cross_inequality_ok && r.qualitative.ok;
      rec.radii.push_back(std::move(r));
    }
  });

  for (const auto& rec : rep.points) {
    std::string reason;
    if (!rec.normalization.accepted) {
      reason = "normalization: " + rec.normalization.reason;
    } else if (!rec.checks_ok) {
      reason = "displacement or energy check failed";
    }
    if (!reason.empty()) rep.check_failures.push_back({rec.source_index, reason});
  }
  if (config.flag_failed_checks) {
    for (const auto& f : rep.check_failures) {
      const bool seen = std::any_of(rep.singular.begin(), rep.singular.end(),
                                    [&](const SingularFlag& s) { return s.index == f.index; });
      if (!seen) rep.singular.push_back(f);
    }
    std::sort(rep.singular.begin(), rep.singular.end(),
              [](const SingularFlag& a, const SingularFlag& b) { return a.index < b.index; });
  }
  return rep;
}

}  // namespace coulomb_ot
