#include "coulomb_ot/solver.hpp"

#include "coulomb_ot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace coulomb_ot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void sort_entries(std::vector<TransportEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const TransportEntry& a, const TransportEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
}

void check_measures(const std::shared_ptr<const DiscreteMeasure>& mu,
                    const std::shared_ptr<const DiscreteMeasure>& nu, const CostModel& c) {
  if (!mu || !nu) throw std::invalid_argument("solver needs both marginals");
  if (mu->dim() != c.dim || nu->dim() != c.dim) {
    throw std::invalid_argument("marginal dimension does not match the cost");
  }
}

double log_sum_exp(const double* v, int n) {
  double mx = -kInf;
  for (int k = 0; k < n; ++k) mx = std::max(mx, v[k]);
  if (!std::isfinite(mx)) return -kInf;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += std::exp(v[k] - mx);
  return mx + std::log(s);
}

}  // namespace

Vector Plan::row_sums() const {
  Vector r = Vector::Zero(source->size());
  for (const auto& e : entries) r[e.i] += e.mass;
  return r;
}

Vector Plan::column_sums() const {
  Vector r = Vector::Zero(target->size());
  for (const auto& e : entries) r[e.j] += e.mass;
  return r;
}

Matrix Plan::barycentric_targets() const {
  Matrix out = Matrix::Zero(target->dim(), source->size());
  Vector mass = Vector::Zero(source->size());
  for (const auto& e : entries) {
    out.col(e.i) += e.mass * target->point(e.j);
    mass[e.i] += e.mass;
  }
  for (int i = 0; i < source->size(); ++i) {
    if (mass[i] > 0.0) {
      out.col(i) /= mass[i];
    } else {
      out.col(i).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

std::vector<int> Plan::dominant_targets() const {
  std::vector<int> best(static_cast<std::size_t>(source->size()), -1);
  std::vector<double> mass(best.size(), 0.0);
  for (const auto& e : entries) {
    if (e.mass > mass[e.i]) {
      mass[e.i] = e.mass;
      best[e.i] = e.j;
    }
  }
  return best;
}

double Plan::recompute_cost(const CostModel& c) const {
  double total = 0.0;
  for (const auto& e : entries) total += e.mass * eval(c, source->point(e.i), target->point(e.j));
  return total;
}

std::string to_string(SolveMethod method) { return method == SolveMethod::kLp ? "lp" : "entropic"; }

std::pair<Plan, SolveReport> solve_lp(std::shared_ptr<const DiscreteMeasure> mu,
                                      std::shared_ptr<const DiscreteMeasure> nu, const CostModel& c,
                                      const LpOptions& options) {
  check_measures(mu, nu, c);
  if (mu->size() > options.max_size || nu->size() > options.max_size) {
    throw std::invalid_argument("instance exceeds the configured LP size limit");
  }
  const RowMatrix cost = cost_matrix(c, *mu, *nu);
  auto ns = solve_transport(cost, mu->weights(), nu->weights(), options.simplex);

  Plan plan;
  plan.source = mu;
  plan.target = nu;
  SolveReport report;
  report.method = SolveMethod::kLp;
  report.iterations = ns.iterations;
  report.source_potential = ns.source_potential;
  report.target_potential = ns.target_potential;

  const bool symmetric = options.symmetrize && (mu == nu || mu->same_as(*nu));
  if (symmetric) {
    std::map<std::pair<int, int>, double> merged;
    for (const auto& e : ns.flows) {
      merged[{e.i, e.j}] += 0.5 * e.mass;
      merged[{e.j, e.i}] += 0.5 * e.mass;
    }
    for (const auto& [key, mass] : merged) plan.entries.push_back({key.first, key.second, mass});
    const Vector avg = 0.5 * (ns.source_potential + ns.target_potential);
    report.source_potential = avg;
    report.target_potential = avg;
    report.symmetrized = true;
  } else {
    plan.entries = std::move(ns.flows);
  }
  sort_entries(plan.entries);
  for (const auto& e : plan.entries) plan.cost_value += e.mass * cost(e.i, e.j);

  report.primal_cost = plan.cost_value;
  report.dual_cost = mu->weights().dot(report.source_potential) + nu->weights().dot(report.target_potential);
  report.dual_gap = report.primal_cost - report.dual_cost;
  report.marginal_error = (plan.row_sums() - mu->weights()).cwiseAbs().sum() +
                          (plan.column_sums() - nu->weights()).cwiseAbs().sum();
  return {std::move(plan), std::move(report)};
}

std::pair<Plan, SolveReport> solve_entropic(std::shared_ptr<const DiscreteMeasure> mu,
                                            std::shared_ptr<const DiscreteMeasure> nu, const CostModel& c,
                                            double eta, double tol, const EntropicOptions& options) {
  check_measures(mu, nu, c);
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const int m = mu->size(), n = nu->size();
  const RowMatrix cost = cost_matrix(c, *mu, *nu);
  const Vector log_mu = mu->weights().array().log();
  const Vector log_nu = nu->weights().array().log();

  // Plan gamma_ij = exp(eta (f_i + g_j - c_ij)); infinite c_ij gives zero.
  Vector f = Vector::Zero(m), g = Vector::Zero(n);
  std::vector<double> buf(static_cast<std::size_t>(std::max(m, n)));
  auto update_g = [&] {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) buf[i] = eta * (f[i] - cost(i, j));
      const double lse = log_sum_exp(buf.data(), m);
      g[j] = std::isfinite(lse) && std::isfinite(log_nu[j]) ? (log_nu[j] - lse) / eta : -kInf;
    }
  };
  auto update_f = [&] {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) buf[j] = eta * (g[j] - cost(i, j));
      const double lse = log_sum_exp(buf.data(), n);
      f[i] = std::isfinite(lse) && std::isfinite(log_mu[i]) ? (log_mu[i] - lse) / eta : -kInf;
    }
  };

  long it = 0;
  double err = kInf;
  while (it < options.max_iterations) {
    update_g();
    update_f();
    ++it;
    // f was updated last, so rows are exact; measure the column error.
    if (it % 10 == 0 || it == 1) {
      err = 0.0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i) buf[i] = eta * (f[i] + g[j] - cost(i, j));
        const double col = std::isfinite(g[j]) ? std::exp(log_sum_exp(buf.data(), m)) : 0.0;
        err += std::abs(col - nu->weight(j));
      }
      if (!std::isfinite(err)) break;
      if (err < tol) break;
    }
  }
  if (!(err < tol)) {
    throw ConvergenceError("entropic scaling did not reach the marginal tolerance", err);
  }

  Plan plan;
  plan.source = mu;
  plan.target = nu;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(cost(i, j))) continue;
      const double mass = std::exp(eta * (f[i] + g[j] - cost(i, j)));
      if (mass > options.mass_floor) {
        plan.entries.push_back({i, j, mass});
        plan.cost_value += mass * cost(i, j);
      }
    }
  }
  SolveReport report;
  report.method = SolveMethod::kEntropic;
  report.eta = eta;
  report.iterations = it;
  report.marginal_error = err;
  report.primal_cost = plan.cost_value;
  report.source_potential = f.unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; });
  report.target_potential = g.unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; });
  report.dual_cost = mu->weights().dot(report.source_potential) + nu->weights().dot(report.target_potential);
  report.dual_gap = report.primal_cost - report.dual_cost;
  return {std::move(plan), std::move(report)};
}

MonotonicityReport verify_c_monotonicity(const Plan& plan, const CostModel& c, long samples,
                                         std::uint64_t seed) {
  MonotonicityReport report;
  const auto k = static_cast<long>(plan.entries.size());
  const long total_pairs = k * (k - 1) / 2;
  const auto& src = *plan.source;
  const auto& tgt = *plan.target;
  auto check = [&](long a, long b) {
    const auto& e = plan.entries[a];
    const auto& f = plan.entries[b];
    const double lhs = eval(c, src.point(e.i), tgt.point(e.j)) + eval(c, src.point(f.i), tgt.point(f.j));
    const double rhs = eval(c, src.point(e.i), tgt.point(f.j)) + eval(c, src.point(f.i), tgt.point(e.j));
    ++report.pairs_checked;
    double excess;
    if (std::isinf(rhs)) {
      excess = -kInf;
    } else if (std::isinf(lhs)) {
      excess = kInf;
    } else {
      excess = lhs - rhs;
    }
    if (excess > 1e-9) ++report.violations;
    if (excess > report.worst_excess || report.witness.first < 0) {
      if (excess > report.worst_excess) report.worst_excess = excess;
      if (excess > 1e-9 || report.witness.first < 0) report.witness = {static_cast<int>(a), static_cast<int>(b)};
    }
  };
  if (samples <= 0 || samples >= total_pairs) {
    for (long a = 0; a < k; ++a) {
      for (long b = a + 1; b < k; ++b) check(a, b);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> pick(0, k - 1);
    for (long s = 0; s < samples; ++s) {
      const long a = pick(rng);
      long b = pick(rng);
      while (b == a) b = pick(rng);
      check(a, b);
    }
  }
  if (report.violations == 0) report.witness = {-1, -1};
  return report;
}

}  // namespace coulomb_ot
